use std::collections::BTreeSet;
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context};
use serde_json::{json, Value};

use marginalis::bloch::BlochTransform;
use marginalis::compat::poly::resolve_names;
use marginalis::compat::{check_mixed, check_pure, export_polysystem, write_polysystem, Verdict};
use marginalis::io;
use marginalis::marginal::{
    all_m_scenario, half_plus_one_scenario, odd_scenario, precheck, Marginal, MarginalScenario,
};
use marginalis::tensor::haar_random_pure;
use marginalis::uniqueness::{count_params, format_table, uda_test, UdaVerdict};
use marginalis::PartySignature;

use crate::config::{parse_range, Cli, Command, Mode, RunConfig, ScenarioStyle};
use crate::reproduce;

pub const EXIT_OK: u8 = 0;
pub const EXIT_NEGATIVE: u8 = 1;
pub const EXIT_INCONCLUSIVE: u8 = 2;

pub fn run(cli: Cli) -> anyhow::Result<u8> {
    match &cli.command {
        Command::RandState { dims, out } => {
            let cfg = RunConfig::new(&cli, None, None)?;
            rand_state(dims, out.as_deref(), &cfg)
        }
        Command::Check {
            marginals,
            mode,
            tol,
            out,
            no_validate,
        } => {
            let cfg = RunConfig::new(&cli, Some(tol), None)?;
            check(marginals, *mode, out.as_deref(), !no_validate, &cfg)
        }
        Command::Uda {
            state,
            scenario,
            scenario_style,
            m,
            tol,
            uda_tol,
            out,
            no_validate,
        } => {
            let cfg = RunConfig::new(&cli, Some(tol), Some(*uda_tol))?;
            let text = io::read_text(state).with_context(|| format!("reading {}", state.display()))?;
            let psi = io::pure_state_from_json(&text, !no_validate)
                .with_context(|| format!("parsing {}", state.display()))?;
            let sc = match (scenario, scenario_style) {
                (Some(p), _) => {
                    let t = io::read_text(p).with_context(|| format!("reading {}", p.display()))?;
                    io::scenario_from_json(&t).with_context(|| format!("parsing {}", p.display()))?
                }
                (None, Some(style)) => styled_scenario(psi.sig().clone(), *style, *m)?,
                (None, None) => bail!("one of --scenario or --scenario-style is required"),
            };
            uda(&psi, &sc, out.as_deref(), &cfg)
        }
        Command::Counts { n, m, d, json } => counts(n, m.as_deref(), *d, *json),
        Command::ExportPoly {
            known,
            unknown,
            no_fill,
            out,
        } => export_poly(known, unknown, !no_fill, out.as_deref()),
        Command::Reproduce { case, all, tier } => {
            let cfg = RunConfig::new(&cli, None, None)?;
            let cases = if *all {
                reproduce::ALL.to_vec()
            } else {
                vec![case.expect("clap requires a case")]
            };
            Ok(reproduce::run(&cases, *tier, &cfg))
        }
    }
}

fn emit(v: &Value, out: Option<&Path>) -> anyhow::Result<()> {
    match out {
        Some(p) => io::write_json(p, v).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{}", io::to_text(v)),
    }
    Ok(())
}

fn rand_state(dims: &[usize], out: Option<&Path>, cfg: &RunConfig) -> anyhow::Result<u8> {
    if let Some(d) = dims.iter().find(|&&d| d < 2) {
        bail!("local dimensions must be at least 2, got {d}");
    }
    let sig = PartySignature::new(dims.to_vec())?;
    let psi = haar_random_pure(&sig, cfg.seed);
    emit(&io::pure_state_to_json(&psi), out)?;
    Ok(EXIT_OK)
}

fn read_marginals(paths: &[std::path::PathBuf], validate: bool) -> anyhow::Result<Vec<Marginal>> {
    paths
        .iter()
        .map(|p| {
            let t = io::read_text(p).with_context(|| format!("reading {}", p.display()))?;
            io::marginal_from_json(&t, validate).with_context(|| format!("parsing {}", p.display()))
        })
        .collect()
}

fn check(
    paths: &[std::path::PathBuf],
    mode: Mode,
    out: Option<&Path>,
    validate: bool,
    cfg: &RunConfig,
) -> anyhow::Result<u8> {
    let ms = read_marginals(paths, validate)?;
    let pure = mode == Mode::Pure;
    let mode_name = if pure { "pure" } else { "mixed" };
    let t0 = Instant::now();
    let pre = precheck(&ms, pure)?;
    if !pre.overlap_ok || (pure && !pre.schmidt_ok) {
        // a failed necessary condition settles it without the solver
        let v = json!({
            "format": io::FORMAT_VERSION,
            "mode": mode_name,
            "verdict": Verdict::Infeasible,
            "decided_by": "precheck",
            "heuristic": false,
            "precheck": pre,
        });
        emit(&v, out)?;
        return Ok(EXIT_NEGATIVE);
    }
    let rep = if pure {
        check_pure(&ms, &cfg.solver)?
    } else {
        check_mixed(&ms, &cfg.solver)?
    };
    if cfg.verbose {
        eprintln!(
            "check {mode_name}: {:?} residual {:.3e} after {} iterations in {:.2?}",
            rep.verdict,
            rep.residual,
            rep.iterations,
            t0.elapsed()
        );
    }
    emit(&io::compat_report_to_json(&rep, Some(&pre), mode_name), out)?;
    Ok(match rep.verdict {
        Verdict::Feasible => EXIT_OK,
        Verdict::Infeasible => EXIT_NEGATIVE,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    })
}

fn styled_scenario(sig: PartySignature, style: ScenarioStyle, m: Option<usize>) -> anyhow::Result<MarginalScenario> {
    Ok(match style {
        ScenarioStyle::HalfPlusOne => half_plus_one_scenario(sig)?,
        ScenarioStyle::Odd => odd_scenario(sig)?,
        ScenarioStyle::AllM => {
            let m = m.context("--scenario-style all-m needs --m")?;
            if m == 0 || m > sig.parties() {
                bail!("--m must be in 1..={}, got {m}", sig.parties());
            }
            all_m_scenario(sig, m)?
        }
    })
}

fn uda(psi: &marginalis::PureState, sc: &MarginalScenario, out: Option<&Path>, cfg: &RunConfig) -> anyhow::Result<u8> {
    let t0 = Instant::now();
    let rep = uda_test(psi, sc, &cfg.uda_options())?;
    if cfg.verbose {
        eprintln!(
            "uda: {:?} leakage {:.3e}, kernel {} in {:.2?}",
            rep.verdict,
            rep.leakage,
            rep.kernel_dim,
            t0.elapsed()
        );
    }
    emit(&io::uda_report_to_json(&rep), out)?;
    Ok(match rep.verdict {
        UdaVerdict::Unique => EXIT_OK,
        UdaVerdict::NotUnique => EXIT_NEGATIVE,
        UdaVerdict::Inconclusive => EXIT_INCONCLUSIVE,
    })
}

fn counts(n: &str, m: Option<&str>, d: u32, as_json: bool) -> anyhow::Result<u8> {
    let ns = parse_range(n)?;
    let ms = m.map(parse_range).transpose()?;
    let mut rows = Vec::new();
    for &n in &ns {
        let m_list: Vec<u32> = match &ms {
            Some(list) => {
                if let Some(&bad) = list.iter().find(|&&m| m == 0 || m > n) {
                    bail!("subset size m = {bad} must be in 1..={n}");
                }
                list.clone()
            }
            None => (1..=n).collect(),
        };
        for m in m_list {
            rows.push(count_params(n, m, d)?);
        }
    }
    if as_json {
        let v = json!({ "format": io::FORMAT_VERSION, "rows": rows.iter().map(|r| json!({
            "n": r.n, "m": r.m, "d": r.d,
            "p": r.p.to_string(), "c": r.c.to_string(), "margin": r.margin.to_string(),
        })).collect::<Vec<_>>() });
        print!("{}", io::to_text(&v));
    } else {
        print!("{}", format_table(&rows));
    }
    Ok(EXIT_OK)
}

fn export_poly(known: &Path, unknown: &[String], fill: bool, out: Option<&Path>) -> anyhow::Result<u8> {
    let text = io::read_text(known).with_context(|| format!("reading {}", known.display()))?;
    let (sig, mut entries) =
        io::bloch_entries_from_json(&text).with_context(|| format!("parsing {}", known.display()))?;
    let unknowns = resolve_names(&sig, unknown)?;
    entries.entry(vec![0; sig.parties()]).or_insert(1.0);
    if fill {
        let unknown_set: BTreeSet<&Vec<usize>> = unknowns.iter().collect();
        let bt = BlochTransform::new(&sig);
        for flat in 0..bt.len() {
            let k = bt.multi_index(flat);
            if !unknown_set.contains(&k) {
                entries.entry(k).or_insert(0.0);
            }
        }
    }
    let ps = export_polysystem(&sig, &entries, &unknowns)?;
    match out {
        Some(p) => write_polysystem(&ps, p).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{}", ps.to_text()),
    }
    Ok(EXIT_OK)
}
