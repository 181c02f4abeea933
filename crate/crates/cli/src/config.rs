use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use marginalis::compat::SolverOptions;
use marginalis::uniqueness::UdaOptions;

#[derive(Debug, Parser)]
#[command(name = "marginalis", version, about = "Marginals of multi-party quantum states")]
pub struct Cli {
    /// Master seed for every random draw.
    #[arg(long, global = true, env = "MARGINALIS_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for independent restarts and trials.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    /// Progress and timing on stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a Haar-random pure state.
    RandState {
        /// Local dimensions, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Are these marginals parts of one global state?
    Check {
        #[arg(long, num_args = 1.., required = true)]
        marginals: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = Mode::Mixed)]
        mode: Mode,
        #[command(flatten)]
        tol: Tolerances,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Skip norm, trace and positivity checks on input.
        #[arg(long)]
        no_validate: bool,
    },
    /// Is a pure state the only state with its scenario marginals?
    Uda {
        #[arg(long)]
        state: PathBuf,
        #[arg(long, conflicts_with = "scenario_style")]
        scenario: Option<PathBuf>,
        #[arg(long, value_enum)]
        scenario_style: Option<ScenarioStyle>,
        /// Subset size for `--scenario-style all-m`.
        #[arg(long)]
        m: Option<usize>,
        #[command(flatten)]
        tol: Tolerances,
        #[arg(long, default_value_t = 1e-6)]
        uda_tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        no_validate: bool,
    },
    /// Parameter and constraint counts per (N, m).
    Counts {
        /// Party counts: `4`, `4..8` (inclusive) or `4,6,8`.
        #[arg(long)]
        n: String,
        /// Subset sizes in the same syntax; all `1..=N` if omitted.
        #[arg(long)]
        m: Option<String>,
        #[arg(long, default_value_t = 2)]
        d: u32,
        #[arg(long)]
        json: bool,
    },
    /// Write the purity polynomial system for the unknown Bloch coefficients.
    ExportPoly {
        #[arg(long)]
        known: PathBuf,
        /// Coefficient names or letter groups (`Q`, `R`, `alpha`, `c`, ...).
        #[arg(long, num_args = 1.., required = true)]
        unknown: Vec<String>,
        /// Coefficients missing from the known file are unknown rather than 0.
        #[arg(long)]
        no_fill: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay the worked examples and report PASS/FAIL per case.
    Reproduce {
        #[arg(long, value_enum, required_unless_present = "all", conflicts_with = "all")]
        case: Option<Case>,
        #[arg(long)]
        all: bool,
        #[arg(long, value_enum, default_value_t = Tier::Quick)]
        tier: Tier,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Mixed,
    Pure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScenarioStyle {
    HalfPlusOne,
    Odd,
    AllM,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Tier {
    /// Full N = 4 sizes plus one N = 6 state.
    Quick,
    /// Adds the full N = 6 runs.
    Nightly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum Case {
    DiagCounterexample,
    BellTriple,
    SigmaTauEta,
    GhzFamily,
    BlochPolys,
    UpperBound,
    LowerBound,
    Diosi,
    CountsTable,
    EnvRank,
}

#[derive(Debug, Clone, Args)]
pub struct Tolerances {
    #[arg(long, default_value_t = 1e-7)]
    pub feas_tol: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub infeas_tol: f64,
    #[arg(long, default_value_t = 20_000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 16)]
    pub restarts: usize,
}

/// Everything a command needs besides its inputs.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    pub jobs: usize,
    pub verbose: bool,
    pub solver: SolverOptions,
    pub uda_tol: f64,
}

impl RunConfig {
    pub fn new(cli: &Cli, tol: Option<&Tolerances>, uda_tol: Option<f64>) -> anyhow::Result<Self> {
        let mut solver = SolverOptions {
            seed: cli.seed,
            jobs: cli.jobs.max(1),
            ..SolverOptions::default()
        };
        if let Some(t) = tol {
            solver.feas_tol = t.feas_tol;
            solver.infeas_tol = t.infeas_tol;
            solver.max_iter = t.max_iter;
            solver.restarts = t.restarts;
        }
        solver.validate()?;
        let uda_tol = uda_tol.unwrap_or(1e-6);
        if !(uda_tol > 0.0 && uda_tol.is_finite()) {
            anyhow::bail!("uda-tol must be positive");
        }
        Ok(Self {
            seed: cli.seed,
            jobs: solver.jobs,
            verbose: cli.verbose,
            solver,
            uda_tol,
        })
    }

    pub fn uda_options(&self) -> UdaOptions {
        UdaOptions {
            solver: self.solver.clone(),
            uda_tol: self.uda_tol,
            ..UdaOptions::default()
        }
    }
}

/// `4`, `4..8` (inclusive) or `4,6,8`.
pub fn parse_range(s: &str) -> anyhow::Result<Vec<u32>> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once("..") {
        let b = b.strip_prefix('=').unwrap_or(b);
        let (a, b): (u32, u32) = (a.trim().parse()?, b.trim().parse()?);
        if a > b {
            anyhow::bail!("empty range {s}");
        }
        return Ok((a..=b).collect());
    }
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<u32>()
                .map_err(|e| anyhow::anyhow!("bad number {x:?}: {e}"))
        })
        .collect()
}
