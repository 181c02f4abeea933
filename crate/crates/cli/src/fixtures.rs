//! The JSON fixtures shipped under `fixtures/`, rebuilt from the library
//! constructors. `cargo run -p marginalis-cli --example gen_fixtures`
//! rewrites them; a test checks the shipped copies match.

use std::path::Path;

use serde_json::{json, Value};

use marginalis::fixtures::{bell_triple, sigma_tau_eta};
use marginalis::io;
use marginalis::marginal::{all_m_scenario, extract, half_plus_one_scenario, MarginalScenario};
use marginalis::tensor::haar_random_pure;
use marginalis::{PartySignature, PureState};

fn qubits(n: usize) -> PartySignature {
    PartySignature::qubits(n).expect("small qubit system")
}

fn subset_tag(s: &[usize]) -> String {
    s.iter().map(|x| x.to_string()).collect()
}

/// File name and contents for every shipped fixture.
pub fn fixture_files() -> Vec<(String, Value)> {
    let mut out = Vec::new();
    for (prefix, ms) in [("bell", bell_triple()), ("ste", sigma_tau_eta())] {
        for m in ms {
            out.push((
                format!("{prefix}_{}.json", subset_tag(m.subset())),
                io::marginal_to_json(&m),
            ));
        }
    }
    let rand3 = haar_random_pure(&qubits(3), 7);
    let sc3 = all_m_scenario(qubits(3), 2).expect("scenario");
    for m in extract(&rand3, &sc3).expect("marginals") {
        out.push((
            format!("rand3_{}.json", subset_tag(m.subset())),
            io::marginal_to_json(&m),
        ));
    }
    out.push((
        "psi4.json".into(),
        io::pure_state_to_json(&haar_random_pure(&qubits(4), 7)),
    ));
    out.push((
        "ghz4.json".into(),
        io::pure_state_to_json(&PureState::ghz(4, 2, 0.0).expect("ghz")),
    ));
    out.push(("bell.json".into(), io::pure_state_to_json(&PureState::bell())));
    let scenarios: [(&str, MarginalScenario); 3] = [
        (
            "sc_half_plus_one_4.json",
            half_plus_one_scenario(qubits(4)).expect("scenario"),
        ),
        ("sc_all3_4.json", all_m_scenario(qubits(4), 3).expect("scenario")),
        ("sc_all1_2.json", all_m_scenario(qubits(2), 1).expect("scenario")),
    ];
    for (name, sc) in scenarios {
        out.push((name.into(), io::scenario_to_json(&sc)));
    }
    // identity only: with fill, every correlation outside the unknowns is 0
    out.push((
        "zero_corr_3q.json".into(),
        json!({ "format": io::FORMAT_VERSION, "dims": [2, 2, 2], "coeff": { "0,0,0": 1.0 } }),
    ));
    out
}

pub fn write_all(dir: &Path) -> marginalis::Result<()> {
    std::fs::create_dir_all(dir)?;
    for (name, v) in fixture_files() {
        io::write_json(&dir.join(name), &v)?;
    }
    Ok(())
}
