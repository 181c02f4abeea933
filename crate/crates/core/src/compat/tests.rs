use super::*;
use crate::marginal::{all_m_scenario, extract, half_plus_one_scenario, MarginalScenario};
use crate::tensor::random::haar_random_pure;
use crate::tensor::PartySignature;

fn q(n: usize) -> PartySignature {
    PartySignature::qubits(n).unwrap()
}

fn marg(sys: &PartySignature, subset: Vec<usize>, rho: DensityMatrix) -> Marginal {
    Marginal::new(sys.clone(), subset, rho).unwrap()
}

pub(crate) use crate::fixtures::{bell_triple, sigma_tau_eta};

#[test]
fn random_marginals_are_feasible() {
    for (n, sc_fn) in [(3usize, 0), (4, 1), (4, 0)] {
        let sc = if sc_fn == 0 {
            all_m_scenario(q(n), 2).unwrap()
        } else {
            half_plus_one_scenario(q(n)).unwrap()
        };
        let psi = haar_random_pure(&q(n), 40 + n as u64);
        let ms = extract(&psi, &sc).unwrap();
        let rep = check_mixed(&ms, &SolverOptions::default()).unwrap();
        assert_eq!(
            rep.verdict,
            Verdict::Feasible,
            "n={n} residual={} it={}",
            rep.residual,
            rep.iterations
        );
        assert!(rep.residual < 1e-7);
        let w = rep.witness.unwrap();
        DensityMatrix::new(q(n), w.matrix().clone()).unwrap();
        let back = extract(&w, &sc).unwrap();
        let err: f64 = back
            .iter()
            .zip(&ms)
            .map(|(a, b)| (a.state().matrix() - b.state().matrix()).norm_squared())
            .sum::<f64>()
            .sqrt();
        assert!(err < 1e-6);
    }
}

#[test]
fn single_marginal_is_feasible() {
    let ms = vec![marg(&q(2), vec![0], DensityMatrix::maximally_mixed(q(1)))];
    let rep = check_mixed(&ms, &SolverOptions::default()).unwrap();
    assert_eq!(rep.verdict, Verdict::Feasible);
}

#[test]
fn bell_triple_is_infeasible() {
    let rep = check_mixed(&bell_triple(), &SolverOptions::default()).unwrap();
    assert_eq!(rep.verdict, Verdict::Infeasible);
    assert!(rep.residual > 1e-2);
    let cert = rep.certificate.unwrap();
    assert!(cert.valid && cert.value < 0.0);
    let spec = crate::tensor::eigh(&cert.functional);
    assert!(*spec.eigenvalues.last().unwrap() >= 0.0);
}

#[test]
fn affine_half_step_is_exact() {
    let sc = all_m_scenario(q(3), 2).unwrap();
    let ms = extract(&haar_random_pure(&q(3), 1), &sc).unwrap();
    let cs = ConstraintSet::new(&ms).unwrap();
    let x = psd_part(&crate::tensor::random::random_density(&q(3), 8, 3).into_matrix());
    let y = cs.project(&x, &cs.coeffs(&x));
    assert!(cs.residual(&cs.coeffs(&y)) < 1e-10);
}

#[test]
fn pure_check_recovers_generating_state() {
    let psi = haar_random_pure(&q(4), 12);
    let ms = extract(&psi, &half_plus_one_scenario(q(4)).unwrap()).unwrap();
    let rep = check_pure(&ms, &SolverOptions::default()).unwrap();
    assert_eq!(rep.verdict, Verdict::Feasible, "residual {}", rep.residual);
    let w = rep.pure_witness.unwrap();
    assert!(w.overlap(&psi) > 1.0 - 1e-6);
}

#[test]
fn sigma_tau_eta_has_no_pure_state() {
    let ms = sigma_tau_eta();
    let rep = check_pure(&ms, &SolverOptions::default()).unwrap();
    assert_eq!(rep.verdict, Verdict::Infeasible);
    assert!(rep.heuristic && rep.residual > 1e-2);

    let rep = check_pure(&ms[1..], &SolverOptions::default()).unwrap();
    assert_eq!(rep.verdict, Verdict::Feasible);
    let w = rep.pure_witness.unwrap();
    // weight on |000⟩ and |111⟩, equal moduli
    let a = w.amps();
    assert!((a[0].norm_sqr() - 0.5).abs() < 1e-6 && (a[7].norm_sqr() - 0.5).abs() < 1e-6);

    // no mixed state has all three either: τ and η confine the support to
    // |000⟩, |111⟩, where ⟨Z⊗X⟩ on AB vanishes
    let rep = check_mixed(&ms, &SolverOptions::default()).unwrap();
    assert_eq!(rep.verdict, Verdict::Infeasible);
}

#[test]
fn mixed_check_on_bigger_scenario() {
    let sc = MarginalScenario::new(q(3), vec![vec![0, 1], vec![1, 2]]).unwrap();
    let ms = extract(&haar_random_pure(&q(3), 77), &sc).unwrap();
    let rep = check_mixed(&ms, &SolverOptions::default()).unwrap();
    assert_eq!(rep.verdict, Verdict::Feasible);
}
