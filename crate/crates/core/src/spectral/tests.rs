use super::*;

const J01_SQ: f64 = 5.783_185_962_946_783;
const J21_SQ: f64 = 26.374_616_427_163_392;
/// `-β²` for the orders `β` with `J_β(10) = 0`, descending `β`.
const BESSEL_ORDERS_AT_10: [f64; 3] = [
    -36.665_992_499_958_34,
    -10.120_730_074_105_554,
    -0.779_657_550_726_375_8,
];

fn cfg() -> SpectralConfig {
    SpectralConfig::default()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn standard_free_disc_is_bessel() {
    let prob = WeightedSLProblem::new(2.0, Potential::Zero, WeightKind::Standard);
    let s = solve_standard_spectrum(&prob, 3, &cfg()).unwrap();
    assert!(rel(s.pairs[0].value, J01_SQ) < 1e-6, "{}", s.pairs[0].value);
    assert!(s.pairs.iter().all(|p| p.value > 0.0));
}

#[test]
fn standard_free_ball_is_pi_squared() {
    let pi2 = std::f64::consts::PI.powi(2);
    let prob = WeightedSLProblem::new(3.0, Potential::Zero, WeightKind::Standard);
    let s = solve_standard_spectrum(&prob, 4, &cfg()).unwrap();
    for (k, p) in s.pairs.iter().enumerate() {
        let exact = pi2 * ((k + 1) as f64).powi(2);
        assert!(rel(p.value, exact) < 1e-6, "k={k} {}", p.value);
        assert_eq!(p.interior_nodes, k);
        assert!(p.error_bar < 1e-6 * exact);
    }
    // ψ_1 = sin(πr)/r normalized: ψ'(1) = -π·√2 in ∫r²ψ² = 1
    let slope = s.pairs[0].boundary_slope;
    assert!(rel(slope, -std::f64::consts::PI * 2f64.sqrt()) < 1e-4, "{slope}");
}

#[test]
fn constant_potential_shifts_standard_spectrum() {
    let pi2 = std::f64::consts::PI.powi(2);
    let prob = WeightedSLProblem::new(3.0, Potential::Constant(30.0), WeightKind::Standard);
    let s = solve_standard_spectrum(&prob, 2, &cfg()).unwrap();
    assert!(rel(s.pairs[0].value, pi2 - 30.0) < 1e-6);
    assert!(rel(s.pairs[1].value, 4.0 * pi2 - 30.0) < 1e-6);
    assert_eq!(s.negative_count(1e-7), 1);
}

#[test]
fn free_singular_spectrum_is_empty() {
    let prob = WeightedSLProblem::new(4.0, Potential::Zero, WeightKind::Singular);
    let s = solve_singular_spectrum(&prob, 5, &cfg()).unwrap();
    assert!(s.pairs.is_empty());
    assert!(s.exhausted_below >= 1.0 - 1e-6);
    assert_eq!(s.threshold, 1.0);
}

#[test]
fn singular_bessel_eigenvalue() {
    // ψ = r^{-1} J_2(j_{2,1} r) at M = 4: ν̂ = 1 − 4
    let prob = WeightedSLProblem::new(4.0, Potential::Constant(J21_SQ), WeightKind::Singular);
    let s = solve_singular_spectrum(&prob, 4, &cfg()).unwrap();
    assert_eq!(s.pairs.len(), 1);
    let p = &s.pairs[0];
    assert!(rel(p.value, -3.0) < 1e-7, "{}", p.value);
    assert_eq!(p.interior_nodes, 0);
    assert!((p.theta_analytic.unwrap() - 1.0).abs() < 1e-6);
    let fit = p.decay_exponent.unwrap();
    assert!((fit - 1.0).abs() < 0.02, "{fit}");
}

#[test]
fn singular_multiple_eigenvalues_with_nodes() {
    let prob = WeightedSLProblem::new(2.0, Potential::Constant(100.0), WeightKind::Singular);
    let s = solve_singular_spectrum(&prob, 10, &cfg()).unwrap();
    assert_eq!(s.pairs.len(), 3);
    for (k, (p, exact)) in s.pairs.iter().zip(BESSEL_ORDERS_AT_10).enumerate() {
        assert!(rel(p.value, exact) < 1e-6, "k={k} {} vs {exact}", p.value);
        assert_eq!(p.interior_nodes, k);
        assert_eq!(count_interior_nodes(p), k);
    }
    for i in 0..3 {
        for j in 0..3 {
            let ip = weighted_inner_product(&s.pairs[i], &s.pairs[j]).unwrap();
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((ip - want).abs() < 1e-8, "({i},{j}) {ip}");
            assert!(picone_residual(&s.pairs[i], &s.pairs[j], 2.0).unwrap() < 1e-8);
        }
    }
}

#[test]
fn truncated_request_reports_level() {
    let prob = WeightedSLProblem::new(2.0, Potential::Constant(100.0), WeightKind::Singular);
    let s = solve_singular_spectrum(&prob, 1, &cfg()).unwrap();
    assert_eq!(s.pairs.len(), 1);
    assert!((s.exhausted_below - s.pairs[0].value).abs() < 1e-12);
}

#[test]
fn oracle_matches_liouville() {
    let prob = WeightedSLProblem::new(2.0, Potential::Constant(100.0), WeightKind::Singular);
    let fast = solve_singular_spectrum(&prob, 10, &cfg()).unwrap();
    let slow = dense_oracle_spectrum(&prob, 2000, 1e-7).unwrap();
    assert_eq!(fast.pairs.len(), slow.pairs.len());
    for (a, b) in fast.pairs.iter().zip(&slow.pairs) {
        assert!(rel(a.value, b.value) < 1e-4, "{} vs {}", a.value, b.value);
        assert!(rel(a.value, b.value) < 3.0 * b.error_bar.max(1e-12) / b.value.abs() + 1e-9);
    }
}

#[test]
fn oracle_standard_bessel() {
    let prob = WeightedSLProblem::new(2.0, Potential::Zero, WeightKind::Standard);
    let s = dense_oracle_spectrum(&prob, 2000, 1e-6).unwrap();
    assert!(rel(s.pairs[0].value, J01_SQ) < 1e-5, "{}", s.pairs[0].value);
}

#[test]
fn oracle_guards() {
    let prob = WeightedSLProblem::new(2.0, Potential::Zero, WeightKind::Singular);
    assert!(matches!(
        dense_oracle_spectrum(&prob, ORACLE_MAX_N + 4, 1e-6),
        Err(SpectralError::SizeGuard { .. })
    ));
    assert!(dense_oracle_spectrum(&prob, 1002, 1e-6).is_err());
    assert!(dense_oracle_spectrum(&prob, 1000, 0.0).is_err());
}

#[test]
fn rayleigh_reproduces_eigenvalues() {
    let prob = WeightedSLProblem::new(4.0, Potential::Constant(J21_SQ), WeightKind::Singular);
    let s = solve_singular_spectrum(&prob, 1, &cfg()).unwrap();
    let q = rayleigh_quotient(&s.pairs[0].as_sampled(), &prob).unwrap();
    assert!(rel(q, s.pairs[0].value) < 1e-6, "{q}");

    let std = WeightedSLProblem::new(3.0, Potential::Constant(5.0), WeightKind::Standard);
    let s = solve_standard_spectrum(&std, 2, &cfg()).unwrap();
    for p in &s.pairs {
        let q = rayleigh_quotient(&p.as_sampled(), &std).unwrap();
        assert!(rel(q, p.value) < 1e-6, "{q} vs {}", p.value);
    }
}

#[test]
fn eigenfunctions_satisfy_inequalities() {
    let prob = WeightedSLProblem::new(4.0, Potential::Constant(J21_SQ), WeightKind::Singular);
    let s = solve_singular_spectrum(&prob, 1, &cfg()).unwrap();
    let rep = inequality_report(&s.pairs[0].as_sampled(), 4.0, 1e-9).unwrap();
    assert!(rep.all_ok(), "{rep:?}");
}

#[test]
fn pairs_from_different_solves_are_rejected() {
    let prob = WeightedSLProblem::new(3.0, Potential::Zero, WeightKind::Standard);
    let a = solve_standard_spectrum(&prob, 1, &cfg()).unwrap();
    let b = solve_standard_spectrum(&prob, 1, &cfg()).unwrap();
    assert!(matches!(
        weighted_inner_product(&a.pairs[0], &b.pairs[0]),
        Err(SpectralError::DifferentProblems)
    ));
}

#[test]
fn kind_mismatch_is_rejected() {
    let prob = WeightedSLProblem::new(3.0, Potential::Zero, WeightKind::Standard);
    assert!(solve_singular_spectrum(&prob, 1, &cfg()).is_err());
    let bad = WeightedSLProblem::new(1.5, Potential::Zero, WeightKind::Singular);
    assert!(solve_singular_spectrum(&bad, 1, &cfg()).is_err());
}

#[test]
fn csv_and_summary() {
    let prob = WeightedSLProblem::new(3.0, Potential::Zero, WeightKind::Standard);
    let s = solve_standard_spectrum(&prob, 2, &cfg()).unwrap();
    let csv = s.eigenfunctions_csv();
    assert!(csv.starts_with("r,psi_1,psi_2\n"));
    let summary = s.summary();
    assert_eq!(summary.eigenvalues.len(), 2);
    assert_eq!(summary.eigenvalues[1].nodes, 1);
}
