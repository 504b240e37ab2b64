use std::f64::consts::PI;

use mpsl_core::nodal::{classify, FunctionTrace, NODAL_TOL};
use mpsl_core::problem::{BoundarySide, HypothesisLevel, ProblemSpec, Side};
use mpsl_core::reference::{reference_eigenvalue, robin_count, ReferenceKind};
use mpsl_core::roots::bisect;
use mpsl_core::sampling::seeded_specs;
use mpsl_core::spectrum::{continuation_window, eigen_continuation, eigen_residuals, eigen_scan};
use mpsl_core::{predict_nodal_class, Family, Verdict};
use proptest::prelude::*;

fn half_spec() -> ProblemSpec<f64> {
    ProblemSpec::new(BoundarySide::dirichlet(Side::Minus), BoundarySide::dirichlet(Side::Plus).with_point(0.5, 0.0, 0.0))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

#[test]
fn separated_closed_forms() {
    for k in 0..=20i64 {
        let kf = k as f64;
        let d = reference_eigenvalue::<f64>(&ReferenceKind::Dirichlet, k).unwrap();
        let n = reference_eigenvalue::<f64>(&ReferenceKind::Neumann, k).unwrap();
        let m = reference_eigenvalue::<f64>(&ReferenceKind::Mixed, k).unwrap();
        assert!(rel(d, ((kf + 1.0) * PI / 2.0).powi(2)) <= 1e-10);
        assert!((n - (kf * PI / 2.0).powi(2)).abs() <= 1e-10 * n.max(1.0));
        assert!(rel(m, ((2.0 * kf + 1.0) * PI / 4.0).powi(2)) <= 1e-10);
        let n1 = reference_eigenvalue::<f64>(&ReferenceKind::Neumann, k + 1).unwrap();
        assert!(rel(d, n1) <= 1e-10);
        if k >= 1 {
            let dm = reference_eigenvalue::<f64>(&ReferenceKind::Dirichlet, k - 1).unwrap();
            assert!(rel(dm, n) <= 1e-10);
        }
    }
}

#[test]
fn scan_matches_dirichlet_problem() {
    let spec = ReferenceKind::<f64>::Dirichlet.as_problem();
    let w = eigen_scan(&spec, 400.0);
    let expected: Vec<f64> = (0..).map(|k| ((k as f64 + 1.0) * PI / 2.0).powi(2)).take_while(|&l| l <= 400.0).collect();
    assert_eq!(w.eigenpairs.len(), expected.len());
    for (e, l) in w.eigenpairs.iter().zip(&expected) {
        assert!(rel(e.lambda, *l) <= 1e-10, "{} vs {l}", e.lambda);
    }
}

#[test]
fn half_value_example_two_routes() {
    let spec = half_spec();
    // sin(2ω) = ½ sin ω on (0, π/2) by plain bisection.
    let g = |w: f64| (2.0 * w).sin() - 0.5 * w.sin();
    let (mut lo, mut hi) = (0.5, 1.5);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(lo) * g(mid) <= 0.0 { hi = mid } else { lo = mid }
    }
    let lambda0 = (0.5 * (lo + hi)).powi(2);
    let scan = eigen_scan(&spec, 200.0);
    assert!(scan.eigenpairs.len() >= 8);
    for k in 0..8 {
        let c = eigen_continuation(&spec, k as i64).unwrap();
        assert!(rel(c.lambda, scan.eigenpairs[k].lambda) <= 1e-8, "k = {k}");
    }
    assert!(rel(scan.eigenpairs[0].lambda, lambda0) <= 1e-9);
    assert!((scan.eigenpairs[0].lambda - 1.737).abs() < 1e-3);
    assert!(rel(scan.eigenpairs[1].lambda, PI * PI) <= 1e-9);
    let r = bisect(|l: f64| (2.0 * l.sqrt()).sin() - 0.5 * l.sqrt().sin(), 1.0, 2.4, 1e-14);
    assert!(rel(r, lambda0) <= 1e-9);
}

#[test]
fn random_quadratic_spectra() {
    for (i, spec) in seeded_specs::<f64>(3, 50, HypothesisLevel::Quadratic).iter().enumerate() {
        let w = eigen_scan(spec, 100.0);
        let ls: Vec<f64> = w.eigenpairs.iter().map(|e| e.lambda).collect();
        assert!(ls.windows(2).all(|p| p[0] < p[1]), "spec {i}: not increasing {ls:?}");
        assert!(w.eigenpairs.iter().all(|e| e.simple), "spec {i}: non-simple root");
        if spec.strict_alpha_positive() {
            assert!(ls[0] > 0.0, "spec {i}");
        }
        // Every scanned root is some continuation eigenvalue and vice versa.
        let robin = robin_count(spec, 100.0) as i64;
        let cont: Vec<f64> = (0..robin + 3)
            .map(|k| eigen_continuation(spec, k).unwrap().lambda)
            .filter(|&l| l <= 100.0)
            .collect();
        assert_eq!(ls.len(), cont.len(), "spec {i}: {ls:?} vs {cont:?}");
        for (a, b) in ls.iter().zip(&cont) {
            assert!(rel(*a, *b) <= 1e-8, "spec {i}: {a} vs {b}");
        }
        for e in &w.eigenpairs {
            let dev = e.psi.energy(-1.0);
            for j in 0..=40 {
                let x = -1.0 + j as f64 / 20.0;
                assert!((e.psi.energy(x) - dev).abs() <= 1e-9 * dev, "spec {i}");
            }
            let (r0, r1) = eigen_residuals(spec, &e.psi);
            assert!(r0.abs() + r1.abs() <= 1e-8 * (1.0 + e.lambda), "spec {i}");
        }
    }
}

#[test]
fn random_linear_predictions_hold() {
    let mut determinate = 0;
    for (i, spec) in seeded_specs::<f64>(11, 30, HypothesisLevel::Linear).iter().enumerate() {
        let pairs = continuation_window(spec, 120.0).unwrap();
        for e in &pairs {
            let p = predict_nodal_class(spec, e.k);
            let Some((index, lo, hi)) = p.verdict.parts() else { continue };
            determinate += 1;
            let trace = match p.verdict {
                Verdict::R { reflected: true, .. } => FunctionTrace::Closed(e.psi).reflected(),
                _ => FunctionTrace::Closed(e.psi),
            };
            let fam = p.verdict.family().unwrap();
            let got = classify(&trace, NODAL_TOL).member_of(fam);
            assert!(got.is_some_and(|c| c.k == index), "spec {i}, k = {}: {:?} vs {got:?} ({:?})", e.k, p.verdict, p.theorem);
            let slack = 1e-10 * e.lambda.max(1.0);
            assert!(lo - slack <= e.lambda && e.lambda <= hi + slack, "spec {i}, k = {}: {lo} {} {hi}", e.k, e.lambda);
            if fam == Family::T {
                assert_eq!(index, e.k + 1);
            }
        }
    }
    assert!(determinate > 100, "{determinate}");
}

#[test]
fn single_precision_instantiation() {
    let spec = ProblemSpec::<f32>::new(BoundarySide::dirichlet(Side::Minus), BoundarySide::dirichlet(Side::Plus).with_point(0.5, 0.0, 0.0));
    let e = eigen_continuation(&spec, 1).unwrap();
    assert!((e.lambda - std::f32::consts::PI.powi(2)).abs() < 1e-3);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn reflection_preserves_spectrum(seed in 0u64..1000) {
        let spec = &seeded_specs::<f64>(seed, 1, HypothesisLevel::Quadratic)[0];
        let a = eigen_scan(spec, 60.0);
        let b = eigen_scan(&spec.reflected(), 60.0);
        prop_assert_eq!(a.eigenpairs.len(), b.eigenpairs.len());
        for (p, q) in a.eigenpairs.iter().zip(&b.eigenpairs) {
            prop_assert!(rel(p.lambda, q.lambda) <= 1e-9);
        }
    }

    #[test]
    fn continuation_index_matches_scan(seed in 0u64..1000) {
        let spec = &seeded_specs::<f64>(seed, 1, HypothesisLevel::Quadratic)[0];
        let w = eigen_scan(spec, 60.0);
        for (k, e) in w.eigenpairs.iter().enumerate() {
            let c = eigen_continuation(spec, k as i64).unwrap();
            prop_assert!(rel(c.lambda, e.lambda) <= 1e-8);
        }
    }
}
