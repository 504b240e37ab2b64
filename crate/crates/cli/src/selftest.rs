//! Built-in end-to-end checks with deterministic artifacts.

use std::f64::consts::PI;

use mpsl_core::bifurcation::{branch_from_zero, nodal_solutions_at_one, BranchOptions};
use mpsl_core::conditions::predict_nodal_class;
use mpsl_core::expr::parse_expr;
use mpsl_core::nodal::{classify, Family, FunctionTrace, Sign, NODAL_TOL};
use mpsl_core::nonlinearity::{ForcingTerm, NonlinearitySpec};
use mpsl_core::problem::{BoundarySide, HypothesisLevel, ProblemSpec, Side};
use mpsl_core::reference::{reference_eigenvalue, robin_count, ReferenceKind};
use mpsl_core::sampling::seeded_specs;
use mpsl_core::shooting::{solve_multistart, BvpSystem, SolveOptions};
use mpsl_core::spectrum::{continuation_window, eigen_continuation, eigen_scan};
use mpsl_core::Verdict;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::commands::{SPECTRUM_HEADER, BRANCH_HEADER};
use crate::config::RunConfig;
use crate::output::{jnum, num, OutDir};
use crate::svg::{self, Curve};
use crate::CliError;

const RANDOM_SPECS: usize = 10;

pub fn half_value_spec() -> ProblemSpec<f64> {
    ProblemSpec::new(BoundarySide::dirichlet(Side::Minus), BoundarySide::dirichlet(Side::Plus).with_point(0.5, 0.0, 0.0))
}

struct Check {
    name: &'static str,
    passed: bool,
    values: Value,
    artifacts: Vec<(String, Vec<u8>)>,
}

fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    w.into_inner().expect("in-memory write")
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn reference_spectra() -> Check {
    let mut worst: f64 = 0.0;
    for k in 0..=20i64 {
        let kf = k as f64;
        let d = reference_eigenvalue::<f64>(&ReferenceKind::Dirichlet, k).unwrap_or(f64::NAN);
        let n = reference_eigenvalue::<f64>(&ReferenceKind::Neumann, k).unwrap_or(f64::NAN);
        let m = reference_eigenvalue::<f64>(&ReferenceKind::Mixed, k).unwrap_or(f64::NAN);
        let n1 = reference_eigenvalue::<f64>(&ReferenceKind::Neumann, k + 1).unwrap_or(f64::NAN);
        worst = worst
            .max(rel(d, ((kf + 1.0) * PI / 2.0).powi(2)))
            .max(rel(n, (kf * PI / 2.0).powi(2)))
            .max(rel(m, ((2.0 * kf + 1.0) * PI / 4.0).powi(2)))
            .max(rel(d, n1));
    }
    Check { name: "reference_spectra", passed: worst <= 1e-10, values: json!({ "max_rel_error": jnum(worst) }), artifacts: vec![] }
}

fn half_value_spectrum() -> Check {
    let spec = half_value_spec();
    let w = eigen_scan(&spec, 200.0);
    let mut worst: f64 = 0.0;
    for (k, e) in w.eigenpairs.iter().enumerate().take(8) {
        let c = eigen_continuation(&spec, k as i64).map(|c| c.lambda).unwrap_or(f64::NAN);
        worst = worst.max(rel(c, e.lambda));
    }
    let l1 = w.eigenpairs.get(1).map_or(f64::NAN, |e| e.lambda);
    let tol = NODAL_TOL;
    let rows: Vec<Vec<String>> = w
        .eigenpairs
        .iter()
        .map(|e| {
            let c = classify(&FunctionTrace::Closed(e.psi), tol);
            let p = predict_nodal_class(&spec, e.k);
            let class = p.verdict.family().and_then(|f| c.member_of(f)).or_else(|| c.memberships().first().copied());
            let (lo, hi) = p.verdict.parts().map(|(_, lo, hi)| (num(lo), num(hi))).unwrap_or_default();
            vec![
                e.k.to_string(),
                num(e.lambda),
                class.map(|c| c.family.to_string()).unwrap_or_else(|| "unclassified".into()),
                class.map(|c| c.k.to_string()).unwrap_or_default(),
                class.map(|c| c.sign.symbol().to_string()).unwrap_or_default(),
                lo,
                hi,
            ]
        })
        .collect();
    let curves: Vec<Curve> = w
        .eigenpairs
        .iter()
        .take(6)
        .map(|e| Curve {
            label: format!("k = {}", e.k),
            points: (0..=200).map(|i| -1.0 + i as f64 / 100.0).map(|x| (x, FunctionTrace::Closed(e.psi).eval(x).0)).collect(),
        })
        .collect();
    Check {
        name: "half_value_spectrum",
        passed: w.eigenpairs.len() >= 8 && worst <= 1e-8 && rel(l1, PI * PI) <= 1e-9,
        values: json!({
            "count": w.eigenpairs.len(),
            "lambda0": jnum(w.eigenpairs.first().map_or(f64::NAN, |e| e.lambda)),
            "lambda1": jnum(l1),
            "scan_vs_continuation": jnum(worst),
        }),
        artifacts: vec![
            ("selftest_spectrum.csv".into(), csv_bytes(&SPECTRUM_HEADER, &rows)),
            ("selftest_eigenfunctions.svg".into(), svg::gallery("half-value example: eigenfunctions", &curves).into_bytes()),
        ],
    }
}

fn random_spectra(seed: u64) -> Check {
    let specs = seeded_specs::<f64>(seed, RANDOM_SPECS, HypothesisLevel::Quadratic);
    let bad: Vec<usize> = specs
        .par_iter()
        .enumerate()
        .filter_map(|(i, spec)| {
            let w = eigen_scan(spec, 100.0);
            let ls: Vec<f64> = w.eigenpairs.iter().map(|e| e.lambda).collect();
            let cont: Vec<f64> = (0..robin_count(spec, 100.0) as i64 + 3)
                .filter_map(|k| eigen_continuation(spec, k).ok().map(|e| e.lambda))
                .filter(|&l| l <= 100.0)
                .collect();
            let ok = ls.windows(2).all(|p| p[0] < p[1])
                && w.eigenpairs.iter().all(|e| e.simple)
                && (!spec.strict_alpha_positive() || ls.first().is_some_and(|&l| l > 0.0))
                && ls.len() == cont.len()
                && ls.iter().zip(&cont).all(|(a, b)| rel(*a, *b) <= 1e-8);
            (!ok).then_some(i)
        })
        .collect();
    Check { name: "random_quadratic_spectra", passed: bad.is_empty(), values: json!({ "specs": RANDOM_SPECS, "failed": bad }), artifacts: vec![] }
}

fn random_predictions(seed: u64) -> Check {
    let specs = seeded_specs::<f64>(seed.wrapping_add(1), RANDOM_SPECS, HypothesisLevel::Linear);
    let per: Vec<(usize, Vec<Vec<String>>, usize)> = specs
        .par_iter()
        .enumerate()
        .map(|(i, spec)| {
            let mut rows = Vec::new();
            let mut wrong = 0;
            for e in continuation_window(spec, 100.0).unwrap_or_default() {
                let p = predict_nodal_class(spec, e.k);
                let Some((index, lo, hi)) = p.verdict.parts() else { continue };
                let trace = match p.verdict {
                    Verdict::R { reflected: true, .. } => FunctionTrace::Closed(e.psi).reflected(),
                    _ => FunctionTrace::Closed(e.psi),
                };
                let fam = p.verdict.family().expect("determinate");
                let member = classify(&trace, NODAL_TOL).member_of(fam).is_some_and(|c| c.k == index);
                let slack = 1e-10 * e.lambda.max(1.0);
                let ok = member && lo - slack <= e.lambda && e.lambda <= hi + slack;
                wrong += usize::from(!ok);
                rows.push(vec![i.to_string(), e.k.to_string(), num(e.lambda), fam.to_string(), index.to_string(), num(lo), num(hi), format!("{:?}", p.theorem), ok.to_string()]);
            }
            (i, rows, wrong)
        })
        .collect();
    let determinate: usize = per.iter().map(|p| p.1.len()).sum();
    let wrong: usize = per.iter().map(|p| p.2).sum();
    let rows: Vec<Vec<String>> = per.into_iter().flat_map(|p| p.1).collect();
    Check {
        name: "random_linear_predictions",
        passed: wrong == 0 && determinate > 0,
        values: json!({ "determinate": determinate, "exceptions": wrong }),
        artifacts: vec![(
            "selftest_predict.csv".into(),
            csv_bytes(&["spec", "k", "lambda", "family", "index", "bracket_lo", "bracket_hi", "theorem", "confirmed"], &rows),
        )],
    }
}

fn nonresonance_solve(seed: u64) -> Check {
    let spec = half_value_spec();
    let nl = NonlinearitySpec::new("xi/(1 + abs(xi))", None, None).expect("static expression");
    let h = ForcingTerm::new("x").expect("static expression");
    let sys = BvpSystem::new(&spec, &nl, &h);
    match solve_multistart(&sys, 1.0, seed, &SolveOptions::default()) {
        Ok(r) => {
            let s = &r.solutions[0];
            let rows: Vec<Vec<String>> = match &s.trace {
                FunctionTrace::Sampled(t) => t.xs().iter().zip(t.us()).zip(t.ups()).map(|((x, u), up)| vec![num(*x), num(*u), num(*up)]).collect(),
                FunctionTrace::Closed(_) => vec![],
            };
            Check {
                name: "nonresonance_solve",
                passed: s.shooting.scaled_residual() <= 1e-8 && s.collocation_residual <= 1e-7,
                values: json!({
                    "solutions": r.solutions.len(),
                    "a": jnum(s.shooting.a),
                    "b": jnum(s.shooting.b),
                    "residual": jnum(s.shooting.scaled_residual()),
                    "collocation": jnum(s.collocation_residual),
                }),
                artifacts: vec![("selftest_solution.csv".into(), csv_bytes(&["x", "u", "du"], &rows))],
            }
        }
        Err(e) => Check { name: "nonresonance_solve", passed: false, values: json!({ "error": e.to_string() }), artifacts: vec![] },
    }
}

fn nodal_pipeline() -> Check {
    let spec = half_value_spec();
    let nl = NonlinearitySpec::new("xi*(1 + 3/(1 + xi^2))", Some(4.0), Some(1.0)).expect("static expression");
    match nodal_solutions_at_one(&spec, &nl, 0, &BranchOptions::default()) {
        Ok(ns) => {
            let classes: Vec<String> = ns.solutions.iter().map(|s| s.class.map(|c| c.to_string()).unwrap_or_default()).collect();
            let class_ok = ns.solutions.len() == 2
                && ns.solutions.iter().all(|s| s.class.is_some_and(|c| c.family == Family::T && c.k == 1 && c.sign == s.sign));
            let residual = ns.solutions.iter().map(|s| s.solution.shooting.scaled_residual()).fold(0.0, f64::max);
            let violations: usize = ns.audits.iter().map(|a| a.violations.len()).sum();
            let energy = ns.branches.iter().flat_map(|b| &b.points).map(|p| p.energy_dev).fold(0.0, f64::max);
            let mut artifacts = Vec::new();
            let mut curves = Vec::new();
            for b in &ns.branches {
                let rows: Vec<Vec<String>> = b
                    .points
                    .iter()
                    .map(|p| {
                        let class = p.nodal.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(";");
                        vec![num(p.arclength), num(p.lambda), num(p.amplitude), num(p.shooting.a), num(p.shooting.b), class]
                    })
                    .collect();
                let word = if b.sign == Sign::Plus { "plus" } else { "minus" };
                artifacts.push((format!("selftest_branch_k0_{word}.csv"), csv_bytes(&BRANCH_HEADER, &rows)));
                curves.push(Curve { label: format!("sign {}", b.sign.symbol()), points: b.points.iter().map(|p| (p.lambda, p.amplitude)).collect() });
            }
            artifacts.push(("selftest_branches.svg".into(), svg::bifurcation("half-value example, k = 0", &curves).into_bytes()));
            Check {
                name: "nodal_solutions",
                passed: class_ok && residual <= 1e-8 && violations == 0 && energy <= 1e-6,
                values: json!({
                    "classes": classes,
                    "max_residual": jnum(residual),
                    "audit_violations": violations,
                    "max_energy_deviation": jnum(energy),
                    "points": ns.branches.iter().map(|b| b.points.len()).collect::<Vec<_>>(),
                }),
                artifacts,
            }
        }
        Err(e) => Check { name: "nodal_solutions", passed: false, values: json!({ "error": e.to_string() }), artifacts: vec![] },
    }
}

fn linear_branch() -> Check {
    let spec = half_value_spec();
    let nl = NonlinearitySpec::linear();
    let opts = BranchOptions { stop_at_one: false, ..BranchOptions::default() };
    let res: Vec<(f64, f64)> = (0..2)
        .into_par_iter()
        .map(|k| match branch_from_zero(&spec, &nl, k, Sign::Plus, &opts) {
            Ok(b) => {
                let dev = b.points.iter().map(|p| (p.lambda - b.lambda_k).abs() / b.lambda_k).fold(0.0, f64::max);
                let amp = b.points.iter().map(|p| p.amplitude).fold(0.0, f64::max);
                (dev, amp)
            }
            Err(_) => (f64::INFINITY, 0.0),
        })
        .collect();
    Check {
        name: "linear_branch",
        passed: res.iter().all(|&(d, a)| d <= 1e-8 && a >= 10.0),
        values: json!({ "max_rel_deviation": res.iter().map(|r| jnum(r.0)).collect::<Vec<_>>() }),
        artifacts: vec![],
    }
}

fn parser_fixtures() -> Check {
    let cases: [(&str, f64); 6] =
        [("-2^2", 4.0), ("2^3^2", 512.0), ("1 - 2 - 3", -4.0), ("8/4/2", 1.0), ("2 + 3*4^2", 50.0), ("2^-1", 0.5)];
    let mut failed = Vec::new();
    for (text, want) in cases {
        let ok = parse_expr(text).map(|e| {
            let v: f64 = e.eval(0.0);
            let back = parse_expr(&e.to_string()).ok();
            (v - want).abs() <= 1e-14 * want.abs().max(1.0) && back.as_ref() == Some(&e)
        });
        if ok != Ok(true) {
            failed.push(text);
        }
    }
    Check { name: "parser_fixtures", passed: failed.is_empty(), values: json!({ "failed": failed }), artifacts: vec![] }
}

pub fn run(cfg: &RunConfig) -> Result<(), CliError> {
    let seed = cfg.seed;
    let jobs: Vec<Box<dyn Fn() -> Check + Send + Sync>> = vec![
        Box::new(reference_spectra),
        Box::new(half_value_spectrum),
        Box::new(move || random_spectra(seed)),
        Box::new(move || random_predictions(seed)),
        Box::new(move || nonresonance_solve(seed)),
        Box::new(nodal_pipeline),
        Box::new(linear_branch),
        Box::new(parser_fixtures),
    ];
    let checks: Vec<Check> = jobs.par_iter().map(|j| j()).collect();
    let mut out = OutDir::create(&cfg.out)?;
    let mut summary = Vec::new();
    for c in &checks {
        println!("{} {}", if c.passed { "PASS" } else { "FAIL" }, c.name);
        for (name, bytes) in &c.artifacts {
            let wanted = match name.rsplit('.').next() {
                Some("csv") => cfg.formats.csv,
                Some("svg") => cfg.formats.svg,
                _ => true,
            };
            if wanted {
                out.write(name, bytes)?;
            }
        }
        summary.push(json!({ "name": c.name, "passed": c.passed, "values": c.values }));
    }
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
    if cfg.formats.json {
        out.write_json("selftest.json", "selftest", json!({ "seed": seed, "passed": failed.is_empty(), "checks": summary }))?;
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Numeric(format!("self-test failures: {}", failed.join(", "))))
    }
}
