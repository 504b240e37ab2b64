//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Built with `harness = false` so the lines always reach stdout.

use std::f64::consts::PI;
use std::path::Path;
use std::time::{Duration, Instant};

use mpsl_core::bifurcation::{branch_from_zero, nodal_solutions_at_one, BranchOptions};
use mpsl_core::expr::{parse_expr, BinOp, Constant, Expr, Func, Var};
use mpsl_core::nodal::{classify, energy_deviation, Family, FunctionTrace, Sign, NODAL_TOL};
use mpsl_core::nonlinearity::{ForcingTerm, NonlinearitySpec};
use mpsl_core::problem::{BoundarySide, HypothesisLevel, ProblemSpec, Side};
use mpsl_core::reference::{reference_eigenvalue, robin_count, ReferenceKind};
use mpsl_core::sampling::seeded_specs;
use mpsl_core::shooting::{solve_multistart, BvpSystem, SolveOptions};
use mpsl_core::spectrum::{continuation_window, eigen_continuation, eigen_residuals, eigen_scan};
use mpsl_core::{predict_nodal_class, Verdict};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn half_spec() -> ProblemSpec<f64> {
    ProblemSpec::new(BoundarySide::dirichlet(Side::Minus), BoundarySide::dirichlet(Side::Plus).with_point(0.5, 0.0, 0.0))
}

/// `sin 2ω = ½ sin ω` on (0.5, 1.5) by plain bisection, squared.
fn half_lambda0() -> f64 {
    let g = |w: f64| (2.0 * w).sin() - 0.5 * w.sin();
    let (mut lo, mut hi) = (0.5, 1.5);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(lo) * g(mid) <= 0.0 {
            hi = mid
        } else {
            lo = mid
        }
    }
    (0.5 * (lo + hi)).powi(2)
}

/// Fixed-step RK4 for `u″ = g(x, u)` from `x = −1`; returns `(u(0), u(1), max |u|)`.
fn rk4(g: impl Fn(f64, f64) -> f64, a: f64, b: f64, n: usize) -> (f64, f64, f64) {
    let h = 2.0 / n as f64;
    let (mut u, mut v) = (a, b);
    let (mut at0, mut sup) = (f64::NAN, a.abs());
    for i in 0..n {
        let x = -1.0 + i as f64 * h;
        if i == n / 2 {
            at0 = u;
        }
        let k1 = (v, g(x, u));
        let k2 = (v + 0.5 * h * k1.1, g(x + 0.5 * h, u + 0.5 * h * k1.0));
        let k3 = (v + 0.5 * h * k2.1, g(x + 0.5 * h, u + 0.5 * h * k2.0));
        let k4 = (v + h * k3.1, g(x + h, u + h * k3.0));
        u += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        v += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        sup = sup.max(u.abs());
    }
    (at0, u, sup)
}

/// Adaptive RK45 (Fehlberg) for `u″ = g(x, u)` at tolerance `tol`, used as an
/// integrator independent of the solver's own. Returns `(u(0), u(1), max |u|)`.
fn rkf45(g: impl Fn(f64, f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64, f64) {
    let f = |x: f64, y: [f64; 2]| [y[1], g(x, y[0])];
    let mut y = [a, b];
    let mut x: f64 = -1.0;
    let mut h: f64 = 1e-3;
    let mut at0 = f64::NAN;
    let mut sup = a.abs();
    let mut targets = vec![1.0, 0.0];
    while let Some(&target) = targets.last() {
        if x >= target - 1e-15 {
            if target == 0.0 {
                at0 = y[0];
            }
            targets.pop();
            continue;
        }
        let step = h.min(target - x);
        let add = |y: [f64; 2], ks: &[([f64; 2], f64)]| {
            let mut r = y;
            for (k, c) in ks {
                r[0] += step * c * k[0];
                r[1] += step * c * k[1];
            }
            r
        };
        let k1 = f(x, y);
        let k2 = f(x + step / 4.0, add(y, &[(k1, 1.0 / 4.0)]));
        let k3 = f(x + 3.0 * step / 8.0, add(y, &[(k1, 3.0 / 32.0), (k2, 9.0 / 32.0)]));
        let k4 = f(x + 12.0 * step / 13.0, add(y, &[(k1, 1932.0 / 2197.0), (k2, -7200.0 / 2197.0), (k3, 7296.0 / 2197.0)]));
        let k5 = f(x + step, add(y, &[(k1, 439.0 / 216.0), (k2, -8.0), (k3, 3680.0 / 513.0), (k4, -845.0 / 4104.0)]));
        let k6 = f(
            x + step / 2.0,
            add(y, &[(k1, -8.0 / 27.0), (k2, 2.0), (k3, -3544.0 / 2565.0), (k4, 1859.0 / 4104.0), (k5, -11.0 / 40.0)]),
        );
        let y5 = add(y, &[(k1, 16.0 / 135.0), (k3, 6656.0 / 12825.0), (k4, 28561.0 / 56430.0), (k5, -9.0 / 50.0), (k6, 2.0 / 55.0)]);
        let y4 = add(y, &[(k1, 25.0 / 216.0), (k3, 1408.0 / 2565.0), (k4, 2197.0 / 4104.0), (k5, -1.0 / 5.0)]);
        let err = ((y5[0] - y4[0]).abs() / (1.0 + y5[0].abs())).max((y5[1] - y4[1]).abs() / (1.0 + y5[1].abs()));
        if err <= tol {
            x += step;
            y = y5;
            sup = sup.max(y[0].abs());
        }
        h = step * (0.9 * (tol / err.max(1e-300)).powf(0.2)).clamp(0.2, 5.0);
    }
    (at0, y[0], sup)
}

fn crit1() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut worst_interlace: f64 = 0.0;
    for k in 0..=20i64 {
        let kf = k as f64;
        let d = reference_eigenvalue::<f64>(&ReferenceKind::Dirichlet, k).unwrap();
        let n = reference_eigenvalue::<f64>(&ReferenceKind::Neumann, k).unwrap();
        let m = reference_eigenvalue::<f64>(&ReferenceKind::Mixed, k).unwrap();
        worst = worst
            .max(rel(d, ((kf + 1.0) * PI / 2.0).powi(2)))
            .max(rel(n, (kf * PI / 2.0).powi(2)))
            .max(rel(m, ((2.0 * kf + 1.0) * PI / 4.0).powi(2)));
        let n1 = reference_eigenvalue::<f64>(&ReferenceKind::Neumann, k + 1).unwrap();
        worst_interlace = worst_interlace.max(rel(d, n1));
        if k >= 1 {
            let dm = reference_eigenvalue::<f64>(&ReferenceKind::Dirichlet, k - 1).unwrap();
            worst_interlace = worst_interlace.max(rel(dm, n));
        }
    }
    // The same values through the generic eigenvalue scan.
    let mut scan_worst: f64 = 0.0;
    for kind in [ReferenceKind::Dirichlet, ReferenceKind::Neumann, ReferenceKind::Mixed] {
        let w = eigen_scan(&kind.as_problem(), 1200.0);
        for (k, e) in w.eigenpairs.iter().enumerate().take(21) {
            scan_worst = scan_worst.max(rel(e.lambda, reference_eigenvalue::<f64>(&kind, k as i64).unwrap()));
        }
    }
    outcome(
        worst <= 1e-10 && worst_interlace <= 1e-10 && scan_worst <= 1e-10,
        format!("closed-form err {worst:.2e}, interlacing err {worst_interlace:.2e}, scan err {scan_worst:.2e}"),
    )
}

fn crit2() -> Outcome {
    let spec = half_spec();
    let scan = eigen_scan(&spec, 200.0);
    if scan.eigenpairs.len() < 8 {
        return outcome(false, format!("only {} scanned eigenvalues", scan.eigenpairs.len()));
    }
    let mut agree: f64 = 0.0;
    for k in 0..8 {
        match eigen_continuation(&spec, k as i64) {
            Ok(c) => agree = agree.max(rel(c.lambda, scan.eigenpairs[k].lambda)),
            Err(e) => return outcome(false, format!("continuation k={k}: {e}")),
        }
    }
    let l1 = rel(scan.eigenpairs[1].lambda, PI * PI);
    let l0 = rel(scan.eigenpairs[0].lambda, half_lambda0());
    outcome(
        agree <= 1e-8 && l1 <= 1e-9 && l0 <= 1e-9,
        format!("scan/continuation {agree:.2e}, lambda_1 vs pi^2 {l1:.2e}, lambda_0 = {:.6} vs bisection {l0:.2e}", scan.eigenpairs[0].lambda),
    )
}

/// Criterion 3 plus the linear half of criterion 5 (same eigenpairs).
fn crit3() -> (Outcome, f64) {
    let mut problems = Vec::new();
    let mut min_slope = f64::INFINITY;
    let mut linear_energy: f64 = 0.0;
    let mut literal_mismatch = 0;
    let mut total = 0;
    for (i, spec) in seeded_specs::<f64>(3, 50, HypothesisLevel::Quadratic).iter().enumerate() {
        let w = eigen_scan(spec, 100.0);
        let ls: Vec<f64> = w.eigenpairs.iter().map(|e| e.lambda).collect();
        total += ls.len();
        if !ls.windows(2).all(|p| p[0] < p[1]) {
            problems.push(format!("spec {i} not increasing"));
        }
        if !w.eigenpairs.iter().all(|e| e.simple) {
            problems.push(format!("spec {i} non-simple root"));
        }
        min_slope = w.eigenpairs.iter().fold(min_slope, |m, e| m.min(e.slope));
        if spec.strict_alpha_positive() && ls.first().is_some_and(|&l| l <= 0.0) {
            problems.push(format!("spec {i} lambda_0 = {}", ls[0]));
        }
        let robin = robin_count(spec, 100.0);
        if robin != ls.len() {
            literal_mismatch += 1;
        }
        // Each scanned root must be exactly one index-continued eigenvalue.
        let cont: Result<Vec<f64>, _> = (0..robin as i64 + 3).map(|k| eigen_continuation(spec, k).map(|e| e.lambda)).collect();
        match cont {
            Ok(c) => {
                let c: Vec<f64> = c.into_iter().filter(|&l| l <= 100.0).collect();
                if c.len() != ls.len() || ls.iter().zip(&c).any(|(a, b)| rel(*a, *b) > 1e-8) {
                    problems.push(format!("spec {i}: scan {ls:?} vs continuation {c:?}"));
                }
            }
            Err(e) => problems.push(format!("spec {i}: continuation {e}")),
        }
        for e in &w.eigenpairs {
            linear_energy = linear_energy.max(energy_deviation(e.lambda, &FunctionTrace::Closed(e.psi)));
            let (r0, r1) = eigen_residuals(spec, &e.psi);
            if r0.abs() + r1.abs() > 1e-8 * (1.0 + e.lambda) {
                problems.push(format!("spec {i}: residual {r0:.1e} {r1:.1e}"));
            }
        }
    }
    let detail = format!(
        "{total} eigenvalues, min scaled |Gamma'| {min_slope:.2e}, {literal_mismatch} specs where a Robin path crosses lambda=100 between t=0 and t=1{}",
        if problems.is_empty() { String::new() } else { format!("; {}", problems.join("; ")) }
    );
    (outcome(problems.is_empty() && min_slope > 1e-8, detail), linear_energy)
}

fn crit4() -> Outcome {
    let mut determinate = 0;
    let mut exceptions = Vec::new();
    for (i, spec) in seeded_specs::<f64>(11, 30, HypothesisLevel::Linear).iter().enumerate() {
        let pairs = match continuation_window(spec, 120.0) {
            Ok(p) => p,
            Err(e) => {
                exceptions.push(format!("spec {i}: {e}"));
                continue;
            }
        };
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
            let slack = 1e-10 * e.lambda.max(1.0);
            if !got.is_some_and(|c| c.k == index) || e.lambda < lo - slack || e.lambda > hi + slack {
                exceptions.push(format!("spec {i} k={}: {:?} got {got:?}, lambda {} in [{lo}, {hi}]", e.k, p.verdict, e.lambda));
            }
        }
    }
    outcome(
        exceptions.is_empty() && determinate > 0,
        format!("{determinate} determinate verdicts, {} exceptions{}", exceptions.len(), exceptions.first().map(|s| format!(": {s}")).unwrap_or_default()),
    )
}

fn crit6() -> Outcome {
    let spec = half_spec();
    let nl = NonlinearitySpec::new("xi/(1 + abs(xi))", None, None).unwrap();
    let h = ForcingTerm::new("x").unwrap();
    let sys = BvpSystem::new(&spec, &nl, &h);
    let r = match solve_multistart(&sys, 1.0, 7, &SolveOptions::default()) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("solve failed: {e}")),
    };
    let Some(s) = r.solutions.first() else { return outcome(false, "no solution".into()) };
    let bc = s.shooting.scaled_residual();
    let g = |x: f64, u: f64| -(u / (1.0 + u.abs()) + x);
    let (u0, u1, sup) = rkf45(g, s.shooting.a, s.shooting.b, 1e-12);
    let re = s.shooting.a.abs().max((u1 - 0.5 * u0).abs() / (1.0 + sup));
    outcome(
        bc <= 1e-8 && s.collocation_residual <= 1e-7 && re <= 1e-8,
        format!("BC residual {bc:.2e}, collocation {:.2e}, re-integrated BC residual {re:.2e}", s.collocation_residual),
    )
}

/// Criterion 7 plus the nonlinear half of criterion 5.
fn crit7() -> (Outcome, f64) {
    let spec = half_spec();
    let nl = NonlinearitySpec::new("xi*(1 + 3/(1 + xi^2))", Some(4.0), Some(1.0)).unwrap();
    let r = match nodal_solutions_at_one(&spec, &nl, 0, &BranchOptions::default()) {
        Ok(r) => r,
        Err(e) => return (outcome(false, format!("pipeline failed: {e}")), f64::INFINITY),
    };
    let mut problems = Vec::new();
    let f = |u: f64| u * (1.0 + 3.0 / (1.0 + u * u));
    let mut worst_res: f64 = 0.0;
    for sign in [Sign::Plus, Sign::Minus] {
        let Some(s) = r.solutions.iter().find(|s| s.sign == sign) else {
            problems.push(format!("missing u_0^{sign}"));
            continue;
        };
        let (u0, u1, sup) = rk4(|_, u| -f(u), s.solution.shooting.a, s.solution.shooting.b, 40_000);
        let re = s.solution.shooting.a.abs().max((u1 - 0.5 * u0).abs() / (1.0 + sup));
        worst_res = worst_res.max(s.solution.shooting.scaled_residual()).max(re);
        if !s.class.is_some_and(|c| c.family == Family::T && c.k == 1 && c.sign == sign) {
            problems.push(format!("u_0^{sign} classified {:?}", s.class));
        }
    }
    let mut gated = 0;
    let mut energy: f64 = 0.0;
    for b in &r.branches {
        for p in &b.points {
            energy = energy.max(p.energy_dev);
            if p.lambda < 1.0 {
                gated += 1;
                if !p.nodal.iter().any(|c| c.family == Family::T && c.k == 1 && c.sign == b.sign) {
                    problems.push(format!("branch {} point at lambda {} has {:?}", b.sign, p.lambda, p.nodal));
                }
            }
        }
    }
    let violations: usize = r.audits.iter().map(|a| a.violations.len()).sum();
    let lambda0 = half_lambda0();
    let strictly_between = 1.0 < lambda0 && lambda0 < 4.0;
    let passed = problems.is_empty() && violations == 0 && gated > 0 && worst_res <= 1e-8 && strictly_between && r.route.gamma == 4.0;
    let detail = format!(
        "{} solutions, residual {worst_res:.2e}, {gated} branch points below lambda=1, audit violations {violations}, gamma {}{}",
        r.solutions.len(),
        r.route.gamma,
        if problems.is_empty() { String::new() } else { format!("; {}", problems.join("; ")) }
    );
    (outcome(passed, detail), energy)
}

fn crit8() -> Outcome {
    let spec = half_spec();
    let nl = NonlinearitySpec::linear();
    let mut details = Vec::new();
    let mut passed = true;
    for k in 0..2 {
        let b = match branch_from_zero(&spec, &nl, k, Sign::Plus, &BranchOptions::default()) {
            Ok(b) => b,
            Err(e) => return outcome(false, format!("k={k}: {e}")),
        };
        let (mut lo, mut hi, mut dev) = (f64::INFINITY, 0.0f64, 0.0f64);
        for p in &b.points {
            lo = lo.min(p.amplitude);
            hi = hi.max(p.amplitude);
            if (1e-3..=10.0).contains(&p.amplitude) {
                dev = dev.max((p.lambda - b.lambda_k).abs() / b.lambda_k);
            }
        }
        passed &= dev <= 1e-8 && lo <= 1e-3 && hi >= 10.0;
        details.push(format!("k={k}: max rel |lambda - lambda_k| {dev:.2e} over amplitudes {lo:.1e}..{hi:.1e}"));
    }
    outcome(passed, details.join(", "))
}

fn random_leaf(rng: &mut ChaCha8Rng) -> Expr {
    match rng.gen_range(0..7) {
        0 => Expr::Num(rng.gen_range(0..1000) as f64),
        1 => Expr::Num(rng.gen_range(0.0..1e6)),
        2 => Expr::Num(10f64.powi(rng.gen_range(-30..30)) * 1.25),
        3 => Expr::Var(Var::Xi),
        4 => Expr::Var(Var::X),
        5 => Expr::Const(Constant::Pi),
        _ => Expr::Const(Constant::E),
    }
}

fn random_tree(rng: &mut ChaCha8Rng, depth: u32) -> Expr {
    if depth == 0 || rng.gen_bool(0.3) {
        return random_leaf(rng);
    }
    match rng.gen_range(0..3) {
        0 => {
            let op = [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Pow][rng.gen_range(0..5)];
            let l = random_tree(rng, depth - 1);
            let r = random_tree(rng, depth - 1);
            Expr::bin(op, l, r)
        }
        1 => Expr::neg(random_tree(rng, depth - 1)),
        _ => {
            let f = Func::ALL[rng.gen_range(0..Func::ALL.len())];
            Expr::call(f, random_tree(rng, depth - 1))
        }
    }
}

fn crit9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut failures = Vec::new();
    for _ in 0..1000 {
        let e = random_tree(&mut rng, 6);
        let text = e.to_string();
        match parse_expr(&text) {
            Ok(back) if back == e && back.to_string() == text => {}
            Ok(back) => failures.push(format!("{text} -> {back}")),
            Err(err) => failures.push(format!("{text}: {err}")),
        }
    }
    let xi = 0.7f64;
    let fixtures: [(&str, f64); 10] = [
        ("-2^2", 4.0),
        ("2^3^2", 512.0),
        ("1 - 2 - 3", -4.0),
        ("8/4/2", 1.0),
        ("2*3 + 4*5", 26.0),
        ("2 + 3*4^2", 50.0),
        ("-xi^2", xi * xi),
        ("(1 - xi)*(1 + xi)", 1.0 - xi * xi),
        ("xi*(1 + 3/(1 + xi^2))", xi * (1.0 + 3.0 / (1.0 + xi * xi))),
        ("2^-1", 0.5),
    ];
    let mut bad = 0;
    for (text, want) in fixtures {
        let ok = parse_expr(text).map(|e| (e.eval(xi) - want).abs() <= 1e-14 * want.abs().max(1.0)).unwrap_or(false);
        if !ok {
            bad += 1;
            failures.push(format!("fixture {text}"));
        }
    }
    outcome(
        failures.is_empty(),
        format!("1000 trees, {} failures; 10 fixtures, {bad} mismatches{}", failures.len(), failures.first().map(|s| format!(": {s}")).unwrap_or_default()),
    )
}

fn read_tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .map(|rd| {
            rd.filter_map(Result::ok)
                .map(|e| (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap_or_default()))
                .collect()
        })
        .unwrap_or_default();
    files.sort();
    files
}

fn crit10() -> Outcome {
    let dir = tempfile::tempdir().expect("temp dir");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let mut codes = Vec::new();
    for out in [&a, &b] {
        codes.push(mpsl::run(["mpsl".into(), "selftest".into(), "--seed".into(), "7".into(), "--out".into(), out.clone().into_os_string()]));
    }
    let (fa, fb) = (read_tree(&a), read_tree(&b));
    let same = !fa.is_empty() && fa == fb;
    outcome(
        same && codes.iter().all(|&c| c == 0),
        format!("{} files, byte-identical: {same}, exit codes {codes:?}", fa.len()),
    )
}

fn timed<R>(f: impl FnOnce() -> R) -> (R, Duration) {
    let t = Instant::now();
    let r = f();
    (r, t.elapsed())
}

/// Criterion number, outcome, and measured runtime with its limit in seconds.
type Line = (usize, Outcome, Option<(Duration, f64)>);

fn main() {
    let mut lines: Vec<Line> = Vec::new();

    let (o, t) = timed(crit1);
    lines.push((1, o, Some((t, 1.0))));
    let (o, t) = timed(crit2);
    lines.push((2, o, Some((t, 5.0))));
    let ((o, linear_energy), t) = timed(crit3);
    lines.push((3, o, Some((t, 60.0))));
    let (o, t) = timed(crit4);
    lines.push((4, o, Some((t, 60.0))));
    let (o, t) = timed(crit6);
    let c6 = (o, t);
    let ((o, nonlinear_energy), t) = timed(crit7);
    let c7 = (o, t);
    let c5 = outcome(
        linear_energy <= 1e-9 && nonlinear_energy <= 1e-6,
        format!("linear max deviation {linear_energy:.2e} (suite 3), nonlinear max deviation {nonlinear_energy:.2e} (suite 7)"),
    );
    lines.push((5, c5, None));
    lines.push((6, c6.0, Some((c6.1, 5.0))));
    lines.push((7, c7.0, Some((c7.1, 30.0))));
    let (o, t) = timed(crit8);
    lines.push((8, o, Some((t, 10.0))));
    let (o, t) = timed(crit9);
    lines.push((9, o, Some((t, 2.0))));
    let (o, t) = timed(crit10);
    lines.push((10, o, Some((t, f64::INFINITY))));

    let mut failed = 0;
    for (n, o, time) in &lines {
        let (in_time, timing) = match time {
            Some((t, limit)) if limit.is_finite() => (t.as_secs_f64() < *limit, format!(" [{:.2}s, limit {limit}s]", t.as_secs_f64())),
            Some((t, _)) => (true, format!(" [{:.2}s]", t.as_secs_f64())),
            None => (true, String::new()),
        };
        let pass = o.passed && in_time;
        if !pass {
            failed += 1;
        }
        println!("{} criterion {n}: {}{timing}", if pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} passed, {failed} failed", lines.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
