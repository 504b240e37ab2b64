//! Subcommand implementations.

use std::path::Path;

use mpsl_core::bifurcation::{
    branch_from_infinity, branch_from_zero, branch_nodal_audit, nodal_solutions_at_one, Branch, BranchError, BranchOptions,
    NodalSolveError,
};
use mpsl_core::conditions::{crossover_indices, predict_nodal_class, Prediction};
use mpsl_core::nodal::{classify, Classification, Family, FunctionTrace, NodalClass, Sign, NODAL_TOL};
use mpsl_core::nonlinearity::NonlinearitySpec;
use mpsl_core::problem::{validate_problem, ProblemSpec, Severity};
use mpsl_core::shooting::{nonresonance_check, solve_multistart, BvpSystem, NonresonanceStatus, SampledSolution, SolveOptions};
use mpsl_core::spectrum::{eigen_continuation, eigen_scan, eigenpair_at, Eigenpair};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{Problem, RunConfig};
use crate::output::{jnum, num, OutDir};
use crate::svg::{self, Curve};
use crate::CliError;

pub const SPECTRUM_HEADER: [&str; 7] = ["k", "lambda", "family", "class_k", "sign", "bracket_lo", "bracket_hi"];

const GALLERY_SAMPLES: usize = 200;

fn sign_word(s: Sign) -> &'static str {
    match s {
        Sign::Plus => "plus",
        Sign::Minus => "minus",
    }
}

/// Loads and validates; hard validation errors stop every command.
pub fn load_valid(path: &Path) -> Result<Problem, CliError> {
    let p = Problem::load(path)?;
    let report = validate_problem(&p.spec);
    for m in &report.messages {
        if m.severity != Severity::Info {
            eprintln!("{:?}: {}: {}", m.severity, m.field, m.text);
        }
    }
    if !report.ok {
        let first = report.errors().next().map(|m| format!("{}: {}", m.field, m.text)).unwrap_or_default();
        return Err(CliError::Validation(first));
    }
    Ok(p)
}

pub fn validate(path: &Path, cfg: &RunConfig) -> Result<(), CliError> {
    let p = Problem::load(path)?;
    let report = validate_problem(&p.spec);
    if cfg.formats.json {
        let mut out = OutDir::create(&cfg.out)?;
        out.write_json("validation.json", "validation", json!({ "name": p.name, "report": report }))?;
    }
    println!("{}: level {:?}, ok = {}", p.name, report.level, report.ok);
    for m in &report.messages {
        println!("  {:?} {}: {}", m.severity, m.field, m.text);
    }
    if !report.ok {
        let first = report.errors().next().map(|m| format!("{}: {}", m.field, m.text)).unwrap_or_default();
        return Err(CliError::Validation(first));
    }
    Ok(())
}

/// Representative class: the predicted family when it is confirmed,
/// otherwise the first of T, S, R that holds.
fn primary_class(c: &Classification<f64>, p: &Prediction<f64>) -> Option<NodalClass> {
    p.verdict
        .family()
        .and_then(|f| c.member_of(f))
        .or_else(|| [Family::T, Family::S, Family::R].into_iter().find_map(|f| c.member_of(f)))
}

fn spectrum_row(spec: &ProblemSpec<f64>, e: &Eigenpair<f64>, tol: f64) -> (Vec<String>, Value) {
    let c = classify(&FunctionTrace::Closed(e.psi), tol);
    let p = predict_nodal_class(spec, e.k);
    let class = primary_class(&c, &p);
    let (lo, hi) = p.verdict.parts().map(|(_, lo, hi)| (num(lo), num(hi))).unwrap_or_default();
    let row = vec![
        e.k.to_string(),
        num(e.lambda),
        class.map(|c| c.family.to_string()).unwrap_or_else(|| "unclassified".into()),
        class.map(|c| c.k.to_string()).unwrap_or_default(),
        class.map(|c| c.sign.symbol().to_string()).unwrap_or_default(),
        lo,
        hi,
    ];
    let detail = json!({
        "k": e.k,
        "lambda": jnum(e.lambda),
        "psi": { "a": jnum(e.psi.a), "b": jnum(e.psi.b) },
        "simple": e.simple,
        "memberships": c.memberships().iter().map(|m| m.to_string()).collect::<Vec<_>>(),
        "classification": c,
        "prediction": p,
    });
    (row, detail)
}

fn tol_or(cfg: &RunConfig, default: f64) -> f64 {
    cfg.tol.unwrap_or(default)
}

fn eigen_gallery(title: &str, pairs: &[Eigenpair<f64>]) -> String {
    let curves: Vec<Curve> = pairs
        .iter()
        .map(|e| Curve {
            label: format!("k = {}, lambda = {:.4}", e.k, e.lambda),
            points: (0..=GALLERY_SAMPLES)
                .map(|i| {
                    let x = -1.0 + 2.0 * i as f64 / GALLERY_SAMPLES as f64;
                    (x, FunctionTrace::Closed(e.psi).eval(x).0)
                })
                .collect(),
        })
        .collect();
    svg::gallery(title, &curves)
}

fn write_spectrum_like(
    out: &mut OutDir,
    cfg: &RunConfig,
    stem: &str,
    name: &str,
    spec: &ProblemSpec<f64>,
    pairs: &[Eigenpair<f64>],
    extra: Value,
) -> Result<Vec<Vec<String>>, CliError> {
    let tol = tol_or(cfg, NODAL_TOL);
    let rows: Vec<(Vec<String>, Value)> = pairs.par_iter().map(|e| spectrum_row(spec, e, tol)).collect();
    let (csv_rows, details): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    if cfg.formats.csv {
        out.write_csv(&format!("{stem}.csv"), &SPECTRUM_HEADER, &csv_rows)?;
    }
    if cfg.formats.json {
        let mut body = json!({ "name": name, "eigenpairs": details });
        if let (Value::Object(b), Value::Object(e)) = (&mut body, extra) {
            b.extend(e);
        }
        out.write_json(&format!("{stem}.json"), stem, body)?;
    }
    if cfg.formats.svg {
        let shown: Vec<_> = pairs.iter().take(6).cloned().collect();
        out.write(&format!("{stem}_eigenfunctions.svg"), eigen_gallery(&format!("{name}: eigenfunctions"), &shown).as_bytes())?;
    }
    Ok(csv_rows)
}

pub fn spectrum(path: &Path, cfg: &RunConfig) -> Result<(), CliError> {
    let p = load_valid(path)?;
    let w = eigen_scan(&p.spec, cfg.lambda_max);
    for warn in &w.warnings {
        eprintln!("warning: {warn}");
    }
    let mut out = OutDir::create(&cfg.out)?;
    let extra = json!({ "lambda_max": jnum(cfg.lambda_max), "robin_count": w.robin_count, "warnings": w.warnings });
    let rows = write_spectrum_like(&mut out, cfg, "spectrum", &p.name, &p.spec, &w.eigenpairs, extra)?;
    println!("{}: {} eigenvalues in [0, {}]", p.name, rows.len(), cfg.lambda_max);
    for r in &rows {
        println!("  k = {:>3}  lambda = {:<24} {}{}{}", r[0], r[1], r[2], r[3], r[4]);
    }
    Ok(())
}

fn read_spectrum_csv(path: &Path) -> Result<Vec<(i64, f64)>, CliError> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let bad = |msg: String| CliError::Validation(format!("{}: {msg}", path.display()));
    let headers = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name).ok_or_else(|| bad(format!("missing column '{name}'")));
    let (ck, cl) = (col("k")?, col("lambda")?);
    let mut v = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let k = rec[ck].parse::<i64>().map_err(|_| bad(format!("row {}: bad k", i + 1)))?;
        let l = rec[cl].parse::<f64>().map_err(|_| bad(format!("row {}: bad lambda", i + 1)))?;
        v.push((k, l));
    }
    Ok(v)
}

pub fn classify_cmd(path: &Path, from: Option<&Path>, cfg: &RunConfig) -> Result<(), CliError> {
    let p = load_valid(path)?;
    let pairs: Vec<Eigenpair<f64>> = match from {
        Some(csv) => read_spectrum_csv(csv)?.into_iter().map(|(k, l)| eigenpair_at(&p.spec, k, l)).collect(),
        None => (cfg.k.0..=cfg.k.1)
            .into_par_iter()
            .map(|k| eigen_continuation(&p.spec, k))
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::Numeric(e.to_string()))?,
    };
    let mut out = OutDir::create(&cfg.out)?;
    let rows = write_spectrum_like(&mut out, cfg, "classify", &p.name, &p.spec, &pairs, json!({}))?;
    for r in &rows {
        println!("  k = {:>3}  lambda = {:<24} {}{}{}", r[0], r[1], r[2], r[3], r[4]);
    }
    Ok(())
}

pub fn predict(path: &Path, cfg: &RunConfig) -> Result<(), CliError> {
    let p = load_valid(path)?;
    let tol = tol_or(cfg, NODAL_TOL);
    let ks: Vec<i64> = (cfg.k.0..=cfg.k.1).collect();
    let results: Vec<(Prediction<f64>, Option<Eigenpair<f64>>)> =
        ks.par_iter().map(|&k| (predict_nodal_class(&p.spec, k), eigen_continuation(&p.spec, k).ok())).collect();
    let mut rows = Vec::new();
    let mut details = Vec::new();
    for (pred, e) in &results {
        let (index, lo, hi) = pred.verdict.parts().map(|(i, lo, hi)| (i.to_string(), num(lo), num(hi))).unwrap_or_default();
        let family = pred.verdict.family().map(|f| f.to_string()).unwrap_or_else(|| "indeterminate".into());
        let confirmed = match (pred.verdict.parts(), e) {
            (Some((i, lo, hi)), Some(e)) => {
                let trace = match pred.verdict {
                    mpsl_core::Verdict::R { reflected: true, .. } => FunctionTrace::Closed(e.psi).reflected(),
                    _ => FunctionTrace::Closed(e.psi),
                };
                let fam = pred.verdict.family().expect("determinate");
                let member = classify(&trace, tol).member_of(fam).is_some_and(|c| c.k == i);
                let slack = 1e-10 * e.lambda.max(1.0);
                (member && lo - slack <= e.lambda && e.lambda <= hi + slack).to_string()
            }
            _ => String::new(),
        };
        rows.push(vec![
            pred.k.to_string(),
            e.as_ref().map(|e| num(e.lambda)).unwrap_or_default(),
            family,
            index,
            lo,
            hi,
            format!("{:?}", pred.theorem),
            confirmed,
        ]);
        details.push(json!({ "prediction": pred, "lambda": e.as_ref().map(|e| jnum(e.lambda)) }));
    }
    let mut out = OutDir::create(&cfg.out)?;
    if cfg.formats.csv {
        out.write_csv(
            "predict.csv",
            &["k", "lambda", "family", "index", "bracket_lo", "bracket_hi", "theorem", "confirmed"],
            &rows,
        )?;
    }
    if cfg.formats.json {
        let cross = crossover_indices(&p.spec).map(|c| serde_json::to_value(c).expect("serializable")).unwrap_or_else(|e| json!({ "unavailable": e.to_string() }));
        out.write_json("predict.json", "predict", json!({ "name": p.name, "crossover": cross, "predictions": details }))?;
    }
    println!("{:>3}  {:<22} {:<13} {:>5}  {:<28} confirmed", "k", "lambda", "family", "index", "theorem");
    for r in &rows {
        println!("{:>3}  {:<22} {:<13} {:>5}  {:<28} {}", r[0], r[1], r[2], r[3], r[6], r[7]);
    }
    Ok(())
}

fn solve_opts(cfg: &RunConfig) -> SolveOptions<f64> {
    let mut o = SolveOptions::default();
    if let Some(t) = cfg.tol {
        o.residual_tol = t;
    }
    o
}

fn solution_rows(s: &SampledSolution<f64>) -> Vec<Vec<String>> {
    match &s.trace {
        FunctionTrace::Sampled(t) => t.xs().iter().zip(t.us()).zip(t.ups()).map(|((x, u), up)| vec![num(*x), num(*u), num(*up)]).collect(),
        FunctionTrace::Closed(c) => (0..=GALLERY_SAMPLES)
            .map(|i| {
                let x = -1.0 + 2.0 * i as f64 / GALLERY_SAMPLES as f64;
                let (u, up) = FunctionTrace::Closed(*c).eval(x);
                vec![num(x), num(u), num(up)]
            })
            .collect(),
    }
}

fn solution_json(s: &SampledSolution<f64>) -> Value {
    let c = classify(&s.trace, NODAL_TOL);
    json!({
        "a": jnum(s.shooting.a),
        "b": jnum(s.shooting.b),
        "lambda": jnum(s.shooting.lambda),
        "bc_residuals": [jnum(s.shooting.residuals.0), jnum(s.shooting.residuals.1)],
        "scaled_residual": jnum(s.shooting.scaled_residual()),
        "collocation_residual": jnum(s.collocation_residual),
        "energy_deviation": s.energy.map(|e| jnum(e.deviation)),
        "iterations": s.iterations,
        "amplitude": jnum(s.trace.sup_norms().0),
        "memberships": c.memberships().iter().map(|m| m.to_string()).collect::<Vec<_>>(),
    })
}

fn solution_curve(label: String, s: &SampledSolution<f64>) -> Curve {
    let (amp, _) = s.trace.sup_norms();
    let scale = if amp > 0.0 { 1.0 / amp } else { 1.0 };
    let points = (0..=GALLERY_SAMPLES)
        .map(|i| {
            let x = -1.0 + 2.0 * i as f64 / GALLERY_SAMPLES as f64;
            (x, s.trace.eval(x).0 * scale)
        })
        .collect();
    Curve { label, points }
}

pub fn solve(path: &Path, lambda: f64, cfg: &RunConfig) -> Result<(), CliError> {
    let p = load_valid(path)?;
    let nl = p.nonlinearity()?;
    let h = p.forcing()?;
    for w in &nl.warnings {
        eprintln!("warning: {w}");
    }
    let verdict = nonresonance_check(&p.spec, &nl);
    let mut out = OutDir::create(&cfg.out)?;
    if verdict.status != NonresonanceStatus::Pass {
        if cfg.formats.json {
            out.write_json("solve.json", "solve", json!({ "name": p.name, "nonresonance": verdict, "solutions": [] }))?;
        }
        return Err(CliError::Hypothesis(format!("hypotheses not met: nonresonance check: {}", verdict.reason)));
    }
    let sys = BvpSystem::new(&p.spec, &nl, &h);
    let r = solve_multistart(&sys, lambda, cfg.seed, &solve_opts(cfg)).map_err(|e| CliError::Numeric(e.to_string()))?;
    if cfg.formats.json {
        out.write_json(
            "solve.json",
            "solve",
            json!({
                "name": p.name,
                "f": nl.text,
                "h": h.text,
                "nonresonance": verdict,
                "attempts": r.attempts,
                "failures": r.failures,
                "solutions": r.solutions.iter().map(solution_json).collect::<Vec<_>>(),
            }),
        )?;
    }
    if cfg.formats.csv {
        for (i, s) in r.solutions.iter().enumerate() {
            out.write_csv(&format!("solution_{i}.csv"), &["x", "u", "du"], &solution_rows(s))?;
        }
    }
    if cfg.formats.svg {
        let curves: Vec<Curve> =
            r.solutions.iter().enumerate().map(|(i, s)| solution_curve(format!("solution {i} (scaled)"), s)).collect();
        out.write("solutions.svg", svg::gallery(&format!("{}: solutions", p.name), &curves).as_bytes())?;
    }
    println!("{}: {} distinct solution(s) from {} starts", p.name, r.solutions.len(), r.attempts);
    for (i, s) in r.solutions.iter().enumerate() {
        println!(
            "  {i}: u(-1) = {:.6e}, u'(-1) = {:.6e}, residual = {:.2e}, collocation = {:.2e}",
            s.shooting.a,
            s.shooting.b,
            s.shooting.scaled_residual(),
            s.collocation_residual
        );
    }
    Ok(())
}

fn branch_opts(cfg: &RunConfig, stop_at_one: bool) -> BranchOptions<f64> {
    let mut o = BranchOptions { stop_at_one, solve: solve_opts(cfg), ..BranchOptions::default() };
    if let Some(e) = cfg.eps_seed {
        o.seed_eps = vec![e, e / 10.0, e / 100.0];
    }
    o
}

pub const BRANCH_HEADER: [&str; 6] = ["arclength", "lambda", "amplitude", "a", "b", "class"];

fn branch_rows(b: &Branch<f64>) -> Vec<Vec<String>> {
    b.points
        .iter()
        .map(|p| {
            let class = p.nodal.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(";");
            vec![num(p.arclength), num(p.lambda), num(p.amplitude), num(p.shooting.a), num(p.shooting.b), class]
        })
        .collect()
}

fn branch_json(b: &Branch<f64>) -> Value {
    let below = b.points.first().is_some_and(|p| p.lambda < 1.0);
    let audit = branch_nodal_audit(b, 1.0, below, None);
    let worst_energy = b.points.iter().map(|p| p.energy_dev).fold(0.0, f64::max);
    json!({
        "k": b.k,
        "sign": b.sign,
        "origin": b.origin,
        "lambda_k": jnum(b.lambda_k),
        "seed_amplitude": jnum(b.seed_amplitude),
        "termination": b.termination,
        "points": b.points.len(),
        "max_energy_deviation": jnum(worst_energy),
        "audit": audit,
        "notes": b.notes,
    })
}

fn write_branch(out: &mut OutDir, cfg: &RunConfig, name: &str, b: &Branch<f64>) -> Result<(), CliError> {
    let stem = format!("branch_k{}_{}", b.k, sign_word(b.sign));
    if cfg.formats.csv {
        out.write_csv(&format!("{stem}.csv"), &BRANCH_HEADER, &branch_rows(b))?;
    }
    if cfg.formats.svg {
        let c = Curve { label: format!("k = {}, sign {}", b.k, b.sign.symbol()), points: b.points.iter().map(|p| (p.lambda, p.amplitude)).collect() };
        out.write(&format!("{stem}.svg"), svg::bifurcation(&format!("{name}: branch k = {}", b.k), &[c]).as_bytes())?;
    }
    Ok(())
}

pub fn branch(path: &Path, from_infinity: bool, stop_at_one: bool, cfg: &RunConfig) -> Result<(), CliError> {
    let p = load_valid(path)?;
    let nl: NonlinearitySpec<f64> = p.nonlinearity()?;
    let opts = branch_opts(cfg, stop_at_one);
    let jobs: Vec<(i64, Sign)> = (cfg.k.0..=cfg.k.1).flat_map(|k| [(k, Sign::Plus), (k, Sign::Minus)]).collect();
    let results: Vec<Result<Branch<f64>, BranchError>> = jobs
        .par_iter()
        .map(|&(k, s)| if from_infinity { branch_from_infinity(&p.spec, &nl, k, s, &opts) } else { branch_from_zero(&p.spec, &nl, k, s, &opts) })
        .collect();
    let mut out = OutDir::create(&cfg.out)?;
    let mut summary = Vec::new();
    let mut failures = Vec::new();
    for ((k, s), r) in jobs.iter().zip(&results) {
        match r {
            Ok(b) => {
                write_branch(&mut out, cfg, &p.name, b)?;
                println!(
                    "k = {k} {}: {} points, {:?}, lambda {:.6} -> {:.6}",
                    s.symbol(),
                    b.points.len(),
                    b.termination,
                    b.points.first().map_or(f64::NAN, |q| q.lambda),
                    b.points.last().map_or(f64::NAN, |q| q.lambda)
                );
                summary.push(branch_json(b));
            }
            Err(e) => {
                eprintln!("k = {k} {}: {e}", s.symbol());
                failures.push(format!("k = {k} {}: {e}", s.symbol()));
                summary.push(json!({ "k": k, "sign": s, "error": e.to_string() }));
            }
        }
    }
    if cfg.formats.json {
        out.write_json("branch.json", "branch", json!({ "name": p.name, "f": nl.text, "f0": jnum(nl.f0), "finf": jnum(nl.finf), "branches": summary }))?;
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Numeric(failures.join("; ")))
    }
}

pub fn nodal_solve(path: &Path, cfg: &RunConfig) -> Result<(), CliError> {
    let p = load_valid(path)?;
    let nl = p.nonlinearity()?;
    let opts = branch_opts(cfg, true);
    let ks: Vec<i64> = (cfg.k.0..=cfg.k.1).collect();
    let results: Vec<_> = ks.par_iter().map(|&k| nodal_solutions_at_one(&p.spec, &nl, k, &opts)).collect();
    let mut out = OutDir::create(&cfg.out)?;
    let mut worst: Option<CliError> = None;
    let mut note = |e: CliError| {
        let replace = matches!((&worst, &e), (None, _) | (Some(CliError::Numeric(_)), CliError::Hypothesis(_)));
        if replace {
            worst = Some(e);
        }
    };
    for (&k, r) in ks.iter().zip(results) {
        match r {
            Ok(ns) => {
                for s in &ns.solutions {
                    if cfg.formats.csv {
                        out.write_csv(&format!("nodal_k{k}_{}.csv", sign_word(s.sign)), &["x", "u", "du"], &solution_rows(&s.solution))?;
                    }
                    println!(
                        "k = {k} {}: class {}, residual {:.2e}, u(-1) = {:.6e}, u'(-1) = {:.6e}",
                        s.sign.symbol(),
                        s.class.map(|c| c.to_string()).unwrap_or_else(|| "none".into()),
                        s.solution.shooting.scaled_residual(),
                        s.solution.shooting.a,
                        s.solution.shooting.b
                    );
                }
                for b in &ns.branches {
                    write_branch(&mut out, cfg, &p.name, b)?;
                }
                if cfg.formats.json {
                    let sols: Vec<Value> = ns
                        .solutions
                        .iter()
                        .map(|s| json!({ "sign": s.sign, "class": s.class.map(|c| c.to_string()), "solution": solution_json(&s.solution) }))
                        .collect();
                    out.write_json(
                        &format!("nodal_k{k}.json"),
                        "nodal_solve",
                        json!({
                            "name": p.name,
                            "k": k,
                            "lambda_k": jnum(ns.lambda_k),
                            "route": ns.route,
                            "certificate": ns.certificate,
                            "solutions": sols,
                            "branches": ns.branches.iter().map(branch_json).collect::<Vec<_>>(),
                            "audits": ns.audits,
                            "failures": ns.failures,
                        }),
                    )?;
                }
                if cfg.formats.svg {
                    let curves: Vec<Curve> = ns
                        .solutions
                        .iter()
                        .map(|s| solution_curve(format!("u_{k}^{} (scaled)", s.sign.symbol()), &s.solution))
                        .collect();
                    out.write(&format!("nodal_k{k}.svg"), svg::gallery(&format!("{}: nodal solutions", p.name), &curves).as_bytes())?;
                }
                if !ns.failures.is_empty() {
                    eprintln!("k = {k}: partial result: {}", ns.failures.join("; "));
                    note(CliError::Numeric(format!("k = {k}: {}", ns.failures.join("; "))));
                }
            }
            Err(e) => {
                eprintln!("k = {k}: {e}");
                if cfg.formats.json {
                    out.write_json(&format!("nodal_k{k}.json"), "nodal_solve", json!({ "name": p.name, "k": k, "error": e.to_string() }))?;
                }
                note(match e {
                    NodalSolveError::HypothesisReport(_) => CliError::Hypothesis(format!("k = {k}: {e}")),
                    _ => CliError::Numeric(format!("k = {k}: {e}")),
                });
            }
        }
    }
    worst.map_or(Ok(()), Err)
}
