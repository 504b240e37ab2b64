//! Characteristic determinant, spectrum scan and eigenvalue continuation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::problem::{validate_problem, BoundarySide, ProblemSpec};
use crate::reference::{reference_eigenvalue, robin_count, ReferenceKind};
use crate::roots::{bisect, golden_min};
use crate::scalar::Real;
use crate::trig::{basis, bc_functional, sup_norms, TrigSolution};

/// Default lower guard of the scan window (`λ ≥ −25`).
pub const LAMBDA_MIN_GUARD: f64 = 25.0;
/// Normalized `|Γ′|` below this marks a root as possibly non-simple.
pub const SIMPLE_TOL: f64 = 1e-8;
const COLLISION: f64 = 1e-8;
const NEIGHBOR_GAP: f64 = 0.1;
const DT_INIT: f64 = 0.05;
const DT_MIN: f64 = 1e-6;
const DT_MAX: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectrumError {
    #[error("theorem hypotheses not met: continuation needs the quadratic smallness condition")]
    Hypotheses,
    #[error("problem is invalid: {0}")]
    Invalid(String),
    #[error("continuation breakdown at t = {t}: tracked eigenvalue {lambda} collides with a neighbour")]
    Breakdown { t: f64, lambda: f64 },
    #[error("continuation corrector failed at t = {t} (step fell below {dt_min})")]
    StepTooSmall { t: f64, dt_min: f64 },
    #[error("reference eigenvalue error: {0}")]
    Reference(#[from] crate::reference::ReferenceError),
}

/// How the eigenfunction sign was fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignConvention {
    /// `ψ(−1) > 0` (S-family sign `+`).
    PositiveValue,
    /// `ψ(−1) = 0`, `ψ′(−1) > 0` (T/R-family sign `+`).
    PositiveSlope,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Eigenpair<T: Real> {
    pub k: i64,
    pub lambda: T,
    pub psi: TrigSolution<T>,
    /// `(t, λ_k[t])` samples; empty for scanned eigenpairs.
    pub t_path: Vec<(T, T)>,
    pub sign_convention: SignConvention,
    /// `|Γ′(λ)|·max(1, |λ|)/scale`.
    pub slope: T,
    pub simple: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumWindow<T: Real> {
    pub lambda_max: T,
    pub lambda_min_guard: T,
    pub eigenpairs: Vec<Eigenpair<T>>,
    pub robin_count: usize,
    pub warnings: Vec<String>,
}

/// The 2×2 boundary matrix `[bc⁻(c) bc⁻(s); bc⁺(c) bc⁺(s)]` with interior
/// coefficients scaled by `t`.
pub fn bc_matrix<T: Real>(spec: &ProblemSpec<T>, lambda: T, t: T) -> [[T; 2]; 2] {
    let row = |side: &BoundarySide<T>| {
        let nu = basis(lambda, side.side.endpoint());
        let mut rc = side.alpha0 * nu.c + side.beta0 * nu.dc;
        let mut rs = side.alpha0 * nu.s + side.beta0 * nu.ds;
        for ((&al, &be), &e) in side.alpha.iter().zip(&side.beta).zip(&side.eta) {
            let bi = basis(lambda, e);
            rc = rc - t * (al * bi.c + be * bi.dc);
            rs = rs - t * (al * bi.s + be * bi.ds);
        }
        [rc, rs]
    };
    [row(spec.minus()), row(spec.plus())]
}

fn det<T: Real>(m: &[[T; 2]; 2]) -> T {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

fn row_scale<T: Real>(m: &[[T; 2]; 2]) -> T {
    let a = m[0][0].abs() + m[0][1].abs();
    let b = m[1][0].abs() + m[1][1].abs();
    (a * b).max(T::min_positive_value())
}

/// `Γ(λ)`.
pub fn char_det<T: Real>(spec: &ProblemSpec<T>, lambda: T) -> T {
    det(&bc_matrix(spec, lambda, T::one()))
}

/// Size of the terms entering `Γ(λ)` (product of row absolute sums).
pub fn char_det_scale<T: Real>(spec: &ProblemSpec<T>, lambda: T) -> T {
    row_scale(&bc_matrix(spec, lambda, T::one()))
}

fn gamma_t<T: Real>(spec: &ProblemSpec<T>, lambda: T, t: T) -> T {
    det(&bc_matrix(spec, lambda, t))
}

fn fd_step<T: Real>(lambda: T) -> T {
    T::lit(1e-6).max(T::epsilon().cbrt()) * T::one().max(lambda.abs())
}

/// Centered-difference `dΓ/dλ` at parameter `t`.
fn gamma_slope<T: Real>(spec: &ProblemSpec<T>, lambda: T, t: T) -> T {
    let h = fd_step(lambda);
    (gamma_t(spec, lambda + h, t) - gamma_t(spec, lambda - h, t)) / (T::two() * h)
}

fn normalized_slope<T: Real>(spec: &ProblemSpec<T>, lambda: T, t: T) -> T {
    let m = bc_matrix(spec, lambda, t);
    gamma_slope(spec, lambda, t).abs() * T::one().max(lambda.abs()) / row_scale(&m)
}

/// Null vector of the boundary matrix, normalized and signed.
fn eigenfunction<T: Real>(spec: &ProblemSpec<T>, lambda: T) -> (TrigSolution<T>, SignConvention) {
    let m = bc_matrix(spec, lambda, T::one());
    let n0 = m[0][0].abs() + m[0][1].abs();
    let n1 = m[1][0].abs() + m[1][1].abs();
    let r = if n0 >= n1 { m[0] } else { m[1] };
    let (a, b) = if r[0].is_zero() && r[1].is_zero() { (T::one(), T::zero()) } else { (r[1], -r[0]) };
    let raw = TrigSolution::new(lambda, a, b);
    let (nrm, _) = sup_norms(&raw);
    let mut psi = raw.scaled(T::one() / nrm);
    let tol = T::lit(1e-8);
    let conv = if psi.a.abs() > tol {
        if psi.a < T::zero() {
            psi = psi.scaled(-T::one());
        }
        SignConvention::PositiveValue
    } else {
        if psi.b < T::zero() {
            psi = psi.scaled(-T::one());
        }
        SignConvention::PositiveSlope
    };
    (psi, conv)
}

/// Residuals `(bc⁻(ψ), bc⁺(ψ))`.
pub fn eigen_residuals<T: Real>(spec: &ProblemSpec<T>, psi: &TrigSolution<T>) -> (T, T) {
    (bc_functional(spec.minus(), psi), bc_functional(spec.plus(), psi))
}

fn make_pair<T: Real>(spec: &ProblemSpec<T>, k: i64, lambda: T, t_path: Vec<(T, T)>) -> Eigenpair<T> {
    let (psi, conv) = eigenfunction(spec, lambda);
    let slope = normalized_slope(spec, lambda, T::one());
    Eigenpair { k, lambda, psi, t_path, sign_convention: conv, slope, simple: slope >= T::lit(SIMPLE_TOL) }
}

/// Eigenpair with index `k` rebuilt from a known eigenvalue.
pub fn eigenpair_at<T: Real>(spec: &ProblemSpec<T>, k: i64, lambda: T) -> Eigenpair<T> {
    make_pair(spec, k, lambda, vec![])
}

/// Grid step in `ω = √|λ|` units.
fn omega_step<T: Real>() -> T {
    T::PI() / T::lit(64.0)
}

/// All roots of `Γ` in `[−guard, lambda_max]`, by sign-change scan in `ω`
/// refined by bisection, plus near-tangent detection.
pub fn eigen_scan<T: Real>(spec: &ProblemSpec<T>, lambda_max: T) -> SpectrumWindow<T> {
    eigen_scan_guarded(spec, lambda_max, T::lit(LAMBDA_MIN_GUARD))
}

pub fn eigen_scan_guarded<T: Real>(spec: &ProblemSpec<T>, lambda_max: T, guard: T) -> SpectrumWindow<T> {
    let h = omega_step::<T>();
    let mut nodes: Vec<T> = Vec::new();
    let wneg = guard.max(T::zero()).sqrt();
    let nneg = (wneg / h).ceil().to_usize().unwrap_or(0);
    for i in (1..=nneg).rev() {
        let w = (T::nat(i) * h).min(wneg);
        nodes.push(-w * w);
    }
    nodes.push(T::zero());
    let wpos = lambda_max.max(T::zero()).sqrt();
    let npos = (wpos / h).ceil().to_usize().unwrap_or(0);
    for i in 1..=npos {
        let w = (T::nat(i) * h).min(wpos);
        nodes.push(w * w);
    }
    nodes.dedup();
    let g = |l: T| char_det(spec, l);
    let vals: Vec<T> = nodes.iter().map(|&l| g(l)).collect();
    let tol = T::lit(1e-14).max(T::epsilon() * T::lit(8.0));
    let mut roots: Vec<(T, bool)> = Vec::new();
    let mut warnings = Vec::new();
    for i in 0..nodes.len() {
        if vals[i] == T::zero() {
            roots.push((nodes[i], false));
        }
        if i + 1 < nodes.len() {
            let (a, b) = (vals[i], vals[i + 1]);
            if a != T::zero() && b != T::zero() && (a > T::zero()) != (b > T::zero()) {
                roots.push((bisect(g, nodes[i], nodes[i + 1], tol), false));
            }
        }
        // Touching without a sign change: local minimum of |Γ|.
        if i >= 1 && i + 1 < nodes.len() {
            let (a, m, b) = (vals[i - 1], vals[i], vals[i + 1]);
            let same = (a > T::zero()) == (m > T::zero()) && (m > T::zero()) == (b > T::zero());
            if same && m != T::zero() && m.abs() < a.abs() && m.abs() < b.abs() {
                let (x, fx) = golden_min(|l| g(l).abs(), nodes[i - 1], nodes[i + 1], 120);
                if fx <= T::lit(SIMPLE_TOL) * char_det_scale(spec, x) {
                    warnings.push(format!("near-double root at lambda = {x:.12e} (|Gamma| = {fx:.3e}, no sign change)"));
                    roots.push((x, true));
                }
            }
        }
    }
    roots.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite roots"));
    roots.dedup_by(|a, b| (a.0 - b.0).abs() <= T::lit(1e-12) * T::one().max(b.0.abs()));
    let mut eigenpairs = Vec::with_capacity(roots.len());
    for (k, &(l, touching)) in roots.iter().enumerate() {
        let mut p = make_pair(spec, k as i64, l, Vec::new());
        if touching {
            p.simple = false;
        }
        if !p.simple {
            warnings.push(format!("possibly non-simple eigenvalue at lambda = {l:.12e}"));
        }
        if l < T::zero() {
            warnings.push(format!("negative eigenvalue lambda = {l:.12e}"));
        }
        eigenpairs.push(p);
    }
    let robin = if validate_problem(spec).ok && spec.robin_part().hypothesis_level().quadratic() {
        robin_count(spec, lambda_max)
    } else {
        0
    };
    SpectrumWindow { lambda_max, lambda_min_guard: guard, eigenpairs, robin_count: robin, warnings }
}

/// Newton on `λ ↦ Γ(λ; t)` from `start`.
fn correct<T: Real>(spec: &ProblemSpec<T>, start: T, t: T) -> Option<T> {
    let mut l = start;
    let tol = T::lit(1e-14).max(T::epsilon() * T::lit(8.0));
    for _ in 0..40 {
        let gv = gamma_t(spec, l, t);
        let d = gamma_slope(spec, l, t);
        if d == T::zero() || !d.is_finite() {
            return None;
        }
        let step = gv / d;
        l = l - step;
        if !l.is_finite() {
            return None;
        }
        if step.abs() <= tol * T::one().max(l.abs()) {
            return Some(l);
        }
    }
    let m = bc_matrix(spec, l, t);
    (gamma_t(spec, l, t).abs() <= T::lit(1e-12) * row_scale(&m)).then_some(l)
}

/// Distance from `lambda` (a root at `t`) to the nearest other root within
/// `radius`, or `None` when there is none.
fn neighbor_distance<T: Real>(spec: &ProblemSpec<T>, lambda: T, t: T, radius: T) -> Option<T> {
    let slope = gamma_slope(spec, lambda, t);
    let defl = |mu: T| {
        let d = mu - lambda;
        if d.abs() <= fd_step(lambda) {
            slope
        } else {
            gamma_t(spec, mu, t) / d
        }
    };
    let n = 24;
    let pts: Vec<T> = (0..=n).map(|i| lambda - radius + radius * T::two() * T::nat(i) / T::nat(n)).collect();
    let vals: Vec<T> = pts.iter().map(|&p| defl(p)).collect();
    let mut best: Option<T> = None;
    for i in 0..n {
        let (a, b) = (vals[i], vals[i + 1]);
        if a == T::zero() || (a > T::zero()) != (b > T::zero()) {
            let r = bisect(defl, pts[i], pts[i + 1], T::lit(1e-12));
            let d = (r - lambda).abs();
            best = Some(best.map_or(d, |x: T| x.min(d)));
        }
    }
    best
}

/// Tracks `λ_k[t]` from the Robin anchor at `t = 0` to `t = 1`.
pub fn eigen_continuation<T: Real>(spec: &ProblemSpec<T>, k: i64) -> Result<Eigenpair<T>, SpectrumError> {
    let report = validate_problem(spec);
    if !report.ok {
        let msg = report.errors().map(|m| m.text.clone()).collect::<Vec<_>>().join("; ");
        return Err(SpectrumError::Invalid(msg));
    }
    if !report.level.quadratic() || k < 0 {
        return Err(SpectrumError::Hypotheses);
    }
    let anchor = reference_eigenvalue(&ReferenceKind::anchor(spec), k)?;
    let mut t = T::zero();
    let mut l = anchor;
    let mut path = vec![(t, l)];
    let single = spec.minus().is_single_point() && spec.plus().is_single_point();
    if single {
        path.push((T::one(), l));
        return Ok(make_pair(spec, k, l, path));
    }
    let mut dt = T::lit(DT_INIT);
    let mut prev: Option<(T, T)> = None;
    let mut gap = neighbor_distance(spec, l, t, T::lit(NEIGHBOR_GAP) * T::lit(4.0)).unwrap_or(T::infinity());
    while t < T::one() {
        let step = dt.min(T::one() - t);
        let t_new = if step >= T::one() - t { T::one() } else { t + step };
        let slope = match prev {
            Some((tp, lp)) => (l - lp) / (t - tp),
            None => {
                let h = T::lit(1e-6);
                let gt = (gamma_t(spec, l, t + h) - gamma_t(spec, l, t)) / h;
                let gl = gamma_slope(spec, l, t);
                if gl == T::zero() {
                    T::zero()
                } else {
                    -gt / gl
                }
            }
        };
        let pred = l + slope * (t_new - t);
        let accepted = correct(spec, pred, t_new).filter(|&ln| {
            let jump_ok = (ln - pred).abs() < T::lit(0.25) * gap.min(T::one() + (ln - l).abs());
            jump_ok && (ln - l).abs() < gap
        });
        match accepted {
            Some(ln) => {
                let radius = T::two() * (ln - l).abs() + T::lit(NEIGHBOR_GAP);
                let d = neighbor_distance(spec, ln, t_new, radius);
                if let Some(d) = d {
                    if d < T::lit(COLLISION) {
                        return Err(SpectrumError::Breakdown { t: t_new.as_f64(), lambda: ln.as_f64() });
                    }
                }
                prev = Some((t, l));
                t = t_new;
                l = ln;
                path.push((t, l));
                gap = d.unwrap_or(radius);
                if d.is_some_and(|d| d < T::lit(NEIGHBOR_GAP)) {
                    dt = (dt / T::two()).max(T::lit(DT_MIN) * T::lit(16.0));
                } else {
                    dt = (dt * T::lit(1.5)).min(T::lit(DT_MAX));
                }
            }
            None => {
                dt = dt / T::two();
                if dt < T::lit(DT_MIN) {
                    return Err(SpectrumError::StepTooSmall { t: t.as_f64(), dt_min: DT_MIN });
                }
            }
        }
    }
    Ok(make_pair(spec, k, l, path))
}

/// Continuation eigenpairs for `k = 0..=k_max`, computed in parallel and
/// returned in index order.
pub fn continuation_spectrum<T: Real>(spec: &ProblemSpec<T>, k_max: i64) -> Vec<Result<Eigenpair<T>, SpectrumError>> {
    (0..=k_max).into_par_iter().map(|k| eigen_continuation(spec, k)).collect()
}

/// Eigenpairs by continuation for every index whose eigenvalue is at most
/// `lambda_max`.
pub fn continuation_window<T: Real>(spec: &ProblemSpec<T>, lambda_max: T) -> Result<Vec<Eigenpair<T>>, SpectrumError> {
    let mut out = Vec::new();
    let batch = 8;
    let mut k0 = 0;
    loop {
        let res: Vec<_> = (k0..k0 + batch).into_par_iter().map(|k| eigen_continuation(spec, k)).collect();
        for r in res {
            let p = r?;
            if p.lambda > lambda_max {
                // Indices are ordered, but allow one overshoot before stopping
                // since continuation anchors interlace.
                let anchor = p.t_path.first().map(|x| x.1).unwrap_or(p.lambda);
                if anchor > lambda_max + T::lit(50.0) {
                    return Ok(out);
                }
                continue;
            }
            out.push(p);
        }
        k0 += batch;
        if k0 > 10_000 {
            return Ok(out);
        }
    }
}

/// `(Γ(λ), normalized slope)` for diagnostics.
pub fn gamma_report<T: Real>(spec: &ProblemSpec<T>, lambda: T) -> (T, T) {
    (char_det(spec, lambda), normalized_slope(spec, lambda, T::one()))
}
