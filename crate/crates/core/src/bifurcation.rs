//! Continua of nontrivial solutions of `−u″ = λf(u)` and the nodal
//! solutions of `−u″ = f(u)` obtained where they cross `λ = 1`.
//!
//! Branches are followed by pseudo-arclength continuation in the
//! coordinates `y = (λ, ρ, θ)` with `(u(−1), u′(−1)) = e^ρ (cos θ, sin θ)`;
//! the residual is divided by `e^ρ`, so the trivial line sits at `ρ = −∞`
//! and a linear `f` gives exactly `λ ≡ λ_k`.

use serde::{Deserialize, Serialize};

use crate::nodal::{classify, Family, FunctionTrace, NodalClass, Sign, NODAL_TOL};
use crate::nonlinearity::{certify_hypotheses, Certificate, Envelope, ForcingTerm, NonlinearitySpec, XI_MAX};
use crate::ode::OdeError;
use crate::problem::ProblemSpec;
use crate::scalar::Real;
use crate::shooting::{solve_bvp, BvpSystem, SampledSolution, ShootingState, SolveOptions};
use crate::spectrum::{continuation_window, eigen_continuation, Eigenpair, SpectrumError};
use crate::trig::sup_norms;
use crate::conditions::{u_condition, ud_condition};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BranchError {
    #[error("seed correction failed for every seed amplitude {0:?}")]
    SeedFailure(Vec<f64>),
    #[error("branch from infinity needs 0 < finf < infinity (finf = {0})")]
    NoInfinity(f64),
    #[error("f0 = {0} must be positive and finite")]
    BadF0(f64),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    CrossedLambdaOne,
    AmplitudeCap,
    LambdaCap,
    PointCap,
    FoldCountCap,
    SecondaryBifurcationSuspected,
    ReturnedToTrivial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Origin<T: Real> {
    /// `(λ_k/f₀, 0)`.
    FromZero { lambda: T },
    /// `(λ_k/f_∞, ∞)`.
    FromInfinity { lambda: T },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint<T: Real> {
    pub lambda: T,
    pub shooting: ShootingState<T>,
    pub amplitude: T,
    pub nodal: Vec<NodalClass>,
    pub arclength: T,
    /// Relative deviation of `λF(u) + u′²` from its median.
    pub energy_dev: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch<T: Real> {
    pub k: i64,
    pub sign: Sign,
    pub origin: Origin<T>,
    pub lambda_k: T,
    pub points: Vec<BranchPoint<T>>,
    pub termination: Termination,
    pub seed_amplitude: T,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchOptions<T> {
    pub ds_init: T,
    pub ds_min: T,
    pub ds_max: T,
    pub amplitude_cap: T,
    /// Defaults to `10·max(f₀, f_∞, λ_k)` over the finite values.
    pub lambda_cap: Option<T>,
    pub lambda_floor: T,
    pub max_points: usize,
    pub fold_cap: usize,
    pub stop_at_one: bool,
    pub seed_eps: Vec<T>,
    pub seed_amplitudes: Vec<T>,
    pub solve: SolveOptions<T>,
}

impl<T: Real> Default for BranchOptions<T> {
    fn default() -> Self {
        BranchOptions {
            ds_init: T::lit(1e-2),
            ds_min: T::lit(1e-5),
            ds_max: T::lit(0.2),
            amplitude_cap: T::lit(1e6),
            lambda_cap: None,
            lambda_floor: T::lit(1e-6),
            max_points: 10_000,
            fold_cap: 20,
            stop_at_one: true,
            seed_eps: vec![T::lit(1e-3), T::lit(1e-4), T::lit(1e-5)],
            seed_amplitudes: vec![T::lit(1e2), T::lit(1e3), T::lit(1e4)],
            solve: SolveOptions::default(),
        }
    }
}

type Y<T> = [T; 3];

/// Acceptance bound on the amplitude-scaled residual `G = R/e^ρ`.
const G_TOL: f64 = 1e-10;

fn to_ab<T: Real>(y: &Y<T>) -> (T, T) {
    let r = y[1].exp();
    (r * y[2].cos(), r * y[2].sin())
}

fn norm3<T: Real>(v: &Y<T>) -> T {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Solves `m·x = rhs` for a 3×3 system by partial pivoting.
fn solve3<T: Real>(mut m: [[T; 3]; 3], mut rhs: Y<T>) -> Option<Y<T>> {
    for c in 0..3 {
        let p = (c..3).max_by(|&i, &j| m[i][c].abs().partial_cmp(&m[j][c].abs()).unwrap())?;
        if m[p][c] == T::zero() {
            return None;
        }
        m.swap(c, p);
        rhs.swap(c, p);
        for r in c + 1..3 {
            let f = m[r][c] / m[c][c];
            for k in c..3 {
                m[r][k] = m[r][k] - f * m[c][k];
            }
            rhs[r] = rhs[r] - f * rhs[c];
        }
    }
    let mut x = [T::zero(); 3];
    for c in (0..3).rev() {
        let mut s = rhs[c];
        for k in c + 1..3 {
            s = s - m[c][k] * x[k];
        }
        x[c] = s / m[c][c];
    }
    Some(x)
}

struct Tracer<'a, T: Real> {
    sys: BvpSystem<'a, T>,
    opts: &'a BranchOptions<T>,
}

/// Scaled residual `G = R/e^ρ` with the acceptance ratio
/// `max |R_ν|/scale_ν`.
struct Eval<T: Real> {
    g: [T; 2],
    st: ShootingState<T>,
}

impl<'a, T: Real> Tracer<'a, T> {
    fn eval(&self, y: &Y<T>) -> Result<Eval<T>, OdeError> {
        let (a, b) = to_ab(y);
        let st = self.sys.shoot(y[0], a, b)?;
        let r = y[1].exp();
        Ok(Eval { g: [st.residuals.0 / r, st.residuals.1 / r], st })
    }

    /// Rows `∂G/∂y` by forward differences.
    fn jac(&self, y: &Y<T>, base: &Eval<T>) -> Result<[[T; 3]; 2], OdeError> {
        let mut j = [[T::zero(); 3]; 2];
        for c in 0..3 {
            let h = T::lit(1e-7) * (T::one() + y[c].abs());
            let mut yp = *y;
            yp[c] = yp[c] + h;
            let e = self.eval(&yp)?;
            j[0][c] = (e.g[0] - base.g[0]) / h;
            j[1][c] = (e.g[1] - base.g[1]) / h;
        }
        Ok(j)
    }

    /// Absolute test on `R` and amplitude-relative test on `G`; the first
    /// alone is slack near the trivial line.
    fn accepted(&self, e: &Eval<T>) -> bool {
        e.st.scaled_residual() <= self.opts.solve.residual_tol && e.g[0].abs().max(e.g[1].abs()) <= T::lit(G_TOL)
    }

    /// Newton on `(λ, θ)` with `ρ` frozen.
    fn seed_correct(&self, mut y: Y<T>) -> Option<(Y<T>, Eval<T>)> {
        let mut e = self.eval(&y).ok()?;
        for _ in 0..40 {
            let j = self.jac(&y, &e).ok()?;
            let det = j[0][0] * j[1][2] - j[0][2] * j[1][0];
            if det == T::zero() {
                return None;
            }
            let dl = -(j[1][2] * e.g[0] - j[0][2] * e.g[1]) / det;
            let dt = -(-j[1][0] * e.g[0] + j[0][0] * e.g[1]) / det;
            let base = e.g[0].hypot(e.g[1]);
            let mut s = T::one();
            let mut moved = false;
            for _ in 0..30 {
                let mut yt = y;
                yt[0] = yt[0] + s * dl;
                yt[2] = yt[2] + s * dt;
                if yt[0] > T::zero() {
                    if let Ok(et) = self.eval(&yt) {
                        if et.g[0].hypot(et.g[1]) < base {
                            y = yt;
                            e = et;
                            moved = true;
                            break;
                        }
                    }
                }
                s = s / T::two();
            }
            let small = (dl.abs() + dt.abs()) <= T::lit(1e-12) * (T::one() + y[0].abs() + y[2].abs());
            if self.accepted(&e) && (small || !moved) {
                return Some((y, e));
            }
            if !moved {
                return None;
            }
        }
        self.accepted(&e).then_some((y, e))
    }

    /// Newton on the extended system `G = 0`, `⟨y − pred, t⟩ = 0`.
    fn correct(&self, pred: Y<T>, t: &Y<T>) -> Option<(Y<T>, Eval<T>, usize)> {
        let mut y = pred;
        let mut e = self.eval(&y).ok()?;
        for it in 0..12 {
            let j = self.jac(&y, &e).ok()?;
            let c = (y[0] - pred[0]) * t[0] + (y[1] - pred[1]) * t[1] + (y[2] - pred[2]) * t[2];
            let m = [j[0], j[1], *t];
            let d = solve3(m, [-e.g[0], -e.g[1], -c])?;
            for i in 0..3 {
                y[i] = y[i] + d[i];
            }
            if !(y[0] > T::zero()) {
                return None;
            }
            e = self.eval(&y).ok()?;
            let small = norm3(&d) <= T::lit(1e-11) * (T::one() + norm3(&y));
            if self.accepted(&e) && small {
                return Some((y, e, it + 1));
            }
        }
        self.accepted(&e).then_some((y, e, 12))
    }

    fn point(&self, y: &Y<T>, st: ShootingState<T>, arclength: T) -> Result<BranchPoint<T>, OdeError> {
        let (trace, _) = self.sys.trace(st.lambda, st.a, st.b)?;
        let energy = self.sys.energy_check(st.lambda, &trace).map(|e| e.deviation).unwrap_or(T::zero());
        let ft = FunctionTrace::Sampled(trace);
        let (amp, _) = ft.sup_norms();
        let nodal = classify(&ft, T::lit(NODAL_TOL)).memberships();
        Ok(BranchPoint { lambda: y[0], shooting: st, amplitude: amp, nodal, arclength, energy_dev: energy })
    }
}

fn eigen<T: Real>(spec: &ProblemSpec<T>, k: i64) -> Result<(Eigenpair<T>, T, T), BranchError> {
    let e = eigen_continuation(spec, k)?;
    let (nu, _) = sup_norms(&e.psi);
    Ok((e.clone(), e.psi.a / nu, e.psi.b / nu))
}

fn lambda_cap<T: Real>(nl: &NonlinearitySpec<T>, lambda_k: T, opts: &BranchOptions<T>) -> T {
    opts.lambda_cap.unwrap_or_else(|| {
        let mut m = lambda_k;
        for v in [nl.f0, nl.finf] {
            if v.is_finite() {
                m = m.max(v);
            }
        }
        T::lit(10.0) * m
    })
}

#[allow(clippy::too_many_arguments)]
fn trace_branch<T: Real>(
    tracer: &Tracer<'_, T>,
    k: i64,
    sign: Sign,
    origin: Origin<T>,
    lambda_k: T,
    y0: Y<T>,
    e0: Eval<T>,
    growing: bool,
    cap: T,
    trivial_points: &[T],
    seed_amplitude: T,
    notes: Vec<String>,
) -> Branch<T> {
    let opts = tracer.opts;
    let mut notes = notes;
    let mk = |points, termination, notes| Branch { k, sign, origin, lambda_k, points, termination, seed_amplitude, notes };
    let mut points = Vec::new();
    match tracer.point(&y0, e0.st, T::zero()) {
        Ok(p) => points.push(p),
        Err(err) => {
            notes.push(format!("seed trace failed: {err}"));
            return mk(points, Termination::SecondaryBifurcationSuspected, notes);
        }
    }
    // Initial tangent: null vector of ∂G/∂y, oriented along ρ.
    let tangent = tracer.jac(&y0, &e0).ok().map(|j| {
        let c = [
            j[0][1] * j[1][2] - j[0][2] * j[1][1],
            j[0][2] * j[1][0] - j[0][0] * j[1][2],
            j[0][0] * j[1][1] - j[0][1] * j[1][0],
        ];
        let n = norm3(&c);
        [c[0] / n, c[1] / n, c[2] / n]
    });
    let Some(mut t) = tangent.filter(|t| t.iter().all(|v| v.is_finite())) else {
        notes.push("degenerate initial tangent".into());
        return mk(points, Termination::SecondaryBifurcationSuspected, notes);
    };
    let want = if growing { T::one() } else { -T::one() };
    if t[1] * want < T::zero() {
        t = [-t[0], -t[1], -t[2]];
    }
    let mut y = y0;
    let mut ds = opts.ds_init;
    let mut s = T::zero();
    let mut folds = 0;
    let mut last_dl = T::zero();
    loop {
        if points.len() >= opts.max_points {
            return mk(points, Termination::PointCap, notes);
        }
        let pred = [y[0] + ds * t[0], y[1] + ds * t[1], y[2] + ds * t[2]];
        let step = tracer.correct(pred, &t).filter(|(yn, _, _)| {
            let d = [yn[0] - y[0], yn[1] - y[1], yn[2] - y[2]];
            let n = norm3(&d);
            let cos = (d[0] * t[0] + d[1] * t[1] + d[2] * t[2]) / n;
            n <= T::two() * ds && cos > T::lit(0.9)
        });
        let Some((yn, en, iters)) = step else {
            ds = ds / T::two();
            if ds < opts.ds_min {
                notes.push(format!("corrector failed below ds_min at lambda = {}", y[0]));
                return mk(points, Termination::SecondaryBifurcationSuspected, notes);
            }
            continue;
        };
        let d = [yn[0] - y[0], yn[1] - y[1], yn[2] - y[2]];
        let n = norm3(&d);
        s = s + n;
        let dl = d[0];
        // λ-increments below this are noise on a vertical branch.
        if dl.abs() > T::lit(1e-6) * n {
            if last_dl != T::zero() && dl * last_dl < T::zero() {
                folds += 1;
            }
            last_dl = dl;
        }
        let prev_lambda = y[0];
        y = yn;
        t = [d[0] / n, d[1] / n, d[2] / n];
        match tracer.point(&y, en.st, s) {
            Ok(p) => points.push(p),
            Err(err) => {
                notes.push(format!("trace failed at lambda = {}: {err}", y[0]));
                return mk(points, Termination::SecondaryBifurcationSuspected, notes);
            }
        }
        let amp = points.last().unwrap().amplitude;
        if opts.stop_at_one && (prev_lambda - T::one()) * (y[0] - T::one()) <= T::zero() && prev_lambda != T::one() {
            return mk(points, Termination::CrossedLambdaOne, notes);
        }
        if amp > opts.amplitude_cap {
            return mk(points, Termination::AmplitudeCap, notes);
        }
        if y[0] > cap || y[0] < opts.lambda_floor {
            return mk(points, Termination::LambdaCap, notes);
        }
        if folds >= opts.fold_cap {
            return mk(points, Termination::FoldCountCap, notes);
        }
        if amp < T::lit(1e-5) && points.len() > 10 {
            if let Some(j) = trivial_points.iter().position(|&l| (l - y[0]).abs() <= T::lit(1e-3)) {
                notes.push(format!("approaches the trivial point lambda_{j}/f0 = {}", trivial_points[j]));
            }
            return mk(points, Termination::ReturnedToTrivial, notes);
        }
        ds = if iters <= 3 { (ds * T::lit(1.5)).min(opts.ds_max) } else { ds };
    }
}

/// Trivial points `λ_j/f₀` for `λ_j` up to `lambda_max·f₀`.
fn trivial_points<T: Real>(spec: &ProblemSpec<T>, nl: &NonlinearitySpec<T>, lambda_max: T) -> Vec<T> {
    continuation_window(spec, lambda_max * nl.f0)
        .map(|v| v.into_iter().map(|e| e.lambda / nl.f0).collect())
        .unwrap_or_default()
}

/// Continuum bifurcating from `(λ_k/f₀, 0)` in the direction `sign·ψ_k`.
pub fn branch_from_zero<T: Real>(
    spec: &ProblemSpec<T>,
    nl: &NonlinearitySpec<T>,
    k: i64,
    sign: Sign,
    opts: &BranchOptions<T>,
) -> Result<Branch<T>, BranchError> {
    if !(nl.f0 > T::zero() && nl.f0.is_finite()) {
        return Err(BranchError::BadF0(nl.f0.as_f64()));
    }
    let (e, pa, pb) = eigen(spec, k)?;
    let h = ForcingTerm::zero();
    let tracer = Tracer { sys: BvpSystem::new(spec, nl, &h), opts };
    let l0 = e.lambda / nl.f0;
    let sg = sign.factor::<T>();
    let theta = (sg * pb).atan2(sg * pa);
    let norm = pa.hypot(pb);
    let cap = lambda_cap(nl, e.lambda, opts);
    let triv = trivial_points(spec, nl, cap);
    for &eps in &opts.seed_eps {
        let y = [l0, (eps * norm).ln(), theta];
        if let Some((ys, es)) = tracer.seed_correct(y) {
            let origin = Origin::FromZero { lambda: l0 };
            return Ok(trace_branch(&tracer, k, sign, origin, e.lambda, ys, es, true, cap, &triv, eps, vec![]));
        }
    }
    Err(BranchError::SeedFailure(opts.seed_eps.iter().map(|v| v.as_f64()).collect()))
}

/// Continuum from `(λ_k/f_∞, ∞)`, seeded at large amplitude and followed
/// toward decreasing amplitude.
pub fn branch_from_infinity<T: Real>(
    spec: &ProblemSpec<T>,
    nl: &NonlinearitySpec<T>,
    k: i64,
    sign: Sign,
    opts: &BranchOptions<T>,
) -> Result<Branch<T>, BranchError> {
    if !(nl.finf > T::zero() && nl.finf.is_finite()) {
        return Err(BranchError::NoInfinity(nl.finf.as_f64()));
    }
    let (e, pa, pb) = eigen(spec, k)?;
    let h = ForcingTerm::zero();
    let tracer = Tracer { sys: BvpSystem::new(spec, nl, &h), opts };
    let l0 = e.lambda / nl.finf;
    let sg = sign.factor::<T>();
    let theta = (sg * pb).atan2(sg * pa);
    let norm = pa.hypot(pb);
    let cap = lambda_cap(nl, e.lambda, opts);
    let triv = if nl.f0 > T::zero() && nl.f0.is_finite() { trivial_points(spec, nl, cap) } else { vec![] };
    let mut bounded = opts.clone();
    bounded.amplitude_cap = bounded.amplitude_cap.max(T::lit(10.0) * *opts.seed_amplitudes.last().unwrap());
    let tracer = Tracer { sys: tracer.sys, opts: &bounded };
    for &amp in &opts.seed_amplitudes {
        let y = [l0, (amp * norm).ln(), theta];
        if let Some((ys, es)) = tracer.seed_correct(y) {
            let origin = Origin::FromInfinity { lambda: l0 };
            return Ok(trace_branch(&tracer, k, sign, origin, e.lambda, ys, es, false, cap, &triv, amp, vec![]));
        }
    }
    Err(BranchError::SeedFailure(opts.seed_amplitudes.iter().map(|v| v.as_f64()).collect()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditViolation<T: Real> {
    pub index: usize,
    pub lambda: T,
    pub found: Vec<NodalClass>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport<T: Real> {
    /// The class every gated point must carry.
    pub reference: Option<NodalClass>,
    pub gate: T,
    pub below: bool,
    pub checked: usize,
    pub violations: Vec<AuditViolation<T>>,
}

/// Checks that every point with `λ` on the certified side of `gate` keeps
/// the first point's class in `family` (the first listed family if `None`).
pub fn branch_nodal_audit<T: Real>(branch: &Branch<T>, gate: T, below: bool, family: Option<Family>) -> AuditReport<T> {
    let first = branch.points.first();
    let reference = first.and_then(|p| match family {
        Some(f) => p.nodal.iter().copied().find(|c| c.family == f),
        None => [Family::T, Family::S, Family::R]
            .into_iter()
            .find_map(|f| p.nodal.iter().copied().find(|c| c.family == f)),
    });
    let mut checked = 0;
    let mut violations = Vec::new();
    for (i, p) in branch.points.iter().enumerate() {
        let gated = if below { p.lambda < gate } else { p.lambda > gate };
        if !gated {
            continue;
        }
        checked += 1;
        if reference.is_none_or(|r| !p.nodal.contains(&r)) {
            violations.push(AuditViolation { index: i, lambda: p.lambda, found: p.nodal.clone() });
        }
    }
    AuditReport { reference, gate, below, checked, violations }
}

/// Which crossing `f_∞ < λ_k < f₀` or `f₀ < λ_k < f_∞` holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Crossing {
    InfBelow,
    InfAbove,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tracer0 {
    FromZero,
    FromInfinity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Route<T: Real> {
    pub crossing: Crossing,
    pub family: Family,
    pub tracer: Tracer0,
    pub gamma: T,
    pub envelope: Envelope,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodalSolution<T: Real> {
    pub sign: Sign,
    pub solution: SampledSolution<T>,
    pub class: Option<NodalClass>,
    pub memberships: Vec<NodalClass>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodalSolutions<T: Real> {
    pub k: i64,
    pub lambda_k: T,
    pub route: Route<T>,
    pub certificate: Certificate<T>,
    pub solutions: Vec<NodalSolution<T>>,
    pub branches: Vec<Branch<T>>,
    pub audits: Vec<AuditReport<T>>,
    /// Per-sign failures (`NoCrossing`, seed failures) when only part of the
    /// pair was found.
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NodalSolveError {
    #[error("hypotheses not met: {}", .0.join("; "))]
    HypothesisReport(Vec<String>),
    #[error("no branch crossed lambda = 1: {}", .0.join("; "))]
    NoCrossing(Vec<String>),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error("certificate evaluation failed: {0}")]
    Certificate(String),
}

/// Window margin for the uniqueness check over other eigenfunctions.
const UNIQUENESS_MARGIN: f64 = 50.0;

fn route_hypotheses<T: Real>(
    spec: &ProblemSpec<T>,
    nl: &NonlinearitySpec<T>,
    k: i64,
    route: &Route<T>,
    window: &[Eigenpair<T>],
    failed: &mut Vec<String>,
) -> Option<Certificate<T>> {
    let fam = route.family;
    let target_k = if fam == Family::T { k + 1 } else { k };
    let classes: Vec<Vec<NodalClass>> =
        window.iter().map(|e| classify(&FunctionTrace::Closed(e.psi), T::lit(NODAL_TOL)).memberships()).collect();
    let in_family = |i: usize| classes[i].iter().any(|c| c.family == fam && c.k == target_k);
    let ok_before = failed.len();
    match window.iter().position(|e| e.k == k) {
        Some(i) if in_family(i) => {}
        _ => failed.push(format!("psi_{k} is not in {fam}_{target_k}")),
    }
    for (i, e) in window.iter().enumerate() {
        if e.k == k {
            continue;
        }
        let relevant = match (route.crossing, fam) {
            (Crossing::InfBelow, Family::T) => e.lambda <= nl.f0,
            (Crossing::InfBelow, _) => e.lambda >= nl.finf,
            (Crossing::InfAbove, Family::T) => e.lambda <= nl.finf,
            (Crossing::InfAbove, _) => e.lambda >= nl.f0,
        };
        if relevant && in_family(i) {
            failed.push(format!("psi_{} is also in {fam}_{target_k}", e.k));
        }
    }
    let one = T::one();
    for side in [spec.minus(), spec.plus()] {
        let ok = match route.envelope {
            Envelope::FSmall => ud_condition(side, one, route.gamma),
            Envelope::FBig => u_condition(side, one, route.gamma),
        };
        if !ok {
            let which = if route.envelope == Envelope::FSmall { "derivative" } else { "value" };
            failed.push(format!("{which} nonvanishing condition fails on the {} side at lambda = 1, gamma = {}", side.side, route.gamma));
        }
    }
    let cert = match certify_hypotheses(nl, route.gamma, route.envelope, T::lit(XI_MAX)) {
        Ok(c) => c,
        Err(e) => {
            failed.push(format!("certificate: {e}"));
            return None;
        }
    };
    failed.extend(cert.reasons.iter().cloned());
    (failed.len() == ok_before).then_some(cert)
}

/// Nodal solutions `u_k^±` of `−u″ = f(u)` at `λ = 1` from the branch that
/// crosses `λ = 1`.
pub fn nodal_solutions_at_one<T: Real>(
    spec: &ProblemSpec<T>,
    nl: &NonlinearitySpec<T>,
    k: i64,
    opts: &BranchOptions<T>,
) -> Result<NodalSolutions<T>, NodalSolveError> {
    let e = eigen_continuation(spec, k)?;
    let lk = e.lambda;
    let (f0, finf) = (nl.f0, nl.finf);
    let crossing = if finf >= T::zero() && finf < lk && lk < f0 {
        Crossing::InfBelow
    } else if f0 < lk && lk < finf {
        Crossing::InfAbove
    } else {
        return Err(NodalSolveError::HypothesisReport(vec![format!(
            "no eigenvalue crossed: lambda_{k} = {lk} is not strictly between f0 = {f0} and finf = {finf}"
        )]));
    };
    let routes: Vec<Route<T>> = match crossing {
        Crossing::InfBelow => vec![
            Route { crossing, family: Family::T, tracer: Tracer0::FromZero, gamma: f0, envelope: Envelope::FSmall },
            Route { crossing, family: Family::S, tracer: Tracer0::FromInfinity, gamma: finf, envelope: Envelope::FBig },
        ],
        Crossing::InfAbove => vec![
            Route { crossing, family: Family::S, tracer: Tracer0::FromZero, gamma: f0, envelope: Envelope::FBig },
            Route { crossing, family: Family::T, tracer: Tracer0::FromInfinity, gamma: finf, envelope: Envelope::FSmall },
        ],
    };
    let mut top = f0.max(lk);
    if finf.is_finite() {
        top = top.max(finf);
    }
    let window = continuation_window(spec, top * T::two() + T::lit(UNIQUENESS_MARGIN))?;
    let mut failed = Vec::new();
    let mut chosen = None;
    for route in routes {
        if !(route.gamma > T::zero() && route.gamma.is_finite()) {
            failed.push(format!("{} route needs 0 < gamma < infinity (gamma = {})", route.family, route.gamma));
            continue;
        }
        if route.tracer == Tracer0::FromInfinity && !(finf > T::zero() && finf.is_finite()) {
            failed.push(format!("{} route needs a finite positive finf", route.family));
            continue;
        }
        if let Some(cert) = route_hypotheses(spec, nl, k, &route, &window, &mut failed) {
            chosen = Some((route, cert));
            break;
        }
    }
    let Some((route, certificate)) = chosen else {
        return Err(NodalSolveError::HypothesisReport(failed));
    };
    let below = matches!(
        (route.crossing, route.tracer),
        (Crossing::InfBelow, Tracer0::FromZero) | (Crossing::InfAbove, Tracer0::FromInfinity)
    );
    let mut bopts = opts.clone();
    bopts.stop_at_one = true;
    let run = |sign: Sign| match route.tracer {
        Tracer0::FromZero => branch_from_zero(spec, nl, k, sign, &bopts),
        Tracer0::FromInfinity => branch_from_infinity(spec, nl, k, sign, &bopts),
    };
    let (bp, bm) = rayon::join(|| run(Sign::Plus), || run(Sign::Minus));
    let h = ForcingTerm::zero();
    let sys = BvpSystem::new(spec, nl, &h);
    let mut solutions = Vec::new();
    let mut branches = Vec::new();
    let mut audits = Vec::new();
    let mut failures = Vec::new();
    for (sign, br) in [(Sign::Plus, bp), (Sign::Minus, bm)] {
        let br = match br {
            Ok(b) => b,
            Err(e) => {
                failures.push(format!("{sign}: {e}"));
                continue;
            }
        };
        audits.push(branch_nodal_audit(&br, T::one(), below, Some(route.family)));
        if br.termination != Termination::CrossedLambdaOne {
            failures.push(format!("{sign}: branch ended with {:?} after {} points", br.termination, br.points.len()));
            branches.push(br);
            continue;
        }
        let n = br.points.len();
        let (p, q) = (&br.points[n - 2], &br.points[n - 1]);
        // Secant in λ between the straddling points, then Newton at λ = 1.
        let w = (T::one() - p.lambda) / (q.lambda - p.lambda);
        let guess = (
            p.shooting.a + w * (q.shooting.a - p.shooting.a),
            p.shooting.b + w * (q.shooting.b - p.shooting.b),
        );
        match solve_bvp(&sys, T::one(), guess, &opts.solve) {
            Ok(sol) => {
                let memberships = classify(&sol.trace, T::lit(NODAL_TOL)).memberships();
                let class = memberships.iter().copied().find(|c| c.family == route.family);
                solutions.push(NodalSolution { sign, solution: sol, class, memberships });
            }
            Err(e) => failures.push(format!("{sign}: polish at lambda = 1 failed: {e}")),
        }
        branches.push(br);
    }
    if solutions.is_empty() {
        return Err(NodalSolveError::NoCrossing(failures));
    }
    Ok(NodalSolutions { k, lambda_k: lk, route, certificate, solutions, branches, audits, failures })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{BoundarySide, Side};

    fn half() -> ProblemSpec<f64> {
        ProblemSpec::new(BoundarySide::dirichlet(Side::Minus), BoundarySide::dirichlet(Side::Plus).with_point(0.5, 0.0, 0.0))
    }

    #[test]
    fn linear_branch_is_vertical() {
        let spec = half();
        let nl = NonlinearitySpec::linear();
        let b = branch_from_zero(&spec, &nl, 0, Sign::Plus, &BranchOptions::default()).unwrap();
        let lk = b.lambda_k;
        assert_eq!(b.termination, Termination::AmplitudeCap);
        for p in &b.points {
            assert!((p.lambda - lk).abs() <= 1e-8 * lk, "{} vs {lk}", p.lambda);
        }
    }

    #[test]
    fn crossing_pipeline() {
        let spec = half();
        let nl = NonlinearitySpec::new("xi*(1 + 3/(1+xi^2))", Some(4.0), Some(1.0)).unwrap();
        let r = nodal_solutions_at_one(&spec, &nl, 0, &BranchOptions::default()).unwrap();
        assert_eq!(r.solutions.len(), 2, "{:?}", r.failures);
        for s in &r.solutions {
            let c = s.class.unwrap();
            assert_eq!((c.family, c.k, c.sign), (Family::T, 1, s.sign));
            assert!(s.solution.shooting.scaled_residual() <= 1e-8);
        }
        for a in &r.audits {
            assert!(a.violations.is_empty(), "{a:?}");
        }
        let bad = nodal_solutions_at_one(&spec, &nl, 1, &BranchOptions::default());
        assert!(matches!(bad, Err(NodalSolveError::HypothesisReport(_))));
    }
}
