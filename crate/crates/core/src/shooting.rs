//! Shooting solver for `−u″ = λf(u) + h(x)` with the multi-point boundary
//! conditions, multistart search and the nonresonance check.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::nodal::{FunctionTrace, SampledTrace};
use crate::nonlinearity::{ForcingTerm, NonlinearitySpec};
use crate::ode::{integrate_ivp, IvpOptions, OdeError, IVP_TOL};
use crate::problem::{BoundarySide, ProblemSpec};
use crate::reference::{reference_eigenfunction, ReferenceKind};
use crate::scalar::Real;
use crate::spectrum::eigen_scan;
use crate::trig::sup_norms;

/// Scaled residual accepted as a solution.
pub const RESIDUAL_TOL: f64 = 1e-8;
/// Jacobian condition number treated as singular.
pub const COND_MAX: f64 = 1e8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error("Newton iteration did not converge (best scaled residual {best:e} at a = {a}, b = {b})")]
    NoConvergence { best: f64, a: f64, b: f64 },
    #[error("shooting Jacobian is singular (condition {cond:e} at a = {a}, b = {b}); possible resonance")]
    SingularSystem { cond: f64, a: f64, b: f64 },
    #[error("integration failed: {0}")]
    Integration(#[from] OdeError),
    #[error("no solution found from {attempts} starting points")]
    NotFound { attempts: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions<T> {
    pub residual_tol: T,
    pub ivp_tol: T,
    pub max_iter: usize,
    pub max_halvings: usize,
    pub cond_max: T,
}

impl<T: Real> Default for SolveOptions<T> {
    fn default() -> Self {
        SolveOptions {
            residual_tol: T::lit(RESIDUAL_TOL),
            ivp_tol: T::lit(IVP_TOL),
            max_iter: 50,
            max_halvings: 30,
            cond_max: T::lit(COND_MAX),
        }
    }
}

/// `u(−1) = a`, `u′(−1) = b` and the resulting boundary residuals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootingState<T: Real> {
    pub a: T,
    pub b: T,
    pub lambda: T,
    pub residuals: (T, T),
    /// Per-side scale `1 + |α₀|‖u‖₀ + |β₀|‖u′‖₀`.
    pub scales: (T, T),
}

impl<T: Real> ShootingState<T> {
    pub fn scaled_residual(&self) -> T {
        (self.residuals.0.abs() / self.scales.0).max(self.residuals.1.abs() / self.scales.1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyCheck<T: Real> {
    /// `max |E(x) − m| / m` for `E = λF(u) + u′²`, `m` its median.
    pub deviation: T,
    /// `|m − |u′|₀²| / m`.
    pub slope_mismatch: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledSolution<T: Real> {
    pub trace: FunctionTrace<T>,
    pub shooting: ShootingState<T>,
    /// Present for `h ≡ 0`.
    pub energy: Option<EnergyCheck<T>>,
    /// `max |Δu′/Δx − u″(mid)| / (1 + |u″|₀)` over grid cells.
    pub collocation_residual: T,
    pub iterations: usize,
}

/// The boundary value problem with `f` and `h` fixed; `λ` varies per call.
#[derive(Debug, Clone)]
pub struct BvpSystem<'a, T: Real> {
    pub spec: &'a ProblemSpec<T>,
    pub nl: &'a NonlinearitySpec<T>,
    pub h: &'a ForcingTerm,
    pub ivp_tol: T,
    stops: Vec<T>,
    h_zero: bool,
}

fn side_residual<T: Real>(side: &BoundarySide<T>, at_end: (T, T), interior: &[(T, T)]) -> T {
    let mut r = side.alpha0 * at_end.0 + side.beta0 * at_end.1;
    for ((&al, &be), &(u, up)) in side.alpha.iter().zip(&side.beta).zip(interior) {
        r = r - al * u - be * up;
    }
    r
}

impl<'a, T: Real> BvpSystem<'a, T> {
    pub fn new(spec: &'a ProblemSpec<T>, nl: &'a NonlinearitySpec<T>, h: &'a ForcingTerm) -> Self {
        let stops = spec.minus().eta.iter().chain(&spec.plus().eta).copied().collect();
        BvpSystem { spec, nl, h, ivp_tol: T::lit(IVP_TOL), stops, h_zero: h.is_zero() }
    }

    pub fn with_tol(mut self, tol: T) -> Self {
        self.ivp_tol = tol;
        self
    }

    fn rhs(&self, lambda: T) -> impl Fn(T, T, T) -> T + '_ {
        move |x, u, _| {
            let g = lambda * self.nl.f(u);
            if self.h_zero {
                -g
            } else {
                -(g + self.h.h(x))
            }
        }
    }

    /// Integrates and evaluates both boundary residuals.
    pub fn shoot(&self, lambda: T, a: T, b: T) -> Result<ShootingState<T>, OdeError> {
        let res = integrate_ivp(self.rhs(lambda), a, b, &self.stops, &IvpOptions::light(self.ivp_tol))?;
        Ok(self.state(lambda, a, b, res.end, &res.at_stops, res.sup))
    }

    fn state(&self, lambda: T, a: T, b: T, end: (T, T), at: &[(T, T)], sup: (T, T)) -> ShootingState<T> {
        let m = self.spec.minus();
        let p = self.spec.plus();
        let rm = side_residual(m, (a, b), &at[..m.m()]);
        let rp = side_residual(p, end, &at[m.m()..]);
        let scale = |s: &BoundarySide<T>| T::one() + s.alpha0.abs() * sup.0 + s.beta0.abs() * sup.1;
        ShootingState { a, b, lambda, residuals: (rm, rp), scales: (scale(m), scale(p)) }
    }

    /// Dense trace of the trajectory from `(a, b)`.
    pub fn trace(&self, lambda: T, a: T, b: T) -> Result<(SampledTrace<T>, ShootingState<T>), OdeError> {
        let opts = IvpOptions { tol: self.ivp_tol, ..IvpOptions::default() };
        let res = integrate_ivp(self.rhs(lambda), a, b, &self.stops, &opts)?;
        let st = self.state(lambda, a, b, res.end, &res.at_stops, res.sup);
        Ok((res.trace.expect("dense output requested"), st))
    }

    /// Forward-difference Jacobian of the residuals in `(a, b)` and its
    /// condition number after row scaling.
    pub fn jacobian(&self, st: &ShootingState<T>) -> Result<([[T; 2]; 2], T), OdeError> {
        let mut j = [[T::zero(); 2]; 2];
        for col in 0..2 {
            let z = if col == 0 { st.a } else { st.b };
            let step = T::lit(1e-6) * (T::one() + z.abs());
            let (da, db) = if col == 0 { (step, T::zero()) } else { (T::zero(), step) };
            let s2 = self.shoot(st.lambda, st.a + da, st.b + db)?;
            j[0][col] = (s2.residuals.0 - st.residuals.0) / step;
            j[1][col] = (s2.residuals.1 - st.residuals.1) / step;
        }
        Ok((j, condition(&j, st.scales)))
    }

    /// Energy identity `λF(u) + u′² = const` on a trace (requires `h ≡ 0`).
    pub fn energy_check(&self, lambda: T, trace: &SampledTrace<T>) -> Option<EnergyCheck<T>> {
        if !self.h_zero {
            return None;
        }
        let mut e = Vec::with_capacity(trace.xs().len());
        let mut sup_up = T::zero();
        for (&u, &up) in trace.us().iter().zip(trace.ups()) {
            let fu = self.nl.big_f(u).ok()?;
            e.push(lambda * fu + up * up);
            sup_up = sup_up.max(up.abs());
        }
        let mut sorted = e.clone();
        sorted.sort_by(|p, q| p.partial_cmp(q).unwrap_or(std::cmp::Ordering::Equal));
        let med = sorted[sorted.len() / 2];
        if med.abs() == T::zero() {
            let dev = e.iter().fold(T::zero(), |m, v| m.max(v.abs()));
            return Some(EnergyCheck { deviation: dev, slope_mismatch: sup_up * sup_up });
        }
        let dev = e.iter().fold(T::zero(), |m, &v| m.max((v - med).abs())) / med.abs();
        Some(EnergyCheck { deviation: dev, slope_mismatch: (med - sup_up * sup_up).abs() / med.abs() })
    }

    /// Independent consistency of `u′` with `u″ = −λf(u) − h` at cell midpoints.
    pub fn collocation_residual(&self, lambda: T, trace: &SampledTrace<T>) -> T {
        let rhs = self.rhs(lambda);
        let (xs, ups) = (trace.xs(), trace.ups());
        let smax = trace.upps().iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let mut worst = T::zero();
        for i in 0..xs.len() - 1 {
            let mid = (xs[i] + xs[i + 1]) / T::two();
            let (u, up) = trace.eval(mid);
            let fd = (ups[i + 1] - ups[i]) / (xs[i + 1] - xs[i]);
            worst = worst.max((fd - rhs(mid, u, up)).abs());
        }
        worst / (T::one() + smax)
    }

    /// Packages an accepted state with its dense trace and checks.
    pub fn finish(&self, st: &ShootingState<T>, iterations: usize) -> Result<SampledSolution<T>, OdeError> {
        let (trace, full) = self.trace(st.lambda, st.a, st.b)?;
        let energy = self.energy_check(st.lambda, &trace);
        let collocation_residual = self.collocation_residual(st.lambda, &trace);
        Ok(SampledSolution { trace: FunctionTrace::Sampled(trace), shooting: full, energy, collocation_residual, iterations })
    }
}

/// `‖J‖_F² / |det J|` after dividing row `i` by `scales.i`.
pub fn condition<T: Real>(j: &[[T; 2]; 2], scales: (T, T)) -> T {
    let r0 = [j[0][0] / scales.0, j[0][1] / scales.0];
    let r1 = [j[1][0] / scales.1, j[1][1] / scales.1];
    let det = r0[0] * r1[1] - r0[1] * r1[0];
    let fro = r0[0] * r0[0] + r0[1] * r0[1] + r1[0] * r1[0] + r1[1] * r1[1];
    if det == T::zero() {
        T::infinity()
    } else {
        fro / det.abs()
    }
}

fn norm2<T: Real>(st: &ShootingState<T>) -> T {
    (st.residuals.0 / st.scales.0).hypot(st.residuals.1 / st.scales.1)
}

/// Damped Newton on `(a, b) ↦ (r⁻, r⁺)` at fixed `λ`.
pub fn solve_bvp<T: Real>(
    sys: &BvpSystem<'_, T>,
    lambda: T,
    guess: (T, T),
    opts: &SolveOptions<T>,
) -> Result<SampledSolution<T>, SolveError> {
    let mut st = sys.shoot(lambda, guess.0, guess.1)?;
    for it in 0..=opts.max_iter {
        if st.scaled_residual() <= opts.residual_tol {
            return Ok(sys.finish(&st, it)?);
        }
        if it == opts.max_iter {
            break;
        }
        let (j, cond) = sys.jacobian(&st)?;
        if !(cond <= opts.cond_max) {
            return Err(SolveError::SingularSystem { cond: cond.as_f64(), a: st.a.as_f64(), b: st.b.as_f64() });
        }
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let (r0, r1) = st.residuals;
        let da = -(j[1][1] * r0 - j[0][1] * r1) / det;
        let db = -(-j[1][0] * r0 + j[0][0] * r1) / det;
        let base = norm2(&st);
        let mut s = T::one();
        let mut next = None;
        for _ in 0..=opts.max_halvings {
            if let Ok(trial) = sys.shoot(lambda, st.a + s * da, st.b + s * db) {
                if norm2(&trial) < base {
                    next = Some(trial);
                    break;
                }
            }
            s = s / T::two();
        }
        match next {
            Some(n) => st = n,
            None => break,
        }
    }
    Err(SolveError::NoConvergence { best: st.scaled_residual().as_f64(), a: st.a.as_f64(), b: st.b.as_f64() })
}

/// Starting points: anchor eigenfunctions `k = 0..4` scaled to sup-norm
/// `10^{−2..2}` with both signs, the four unit vectors, and `n_random`
/// seeded points in `[−10, 10]²`.
pub fn multistart_guesses<T: Real>(spec: &ProblemSpec<T>, seed: u64, n_random: usize) -> Vec<(T, T)> {
    let mut out = Vec::new();
    let anchor = ReferenceKind::anchor(spec);
    for k in 0..4 {
        let Ok(psi) = reference_eigenfunction(&anchor, k) else { continue };
        let (nu, _) = sup_norms(&psi);
        if !(nu > T::zero()) {
            continue;
        }
        for p in -2..=2 {
            let amp = T::lit(10f64.powi(p)) / nu;
            for sgn in [T::one(), -T::one()] {
                out.push((sgn * amp * psi.a, sgn * amp * psi.b));
            }
        }
    }
    let (z, o) = (T::zero(), T::one());
    out.extend([(z, o), (z, -o), (o, z), (-o, z)]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..n_random {
        out.push((T::lit(rng.gen_range(-10.0..10.0)), T::lit(rng.gen_range(-10.0..10.0))));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultistartResult<T: Real> {
    /// Distinct solutions, in the order of the first guess reaching each.
    pub solutions: Vec<SampledSolution<T>>,
    pub attempts: usize,
    pub failures: usize,
}

/// Runs [`solve_bvp`] from every guess concurrently; the merge is ordered by
/// guess index so the result is independent of scheduling.
pub fn solve_multistart<T: Real>(
    sys: &BvpSystem<'_, T>,
    lambda: T,
    seed: u64,
    opts: &SolveOptions<T>,
) -> Result<MultistartResult<T>, SolveError> {
    let guesses = multistart_guesses(sys.spec, seed, 8);
    let results: Vec<_> = guesses.par_iter().map(|&g| solve_bvp(sys, lambda, g, opts)).collect();
    let mut solutions: Vec<SampledSolution<T>> = Vec::new();
    let mut failures = 0;
    for r in results {
        match r {
            Ok(s) => {
                let (a, b) = (s.shooting.a, s.shooting.b);
                let dup = solutions.iter().any(|o| {
                    let (p, q) = (o.shooting.a, o.shooting.b);
                    (a - p).abs() + (b - q).abs() <= T::lit(1e-6) * (T::one() + a.abs() + b.abs())
                });
                if !dup {
                    solutions.push(s);
                }
            }
            Err(_) => failures += 1,
        }
    }
    if solutions.is_empty() {
        return Err(SolveError::NotFound { attempts: guesses.len() });
    }
    Ok(MultistartResult { solutions, attempts: guesses.len(), failures })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NonresonanceStatus {
    Pass,
    Resonant,
    /// `f_∞ = ∞`.
    Unbounded,
    /// `α₀⁻ + α₀⁺ = 0`.
    OutOfScope,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonresonanceVerdict<T: Real> {
    pub status: NonresonanceStatus,
    pub finf: T,
    /// Nearest computed eigenvalue to `f_∞` as `(index, λ)`.
    pub nearest: Option<(usize, T)>,
    pub distance: Option<T>,
    pub reason: String,
}

/// Minimal separation of `f_∞` from the spectrum.
pub const RESONANCE_GAP: f64 = 1e-6;

pub fn nonresonance_check<T: Real>(spec: &ProblemSpec<T>, nl: &NonlinearitySpec<T>) -> NonresonanceVerdict<T> {
    let finf = nl.finf;
    let mk = |status, nearest, distance, reason: &str| NonresonanceVerdict {
        status,
        finf,
        nearest,
        distance,
        reason: reason.to_string(),
    };
    if !spec.strict_alpha_positive() {
        return mk(NonresonanceStatus::OutOfScope, None, None, "alpha0- + alpha0+ = 0 (Neumann-type problem)");
    }
    if !finf.is_finite() {
        return mk(NonresonanceStatus::Unbounded, None, None, "finf is infinite");
    }
    let margin = T::lit(10.0).max(finf);
    let window = eigen_scan(spec, finf + margin);
    let nearest = window
        .eigenpairs
        .iter()
        .enumerate()
        .map(|(i, e)| (i, e.lambda))
        .min_by(|p, q| (p.1 - finf).abs().partial_cmp(&(q.1 - finf).abs()).unwrap());
    match nearest {
        None => mk(NonresonanceStatus::Pass, None, None, "no eigenvalue in the window"),
        Some((i, l)) => {
            let d = (l - finf).abs();
            if d > T::lit(RESONANCE_GAP) {
                mk(NonresonanceStatus::Pass, Some((i, l)), Some(d), "finf is not an eigenvalue")
            } else {
                mk(NonresonanceStatus::Resonant, Some((i, l)), Some(d), "resonant: finf is an eigenvalue")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::Side;

    fn half() -> ProblemSpec<f64> {
        ProblemSpec::new(BoundarySide::dirichlet(Side::Minus), BoundarySide::dirichlet(Side::Plus).with_point(0.5, 0.0, 0.0))
    }

    #[test]
    fn linear_homogeneous_nonresonant() {
        let spec = half();
        let nl = NonlinearitySpec::linear();
        let h = ForcingTerm::zero();
        let sys = BvpSystem::new(&spec, &nl, &h);
        let s = solve_bvp(&sys, 1.0, (0.1, 0.1), &SolveOptions::default()).unwrap();
        let (nu, _) = s.trace.sup_norms();
        assert!(nu <= 1e-9);
    }

    #[test]
    fn eigenvalue_is_singular() {
        let spec = half();
        let w = eigen_scan(&spec, 5.0);
        let e = &w.eigenpairs[0];
        let nl = NonlinearitySpec::linear();
        let h = ForcingTerm::zero();
        let sys = BvpSystem::new(&spec, &nl, &h);
        let r = solve_bvp(&sys, e.lambda, (0.01, 0.1 * e.psi.b + 0.01), &SolveOptions::default());
        assert!(matches!(r, Err(SolveError::SingularSystem { .. })), "{r:?}");
    }

    #[test]
    fn nonresonance_examples() {
        let spec = half();
        let nl = NonlinearitySpec::new("xi/(1+abs(xi))", Some(1.0), Some(0.0)).unwrap();
        let v = nonresonance_check(&spec, &nl);
        assert_eq!(v.status, NonresonanceStatus::Pass);
        assert!((v.nearest.unwrap().1 - 1.737).abs() < 1e-3);
        let neu = ProblemSpec::new(BoundarySide::neumann(Side::Minus), BoundarySide::neumann(Side::Plus));
        assert_eq!(nonresonance_check(&neu, &nl).status, NonresonanceStatus::OutOfScope);
    }

    #[test]
    fn forced_saturating_problem() {
        let spec = half();
        let nl = NonlinearitySpec::new("xi/(1+abs(xi))", Some(1.0), Some(0.0)).unwrap();
        let h = ForcingTerm::new("x").unwrap();
        let sys = BvpSystem::new(&spec, &nl, &h);
        let r = solve_multistart(&sys, 1.0, 7, &SolveOptions::default()).unwrap();
        let s = &r.solutions[0];
        assert!(s.shooting.scaled_residual() <= 1e-8);
        assert!(s.collocation_residual <= 1e-7, "{}", s.collocation_residual);
    }

    #[test]
    fn energy_identity_holds() {
        let spec = half();
        let nl = NonlinearitySpec::new("xi*(1 + 3/(1+xi^2))", Some(4.0), Some(1.0)).unwrap();
        let h = ForcingTerm::zero();
        let sys = BvpSystem::new(&spec, &nl, &h);
        let (tr, _) = sys.trace(0.5, 0.0, 0.1).unwrap();
        let e = sys.energy_check(0.5, &tr).unwrap();
        assert!(e.deviation <= 1e-8, "{e:?}");
    }
}
