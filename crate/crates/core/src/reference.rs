//! Eigenvalues of separated (single-point) problems.
//!
//! Robin problems are solved through the phase equation
//! `2ω + δ⁻(ω) + δ⁺(ω) = (k+1)π` with `δ^ν = atan2(|β₀^ν|ω, α₀^ν) ∈ [0, π/2]`,
//! whose left side is strictly increasing; the root for index `k` lies in
//! `[kπ/2, (k+1)π/2]`, i.e. between the Neumann and Dirichlet values.

use serde::{Deserialize, Serialize};

use crate::problem::{BoundarySide, ProblemSpec, Side};
use crate::scalar::Real;
use crate::trig::{sup_norms, TrigSolution};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReferenceError {
    #[error("index k = {k} is not defined for {kind}")]
    InvalidIndex { kind: &'static str, k: i64 },
    #[error("Robin parameters ({alpha0}, {beta0}) on the {side} side violate alpha0 >= 0, alpha0 + |beta0| > 0 or the sign condition")]
    InvalidRobin { side: Side, alpha0: f64, beta0: f64 },
}

/// Coefficients `(α₀, β₀)` of `α₀u(ν) + β₀u′(ν) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Robin<T: Real> {
    pub alpha0: T,
    pub beta0: T,
}

impl<T: Real> Robin<T> {
    pub fn new(alpha0: T, beta0: T) -> Self {
        Robin { alpha0, beta0 }
    }

    pub fn dirichlet() -> Self {
        Robin::new(T::one(), T::zero())
    }

    /// Neumann with `β₀` signed for `side`.
    pub fn neumann(side: Side) -> Self {
        match side {
            Side::Minus => Robin::new(T::zero(), -T::one()),
            Side::Plus => Robin::new(T::zero(), T::one()),
        }
    }

    pub fn of_side(side: &BoundarySide<T>) -> Self {
        Robin::new(side.alpha0, side.beta0)
    }

    fn check(&self, side: Side) -> Result<(), ReferenceError> {
        let sign = match side {
            Side::Minus => self.beta0 <= T::zero(),
            Side::Plus => self.beta0 >= T::zero(),
        };
        let ok = self.alpha0.is_finite()
            && self.beta0.is_finite()
            && self.alpha0 >= T::zero()
            && self.alpha0 + self.beta0.abs() > T::zero()
            && sign;
        if ok {
            Ok(())
        } else {
            Err(ReferenceError::InvalidRobin { side, alpha0: self.alpha0.as_f64(), beta0: self.beta0.as_f64() })
        }
    }

    /// `δ(ω) = atan2(|β₀|ω, α₀)` and its derivative in `ω`.
    fn phase(&self, w: T) -> (T, T) {
        let c = self.beta0.abs();
        let d = (c * w).atan2(self.alpha0);
        let den = self.alpha0 * self.alpha0 + c * c * w * w;
        let dd = if den > T::zero() { c * self.alpha0 / den } else { T::zero() };
        (d, dd)
    }
}

/// Which separated problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ReferenceKind<T: Real> {
    Dirichlet,
    Neumann,
    /// Dirichlet at `−1`, Neumann at `+1`.
    Mixed,
    /// Robin at `−1`, Dirichlet at `+1`.
    RobinDirichlet { minus: Robin<T> },
    /// Robin at `−1`, Neumann at `+1`.
    RobinNeumann { minus: Robin<T> },
    RobinRobin { minus: Robin<T>, plus: Robin<T> },
}

impl<T: Real> ReferenceKind<T> {
    pub fn name(&self) -> &'static str {
        match self {
            ReferenceKind::Dirichlet => "Dirichlet",
            ReferenceKind::Neumann => "Neumann",
            ReferenceKind::Mixed => "Mixed",
            ReferenceKind::RobinDirichlet { .. } => "RobinDirichlet",
            ReferenceKind::RobinNeumann { .. } => "RobinNeumann",
            ReferenceKind::RobinRobin { .. } => "RobinRobin",
        }
    }

    /// The Robin–Robin anchor problem of `spec` (interior terms dropped).
    pub fn anchor(spec: &ProblemSpec<T>) -> Self {
        ReferenceKind::RobinRobin { minus: Robin::of_side(spec.minus()), plus: Robin::of_side(spec.plus()) }
    }

    /// Separated conditions `(minus, plus)` of this kind.
    pub fn conditions(&self) -> (Robin<T>, Robin<T>) {
        match *self {
            ReferenceKind::Dirichlet => (Robin::dirichlet(), Robin::dirichlet()),
            ReferenceKind::Neumann => (Robin::neumann(Side::Minus), Robin::neumann(Side::Plus)),
            ReferenceKind::Mixed => (Robin::dirichlet(), Robin::neumann(Side::Plus)),
            ReferenceKind::RobinDirichlet { minus } => (minus, Robin::dirichlet()),
            ReferenceKind::RobinNeumann { minus } => (minus, Robin::neumann(Side::Plus)),
            ReferenceKind::RobinRobin { minus, plus } => (minus, plus),
        }
    }

    /// Smallest index accepted (sentinels below zero).
    fn min_index(&self) -> i64 {
        match self {
            ReferenceKind::Dirichlet => -2,
            ReferenceKind::Mixed | ReferenceKind::RobinDirichlet { .. } => -1,
            _ => 0,
        }
    }

    /// As a [`ProblemSpec`] without interior terms.
    pub fn as_problem(&self) -> ProblemSpec<T> {
        let (m, p) = self.conditions();
        ProblemSpec::new(BoundarySide::robin(Side::Minus, m.alpha0, m.beta0), BoundarySide::robin(Side::Plus, p.alpha0, p.beta0))
    }
}

fn check_index<T: Real>(kind: &ReferenceKind<T>, k: i64) -> Result<(), ReferenceError> {
    if k < kind.min_index() {
        return Err(ReferenceError::InvalidIndex { kind: kind.name(), k });
    }
    let (m, p) = kind.conditions();
    m.check(Side::Minus)?;
    p.check(Side::Plus)
}

/// `λ_k` of the separated problem `kind`.
pub fn reference_eigenvalue<T: Real>(kind: &ReferenceKind<T>, k: i64) -> Result<T, ReferenceError> {
    check_index(kind, k)?;
    if k < 0 {
        return Ok(T::zero());
    }
    let kk = T::int(k);
    let pi = T::PI();
    let sq = |x: T| x * x;
    Ok(match kind {
        ReferenceKind::Dirichlet => sq((kk + T::one()) * pi / T::two()),
        ReferenceKind::Neumann => sq(kk * pi / T::two()),
        ReferenceKind::Mixed => sq((T::two() * kk + T::one()) * pi / T::lit(4.0)),
        _ => {
            let (m, p) = kind.conditions();
            let w = robin_omega(m, p, k);
            w * w
        }
    })
}

/// Root `ω_k ≥ 0` of the phase equation.
fn robin_omega<T: Real>(m: Robin<T>, p: Robin<T>, k: i64) -> T {
    let pi = T::PI();
    let target = T::int(k + 1) * pi;
    let g = |w: T| {
        let (dm, ddm) = m.phase(w);
        let (dp, ddp) = p.phase(w);
        (T::two() * w + dm + dp - target, T::two() + ddm + ddp)
    };
    let mut lo = T::int(k) * pi / T::two();
    let mut hi = T::int(k + 1) * pi / T::two();
    let (glo, _) = g(lo);
    if glo >= T::zero() {
        // Only possible at ω = 0 for the Neumann–Neumann k = 0 root.
        return lo;
    }
    let tol = T::lit(1e-15).max(T::epsilon() * T::lit(4.0));
    let mut w = (lo + hi) / T::two();
    for _ in 0..200 {
        let (gw, dg) = g(w);
        if gw == T::zero() {
            return w;
        }
        if gw < T::zero() {
            lo = w;
        } else {
            hi = w;
        }
        let newton = w - gw / dg;
        let next = if newton > lo && newton < hi { newton } else { (lo + hi) / T::two() };
        if (next - w).abs() <= tol * (T::one() + w.abs()) || hi - lo <= tol * (T::one() + w.abs()) {
            return next;
        }
        w = next;
    }
    w
}

/// Eigenfunction of `kind` for index `k ≥ 0`, normalized to `|ψ|₀ = 1` with
/// the first nonvanishing of `(ψ(−1), ψ′(−1))` positive.
pub fn reference_eigenfunction<T: Real>(kind: &ReferenceKind<T>, k: i64) -> Result<TrigSolution<T>, ReferenceError> {
    if k < 0 {
        return Err(ReferenceError::InvalidIndex { kind: kind.name(), k });
    }
    let lambda = reference_eigenvalue(kind, k)?;
    let (m, _) = kind.conditions();
    // α₀⁻A + β₀⁻B = 0 with (A, B) = (|β₀⁻|, α₀⁻) ≥ 0.
    let raw = TrigSolution::new(lambda, m.beta0.abs(), m.alpha0);
    let (n, _) = sup_norms(&raw);
    Ok(raw.scaled(T::one() / n))
}

/// Number of Robin–Robin anchor eigenvalues `≤ lambda_max`.
pub fn robin_count<T: Real>(spec: &ProblemSpec<T>, lambda_max: T) -> usize {
    let kind = ReferenceKind::anchor(spec);
    let mut k = 0;
    while let Ok(l) = reference_eigenvalue(&kind, k) {
        if l > lambda_max {
            break;
        }
        k += 1;
    }
    k as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn closed_forms_and_sentinels() {
        let d = reference_eigenvalue::<f64>(&ReferenceKind::Dirichlet, 0).unwrap();
        assert!((d - PI * PI / 4.0).abs() < 1e-15);
        let m = reference_eigenvalue::<f64>(&ReferenceKind::Mixed, 1).unwrap();
        assert!((m - 5.551_652_475_612_38).abs() < 1e-12);
        assert_eq!(reference_eigenvalue::<f64>(&ReferenceKind::Dirichlet, -2).unwrap(), 0.0);
        assert_eq!(reference_eigenvalue::<f64>(&ReferenceKind::Mixed, -1).unwrap(), 0.0);
        assert!(reference_eigenvalue::<f64>(&ReferenceKind::Neumann, -1).is_err());
        assert!(reference_eigenvalue::<f64>(&ReferenceKind::Mixed, -2).is_err());
        let rd = ReferenceKind::RobinDirichlet { minus: Robin::new(1.0, -1.0) };
        assert_eq!(reference_eigenvalue(&rd, -1).unwrap(), 0.0);
    }

    #[test]
    fn robin_with_degenerate_parameters_matches_closed_forms() {
        for k in 0..10 {
            let rr = ReferenceKind::RobinRobin { minus: Robin::dirichlet(), plus: Robin::neumann(Side::Plus) };
            let a = reference_eigenvalue::<f64>(&rr, k).unwrap();
            let b = reference_eigenvalue::<f64>(&ReferenceKind::Mixed, k).unwrap();
            assert!((a - b).abs() <= 1e-12 * b);
            let nn = ReferenceKind::RobinRobin { minus: Robin::neumann(Side::Minus), plus: Robin::neumann(Side::Plus) };
            let a = reference_eigenvalue::<f64>(&nn, k).unwrap();
            let b = reference_eigenvalue::<f64>(&ReferenceKind::Neumann, k).unwrap();
            assert!((a - b).abs() <= 1e-12 * b.max(1.0));
        }
    }

    #[test]
    fn eigenfunctions() {
        let d0 = reference_eigenfunction::<f64>(&ReferenceKind::Dirichlet, 0).unwrap();
        assert_eq!(d0.a, 0.0);
        assert!((d0.b - PI / 2.0).abs() < 1e-14);
        let n0 = reference_eigenfunction::<f64>(&ReferenceKind::Neumann, 0).unwrap();
        assert_eq!((n0.lambda, n0.a, n0.b), (0.0, 1.0, 0.0));
        let m0 = reference_eigenfunction::<f64>(&ReferenceKind::Mixed, 0).unwrap();
        assert!((m0.u(1.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn invalid_robin_rejected() {
        let bad = ReferenceKind::RobinDirichlet { minus: Robin::new(1.0, 1.0) };
        assert!(reference_eigenvalue(&bad, 0).is_err());
    }
}
