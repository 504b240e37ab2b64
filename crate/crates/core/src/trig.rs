//! Closed-form solutions of `−u″ = λu` on `[−1, 1]`.
//!
//! Every solution is written as `u = A·c(x) + B·s(x)` with the fundamental
//! pair normalized at `x = −1`: `c(−1) = 1, c′(−1) = 0, s(−1) = 0, s′(−1) = 1`.

use serde::{Deserialize, Serialize};

use crate::problem::BoundarySide;
use crate::scalar::Real;

/// Below this `|λ|` the `λ = 0` formulas are used.
pub const ZERO_LAMBDA: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TrigError {
    #[error("x = {0} is outside [-1, 1]")]
    OutOfDomain(f64),
}

/// `u = A·c + B·s` for a given `λ`; `(A, B) = (u(−1), u′(−1))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrigSolution<T: Real> {
    pub lambda: T,
    #[serde(rename = "A")]
    pub a: T,
    #[serde(rename = "B")]
    pub b: T,
}

/// Values of the fundamental pair and their derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Basis<T> {
    pub c: T,
    pub s: T,
    pub dc: T,
    pub ds: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Regime {
    Oscillatory,
    Linear,
    Exponential,
}

fn regime<T: Real>(lambda: T) -> Regime {
    if lambda.abs() < T::lit(ZERO_LAMBDA) {
        Regime::Linear
    } else if lambda > T::zero() {
        Regime::Oscillatory
    } else {
        Regime::Exponential
    }
}

/// Fundamental pair at `x` (no domain check).
pub fn basis<T: Real>(lambda: T, x: T) -> Basis<T> {
    let th = x + T::one();
    match regime(lambda) {
        Regime::Linear => Basis { c: T::one(), s: th, dc: T::zero(), ds: T::one() },
        Regime::Oscillatory => {
            let w = lambda.sqrt();
            let (sn, cs) = (w * th).sin_cos();
            Basis { c: cs, s: sn / w, dc: -w * sn, ds: cs }
        }
        Regime::Exponential => {
            let w = (-lambda).sqrt();
            let (sh, ch) = ((w * th).sinh(), (w * th).cosh());
            Basis { c: ch, s: sh / w, dc: w * sh, ds: ch }
        }
    }
}

impl<T: Real> TrigSolution<T> {
    pub fn new(lambda: T, a: T, b: T) -> Self {
        TrigSolution { lambda, a, b }
    }

    /// `(u, u′)` at `x ∈ [−1, 1]`.
    pub fn eval(&self, x: T) -> Result<(T, T), TrigError> {
        if !(x >= -T::one() && x <= T::one()) {
            return Err(TrigError::OutOfDomain(x.as_f64()));
        }
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: T) -> (T, T) {
        let bs = basis(self.lambda, x);
        (self.a * bs.c + self.b * bs.s, self.a * bs.dc + self.b * bs.ds)
    }

    pub fn u(&self, x: T) -> T {
        self.eval_unchecked(x).0
    }

    pub fn uprime(&self, x: T) -> T {
        self.eval_unchecked(x).1
    }

    /// `λu(x)² + u′(x)²`.
    pub fn energy(&self, x: T) -> T {
        let (u, up) = self.eval_unchecked(x);
        self.lambda * u * u + up * up
    }

    pub fn scaled(&self, factor: T) -> Self {
        TrigSolution { lambda: self.lambda, a: self.a * factor, b: self.b * factor }
    }

    /// `ω` for `λ > 0` (zero otherwise).
    pub fn omega(&self) -> T {
        if regime(self.lambda) == Regime::Oscillatory {
            self.lambda.sqrt()
        } else {
            T::zero()
        }
    }

    /// Amplitude `R` and phase `φ` with `u = R·cos(ω(x+1) − φ)`, for `λ > 0`.
    pub fn phase_amplitude(&self) -> Option<(T, T)> {
        if regime(self.lambda) != Regime::Oscillatory {
            return None;
        }
        let w = self.lambda.sqrt();
        let q = self.b / w;
        Some(((self.a * self.a + q * q).sqrt(), q.atan2(self.a)))
    }
}

/// Residual `α₀u(ν) + β₀u′(ν) − Σαᵢu(ηᵢ) − Σβᵢu′(ηᵢ)`.
pub fn bc_functional<T: Real>(side: &BoundarySide<T>, sol: &TrigSolution<T>) -> T {
    let (u, up) = sol.eval_unchecked(side.side.endpoint());
    let mut r = side.alpha0 * u + side.beta0 * up;
    for ((&al, &be), &e) in side.alpha.iter().zip(&side.beta).zip(&side.eta) {
        let (ui, upi) = sol.eval_unchecked(e);
        r = r - al * ui - be * upi;
    }
    r
}

/// The boundary functional applied to `c` and `s`: `(bc(c), bc(s))`.
pub fn bc_on_basis<T: Real>(side: &BoundarySide<T>, lambda: T) -> (T, T) {
    let nu = basis(lambda, side.side.endpoint());
    let mut rc = side.alpha0 * nu.c + side.beta0 * nu.dc;
    let mut rs = side.alpha0 * nu.s + side.beta0 * nu.ds;
    for ((&al, &be), &e) in side.alpha.iter().zip(&side.beta).zip(&side.eta) {
        let bi = basis(lambda, e);
        rc = rc - al * bi.c - be * bi.dc;
        rs = rs - al * bi.s - be * bi.ds;
    }
    (rc, rs)
}

/// Smallest `θ ≥ 0` with `θ ≡ φ (mod π)`.
fn first_congruent<T: Real>(phi: T) -> T {
    let pi = T::PI();
    phi - pi * (phi / pi).floor()
}

/// Exact `(|u|₀, |u′|₀)` over `[−1, 1]`.
pub fn sup_norms<T: Real>(sol: &TrigSolution<T>) -> (T, T) {
    let (u_l, up_l) = sol.eval_unchecked(-T::one());
    let (u_r, up_r) = sol.eval_unchecked(T::one());
    let mut su = u_l.abs().max(u_r.abs());
    let mut sup = up_l.abs().max(up_r.abs());
    let two = T::two();
    match regime(sol.lambda) {
        Regime::Linear => {}
        Regime::Oscillatory => {
            let w = sol.lambda.sqrt();
            let (r, phi) = sol.phase_amplitude().expect("oscillatory");
            let span = two * w;
            if first_congruent(phi) <= span {
                su = su.max(r);
            }
            if first_congruent(phi + T::FRAC_PI_2()) <= span {
                sup = sup.max(w * r);
            }
        }
        Regime::Exponential => {
            let w = (-sol.lambda).sqrt();
            let span = two * w;
            let mut probe = |ratio: T, su_side: bool| {
                if ratio.abs() < T::one() {
                    let th = ratio.atanh();
                    if th > T::zero() && th < span {
                        let x = th / w - T::one();
                        let (u, up) = sol.eval_unchecked(x);
                        if su_side {
                            su = su.max(u.abs());
                        } else {
                            sup = sup.max(up.abs());
                        }
                    }
                }
            };
            // u′ = 0 ⇔ tanh θ = −B/(Aω); u″ = 0 ⇔ tanh θ = −Aω/B.
            if !sol.a.is_zero() {
                probe(-sol.b / (sol.a * w), true);
            }
            if !sol.b.is_zero() {
                probe(-sol.a * w / sol.b, false);
            }
        }
    }
    (su, sup)
}
