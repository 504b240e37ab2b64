//! Nonlinearities `f(ξ)`, forcing terms `h(x)` and the envelope certificates
//! for `F(ξ) = 2∫₀^ξ f`.

use serde::{Deserialize, Serialize};

use crate::expr::{parse_expr, Expr, ParseError, Var};
use crate::quadrature::{integrate, QuadError};
use crate::scalar::Real;

/// Default half-width of the envelope grid.
pub const XI_MAX: f64 = 1e4;
/// Total grid size of the envelope certificate.
pub const GRID_POINTS: usize = 10_000;
const QUAD_TOL: f64 = 1e-10;
const RATIO_TOL: f64 = 1e-9;
const LIMIT_AGREE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NonlinearityError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("expression uses variable '{found}', expected '{expected}'")]
    WrongVariable { expected: &'static str, found: &'static str },
    #[error("invalid limit: {0}")]
    BadLimit(String),
    #[error("{what} is not finite at {at}")]
    NonFinite { what: &'static str, at: f64 },
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}

fn var_name(v: Var) -> &'static str {
    match v {
        Var::Xi => "xi",
        Var::X => "x",
    }
}

fn parse_in(text: &str, var: Var) -> Result<Expr, NonlinearityError> {
    let e = parse_expr(text)?;
    if let Some(&v) = e.vars().iter().find(|&&v| v != var) {
        return Err(NonlinearityError::WrongVariable { expected: var_name(var), found: var_name(v) });
    }
    Ok(e)
}

/// `f` together with `f₀ = lim_{ξ→0} f(ξ)/ξ` and `f_∞ = lim_{|ξ|→∞} f(ξ)/ξ`.
#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearitySpec<T: Real> {
    pub text: String,
    pub expr: Expr,
    pub f0: T,
    pub finf: T,
    pub f0_declared: bool,
    pub finf_declared: bool,
    pub warnings: Vec<String>,
}

/// Richardson-extrapolated `lim_{ξ→0} f(ξ)/ξ` from symmetric quotients.
pub fn estimate_f0<T: Real>(f: impl Fn(T) -> T) -> T {
    let q = |h: T| (f(h) - f(-h)) / (T::two() * h);
    // Neville extrapolation to h = 0 over h = 1e−2·2^−i; no parity assumed
    // since f need not be smooth at 0 (e.g. |ξ| terms).
    let hs: Vec<T> = (0..5).map(|i| T::lit(1e-2) / T::nat(1 << i)).collect();
    let mut p: Vec<T> = hs.iter().map(|&h| q(h)).collect();
    for m in 1..p.len() {
        for i in 0..p.len() - m {
            p[i] = (hs[i] * p[i + 1] - hs[i + m] * p[i]) / (hs[i] - hs[i + m]);
        }
    }
    p[0]
}

/// Estimated `lim_{|ξ|→∞} f(ξ)/ξ` (`+∞` when the quotient keeps growing).
pub fn estimate_finf<T: Real>(f: impl Fn(T) -> T) -> T {
    let g = |r: T| (f(r) / r + f(-r) / (-r)) / T::two();
    let big = T::lit(1e6);
    let (g3, g6, g7) = (g(T::lit(1e3)), g(big), g(T::lit(1e7)));
    if !g7.is_finite() || (g7 > T::lit(1e3) * g3.abs().max(T::one()) && g7 > g6) {
        return T::infinity();
    }
    // Error ~ c/R: one Richardson step between R and 2R.
    let r = T::two() * g(T::two() * big) - g(big);
    if (r - g6).abs() > T::lit(1e-3) * T::one().max(g6.abs()) {
        g6
    } else {
        r
    }
}

fn rel_gap<T: Real>(a: T, b: T) -> T {
    if a.is_infinite() && b.is_infinite() {
        return T::zero();
    }
    (a - b).abs() / T::one().max(a.abs().max(b.abs()))
}

impl<T: Real> NonlinearitySpec<T> {
    /// Parses `text` (variable `xi`); missing limits are estimated with a
    /// warning, declared limits are cross-checked against the estimates.
    pub fn new(text: &str, f0: Option<T>, finf: Option<T>) -> Result<Self, NonlinearityError> {
        let expr = parse_in(text, Var::Xi)?;
        let mut warnings = Vec::new();
        let est0 = estimate_f0(|v: T| expr.eval(v));
        let est_inf = estimate_finf(|v: T| expr.eval(v));
        if let Some(v) = f0 {
            if !v.is_finite() {
                return Err(NonlinearityError::BadLimit(format!("f0 = {v} must be finite")));
            }
            if est0.is_finite() && rel_gap(v, est0) > T::lit(LIMIT_AGREE) {
                warnings.push(format!("declared f0 = {v} differs from the estimate {est0}"));
            }
        } else {
            warnings.push(format!("f0 not declared; estimated as {est0}"));
        }
        if let Some(v) = finf {
            if v.is_nan() || v < T::zero() {
                return Err(NonlinearityError::BadLimit(format!("finf = {v} must be >= 0")));
            }
            if rel_gap(v, est_inf) > T::lit(LIMIT_AGREE) {
                warnings.push(format!("declared finf = {v} differs from the estimate {est_inf}"));
            }
        } else {
            warnings.push(format!("finf not declared; estimated as {est_inf}"));
        }
        let f0v = f0.unwrap_or(est0);
        if !f0v.is_finite() {
            return Err(NonlinearityError::BadLimit("f0 could not be estimated".into()));
        }
        Ok(NonlinearitySpec {
            text: text.to_string(),
            expr,
            f0: f0v,
            finf: finf.unwrap_or(est_inf),
            f0_declared: f0.is_some(),
            finf_declared: finf.is_some(),
            warnings,
        })
    }

    /// The linear nonlinearity `f(ξ) = ξ`.
    pub fn linear() -> Self {
        Self::new("xi", Some(T::one()), Some(T::one())).expect("static expression")
    }

    pub fn f(&self, xi: T) -> T {
        self.expr.eval(xi)
    }

    /// `F(ξ) = 2∫₀^ξ f`.
    pub fn big_f(&self, xi: T) -> Result<T, NonlinearityError> {
        let v = integrate(|s| self.f(s), T::zero(), xi, T::lit(QUAD_TOL), T::lit(4.0) * T::epsilon())?;
        Ok(T::two() * v)
    }

    /// `ξf(ξ) > 0` on a log-spaced grid of `[−xi_max, xi_max] \ {0}`.
    pub fn sign_ok(&self, xi_max: T) -> bool {
        grid(xi_max).into_iter().all(|x| x * self.f(x) > T::zero() && x * self.f(-x) < T::zero())
    }
}

/// Forcing term `h(x)` on `[−1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ForcingTerm {
    pub text: String,
    pub expr: Expr,
}

impl ForcingTerm {
    pub fn new(text: &str) -> Result<Self, NonlinearityError> {
        let expr = parse_in(text, Var::X)?;
        for i in 0..=2000 {
            let x = -1.0 + i as f64 / 1000.0;
            if !expr.eval(x).is_finite() {
                return Err(NonlinearityError::NonFinite { what: "h", at: x });
            }
        }
        Ok(ForcingTerm { text: text.to_string(), expr })
    }

    pub fn zero() -> Self {
        ForcingTerm::new("0").expect("static expression")
    }

    pub fn is_zero(&self) -> bool {
        self.expr == Expr::Num(0.0)
    }

    pub fn h<T: Real>(&self, x: T) -> T {
        self.expr.eval(x)
    }
}

/// Which envelope of `F` is being certified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Envelope {
    /// `F(ξ) ≤ γξ²`.
    FSmall,
    /// `F(ξ) ≥ γξ²`.
    FBig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate<T: Real> {
    pub passed: bool,
    pub direction: Envelope,
    pub gamma: T,
    pub xi_max: T,
    pub grid_points: usize,
    pub sign_ok: bool,
    pub envelope_ok: bool,
    /// Extreme of `F(ξ)/(γξ²)` over the grid and where it occurs.
    pub worst_ratio: T,
    pub worst_at: T,
    /// Envelope implied by the one-signedness of `f(ξ)/ξ − f₀`, if any.
    pub remark_direction: Option<Envelope>,
    pub reasons: Vec<String>,
}

/// Positive half of the grid: `GRID_POINTS/2` log-spaced points in
/// `[xi_max·1e−9, xi_max]`.
fn grid<T: Real>(xi_max: T) -> Vec<T> {
    let n = GRID_POINTS / 2;
    let lo = (xi_max * T::lit(1e-9)).ln();
    let hi = xi_max.ln();
    (0..n).map(|i| (lo + (hi - lo) * T::nat(i) / T::nat(n - 1)).exp()).collect()
}

/// `F` at every grid point of one sign, accumulated panel by panel.
fn f_on_grid<T: Real>(nl: &NonlinearitySpec<T>, pts: &[T], xi_max: T) -> Result<Vec<T>, NonlinearityError> {
    let mut acc = T::zero();
    let mut prev = T::zero();
    let mut out = Vec::with_capacity(pts.len());
    let rel = T::lit(4.0) * T::epsilon();
    for &p in pts {
        let tol = T::lit(QUAD_TOL) * (p - prev).abs() / xi_max;
        acc = acc + T::two() * integrate(|s| nl.f(s), prev, p, tol, rel)?;
        prev = p;
        out.push(acc);
    }
    Ok(out)
}

pub fn certify_hypotheses<T: Real>(
    nl: &NonlinearitySpec<T>,
    gamma: T,
    direction: Envelope,
    xi_max: T,
) -> Result<Certificate<T>, NonlinearityError> {
    let mut reasons = Vec::new();
    if !(gamma > T::zero()) {
        reasons.push(format!("gamma = {gamma} not positive"));
    }
    if !(nl.f0 > T::zero()) {
        reasons.push("f0 not positive".to_string());
    }
    if nl.finf < T::zero() {
        reasons.push("finf negative".to_string());
    }
    let pos = grid(xi_max);
    let neg: Vec<T> = pos.iter().map(|&x| -x).collect();
    let mut sign_ok = true;
    let mut remark_small = true;
    let mut remark_big = true;
    let slack = T::lit(1e3) * T::epsilon();
    for &x in pos.iter().chain(&neg) {
        let fx = nl.f(x);
        if !fx.is_finite() {
            return Err(NonlinearityError::NonFinite { what: "f", at: x.as_f64() });
        }
        if !(x * fx > T::zero()) {
            sign_ok = false;
        }
        let g = fx / x - nl.f0;
        let scale = slack * T::one().max(nl.f0.abs());
        remark_small &= g <= scale;
        remark_big &= g >= -scale;
    }
    if !sign_ok {
        reasons.push("sign condition xi*f(xi) > 0 fails".into());
    }
    let fp = f_on_grid(nl, &pos, xi_max)?;
    let fn_ = f_on_grid(nl, &neg, xi_max)?;
    let (mut worst, mut worst_at) = match direction {
        Envelope::FSmall => (T::neg_infinity(), T::zero()),
        Envelope::FBig => (T::infinity(), T::zero()),
    };
    for (&x, &fv) in pos.iter().zip(&fp).chain(neg.iter().zip(&fn_)) {
        let r = fv / (gamma * x * x);
        let worse = match direction {
            Envelope::FSmall => r > worst,
            Envelope::FBig => r < worst,
        };
        if worse {
            worst = r;
            worst_at = x;
        }
    }
    let envelope_ok = match direction {
        Envelope::FSmall => worst <= T::one() + T::lit(RATIO_TOL),
        Envelope::FBig => worst >= T::one() - T::lit(RATIO_TOL),
    };
    if !envelope_ok {
        let name = match direction {
            Envelope::FSmall => "F(xi) <= gamma*xi^2",
            Envelope::FBig => "F(xi) >= gamma*xi^2",
        };
        reasons.push(format!("{name} fails: ratio {worst} at xi = {worst_at}"));
    }
    let remark_direction = match (remark_small, remark_big) {
        (true, false) => Some(Envelope::FSmall),
        (false, true) => Some(Envelope::FBig),
        (true, true) => Some(direction),
        _ => None,
    };
    Ok(Certificate {
        passed: reasons.is_empty(),
        direction,
        gamma,
        xi_max,
        grid_points: 2 * pos.len(),
        sign_ok,
        envelope_ok,
        worst_ratio: worst,
        worst_at,
        remark_direction,
        reasons,
    })
}
