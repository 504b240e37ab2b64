//! Nodal classification into the families `S_k`, `T_k` and `R_k`.
//!
//! * `S_k^±`: `u(±1) ≠ 0`, exactly `k` interior zeros of `u`, all simple;
//!   sign of `u(−1)`.
//! * `T_k^±`: `u′(±1) ≠ 0`, exactly `k` interior zeros of `u′`, all simple,
//!   and a zero of `u` strictly between consecutive zeros of `u′`; sign of
//!   `u′(−1)`.
//! * `R_k^±` (`k ≥ −1`): `u′(−1) ≠ 0` with sign `±`, `±u(1) > 0` iff `k` is
//!   even, and `u` has only simple interior zeros, `k` or `k+1` of them.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::problem::BoundarySide;
use crate::roots::bisect;
use crate::scalar::Real;
use crate::trig::{sup_norms, TrigSolution};

/// Default relative tolerance for boundary nondegeneracy and simplicity.
pub const NODAL_TOL: f64 = 1e-8;
/// Zeros closer than this to `±1` are boundary zeros, not interior ones.
const EDGE_MARGIN: f64 = 1e-11;
/// Two zeros closer than this cannot be resolved.
const CLUSTER: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NodalError {
    #[error("zero cluster near x = {x}: spacing {spacing:e} is below {CLUSTER:e}")]
    Unresolvable { x: f64, spacing: f64 },
    #[error("function is identically zero")]
    IdenticallyZero,
    #[error("sampled trace invalid: {0}")]
    BadTrace(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    S,
    T,
    R,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::S => "S",
            Family::T => "T",
            Family::R => "R",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn of<T: Real>(x: T) -> Sign {
        if x < T::zero() {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn factor<T: Real>(self) -> T {
        match self {
            Sign::Plus => T::one(),
            Sign::Minus => -T::one(),
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// One membership `N_k^±`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodalClass {
    pub family: Family,
    pub k: i64,
    pub sign: Sign,
}

impl fmt::Display for NodalClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}^{}", self.family, self.k, self.sign)
    }
}

/// Outcome of one family test.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum FamilyVerdict {
    Member { k: i64, sign: Sign },
    /// The defining conditions fail clearly.
    NotMember { reason: String },
    /// Boundary or zero data within tolerance of degeneracy.
    Unclassified { reason: String },
}

/// A zero of `u` or `u′`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Zero<T: Real> {
    pub x: T,
    pub simple: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    U,
    Uprime,
}

/// Dense samples of `(x, u, u′)` with optional `u″`, interpolated by cubic
/// Hermite polynomials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledTrace<T: Real> {
    xs: Vec<T>,
    us: Vec<T>,
    ups: Vec<T>,
    upps: Vec<T>,
}

impl<T: Real> SampledTrace<T> {
    /// `upps` may be omitted, in which case `u″` is estimated from `u′` by
    /// finite differences.
    pub fn new(xs: Vec<T>, us: Vec<T>, ups: Vec<T>, upps: Option<Vec<T>>) -> Result<Self, NodalError> {
        let n = xs.len();
        if n < 2 || us.len() != n || ups.len() != n || upps.as_ref().is_some_and(|v| v.len() != n) {
            return Err(NodalError::BadTrace("columns must have equal length >= 2".into()));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(NodalError::BadTrace("x must be strictly increasing".into()));
        }
        let eps = T::lit(1e-12);
        if (xs[0] + T::one()).abs() > eps || (xs[n - 1] - T::one()).abs() > eps {
            return Err(NodalError::BadTrace("x must start at -1 and end at 1".into()));
        }
        if xs.iter().chain(&us).chain(&ups).any(|v| !v.is_finite()) {
            return Err(NodalError::BadTrace("non-finite sample".into()));
        }
        let upps = upps.unwrap_or_else(|| {
            (0..n)
                .map(|i| {
                    let (a, b) = if i == 0 {
                        (0, 1)
                    } else if i == n - 1 {
                        (n - 2, n - 1)
                    } else {
                        (i - 1, i + 1)
                    };
                    (ups[b] - ups[a]) / (xs[b] - xs[a])
                })
                .collect()
        });
        Ok(SampledTrace { xs, us, ups, upps })
    }

    pub fn xs(&self) -> &[T] {
        &self.xs
    }

    pub fn us(&self) -> &[T] {
        &self.us
    }

    pub fn ups(&self) -> &[T] {
        &self.ups
    }

    pub fn upps(&self) -> &[T] {
        &self.upps
    }

    fn cell(&self, x: T) -> usize {
        let i = self.xs.partition_point(|&v| v <= x);
        i.clamp(1, self.xs.len() - 1) - 1
    }

    fn hermite(x0: T, x1: T, f0: T, f1: T, d0: T, d1: T, x: T) -> (T, T) {
        let h = x1 - x0;
        let s = (x - x0) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let two = T::two();
        let three = T::lit(3.0);
        let h00 = two * s3 - three * s2 + T::one();
        let h10 = s3 - two * s2 + s;
        let h01 = -two * s3 + three * s2;
        let h11 = s3 - s2;
        let v = h00 * f0 + h10 * h * d0 + h01 * f1 + h11 * h * d1;
        let six = T::lit(6.0);
        let dv = ((six * s2 - six * s) * f0 + (three * s2 - T::lit(4.0) * s + T::one()) * h * d0
            + (-six * s2 + six * s) * f1
            + (three * s2 - two * s) * h * d1)
            / h;
        (v, dv)
    }

    /// `(u, u′)` at `x` by Hermite interpolation.
    pub fn eval(&self, x: T) -> (T, T) {
        let i = self.cell(x);
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let (u, _) = Self::hermite(x0, x1, self.us[i], self.us[i + 1], self.ups[i], self.ups[i + 1], x);
        let (up, _) = Self::hermite(x0, x1, self.ups[i], self.ups[i + 1], self.upps[i], self.upps[i + 1], x);
        (u, up)
    }

    fn eval_which(&self, which: Which, x: T) -> (T, T) {
        let i = self.cell(x);
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        match which {
            Which::U => Self::hermite(x0, x1, self.us[i], self.us[i + 1], self.ups[i], self.ups[i + 1], x),
            Which::Uprime => Self::hermite(x0, x1, self.ups[i], self.ups[i + 1], self.upps[i], self.upps[i + 1], x),
        }
    }

    fn column(&self, which: Which) -> &[T] {
        match which {
            Which::U => &self.us,
            Which::Uprime => &self.ups,
        }
    }

    fn deriv_column(&self, which: Which) -> &[T] {
        match which {
            Which::U => &self.ups,
            Which::Uprime => &self.upps,
        }
    }

    /// Mirror image under `x ↦ −x`.
    pub fn reflected(&self) -> Self {
        let rev = |v: &[T], s: T| v.iter().rev().map(|&a| a * s).collect::<Vec<T>>();
        SampledTrace {
            xs: rev(&self.xs, -T::one()),
            us: rev(&self.us, T::one()),
            ups: rev(&self.ups, -T::one()),
            upps: rev(&self.upps, T::one()),
        }
    }

    pub fn negated(&self) -> Self {
        let neg = |v: &[T]| v.iter().map(|&a| -a).collect::<Vec<T>>();
        SampledTrace { xs: self.xs.clone(), us: neg(&self.us), ups: neg(&self.ups), upps: neg(&self.upps) }
    }
}

/// A function on `[−1, 1]` given in closed form or by samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "representation", rename_all = "lowercase")]
pub enum FunctionTrace<T: Real> {
    Closed(TrigSolution<T>),
    Sampled(SampledTrace<T>),
}

impl<T: Real> FunctionTrace<T> {
    pub fn eval(&self, x: T) -> (T, T) {
        match self {
            FunctionTrace::Closed(s) => s.eval_unchecked(x),
            FunctionTrace::Sampled(s) => s.eval(x),
        }
    }

    /// `(|u|₀, |u′|₀)`.
    pub fn sup_norms(&self) -> (T, T) {
        match self {
            FunctionTrace::Closed(s) => sup_norms(s),
            FunctionTrace::Sampled(s) => {
                let m = |v: &[T]| v.iter().fold(T::zero(), |a, b| a.max(b.abs()));
                (m(&s.us), m(&s.ups))
            }
        }
    }

    pub fn reflected(&self) -> Self {
        match self {
            FunctionTrace::Closed(s) => {
                let (u1, up1) = s.eval_unchecked(T::one());
                FunctionTrace::Closed(TrigSolution::new(s.lambda, u1, -up1))
            }
            FunctionTrace::Sampled(s) => FunctionTrace::Sampled(s.reflected()),
        }
    }

    pub fn negated(&self) -> Self {
        match self {
            FunctionTrace::Closed(s) => FunctionTrace::Closed(s.scaled(-T::one())),
            FunctionTrace::Sampled(s) => FunctionTrace::Sampled(s.negated()),
        }
    }

    /// Points at which identities are sampled: the nodes of a sampled trace,
    /// a uniform 2001-point grid for a closed form.
    pub fn sample_points(&self) -> Vec<T> {
        match self {
            FunctionTrace::Closed(_) => (0..=2000).map(|i| -T::one() + T::nat(i) / T::lit(1000.0)).collect(),
            FunctionTrace::Sampled(s) => s.xs.clone(),
        }
    }
}

fn interior<T: Real>(x: T) -> bool {
    let m = T::lit(EDGE_MARGIN);
    x > -T::one() + m && x < T::one() - m
}

fn closed_zeros<T: Real>(s: &TrigSolution<T>, which: Which, tol: T) -> Result<Vec<Zero<T>>, NodalError> {
    let (nu, nup) = sup_norms(s);
    if nu.is_zero() {
        return Err(NodalError::IdenticallyZero);
    }
    let mut xs = Vec::new();
    let lam = s.lambda;
    if let Some((_, phi)) = s.phase_amplitude() {
        // u = R cos(θ − φ), u′ = −ωR sin(θ − φ), θ = ω(x + 1) ∈ [0, 2ω].
        let w = s.omega();
        let base = match which {
            Which::U => phi + T::FRAC_PI_2(),
            Which::Uprime => phi,
        };
        let pi = T::PI();
        let mut th = base - pi * (base / pi).floor();
        while th <= T::two() * w {
            xs.push(th / w - T::one());
            th = th + pi;
        }
    } else if lam.abs() < T::lit(crate::trig::ZERO_LAMBDA) {
        match which {
            Which::U => {
                if !s.b.is_zero() {
                    xs.push(-s.a / s.b - T::one());
                }
            }
            Which::Uprime => {
                if s.b.is_zero() {
                    return Err(NodalError::IdenticallyZero);
                }
            }
        }
    } else {
        let w = (-lam).sqrt();
        let ratio = match which {
            Which::U => (!s.b.is_zero()).then(|| -s.a * w / s.b),
            Which::Uprime => (!s.a.is_zero()).then(|| -s.b / (s.a * w)),
        };
        if let Some(r) = ratio {
            if r.abs() < T::one() {
                let th = r.atanh();
                if th > T::zero() {
                    xs.push(th / w - T::one());
                }
            }
        }
    }
    let mut out = Vec::new();
    for x in xs.into_iter().filter(|&x| interior(x)) {
        let (u, up) = s.eval_unchecked(x);
        let simple = match which {
            Which::U => up.abs() > tol * nup,
            // (u′)′ = −λu.
            Which::Uprime => (lam * u).abs() > tol * (lam.abs() * nu) && !lam.is_zero(),
        };
        out.push(Zero { x, simple });
    }
    Ok(out)
}

fn sampled_zeros<T: Real>(s: &SampledTrace<T>, which: Which, tol: T) -> Result<Vec<Zero<T>>, NodalError> {
    let f = s.column(which);
    let df = s.deriv_column(which);
    let fmax = f.iter().fold(T::zero(), |a, b| a.max(b.abs()));
    if fmax.is_zero() {
        return Err(NodalError::IdenticallyZero);
    }
    let dmax = df.iter().fold(T::zero(), |a, b| a.max(b.abs()));
    let n = f.len();
    let mut xs: Vec<T> = Vec::new();
    let g = |x: T| s.eval_which(which, x).0;
    for i in 0..n {
        if f[i].is_zero() {
            xs.push(s.xs[i]);
            continue;
        }
        if i + 1 < n && !f[i + 1].is_zero() && (f[i] > T::zero()) != (f[i + 1] > T::zero()) {
            xs.push(bisect(g, s.xs[i], s.xs[i + 1], T::lit(1e-14)));
        }
        // Even number of crossings inside a cell: the interpolant dips
        // through zero without a node sign change.
        if i + 1 < n && !f[i + 1].is_zero() && (f[i] > T::zero()) == (f[i + 1] > T::zero()) {
            let pos = f[i] > T::zero();
            let (x0, x1) = (s.xs[i], s.xs[i + 1]);
            let heads_back = if pos { df[i] < T::zero() && df[i + 1] > T::zero() } else { df[i] > T::zero() && df[i + 1] < T::zero() };
            if heads_back {
                let (xm, fm) = crate::roots::golden_min(|x| g(x) * if pos { T::one() } else { -T::one() }, x0, x1, 100);
                if fm <= T::zero() {
                    if fm < -T::lit(1e-14) * fmax {
                        xs.push(bisect(g, x0, xm, T::lit(1e-14)));
                        xs.push(bisect(g, xm, x1, T::lit(1e-14)));
                    } else {
                        xs.push(xm);
                    }
                } else if fm <= tol * fmax * T::lit(1e-3) {
                    xs.push(xm);
                }
            }
        }
    }
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let mut out = Vec::new();
    for x in xs.into_iter().filter(|&x| interior(x)) {
        let d = s.eval_which(which, x).1;
        out.push(Zero { x, simple: d.abs() > tol * dmax });
    }
    Ok(out)
}

/// Interior zeros of `u` or `u′`, sorted.
pub fn zeros_of<T: Real>(trace: &FunctionTrace<T>, which: Which, tol: T) -> Result<Vec<Zero<T>>, NodalError> {
    let z = match trace {
        FunctionTrace::Closed(s) => closed_zeros(s, which, tol)?,
        FunctionTrace::Sampled(s) => sampled_zeros(s, which, tol)?,
    };
    for w in z.windows(2) {
        let spacing = w[1].x - w[0].x;
        if spacing < T::lit(CLUSTER) {
            return Err(NodalError::Unresolvable { x: w[0].x.as_f64(), spacing: spacing.as_f64() });
        }
    }
    Ok(z)
}

/// Full classification with evidence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification<T: Real> {
    pub s: FamilyVerdict,
    pub t: FamilyVerdict,
    pub r: FamilyVerdict,
    /// Set when the R verdict has `k = −1`.
    pub r_nonstandard: bool,
    pub u_zeros: Vec<Zero<T>>,
    pub uprime_zeros: Vec<Zero<T>>,
    /// Whether the minus-side condition holds to tolerance, when a side was
    /// supplied.
    pub minus_bc_satisfied: Option<bool>,
}

impl<T: Real> Classification<T> {
    pub fn memberships(&self) -> Vec<NodalClass> {
        let mut v = Vec::new();
        for (family, verdict) in [(Family::S, &self.s), (Family::T, &self.t), (Family::R, &self.r)] {
            if let FamilyVerdict::Member { k, sign } = verdict {
                v.push(NodalClass { family, k: *k, sign: *sign });
            }
        }
        v
    }

    pub fn verdict(&self, family: Family) -> &FamilyVerdict {
        match family {
            Family::S => &self.s,
            Family::T => &self.t,
            Family::R => &self.r,
        }
    }

    pub fn member_of(&self, family: Family) -> Option<NodalClass> {
        self.memberships().into_iter().find(|c| c.family == family)
    }
}

fn unclassified(reason: &str) -> FamilyVerdict {
    FamilyVerdict::Unclassified { reason: reason.to_string() }
}

fn not_member(reason: &str) -> FamilyVerdict {
    FamilyVerdict::NotMember { reason: reason.to_string() }
}

/// Classifies `trace` in all three families with relative tolerance `tol`.
pub fn classify<T: Real>(trace: &FunctionTrace<T>, tol: T) -> Classification<T> {
    classify_with(trace, tol, None)
}

/// As [`classify`], also testing the given minus-side condition.
pub fn classify_with<T: Real>(trace: &FunctionTrace<T>, tol: T, minus: Option<&BoundarySide<T>>) -> Classification<T> {
    let (nu, nup) = trace.sup_norms();
    let (um, upm) = trace.eval(-T::one());
    let (uplus, upplus) = trace.eval(T::one());
    let u_deg = |v: T| v.abs() <= tol * nu;
    let up_deg = |v: T| v.abs() <= tol * nup;
    let uz = zeros_of(trace, Which::U, tol);
    let upz = zeros_of(trace, Which::Uprime, tol);

    let s = if nu.is_zero() {
        unclassified("identically zero")
    } else if u_deg(um) || u_deg(uplus) {
        unclassified("boundary-degenerate")
    } else {
        match &uz {
            Err(e) => unclassified(&e.to_string()),
            Ok(z) if z.iter().any(|z| !z.simple) => unclassified("non-simple zero of u"),
            Ok(z) => FamilyVerdict::Member { k: z.len() as i64, sign: Sign::of(um) },
        }
    };

    let t = if nup.is_zero() {
        unclassified("u' identically zero")
    } else if up_deg(upm) || up_deg(upplus) {
        unclassified("boundary-degenerate")
    } else {
        match (&upz, &uz) {
            (Err(e), _) | (_, Err(e)) => unclassified(&e.to_string()),
            (Ok(dz), _) if dz.iter().any(|z| !z.simple) => unclassified("non-simple zero of u'"),
            (Ok(dz), Ok(z)) => {
                let mut verdict = FamilyVerdict::Member { k: dz.len() as i64, sign: Sign::of(upm) };
                let sep = T::lit(CLUSTER);
                for w in dz.windows(2) {
                    let (a, b) = (w[0].x, w[1].x);
                    if z.iter().any(|z| (z.x - a).abs() < sep || (z.x - b).abs() < sep) {
                        verdict = unclassified("zero of u coincides with a zero of u'");
                        break;
                    }
                    if !z.iter().any(|z| z.x > a && z.x < b) {
                        verdict = not_member("no zero of u between consecutive zeros of u'");
                        break;
                    }
                }
                verdict
            }
        }
    };

    let mut r_nonstandard = false;
    let r = if up_deg(upm) || u_deg(uplus) || nu.is_zero() {
        unclassified("boundary-degenerate")
    } else {
        match &uz {
            Err(e) => unclassified(&e.to_string()),
            Ok(z) if z.iter().any(|z| !z.simple) => unclassified("non-simple zero of u"),
            Ok(z) => {
                let sign = Sign::of(upm);
                let nz = z.len() as i64;
                let even = uplus * sign.factor::<T>() > T::zero();
                // k ∈ {nz − 1, nz} with parity fixed by the sign of u(1).
                let k = if (nz % 2 == 0) == even { nz } else { nz - 1 };
                r_nonstandard = k == -1;
                FamilyVerdict::Member { k, sign }
            }
        }
    };

    let u_zeros = uz.unwrap_or_default();
    let uprime_zeros = upz.unwrap_or_default();
    let minus_bc_satisfied = minus.map(|side| side_satisfied(trace, side, tol));
    Classification { s, t, r, r_nonstandard, u_zeros, uprime_zeros, minus_bc_satisfied }
}

/// Whether `trace` satisfies the boundary condition of `side` to relative
/// tolerance `tol`.
pub fn side_satisfied<T: Real>(trace: &FunctionTrace<T>, side: &BoundarySide<T>, tol: T) -> bool {
    let (u, up) = trace.eval(side.side.endpoint());
    let mut r = side.alpha0 * u + side.beta0 * up;
    let mut scale = side.alpha0.abs() * u.abs() + side.beta0.abs() * up.abs();
    for ((&a, &b), &e) in side.alpha.iter().zip(&side.beta).zip(&side.eta) {
        let (ui, upi) = trace.eval(e);
        r = r - a * ui - b * upi;
        scale = scale + (a * ui).abs() + (b * upi).abs();
    }
    let (nu, nup) = trace.sup_norms();
    r.abs() <= tol * scale.max(nu.max(nup))
}

/// `max |λu² + u′² − m| / m` over the trace, `m` the median energy.
pub fn energy_deviation<T: Real>(lambda: T, trace: &FunctionTrace<T>) -> T {
    let e: Vec<T> = trace
        .sample_points()
        .into_iter()
        .map(|x| {
            let (u, up) = trace.eval(x);
            lambda * u * u + up * up
        })
        .collect();
    let mut sorted = e.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let med = sorted[sorted.len() / 2];
    e.iter().fold(T::zero(), |a, &x| a.max((x - med).abs())) / med.abs()
}
