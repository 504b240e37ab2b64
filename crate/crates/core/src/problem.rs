//! Boundary data for the multi-point problem and its validation.
//!
//! At each end point `ν = ±1` the condition reads
//!
//! ```text
//! α₀ u(ν) + β₀ u′(ν) = Σ αᵢ u(ηᵢ) + Σ βᵢ u′(ηᵢ)
//! ```
//!
//! [`ProblemSpec`] stores both sides; the hypothesis level (quadratic or
//! linear smallness of the interior coefficients) is always derived from the
//! coefficients, never stored from user input.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize};

use crate::scalar::{abs_sum, Real};

/// Maximum number of interior points per side.
pub const MAX_POINTS: usize = 64;

/// Slack below which a strict hypothesis inequality earns a warning.
const SLACK_WARN: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("scaling parameter t = {0} is outside [0, 1]")]
    ScaleOutOfRange(f64),
    #[error("problem is invalid: {0}")]
    Invalid(String),
}

/// End point tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Minus,
    Plus,
}

impl Side {
    /// The end point `ν·1`.
    pub fn endpoint<T: Real>(self) -> T {
        match self {
            Side::Minus => -T::one(),
            Side::Plus => T::one(),
        }
    }

    pub fn opposite(self) -> Side {
        match self {
            Side::Minus => Side::Plus,
            Side::Plus => Side::Minus,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Side::Minus => "minus",
            Side::Plus => "plus",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Coefficients of the boundary condition at one end point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySide<T: Real> {
    #[serde(skip, default = "default_side")]
    pub side: Side,
    pub alpha0: T,
    pub beta0: T,
    #[serde(default)]
    pub alpha: Vec<T>,
    #[serde(default)]
    pub beta: Vec<T>,
    #[serde(default)]
    pub eta: Vec<T>,
}

fn default_side() -> Side {
    Side::Minus
}

impl<T: Real> BoundarySide<T> {
    /// Single-point Robin condition `α₀u(ν) + β₀u′(ν) = 0`.
    pub fn robin(side: Side, alpha0: T, beta0: T) -> Self {
        BoundarySide { side, alpha0, beta0, alpha: vec![], beta: vec![], eta: vec![] }
    }

    pub fn dirichlet(side: Side) -> Self {
        Self::robin(side, T::one(), T::zero())
    }

    /// Neumann condition with the sign of `β₀` chosen to satisfy `±β₀ ≥ 0`.
    pub fn neumann(side: Side) -> Self {
        let b = match side {
            Side::Minus => -T::one(),
            Side::Plus => T::one(),
        };
        Self::robin(side, T::zero(), b)
    }

    /// Appends an interior term `α u(η) + β u′(η)`.
    pub fn with_point(mut self, alpha: T, beta: T, eta: T) -> Self {
        self.alpha.push(alpha);
        self.beta.push(beta);
        self.eta.push(eta);
        self
    }

    pub fn m(&self) -> usize {
        self.eta.len()
    }

    pub fn alpha_abs_sum(&self) -> T {
        abs_sum(&self.alpha)
    }

    pub fn beta_abs_sum(&self) -> T {
        abs_sum(&self.beta)
    }

    /// True when the interior coefficient vectors vanish.
    pub fn is_single_point(&self) -> bool {
        self.alpha.iter().chain(self.beta.iter()).all(|c| c.is_zero())
    }

    pub fn bc_type(&self) -> BcType {
        match (self.alpha0.is_zero(), self.beta0.is_zero()) {
            (_, true) => BcType::Dirichlet,
            (true, false) => BcType::Neumann,
            (false, false) => BcType::Robin,
        }
    }

    /// Interior coefficients multiplied by `t`.
    pub fn scaled(&self, t: T) -> Self {
        BoundarySide {
            side: self.side,
            alpha0: self.alpha0,
            beta0: self.beta0,
            alpha: self.alpha.iter().map(|&a| a * t).collect(),
            beta: self.beta.iter().map(|&b| b * t).collect(),
            eta: self.eta.clone(),
        }
    }

    /// The single-point (Robin) part of this condition.
    pub fn robin_part(&self) -> Self {
        Self::robin(self.side, self.alpha0, self.beta0)
    }

    /// Fractions `(Σ|αᵢ|/α₀, Σ|βᵢ|/|β₀|)` with zero-denominator fractions
    /// omitted. `None` when a zero denominator has a nonzero numerator.
    pub fn hypothesis_fractions(&self) -> Option<(T, T)> {
        let sa = self.alpha_abs_sum();
        let sb = self.beta_abs_sum();
        let fa = if self.alpha0.is_zero() {
            if !sa.is_zero() {
                return None;
            }
            T::zero()
        } else {
            sa / self.alpha0.abs()
        };
        let fb = if self.beta0.is_zero() {
            if !sb.is_zero() {
                return None;
            }
            T::zero()
        } else {
            sb / self.beta0.abs()
        };
        Some((fa, fb))
    }

    /// Strongest hypothesis level satisfied by this side alone.
    pub fn side_level(&self) -> HypothesisLevel {
        if !self.sign_ok() {
            return HypothesisLevel::Violated;
        }
        match self.hypothesis_fractions() {
            None => HypothesisLevel::Violated,
            Some((fa, fb)) => {
                if fa + fb < T::one() {
                    HypothesisLevel::Linear
                } else if fa * fa + fb * fb < T::one() {
                    HypothesisLevel::Quadratic
                } else {
                    HypothesisLevel::Violated
                }
            }
        }
    }

    /// `α₀ ≥ 0`, `α₀ + |β₀| > 0` and `±β₀ ≥ 0`.
    fn sign_ok(&self) -> bool {
        let nz = self.alpha0 >= T::zero() && self.alpha0 + self.beta0.abs() > T::zero();
        let sign = match self.side {
            Side::Minus => self.beta0 <= T::zero(),
            Side::Plus => self.beta0 >= T::zero(),
        };
        nz && sign
    }

    /// The condition after the reflection `x ↦ −x`, attached to the other
    /// end point.
    pub fn reflected(&self) -> Self {
        BoundarySide {
            side: self.side.opposite(),
            alpha0: self.alpha0,
            beta0: -self.beta0,
            alpha: self.alpha.clone(),
            beta: self.beta.iter().map(|&b| -b).collect(),
            eta: self.eta.iter().map(|&e| -e).collect(),
        }
    }
}

/// Classical type of one boundary condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BcType {
    /// `β₀ = 0`.
    Dirichlet,
    /// `α₀ = 0`.
    Neumann,
    Robin,
}

/// Hypothesis strength, ordered from weakest to strongest. The linear
/// condition implies the quadratic one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HypothesisLevel {
    Violated,
    Quadratic,
    Linear,
}

impl HypothesisLevel {
    pub fn quadratic(self) -> bool {
        self >= HypothesisLevel::Quadratic
    }

    pub fn linear(self) -> bool {
        self == HypothesisLevel::Linear
    }
}

/// Full boundary data for both end points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProblemSpec<T: Real> {
    minus: BoundarySide<T>,
    plus: BoundarySide<T>,
}

impl<'de, T: Real + Deserialize<'de>> Deserialize<'de> for ProblemSpec<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        #[serde(bound = "T: Real + Deserialize<'de>")]
        struct Raw<T: Real> {
            minus: BoundarySide<T>,
            plus: BoundarySide<T>,
        }
        let raw = Raw::<T>::deserialize(d)?;
        Ok(ProblemSpec::new(raw.minus, raw.plus))
    }
}

impl<T: Real> ProblemSpec<T> {
    /// Assembles a problem; the side tags are forced to match their slots.
    pub fn new(mut minus: BoundarySide<T>, mut plus: BoundarySide<T>) -> Self {
        minus.side = Side::Minus;
        plus.side = Side::Plus;
        ProblemSpec { minus, plus }
    }

    pub fn minus(&self) -> &BoundarySide<T> {
        &self.minus
    }

    pub fn plus(&self) -> &BoundarySide<T> {
        &self.plus
    }

    pub fn side(&self, side: Side) -> &BoundarySide<T> {
        match side {
            Side::Minus => &self.minus,
            Side::Plus => &self.plus,
        }
    }

    /// Computed hypothesis level (weakest of the two sides).
    pub fn hypothesis_level(&self) -> HypothesisLevel {
        self.minus.side_level().min(self.plus.side_level())
    }

    /// `α₀⁻ + α₀⁺ > 0`.
    pub fn strict_alpha_positive(&self) -> bool {
        self.minus.alpha0 + self.plus.alpha0 > T::zero()
    }

    /// Both conditions of Neumann type (`α₀± = 0`).
    pub fn is_neumann_type(&self) -> bool {
        self.minus.alpha0.is_zero() && self.plus.alpha0.is_zero()
    }

    /// The Robin problem obtained by dropping all interior terms.
    pub fn robin_part(&self) -> Self {
        ProblemSpec::new(self.minus.robin_part(), self.plus.robin_part())
    }

    /// Mirror image under `x ↦ −x`; eigenvalues are unchanged and
    /// eigenfunctions are reflected.
    pub fn reflected(&self) -> Self {
        ProblemSpec::new(self.plus.reflected(), self.minus.reflected())
    }

    /// Deterministic size measure used in residual scales.
    pub fn coefficient_scale(&self) -> T {
        let s = |b: &BoundarySide<T>| {
            b.alpha0.abs() + b.beta0.abs() + b.alpha_abs_sum() + b.beta_abs_sum()
        };
        s(&self.minus).max(s(&self.plus))
    }
}

/// Replaces `(α, β)` by `(tα, tβ)` on both sides.
pub fn scale_coefficients<T: Real>(spec: &ProblemSpec<T>, t: T) -> Result<ProblemSpec<T>, ModelError> {
    if !(t >= T::zero() && t <= T::one()) {
        return Err(ModelError::ScaleOutOfRange(t.as_f64()));
    }
    Ok(ProblemSpec::new(spec.minus.scaled(t), spec.plus.scaled(t)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Info,
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub severity: Severity,
    /// Dotted path of the offending field, e.g. `plus.eta[0]`.
    pub field: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub level: HypothesisLevel,
    pub messages: Vec<Message>,
    /// `α₀⁻ + α₀⁺ > 0`.
    pub strict_alpha_positive: bool,
    pub minus_type: BcType,
    pub plus_type: BcType,
    /// Dirichlet type at one end and Neumann type at the other.
    pub mixed: bool,
}

impl ValidationReport {
    pub fn errors(&self) -> impl Iterator<Item = &Message> {
        self.messages.iter().filter(|m| m.severity == Severity::Error)
    }
}

struct Collector(Vec<Message>);

impl Collector {
    fn push(&mut self, severity: Severity, field: impl Into<String>, text: impl Into<String>) {
        self.0.push(Message { severity, field: field.into(), text: text.into() });
    }
}

fn check_side<T: Real>(b: &BoundarySide<T>, out: &mut Collector) -> HypothesisLevel {
    let p = b.side.name();
    let before = out.0.len();
    let scalars = [("alpha0", b.alpha0), ("beta0", b.beta0)];
    for (name, v) in scalars {
        if !v.is_finite() {
            out.push(Severity::Error, format!("{p}.{name}"), format!("{name} must be finite, got {v}"));
        }
    }
    for (name, list) in [("alpha", &b.alpha), ("beta", &b.beta), ("eta", &b.eta)] {
        for (i, v) in list.iter().enumerate() {
            if !v.is_finite() {
                out.push(Severity::Error, format!("{p}.{name}[{i}]"), format!("{name}[{i}] must be finite, got {v}"));
            }
        }
    }
    let m = b.eta.len();
    if b.alpha.len() != m || b.beta.len() != m {
        out.push(
            Severity::Error,
            p.to_string(),
            format!(
                "coefficient lists must have equal length m (alpha: {}, beta: {}, eta: {})",
                b.alpha.len(),
                b.beta.len(),
                m
            ),
        );
    }
    if m > MAX_POINTS {
        out.push(Severity::Error, format!("{p}.eta"), format!("m = {m} exceeds the cap of {MAX_POINTS} points"));
    }
    let own = b.side.endpoint::<T>();
    for (i, &e) in b.eta.iter().enumerate() {
        if !e.is_finite() {
            continue;
        }
        if e < -T::one() || e > T::one() {
            out.push(Severity::Error, format!("{p}.eta[{i}]"), format!("eta[{i}] = {e} lies outside [-1, 1]"));
        } else if e == own {
            out.push(
                Severity::Error,
                format!("{p}.eta[{i}]"),
                format!("eta[{i}] = {e} coincides with the end point it constrains"),
            );
        }
    }
    if b.alpha0 < T::zero() {
        out.push(Severity::Error, format!("{p}.alpha0"), format!("alpha0 must be >= 0, got {}", b.alpha0));
    }
    if b.alpha0.is_finite() && b.beta0.is_finite() && !(b.alpha0 + b.beta0.abs() > T::zero()) {
        out.push(Severity::Error, format!("{p}.alpha0"), "alpha0 + |beta0| must be positive");
    }
    let sa = b.alpha_abs_sum();
    let sb = b.beta_abs_sum();
    if b.alpha0.is_zero() && !sa.is_zero() {
        out.push(
            Severity::Error,
            format!("{p}.alpha"),
            "zero-denominator convention: alpha0 = 0 requires all alpha[i] = 0",
        );
    }
    if b.beta0.is_zero() && !sb.is_zero() {
        out.push(
            Severity::Error,
            format!("{p}.beta"),
            "zero-denominator convention: beta0 = 0 requires all beta[i] = 0",
        );
    }
    if out.0[before..].iter().any(|m| m.severity == Severity::Error) {
        return HypothesisLevel::Violated;
    }

    let sign_ok = match b.side {
        Side::Minus => b.beta0 <= T::zero(),
        Side::Plus => b.beta0 >= T::zero(),
    };
    if !sign_ok {
        let want = if b.side == Side::Minus { "<= 0" } else { ">= 0" };
        out.push(
            Severity::Warning,
            format!("{p}.beta0"),
            format!("sign condition fails: beta0 must be {want}; negative or double eigenvalues may occur"),
        );
    }
    let (fa, fb) = b.hypothesis_fractions().expect("convention checked above");
    let lin = fa + fb;
    let quad = fa * fa + fb * fb;
    let slack = T::lit(SLACK_WARN);
    if lin < T::one() && T::one() - lin < slack {
        out.push(Severity::Warning, p.to_string(), format!("linear smallness condition holds with slack {}", T::one() - lin));
    }
    if quad < T::one() && T::one() - quad < slack {
        out.push(
            Severity::Warning,
            p.to_string(),
            format!("quadratic smallness condition holds with slack {}", T::one() - quad),
        );
    }
    if quad >= T::one() {
        out.push(
            Severity::Warning,
            p.to_string(),
            format!("quadratic smallness condition fails: (Σ|α|/α0)² + (Σ|β|/β0)² = {quad} >= 1"),
        );
    }
    if !sign_ok {
        return HypothesisLevel::Violated;
    }
    b.side_level()
}

/// Checks a problem and classifies its hypothesis level.
pub fn validate_problem<T: Real>(spec: &ProblemSpec<T>) -> ValidationReport {
    let mut out = Collector(Vec::new());
    let lm = check_side(&spec.minus, &mut out);
    let lp = check_side(&spec.plus, &mut out);
    let level = lm.min(lp);
    let minus_type = spec.minus.bc_type();
    let plus_type = spec.plus.bc_type();
    let mixed = matches!(
        (minus_type, plus_type),
        (BcType::Dirichlet, BcType::Neumann) | (BcType::Neumann, BcType::Dirichlet)
    );
    for (side, ty) in [(Side::Minus, minus_type), (Side::Plus, plus_type)] {
        let kind = match ty {
            BcType::Dirichlet => "Dirichlet-type",
            BcType::Neumann => "Neumann-type",
            BcType::Robin => "Robin",
        };
        let single = if spec.side(side).is_single_point() { "single-point" } else { "multi-point" };
        out.push(Severity::Info, side.name(), format!("{kind} {single} condition"));
    }
    if mixed {
        out.push(Severity::Info, "", "mixed problem (Dirichlet-type at one end, Neumann-type at the other)");
    }
    let strict_alpha_positive = spec.strict_alpha_positive();
    if !strict_alpha_positive {
        out.push(Severity::Info, "", "alpha0- + alpha0+ = 0: Neumann-type problem, lambda_0 = 0");
    }
    let ok = !out.0.iter().any(|m| m.severity == Severity::Error);
    ValidationReport {
        ok,
        level: if ok { level } else { HypothesisLevel::Violated },
        messages: out.0,
        strict_alpha_positive,
        minus_type,
        plus_type,
        mixed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dirichlet_half() -> ProblemSpec<f64> {
        ProblemSpec::new(
            BoundarySide::dirichlet(Side::Minus),
            BoundarySide::dirichlet(Side::Plus).with_point(0.5, 0.0, 0.0),
        )
    }

    #[test]
    fn quadratic_but_not_linear_example() {
        let eps = 0.1;
        let plus = BoundarySide::robin(Side::Plus, 2f64.sqrt(), eps * 2.1f64.sqrt())
            .with_point(0.6, 0.04, 0.2)
            .with_point(-0.4, -0.06, -0.3);
        let spec = ProblemSpec::new(BoundarySide::dirichlet(Side::Minus), plus);
        let (fa, fb) = spec.plus().hypothesis_fractions().unwrap();
        assert!((fa * fa + fb * fb - (0.5 + 1.0 / 2.1)).abs() < 1e-12);
        assert!(fa + fb > 1.39);
        let r = validate_problem(&spec);
        assert!(r.ok);
        assert_eq!(r.level, HypothesisLevel::Quadratic);
        assert_eq!(r.minus_type, BcType::Dirichlet);
        assert_eq!(r.plus_type, BcType::Robin);
    }

    #[test]
    fn zero_vectors_are_linear_level() {
        let spec = ProblemSpec::new(
            BoundarySide::dirichlet(Side::Minus).with_point(0.0, 0.0, 0.3),
            BoundarySide::dirichlet(Side::Plus).with_point(0.0, 0.0, -0.1),
        );
        let r = validate_problem(&spec);
        assert!(r.ok);
        assert_eq!(r.level, HypothesisLevel::Linear);
        assert!(r.level.quadratic());
        assert_eq!((r.minus_type, r.plus_type), (BcType::Dirichlet, BcType::Dirichlet));
    }

    #[test]
    fn linear_level_by_direct_arithmetic() {
        let plus = BoundarySide::robin(Side::Plus, 1.0, 1.0).with_point(0.2, 0.1, 0.0);
        let spec = ProblemSpec::new(BoundarySide::dirichlet(Side::Minus), plus);
        assert_eq!(validate_problem(&spec).level, HypothesisLevel::Linear);
    }

    #[test]
    fn hard_errors() {
        let mut bad = dirichlet_half();
        bad.plus.eta[0] = 1.5;
        let r = validate_problem(&bad);
        assert!(!r.ok);
        assert!(r.errors().any(|m| m.field == "plus.eta[0]"));

        let mut nan = dirichlet_half();
        nan.minus.alpha0 = f64::NAN;
        assert!(!validate_problem(&nan).ok);

        let conv = ProblemSpec::new(
            BoundarySide::neumann(Side::Minus).with_point(0.1, 0.0, 0.0),
            BoundarySide::dirichlet(Side::Plus),
        );
        let r = validate_problem(&conv);
        assert!(!r.ok);
        assert!(r.errors().any(|m| m.text.contains("zero-denominator convention")));

        let own = ProblemSpec::new(
            BoundarySide::dirichlet(Side::Minus).with_point(0.1, 0.0, -1.0),
            BoundarySide::dirichlet(Side::Plus),
        );
        assert!(!validate_problem(&own).ok);
    }

    #[test]
    fn sign_violation_is_level_not_error() {
        let spec = ProblemSpec::new(BoundarySide::robin(Side::Minus, 1.0, 1.0), BoundarySide::dirichlet(Side::Plus));
        let r = validate_problem(&spec);
        assert!(r.ok);
        assert_eq!(r.level, HypothesisLevel::Violated);
    }

    #[test]
    fn near_equality_warns() {
        let plus = BoundarySide::robin(Side::Plus, 1.0, 0.0).with_point(1.0 - 1e-12, 0.0, 0.0);
        let spec = ProblemSpec::new(BoundarySide::dirichlet(Side::Minus), plus);
        let r = validate_problem(&spec);
        assert!(r.ok);
        assert!(r.messages.iter().any(|m| m.severity == Severity::Warning && m.text.contains("slack")));
    }

    #[test]
    fn scaling_endpoints_and_errors() {
        let spec = dirichlet_half();
        let s0 = scale_coefficients(&spec, 0.0).unwrap();
        assert!(s0.plus().is_single_point());
        assert_eq!(scale_coefficients(&spec, 1.0).unwrap(), spec);
        let s = scale_coefficients(&spec, 0.5).unwrap();
        assert_eq!(s.plus().alpha, vec![0.25]);
        assert!(scale_coefficients(&spec, 1.5).is_err());
        assert!(scale_coefficients(&spec, -0.1).is_err());
    }

    #[test]
    fn json_shape() {
        let text = r#"{"minus":{"alpha0":1,"beta0":0,"alpha":[],"beta":[],"eta":[]},
                      "plus":{"alpha0":1,"beta0":0,"alpha":[0.5],"beta":[0],"eta":[0]}}"#;
        let spec: ProblemSpec<f64> = serde_json::from_str(text).unwrap();
        assert_eq!(spec, dirichlet_half());
        assert_eq!(spec.plus().side, Side::Plus);
        assert!(serde_json::from_str::<ProblemSpec<f64>>(r#"{"minus":{"alpha0":1,"beta0":0},"plus":{"alpha0":1,"beta0":0},"x":1}"#).is_err());
    }

    #[test]
    fn reflection_is_an_involution() {
        let spec = ProblemSpec::new(
            BoundarySide::robin(Side::Minus, 1.0, -0.5).with_point(0.1, -0.2, 0.4),
            BoundarySide::robin(Side::Plus, 2.0, 1.0).with_point(0.3, 0.1, -0.2),
        );
        let r = spec.reflected();
        assert_eq!(r.minus().beta0, -1.0);
        assert_eq!(r.minus().eta, vec![0.2]);
        assert_eq!(r.reflected(), spec);
        assert_eq!(r.hypothesis_level(), spec.hypothesis_level());
    }
}
