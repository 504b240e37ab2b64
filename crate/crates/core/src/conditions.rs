//! Boundary-value nonvanishing conditions, crossover indices and the nodal
//! prediction dispatch.
//!
//! For a side `ν` with `a = Σ|αᵢ|`, `b = Σ|βᵢ|`:
//!
//! * the derivative condition `α₀ > a + √λ·b` forces `u′(ν) ≠ 0`;
//! * the value condition `|β₀| > a/√λ + b` forces `u(ν) ≠ 0`.

use serde::{Deserialize, Serialize};

use crate::nodal::Family;
use crate::problem::{BoundarySide, HypothesisLevel, ProblemSpec, Side};
use crate::reference::{reference_eigenvalue, ReferenceKind, Robin};
use crate::scalar::Real;

/// Relative distance below which a threshold comparison earns a warning.
const EQUALITY_WARN: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConditionError {
    #[error("theorem hypotheses not met: {0}")]
    Hypotheses(String),
}

/// A one-sided range of `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Threshold<T: Real> {
    /// No `λ > 0` satisfies the condition.
    Empty,
    /// Boundary value of the range.
    Bound(T),
    /// Every `λ > 0` satisfies the condition.
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SideThresholds<T: Real> {
    pub side: Side,
    /// The derivative condition holds exactly for `λ < lambda_ud_max`.
    pub lambda_ud_max: Threshold<T>,
    /// The value condition holds exactly for `λ > lambda_u_min`.
    pub lambda_u_min: Threshold<T>,
    /// `J = (α₀/β₀)²`, infinite when `β₀ = 0`.
    pub j: T,
}

fn sums<T: Real>(side: &BoundarySide<T>) -> (T, T) {
    (side.alpha_abs_sum(), side.beta_abs_sum())
}

/// `α₀ > Σ|αᵢ| + √(λγ)·Σ|βᵢ|` with `γ = 1` for the linear problem.
pub fn ud_condition<T: Real>(side: &BoundarySide<T>, lambda: T, gamma: T) -> bool {
    let (a, b) = sums(side);
    let root = (lambda * gamma).max(T::zero()).sqrt();
    side.alpha0 > a + root * b
}

/// `|β₀| > Σ|αᵢ|/√(λγ) + Σ|βᵢ|`; at `λ = 0` only possible when `Σ|αᵢ| = 0`.
pub fn u_condition<T: Real>(side: &BoundarySide<T>, lambda: T, gamma: T) -> bool {
    let (a, b) = sums(side);
    let lg = lambda * gamma;
    let first = if a.is_zero() {
        T::zero()
    } else if lg > T::zero() {
        a / lg.sqrt()
    } else {
        return false;
    };
    side.beta0.abs() > first + b
}

pub fn j_value<T: Real>(side: &BoundarySide<T>) -> T {
    if side.beta0.is_zero() {
        T::infinity()
    } else {
        let r = side.alpha0 / side.beta0;
        r * r
    }
}

pub fn side_thresholds<T: Real>(side: &BoundarySide<T>) -> SideThresholds<T> {
    let (a, b) = sums(side);
    let lambda_ud_max = if side.alpha0 <= a {
        Threshold::Empty
    } else if b.is_zero() {
        Threshold::All
    } else {
        let r = (side.alpha0 - a) / b;
        Threshold::Bound(r * r)
    };
    let bb = side.beta0.abs();
    let lambda_u_min = if bb <= b {
        Threshold::Empty
    } else if a.is_zero() {
        Threshold::All
    } else {
        let r = a / (bb - b);
        Threshold::Bound(r * r)
    };
    SideThresholds { side: side.side, lambda_ud_max, lambda_u_min, j: j_value(side) }
}

/// An index that may be `+∞`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Index {
    Finite(i64),
    Unbounded,
}

impl Index {
    /// `k ≤ self + offset`.
    pub fn ge(self, k: i64, offset: i64) -> bool {
        match self {
            Index::Finite(i) => k <= i + offset,
            Index::Unbounded => true,
        }
    }

    /// `k ≥ self + offset`.
    pub fn le(self, k: i64, offset: i64) -> bool {
        match self {
            Index::Finite(i) => k >= i + offset,
            Index::Unbounded => false,
        }
    }

    pub fn finite(self) -> Option<i64> {
        match self {
            Index::Finite(i) => Some(i),
            Index::Unbounded => None,
        }
    }
}

/// Whether the problem has one or two multi-point conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Minus side single-point (possibly after reflecting the problem).
    SingleMultiPoint { reflected: bool },
    TwoMultiPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossoverIndices<T: Real> {
    pub mode: Mode,
    pub j_minus: T,
    pub j_plus: T,
    pub j_min: T,
    pub j_max: T,
    pub k_c: Option<Index>,
    pub k_t: Option<Index>,
    pub k_s: Option<Index>,
    pub k_tm: Option<Index>,
    pub k_sm: Option<Index>,
    pub warnings: Vec<String>,
}

/// Detects the mode and returns the problem in the orientation used by the
/// single multi-point theorems.
pub fn oriented<T: Real>(spec: &ProblemSpec<T>) -> (Mode, ProblemSpec<T>) {
    if spec.minus().is_single_point() {
        (Mode::SingleMultiPoint { reflected: false }, spec.clone())
    } else if spec.plus().is_single_point() {
        (Mode::SingleMultiPoint { reflected: true }, spec.reflected())
    } else {
        (Mode::TwoMultiPoint, spec.clone())
    }
}

fn lam<T: Real>(kind: &ReferenceKind<T>, k: i64) -> T {
    reference_eigenvalue(kind, k).expect("validated reference kind")
}

fn near<T: Real>(a: T, b: T) -> bool {
    a.is_finite() && b.is_finite() && (a - b).abs() <= T::lit(EQUALITY_WARN) * T::one().max(b.abs())
}

/// Largest `k ≥ lo` with `λ_k ≤ j` (sequence increasing to `∞`).
fn max_le<T: Real>(kind: &ReferenceKind<T>, lo: i64, j: T, warn: &mut Vec<String>, name: &str) -> Index {
    if j.is_infinite() {
        return Index::Unbounded;
    }
    let mut k = lo;
    while lam(kind, k + 1) <= j {
        k += 1;
    }
    for kk in [k, k + 1] {
        if near(lam(kind, kk), j) {
            warn.push(format!("{name}: J = {j} is within {EQUALITY_WARN:e} of lambda_{kk}"));
        }
    }
    Index::Finite(k)
}

/// Smallest `k ≥ 0` with `λ_k ≥ j`.
fn min_ge<T: Real>(kind: &ReferenceKind<T>, j: T, warn: &mut Vec<String>, name: &str) -> Index {
    if j.is_infinite() {
        return Index::Unbounded;
    }
    let mut k = 0;
    while lam(kind, k) < j {
        k += 1;
    }
    for kk in [k - 1, k] {
        if kk >= 0 && near(lam(kind, kk), j) {
            warn.push(format!("{name}: J = {j} is within {EQUALITY_WARN:e} of lambda_{kk}"));
        }
    }
    Index::Finite(k)
}

fn rd_kind<T: Real>(spec: &ProblemSpec<T>) -> ReferenceKind<T> {
    ReferenceKind::RobinDirichlet { minus: Robin::of_side(spec.minus()) }
}

fn rn_kind<T: Real>(spec: &ProblemSpec<T>) -> ReferenceKind<T> {
    ReferenceKind::RobinNeumann { minus: Robin::of_side(spec.minus()) }
}

/// `k_c` for an oriented single multi-point problem.
fn k_c<T: Real>(spec: &ProblemSpec<T>, warn: &mut Vec<String>) -> Index {
    let j = j_value(spec.plus());
    if j.is_zero() {
        return Index::Finite(-1);
    }
    // λ_{k_c}^{RD} < J ≤ λ_{k_c+1}^{RD}, with λ_{−1}^{RD} = 0.
    if j.is_infinite() {
        return Index::Unbounded;
    }
    let rd = rd_kind(spec);
    let mut k = -1;
    while lam(&rd, k + 1) < j {
        k += 1;
    }
    for kk in [k, k + 1] {
        if kk >= 0 && near(lam(&rd, kk), j) {
            warn.push(format!("k_c: J+ = {j} is within {EQUALITY_WARN:e} of lambda_{kk}^RD"));
        }
    }
    Index::Finite(k)
}

fn require_linear<T: Real>(side: &BoundarySide<T>) -> Result<(), ConditionError> {
    if side.side_level() == HypothesisLevel::Linear {
        Ok(())
    } else {
        Err(ConditionError::Hypotheses(format!("the linear smallness condition fails on the {} side", side.side)))
    }
}

pub fn crossover_indices<T: Real>(spec: &ProblemSpec<T>) -> Result<CrossoverIndices<T>, ConditionError> {
    let (mode, o) = oriented(spec);
    let mut warnings = Vec::new();
    let j_minus = j_value(spec.minus());
    let j_plus = j_value(spec.plus());
    let j_min = j_minus.min(j_plus);
    let j_max = j_minus.max(j_plus);
    let mut out = CrossoverIndices {
        mode,
        j_minus,
        j_plus,
        j_min,
        j_max,
        k_c: None,
        k_t: None,
        k_s: None,
        k_tm: None,
        k_sm: None,
        warnings: Vec::new(),
    };
    match mode {
        Mode::SingleMultiPoint { .. } => {
            require_linear(o.plus())?;
            if !o.minus().side_level().quadratic() {
                return Err(ConditionError::Hypotheses("sign condition fails on the single-point side".into()));
            }
            out.k_c = Some(k_c(&o, &mut warnings));
        }
        Mode::TwoMultiPoint => {
            require_linear(spec.minus())?;
            require_linear(spec.plus())?;
            let n = ReferenceKind::Neumann;
            let d = ReferenceKind::Dirichlet;
            let m = ReferenceKind::Mixed;
            out.k_t = Some(max_le(&n, 0, j_min, &mut warnings, "k_T"));
            out.k_s = Some(min_ge(&d, j_max, &mut warnings, "k_S"));
            out.k_tm = Some(max_le(&m, -1, j_min, &mut warnings, "k_TM"));
            out.k_sm = Some(min_ge(&m, j_max, &mut warnings, "k_SM"));
        }
    }
    out.warnings = warnings;
    Ok(out)
}

/// Which result produced a prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremTag {
    /// One multi-point side with `β⁺ = 0`, `α₀⁺ > 0`.
    SinglePointDerivativeCorollary,
    /// One multi-point side with `α⁺ = 0`, `β₀⁺ > 0`.
    SinglePointValueCorollary,
    /// One multi-point side, linear level, index away from `k_c`.
    SingleCrossover,
    /// One multi-point side, indices `k_c` and `k_c + 1`.
    SingleCritical,
    /// One multi-point side, conditions at a single reference eigenvalue.
    SingleIndividual,
    /// Two multi-point sides with `β± = 0`, `α₀± > 0`.
    DoubleDerivativeCorollary,
    /// Two multi-point sides with `α± = 0`, `β₀± > 0`.
    DoubleValueCorollary,
    /// Two multi-point sides, linear level, `k ≤ k_T − 2` or `k ≥ k_S + 2`.
    DoubleCrossover,
    /// Two multi-point sides, intermediate range of `R_k`.
    DoubleIntermediate,
    /// Two multi-point sides, strengthened conditions at `k_TM + 2` / `k_SM − 2`.
    DoubleStrengthened,
    /// Two multi-point sides, conditions at a single reference eigenvalue.
    DoubleIndividual,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum Verdict<T: Real> {
    /// `ψ_k ∈ T_{k+1}` with `lo < λ_k < hi`.
    T { index: i64, lo: T, hi: T },
    /// `ψ_k ∈ S_k`.
    S { index: i64, lo: T, hi: T },
    /// `ψ_k ∈ R_k`; when `reflected`, `ψ_k(−x) ∈ R_k`.
    R { index: i64, lo: T, hi: T, reflected: bool },
    Indeterminate { reason: String },
}

impl<T: Real> Verdict<T> {
    pub fn family(&self) -> Option<Family> {
        match self {
            Verdict::T { .. } => Some(Family::T),
            Verdict::S { .. } => Some(Family::S),
            Verdict::R { .. } => Some(Family::R),
            Verdict::Indeterminate { .. } => None,
        }
    }

    /// `(family index, lo, hi)` for determinate verdicts.
    pub fn parts(&self) -> Option<(i64, T, T)> {
        match *self {
            Verdict::T { index, lo, hi } | Verdict::S { index, lo, hi } | Verdict::R { index, lo, hi, .. } => {
                Some((index, lo, hi))
            }
            Verdict::Indeterminate { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction<T: Real> {
    pub k: i64,
    pub verdict: Verdict<T>,
    pub theorem: TheoremTag,
    pub warnings: Vec<String>,
}

fn t_single<T: Real>(o: &ProblemSpec<T>, k: i64) -> Verdict<T> {
    let rn = rn_kind(o);
    Verdict::T { index: k + 1, lo: lam(&rn, k), hi: lam(&rn, k + 1) }
}

fn s_single<T: Real>(o: &ProblemSpec<T>, k: i64) -> Verdict<T> {
    let rd = rd_kind(o);
    Verdict::S { index: k, lo: lam(&rd, k - 1), hi: lam(&rd, k) }
}

fn t_double<T: Real>(k: i64) -> Verdict<T> {
    let n = ReferenceKind::Neumann;
    Verdict::T { index: k + 1, lo: lam(&n, k), hi: lam(&n, k + 2) }
}

fn s_double<T: Real>(k: i64) -> Verdict<T> {
    let d = ReferenceKind::Dirichlet;
    Verdict::S { index: k, lo: lam(&d, k - 2), hi: lam(&d, k) }
}

fn r_double<T: Real>(k: i64, reflected: bool) -> Verdict<T> {
    let m = ReferenceKind::Mixed;
    Verdict::R { index: k, lo: lam(&m, k - 1), hi: lam(&m, k + 1), reflected }
}

fn indeterminate<T: Real>(k: i64, reason: impl Into<String>, warnings: Vec<String>) -> Prediction<T> {
    Prediction { k, verdict: Verdict::Indeterminate { reason: reason.into() }, theorem: TheoremTag::None, warnings }
}

fn all_zero<T: Real>(v: &[T]) -> bool {
    v.iter().all(|x| x.is_zero())
}

/// Theorem-based prediction of the nodal class of `ψ_k`.
pub fn predict_nodal_class<T: Real>(spec: &ProblemSpec<T>, k: i64) -> Prediction<T> {
    if k < 0 {
        return indeterminate(k, "index must be >= 0", vec![]);
    }
    let level = spec.hypothesis_level();
    if !level.quadratic() {
        return indeterminate(k, "basic hypotheses not met (quadratic smallness or sign condition fails)", vec![]);
    }
    let (mode, o) = oriented(spec);
    match mode {
        Mode::SingleMultiPoint { .. } => predict_single(&o, k),
        Mode::TwoMultiPoint => predict_double(spec, k),
    }
}

/// Rejects families that cannot occur at a degenerate single-point side.
fn guard_single<T: Real>(o: &ProblemSpec<T>, p: Prediction<T>) -> Prediction<T> {
    let m = o.minus();
    let blocked = match p.verdict {
        Verdict::T { .. } if m.alpha0.is_zero() => Some("u'(-1) = 0 is forced by the single-point condition"),
        Verdict::S { .. } if m.beta0.is_zero() => Some("u(-1) = 0 is forced by the single-point condition"),
        _ => None,
    };
    match blocked {
        Some(why) => indeterminate(p.k, format!("{why}; the restricted nodal sets are not implemented"), p.warnings),
        None => p,
    }
}

fn predict_single<T: Real>(o: &ProblemSpec<T>, k: i64) -> Prediction<T> {
    let p = o.plus();
    let one = T::one();
    let mk = |verdict, theorem, warnings| Prediction { k, verdict, theorem, warnings };
    if p.alpha0 > T::zero() && all_zero(&p.beta) {
        return guard_single(o, mk(t_single(o, k), TheoremTag::SinglePointDerivativeCorollary, vec![]));
    }
    if all_zero(&p.alpha) && p.beta0 > T::zero() {
        return guard_single(o, mk(s_single(o, k), TheoremTag::SinglePointValueCorollary, vec![]));
    }
    let mut warnings = Vec::new();
    if p.side_level() == HypothesisLevel::Linear {
        let kc = k_c(o, &mut warnings);
        match kc {
            Index::Unbounded => return guard_single(o, mk(t_single(o, k), TheoremTag::SingleCrossover, warnings)),
            Index::Finite(kc) => {
                if k < kc {
                    return guard_single(o, mk(t_single(o, k), TheoremTag::SingleCrossover, warnings));
                }
                if k >= kc + 2 || kc == -1 {
                    return guard_single(o, mk(s_single(o, k), TheoremTag::SingleCrossover, warnings));
                }
                let j = j_value(p);
                let rd = rd_kind(o);
                let rn = rn_kind(o);
                let case_b = lam(&rn, kc + 1) <= j && j <= lam(&rd, kc + 1);
                let case_a = lam(&rd, kc) < j
                    && j < lam(&rn, kc + 1)
                    && (u_condition(p, lam(&rd, kc), one) || ud_condition(p, lam(&rn, kc + 1), one));
                if case_b || case_a {
                    let v = if k == kc { t_single(o, k) } else { s_single(o, k) };
                    return guard_single(o, mk(v, TheoremTag::SingleCritical, warnings));
                }
            }
        }
    }
    let rd = rd_kind(o);
    let rn = rn_kind(o);
    if ud_condition(p, lam(&rn, k + 1), one) {
        return guard_single(o, mk(t_single(o, k), TheoremTag::SingleIndividual, warnings));
    }
    if (k >= 1 && u_condition(p, lam(&rd, k - 1), one)) || u_condition(p, lam(&rd, 0), one) {
        return guard_single(o, mk(s_single(o, k), TheoremTag::SingleIndividual, warnings));
    }
    indeterminate(k, "no nodal theorem applies to this index", warnings)
}

fn both<T: Real>(spec: &ProblemSpec<T>, f: impl Fn(&BoundarySide<T>) -> bool) -> bool {
    f(spec.minus()) && f(spec.plus())
}

fn predict_double<T: Real>(spec: &ProblemSpec<T>, k: i64) -> Prediction<T> {
    let one = T::one();
    let mk = |verdict, theorem, warnings| Prediction { k, verdict, theorem, warnings };
    if both(spec, |s| s.alpha0 > T::zero() && all_zero(&s.beta)) {
        return mk(t_double(k), TheoremTag::DoubleDerivativeCorollary, vec![]);
    }
    if both(spec, |s| all_zero(&s.alpha) && !s.beta0.is_zero()) {
        return mk(s_double(k), TheoremTag::DoubleValueCorollary, vec![]);
    }
    let n = ReferenceKind::Neumann;
    let d = ReferenceKind::Dirichlet;
    let mut warnings = Vec::new();
    let mut r_note = None;
    if let Ok(ci) = crossover_indices(spec) {
        warnings.extend(ci.warnings.iter().cloned());
        let (kt, ks, ktm, ksm) = (ci.k_t.unwrap(), ci.k_s.unwrap(), ci.k_tm.unwrap(), ci.k_sm.unwrap());
        if kt.ge(k, -2) {
            return mk(t_double(k), TheoremTag::DoubleCrossover, warnings);
        }
        if ks.le(k, 2) {
            return mk(s_double(k), TheoremTag::DoubleCrossover, warnings);
        }
        if ktm.le(k, 1) && ksm.ge(k, -1) {
            if ci.j_minus == ci.j_plus {
                r_note = Some("J- = J+: the intermediate range does not apply");
            } else if ci.j_minus.is_infinite() || ci.j_plus.is_infinite() {
                r_note = Some("exactly one of J+- is infinite: intermediate-range result not established");
            } else {
                return mk(r_double(k, ci.j_minus < ci.j_plus), TheoremTag::DoubleIntermediate, warnings);
            }
        }
        if let Some(tm) = ktm.finite() {
            if k <= tm && both(spec, |s| ud_condition(s, lam(&n, tm + 2), one)) {
                return mk(t_double(k), TheoremTag::DoubleStrengthened, warnings);
            }
        }
        if let Some(sm) = ksm.finite() {
            if sm >= 2 && k >= sm && both(spec, |s| u_condition(s, lam(&d, sm - 2), one)) {
                return mk(s_double(k), TheoremTag::DoubleStrengthened, warnings);
            }
        }
    }
    if both(spec, |s| ud_condition(s, lam(&n, k + 2), one)) {
        return mk(t_double(k), TheoremTag::DoubleIndividual, warnings);
    }
    if k >= 2 && both(spec, |s| u_condition(s, lam(&d, k - 2), one)) {
        return mk(s_double(k), TheoremTag::DoubleIndividual, warnings);
    }
    indeterminate(k, r_note.unwrap_or("no nodal theorem applies to this index"), warnings)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_mp() -> ProblemSpec<f64> {
        ProblemSpec::new(
            BoundarySide::robin(Side::Minus, 1.0, -1.0).with_point(0.1, 0.1, 0.5),
            BoundarySide::robin(Side::Plus, 2.0, 1.0).with_point(0.2, 0.1, 0.0),
        )
    }

    #[test]
    fn thresholds_examples() {
        let eps = 0.1;
        let s = BoundarySide::robin(Side::Plus, 2f64.sqrt(), eps * 2.1f64.sqrt())
            .with_point(0.6, 0.04, 0.2)
            .with_point(-0.4, -0.06, -0.3);
        let t = side_thresholds(&s);
        let Threshold::Bound(v) = t.lambda_ud_max else { panic!() };
        assert!((v - ((2f64.sqrt() - 1.0) / 0.1).powi(2)).abs() < 1e-9);
        let d = side_thresholds(&BoundarySide::<f64>::dirichlet(Side::Plus));
        assert_eq!(d.lambda_ud_max, Threshold::All);
        assert_eq!(d.lambda_u_min, Threshold::Empty);
        assert!(d.j.is_infinite());
        let r = BoundarySide::robin(Side::Plus, 1.0, 1.0).with_point(0.2, 0.1, 0.0);
        assert_eq!(j_value(&r), 1.0);
        for l in [0.01, 0.5, 1.0] {
            assert!(ud_condition(&r, l, 1.0));
        }
        for l in [1.0, 4.0, 100.0] {
            assert!(u_condition(&r, l, 1.0));
        }
    }

    #[test]
    fn crossover_example() {
        let ci = crossover_indices(&two_mp()).unwrap();
        assert_eq!((ci.j_minus, ci.j_plus), (1.0, 4.0));
        assert_eq!(ci.k_t, Some(Index::Finite(0)));
        assert_eq!(ci.k_s, Some(Index::Finite(1)));
        assert_eq!(ci.k_tm, Some(Index::Finite(0)));
        assert_eq!(ci.k_sm, Some(Index::Finite(1)));
    }

    #[test]
    fn single_kc_examples() {
        let spec = ProblemSpec::new(
            BoundarySide::dirichlet(Side::Minus),
            BoundarySide::robin(Side::Plus, 1.0, 1.0).with_point(0.1, 0.1, 0.0),
        );
        assert_eq!(crossover_indices(&spec).unwrap().k_c, Some(Index::Finite(-1)));
        let neu = ProblemSpec::new(BoundarySide::dirichlet(Side::Minus), BoundarySide::robin(Side::Plus, 0.0, 1.0).with_point(0.0, 0.2, 0.0));
        assert_eq!(crossover_indices(&neu).unwrap().k_c, Some(Index::Finite(-1)));
    }

    #[test]
    fn dispatch_examples() {
        let dir = ProblemSpec::new(
            BoundarySide::dirichlet(Side::Minus).with_point(0.2, 0.0, 0.3),
            BoundarySide::dirichlet(Side::Plus).with_point(0.3, 0.0, -0.2),
        );
        for k in 0..10 {
            let p = predict_nodal_class(&dir, k);
            assert!(matches!(p.verdict, Verdict::T { index, .. } if index == k + 1));
        }
        let p = predict_nodal_class(&two_mp(), 3);
        let Verdict::S { index, lo, hi } = p.verdict else { panic!("{p:?}") };
        assert_eq!(index, 3);
        assert!((lo - std::f64::consts::PI.powi(2)).abs() < 1e-12);
        assert!((hi - (2.0 * std::f64::consts::PI).powi(2)).abs() < 1e-12);
    }

    #[test]
    fn not_linear_is_error() {
        let spec = ProblemSpec::new(
            BoundarySide::dirichlet(Side::Minus).with_point(0.9, 0.0, 0.3),
            BoundarySide::robin(Side::Plus, 1.0, 1.0).with_point(0.5, 0.5, 0.0),
        );
        assert!(crossover_indices(&spec).is_err());
    }
}
