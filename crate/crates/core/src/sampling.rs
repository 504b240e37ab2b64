//! Seeded random problem generators for property suites and the self-test.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::problem::{BoundarySide, HypothesisLevel, ProblemSpec, Side};
use crate::scalar::Real;

/// Largest fraction of the hypothesis budget spent by a generated side.
const BUDGET_MAX: f64 = 0.9;

fn random_side<T: Real, R: Rng>(rng: &mut R, side: Side, level: HypothesisLevel, m: usize) -> BoundarySide<T> {
    let kind = rng.gen_range(0..4);
    let alpha0 = if kind == 1 { 0.0 } else { rng.gen_range(0.2..2.0) };
    let b = if kind == 0 { 0.0 } else { rng.gen_range(0.2..2.0) };
    let beta0 = if side == Side::Minus { -b } else { b };
    let s = rng.gen_range(0.1..BUDGET_MAX);
    let (mut ra, mut rb) = match level {
        HypothesisLevel::Linear => {
            let w = rng.gen_range(0.0..1.0);
            (s * w, s * (1.0 - w))
        }
        _ => {
            let phi = rng.gen_range(0.0..std::f64::consts::FRAC_PI_2);
            (s * phi.cos(), s * phi.sin())
        }
    };
    if alpha0 == 0.0 {
        ra = 0.0;
    }
    if b == 0.0 {
        rb = 0.0;
    }
    let weights = |rng: &mut R| {
        let w: Vec<f64> = (0..m).map(|_| rng.gen_range(0.05..1.0)).collect();
        let t: f64 = w.iter().sum();
        w.into_iter().map(|v| v / t).collect::<Vec<_>>()
    };
    let wa = weights(rng);
    let wb = weights(rng);
    let mut out = BoundarySide::robin(side, T::lit(alpha0), T::lit(beta0));
    for i in 0..m {
        let sa = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let sb = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let eta = rng.gen_range(-0.95..0.95);
        out = out.with_point(T::lit(sa * ra * alpha0 * wa[i]), T::lit(sb * rb * b * wb[i]), T::lit(eta));
    }
    out
}

/// One random problem at (at least) the requested level. `Violated` is
/// treated as `Quadratic`.
pub fn random_spec<T: Real, R: Rng>(rng: &mut R, level: HypothesisLevel) -> ProblemSpec<T> {
    loop {
        let mm = rng.gen_range(0..=3);
        let mp = rng.gen_range(0..=3);
        if mm + mp == 0 {
            continue;
        }
        let spec = ProblemSpec::new(
            random_side(rng, Side::Minus, level, mm),
            random_side(rng, Side::Plus, level, mp),
        );
        let want = level.max(HypothesisLevel::Quadratic);
        if spec.hypothesis_level() >= want {
            return spec;
        }
    }
}

/// `n` problems from a ChaCha8 stream seeded with `seed`.
pub fn seeded_specs<T: Real>(seed: u64, n: usize, level: HypothesisLevel) -> Vec<ProblemSpec<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| random_spec(&mut rng, level)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn levels_and_determinism() {
        let a = seeded_specs::<f64>(7, 40, HypothesisLevel::Linear);
        assert!(a.iter().all(|s| s.hypothesis_level() == HypothesisLevel::Linear));
        assert_eq!(a, seeded_specs::<f64>(7, 40, HypothesisLevel::Linear));
        let q = seeded_specs::<f64>(7, 40, HypothesisLevel::Quadratic);
        assert!(q.iter().all(|s| s.hypothesis_level().quadratic()));
        assert!(q.iter().any(|s| s.hypothesis_level() == HypothesisLevel::Quadratic));
    }
}
