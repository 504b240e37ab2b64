//! Scalar root finding on a sign-change bracket.

use crate::scalar::Real;

/// Bisection on `[lo, hi]` where `f(lo)` and `f(hi)` have opposite signs
/// (or one of them vanishes). Stops when the bracket is below
/// `rel_tol·max(1, |x|)` or stops shrinking.
pub fn bisect<T: Real, F: FnMut(T) -> T>(mut f: F, mut lo: T, mut hi: T, rel_tol: T) -> T {
    let mut flo = f(lo);
    if flo == T::zero() {
        return lo;
    }
    let fhi = f(hi);
    if fhi == T::zero() {
        return hi;
    }
    for _ in 0..300 {
        let mid = lo + (hi - lo) / T::two();
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == T::zero() {
            return mid;
        }
        if (fm > T::zero()) == (flo > T::zero()) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if hi - lo <= rel_tol * T::one().max(mid.abs()) {
            break;
        }
    }
    lo + (hi - lo) / T::two()
}

/// Golden-section minimization of `f` on `[lo, hi]`; returns `(x, f(x))`.
pub fn golden_min<T: Real, F: FnMut(T) -> T>(mut f: F, mut lo: T, mut hi: T, iters: usize) -> (T, T) {
    let g = (T::lit(5.0).sqrt() - T::one()) / T::two();
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 < f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_cos() {
        let r = bisect(|x: f64| x.cos(), 1.0, 2.0, 1e-15);
        assert!((r - std::f64::consts::FRAC_PI_2).abs() < 1e-14);
    }

    #[test]
    fn golden_parabola() {
        let (x, fx) = golden_min(|x: f64| (x - 0.3).powi(2), -1.0, 1.0, 80);
        assert!((x - 0.3).abs() < 1e-7);
        assert!(fx < 1e-14);
    }
}
