//! Dormand–Prince 5(4) integration of `u″ = g(x, u, u′)` on `[−1, 1]` with
//! exact landing on interior stop points and dense output on a uniform grid.

use crate::nodal::SampledTrace;
use crate::scalar::Real;

/// `|u|` beyond which the trajectory counts as blown up.
pub const BLOWUP: f64 = 1e12;
/// Default local tolerance.
pub const IVP_TOL: f64 = 1e-10;
/// Dense output cells on `[−1, 1]` (spacing `1e−3`).
pub const GRID_CELLS: usize = 2000;
const MAX_STEPS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OdeError {
    #[error("solution blew up (|u| > 1e12) at x = {x}")]
    BlowUp { x: f64 },
    #[error("right-hand side not finite at x = {x}")]
    NonFinite { x: f64 },
    #[error("step size underflow at x = {x}")]
    StepUnderflow { x: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IvpOptions<T> {
    pub tol: T,
    pub h_max: T,
    /// Record a dense trace with this many uniform cells (0: none).
    pub grid_cells: usize,
}

impl<T: Real> Default for IvpOptions<T> {
    fn default() -> Self {
        IvpOptions { tol: T::lit(IVP_TOL), h_max: T::lit(0.05), grid_cells: GRID_CELLS }
    }
}

impl<T: Real> IvpOptions<T> {
    /// End-point and stop values only.
    pub fn light(tol: T) -> Self {
        IvpOptions { tol, h_max: T::lit(0.05), grid_cells: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct IvpResult<T: Real> {
    /// `(u, u′)` at each requested stop, in request order.
    pub at_stops: Vec<(T, T)>,
    /// `(u, u′)` at `x = 1`.
    pub end: (T, T),
    pub trace: Option<SampledTrace<T>>,
    pub steps: usize,
    /// `(max |u|, max |u′|)` over step end points and grid samples.
    pub sup: (T, T),
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

type State<T> = [T; 2];

/// Integrates from `x = −1` with `(u, u′) = (a, b)` to `x = 1`.
///
/// `rhs(x, u, u′)` returns `u″`. Every stop in `[−1, 1]` is hit exactly by a
/// step end point.
pub fn integrate_ivp<T: Real, F: Fn(T, T, T) -> T>(
    rhs: F,
    a: T,
    b: T,
    stops: &[T],
    opts: &IvpOptions<T>,
) -> Result<IvpResult<T>, OdeError> {
    let one = T::one();
    let f = |x: T, y: &State<T>| -> Result<State<T>, OdeError> {
        let acc = rhs(x, y[0], y[1]);
        if !acc.is_finite() {
            return Err(OdeError::NonFinite { x: x.as_f64() });
        }
        Ok([y[1], acc])
    };

    let mut targets: Vec<T> = stops.iter().copied().filter(|&s| s > -one && s < one).collect();
    targets.push(one);
    targets.sort_by(|p, q| p.partial_cmp(q).unwrap());
    targets.dedup();

    let n = opts.grid_cells;
    let grid_x = |i: usize| -one + T::two() * T::nat(i) / T::nat(n);
    let mut xs = Vec::new();
    let mut us = Vec::new();
    let mut ups = Vec::new();
    let mut upps = Vec::new();
    let mut next_grid = 1usize;

    let mut x = -one;
    let mut y: State<T> = [a, b];
    let mut k1 = f(x, &y)?;
    let mut found: Vec<(T, State<T>)> = vec![(x, y)];
    let mut sup = (a.abs(), b.abs());
    if n > 0 {
        xs.push(x);
        us.push(y[0]);
        ups.push(y[1]);
        upps.push(k1[1]);
    }

    let tol = opts.tol;
    // Absolute floor follows the initial state so small homogeneous
    // trajectories keep their relative accuracy.
    let floor = a.abs().max(b.abs()).max(T::lit(1e-8)).min(one);
    let mut h = T::lit(1e-3).min(opts.h_max);
    let mut steps = 0;
    for &target in &targets {
        while x < target {
            if steps >= MAX_STEPS {
                return Err(OdeError::StepUnderflow { x: x.as_f64() });
            }
            let mut last = false;
            if x + h >= target || (target - x - h) < T::lit(1e-12) {
                h = target - x;
                last = true;
            }
            let mut k = [k1; 7];
            for s in 1..7 {
                let mut ys = y;
                for (j, kj) in k.iter().enumerate().take(s) {
                    let w = T::lit(A[s][j]);
                    if w != T::zero() {
                        ys[0] = ys[0] + h * w * kj[0];
                        ys[1] = ys[1] + h * w * kj[1];
                    }
                }
                k[s] = f(x + T::lit(C[s]) * h, &ys)?;
            }
            let y1: State<T> = {
                let mut v = y;
                for (j, kj) in k.iter().enumerate().take(6) {
                    let w = T::lit(A[6][j]);
                    v[0] = v[0] + h * w * kj[0];
                    v[1] = v[1] + h * w * kj[1];
                }
                v
            };
            let mut err = T::zero();
            for i in 0..2 {
                let mut e = T::zero();
                for (j, kj) in k.iter().enumerate() {
                    e = e + T::lit(E[j]) * kj[i];
                }
                let sc = tol * (floor + y[i].abs().max(y1[i].abs()));
                err = err.max((h * e).abs() / sc);
            }
            if !err.is_finite() {
                err = T::lit(1e10);
            }
            if err <= one {
                steps += 1;
                if n > 0 {
                    let ydiff = [y1[0] - y[0], y1[1] - y[1]];
                    let bspl = [h * k[0][0] - ydiff[0], h * k[0][1] - ydiff[1]];
                    let r4 = [ydiff[0] - h * k[6][0] - bspl[0], ydiff[1] - h * k[6][1] - bspl[1]];
                    let mut r5 = [T::zero(); 2];
                    for (j, kj) in k.iter().enumerate() {
                        let w = T::lit(D[j]);
                        r5[0] = r5[0] + h * w * kj[0];
                        r5[1] = r5[1] + h * w * kj[1];
                    }
                    let x1 = x + h;
                    while next_grid < n && grid_x(next_grid) < x1 {
                        let gx = grid_x(next_grid);
                        let th = (gx - x) / h;
                        let t1 = one - th;
                        let v = |i: usize| y[i] + th * (ydiff[i] + t1 * (bspl[i] + th * (r4[i] + t1 * r5[i])));
                        let (u, up) = (v(0), v(1));
                        sup = (sup.0.max(u.abs()), sup.1.max(up.abs()));
                        if gx - *xs.last().unwrap() > T::lit(1e-12) {
                            xs.push(gx);
                            us.push(u);
                            ups.push(up);
                            upps.push(rhs(gx, u, up));
                        }
                        next_grid += 1;
                    }
                }
                x = if last { target } else { x + h };
                y = y1;
                k1 = k[6];
                sup = (sup.0.max(y[0].abs()), sup.1.max(y[1].abs()));
                if y[0].abs() > T::lit(BLOWUP) || !y[0].is_finite() || !y[1].is_finite() {
                    return Err(OdeError::BlowUp { x: x.as_f64() });
                }
                if n > 0 && (x - *xs.last().unwrap()) > T::lit(1e-12) {
                    let on_grid = next_grid < n && (grid_x(next_grid) - x).abs() <= T::lit(1e-12);
                    if on_grid {
                        next_grid += 1;
                    }
                    if last || on_grid {
                        xs.push(x);
                        us.push(y[0]);
                        ups.push(y[1]);
                        upps.push(k1[1]);
                    }
                }
                let fac = if err > T::zero() { T::lit(0.9) * err.powf(T::lit(-0.2)) } else { T::lit(5.0) };
                h = (h * fac.min(T::lit(5.0)).max(T::lit(0.2))).min(opts.h_max);
            } else {
                let fac = T::lit(0.9) * err.powf(T::lit(-0.2));
                h = h * fac.max(T::lit(0.1));
            }
            if h < T::lit(1e-14) {
                return Err(OdeError::StepUnderflow { x: x.as_f64() });
            }
        }
        found.push((target, y));
    }

    let lookup = |s: T| -> (T, T) {
        if s <= -one {
            return (a, b);
        }
        let (_, v) = found.iter().find(|(p, _)| *p == s).copied().unwrap_or_else(|| *found.last().unwrap());
        (v[0], v[1])
    };
    let at_stops = stops.iter().map(|&s| lookup(s.min(one))).collect();
    let trace = if n > 0 {
        Some(SampledTrace::new(xs, us, ups, Some(upps)).expect("integrator grid is increasing and spans [-1, 1]"))
    } else {
        None
    };
    Ok(IvpResult { at_stops, end: (y[0], y[1]), trace, steps, sup })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn linear_sine() {
        let w = PI / 2.0;
        let lam = w * w;
        let r = integrate_ivp(|_, u, _| -lam * u, 0.0, 1.0, &[0.0, 0.3], &IvpOptions::default()).unwrap();
        let tr = r.trace.unwrap();
        let mut worst: f64 = 0.0;
        for (&x, &u) in tr.xs().iter().zip(tr.us()) {
            worst = worst.max((u - (w * (x + 1.0)).sin() / w).abs());
        }
        assert!(worst < 1e-9, "{worst}");
        assert!((r.at_stops[0].0 - (w).sin() / w).abs() < 1e-10);
        assert!((r.at_stops[1].1 - (w * 1.3).cos()).abs() < 1e-10);
        assert!((r.end.0 - 0.0).abs() < 1e-10);
        for x in [-0.9995, 0.1234, 0.77] {
            let (u, up) = tr.eval(x);
            assert!((u - (w * (x + 1.0)).sin() / w).abs() < 1e-9);
            assert!((up - (w * (x + 1.0)).cos()).abs() < 1e-9);
        }
    }

    #[test]
    fn trivial_and_blowup() {
        let r = integrate_ivp(|_, u: f64, _| -u.powi(3), 0.0, 0.0, &[], &IvpOptions::default()).unwrap();
        assert!(r.trace.unwrap().us().iter().all(|&u| u == 0.0));
        let e = integrate_ivp(|_, u: f64, _| u.powi(3), 10.0, 0.0, &[], &IvpOptions::default()).unwrap_err();
        assert!(matches!(e, OdeError::BlowUp { .. }));
    }
}
