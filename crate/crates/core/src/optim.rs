//! Deterministic one-dimensional minimization: uniform grid scan, golden
//! section refinement of the best bracket, and an optional finite-difference
//! parabolic polish for smooth minima.

use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Minimum<T> {
    pub x: T,
    pub value: T,
}

/// Golden-section search on `[lo, hi]`. Stops after `max_iter` iterations
/// or once the bracket is narrower than `tol`.
pub fn golden_section<T: Real, F: Fn(T) -> T>(
    f: F,
    mut lo: T,
    mut hi: T,
    tol: T,
    max_iter: usize,
) -> Minimum<T> {
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..max_iter {
        if hi - lo <= tol {
            break;
        }
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    // report the best point actually evaluated
    let mid = (lo + hi) / T::lit(2.0);
    let fm = f(mid);
    [(mid, fm), (c, fc), (d, fd)]
        .into_iter()
        .fold(Minimum { x: mid, value: fm }, |best, (x, v)| {
            if v < best.value {
                Minimum { x, value: v }
            } else {
                best
            }
        })
}

/// Index of the smallest sample of `f` on `points` equally spaced nodes of
/// `[lo, hi]`, returned with the bracket formed by its neighbours.
pub fn grid_bracket<T: Real, F: Fn(T) -> T>(f: &F, lo: T, hi: T, points: usize) -> (T, T) {
    assert!(points >= 3, "grid needs at least three points");
    let step = (hi - lo) / T::from_usize_lossy(points - 1);
    let node = |i: usize| lo + step * T::from_usize_lossy(i);
    let mut best = 0;
    let mut best_val = f(node(0));
    for i in 1..points {
        let v = f(node(i));
        if v < best_val {
            best = i;
            best_val = v;
        }
    }
    let left = node(best.saturating_sub(1));
    let right = node((best + 1).min(points - 1));
    (left, right)
}

/// Grid scan followed by golden-section refinement.
pub fn grid_golden<T: Real, F: Fn(T) -> T>(f: F, lo: T, hi: T, points: usize) -> Minimum<T> {
    let (a, b) = grid_bracket(&f, lo, hi, points);
    golden_section(&f, a, b, T::zero(), 200)
}

/// Newton steps on central finite differences with spacing `h`. Golden
/// section alone resolves a smooth minimum only to about `sqrt(eps)` in
/// `x`; the derivative root is far better conditioned.
pub fn parabolic_polish<T: Real, F: Fn(T) -> T>(
    f: F,
    start: Minimum<T>,
    h: T,
    steps: usize,
) -> Minimum<T> {
    let mut x = start.x;
    for _ in 0..steps {
        let fp = f(x + h);
        let f0 = f(x);
        let fm = f(x - h);
        let curv = fp - T::lit(2.0) * f0 + fm;
        if curv.is_nan() || curv <= T::zero() {
            break;
        }
        let dx = h * (fp - fm) / (T::lit(2.0) * curv);
        if dx.abs() > h {
            break;
        }
        x = x - dx;
    }
    Minimum { x, value: f(x) }
}
