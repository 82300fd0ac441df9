//! One-dimensional minimization helpers: uniform grid scan followed by golden-section refinement.

use crate::num::Real;

/// Minimum of `f` over `n` uniformly spaced points spanning `[lo, hi]` (both ends included).
/// Returns `(index, x, f(x))`.
pub fn grid_min<T: Real, F: Fn(T) -> T>(f: &F, lo: T, hi: T, n: usize) -> (usize, T, T) {
    assert!(n >= 2, "grid needs at least two points");
    let step = (hi - lo) / T::from_count((n - 1) as u64);
    let mut best = (0, lo, f(lo));
    for i in 1..n {
        let x = if i == n - 1 { hi } else { lo + step * T::from_count(i as u64) };
        let y = f(x);
        if y < best.2 {
            best = (i, x, y);
        }
    }
    best
}

/// Golden-section search for a minimum of a unimodal `f` on `[a, b]`, stopping when the
/// bracket is narrower than `tol`. Returns `(x, f(x))`.
pub fn golden_section<T: Real, F: Fn(T) -> T>(f: &F, mut a: T, mut b: T, tol: T) -> (T, T) {
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let mut c = b - (b - a) * inv_phi;
    let mut d = a + (b - a) * inv_phi;
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..500 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * inv_phi;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * inv_phi;
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Grid scan, then golden-section refinement on the cell pair around the best grid point.
/// The result never exceeds the best grid value.
pub fn minimize<T: Real, F: Fn(T) -> T>(f: &F, lo: T, hi: T, n: usize, tol: T) -> (T, T) {
    let (i, x, y) = grid_min(f, lo, hi, n);
    let step = (hi - lo) / T::from_count((n - 1) as u64);
    let a = if i == 0 { lo } else { x - step };
    let b = if i == n - 1 { hi } else { x + step };
    let (xr, yr) = golden_section(f, a, b, tol);
    if yr < y {
        (xr, yr)
    } else {
        (x, y)
    }
}
