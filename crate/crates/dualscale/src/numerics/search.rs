//! Grid-safeguarded one-dimensional maximization.
//!
//! Golden-section search is exact for unimodal objectives, but the
//! scheduler's inner objective is only *expected* to be unimodal per
//! segment, not proven. The maximizer therefore always follows the
//! golden-section pass with a 1000-point uniform grid scan plus a local
//! golden refinement around the best grid point, and returns the best point
//! seen anywhere — so its value can never fall below the dense-grid maximum.

use crate::{Error, Result};

const GOLDEN_RATIO: f64 = 0.618_033_988_749_894_9; // (sqrt(5) - 1) / 2
const GRID_POINTS: usize = 1000;

/// Maximizes `f` on `[a, b]`.
///
/// Returns `(argmax, max)` where `max` is at least the maximum of `f` over a
/// 1000-point uniform grid on `[a, b]` (both endpoints included), and
/// `argmax` localizes the best point to within `tol` when `f` is unimodal.
pub fn maximize_unimodal_1d(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    if !(a <= b) {
        return Err(Error::Argument(format!(
            "search interval is inverted: a = {a}, b = {b}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::Argument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if a == b {
        let v = f(a);
        return Ok((a, v));
    }

    let mut best_x = a;
    let mut best_v = f(a);
    {
        let vb = f(b);
        if vb > best_v {
            best_x = b;
            best_v = vb;
        }
    }

    let (gx, gv) = golden_section(&mut f, a, b, tol);
    if gv > best_v {
        best_x = gx;
        best_v = gv;
    }

    // Dense-grid safety pass (covers non-unimodal objectives).
    let step = (b - a) / (GRID_POINTS - 1) as f64;
    let mut grid_best_x = a;
    let mut grid_best_v = f64::NEG_INFINITY;
    for i in 0..GRID_POINTS {
        let x = if i + 1 == GRID_POINTS {
            b
        } else {
            a + step * i as f64
        };
        let v = f(x);
        if v > grid_best_v {
            grid_best_x = x;
            grid_best_v = v;
        }
    }
    if grid_best_v > best_v {
        best_x = grid_best_x;
        best_v = grid_best_v;
    }

    // Local refinement around the best grid point.
    let lo = (grid_best_x - step).max(a);
    let hi = (grid_best_x + step).min(b);
    if hi > lo {
        let (rx, rv) = golden_section(&mut f, lo, hi, tol);
        if rv > best_v {
            best_x = rx;
            best_v = rv;
        }
    }

    Ok((best_x, best_v))
}

/// Plain golden-section maximization; returns the best evaluated point.
fn golden_section(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let mut lo = a;
    let mut hi = b;
    let mut x1 = hi - GOLDEN_RATIO * (hi - lo);
    let mut x2 = lo + GOLDEN_RATIO * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut best = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    for _ in 0..300 {
        if hi - lo <= tol {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN_RATIO * (hi - lo);
            f2 = f(x2);
            if f2 > best.1 {
                best = (x2, f2);
            }
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN_RATIO * (hi - lo);
            f1 = f(x1);
            if f1 > best.1 {
                best = (x1, f1);
            }
        }
    }
    best
}
