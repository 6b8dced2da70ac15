//! Bracketed root finding for monotone scalar equations.

use crate::{Error, Result};

/// Bisection on `[lo, hi]` where `g(lo)` and `g(hi)` have opposite signs (or
/// one of them is zero). Stops when the bracket width falls below
/// `tol * max(1, |mid|)` or cannot be split further in f64.
pub fn bisect<G: Fn(f64) -> f64>(
    g: G,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    max_iter: usize,
) -> Result<f64> {
    let mut g_lo = g(lo);
    let g_hi = g(hi);
    if g_lo == 0.0 {
        return Ok(lo);
    }
    if g_hi == 0.0 {
        return Ok(hi);
    }
    if g_lo.signum() == g_hi.signum() || g_lo.is_nan() || g_hi.is_nan() {
        return Err(Error::Solver {
            solver: "bisection",
            residual: g_lo.abs().min(g_hi.abs()),
        });
    }
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || (hi - lo) <= tol * mid.abs().max(1.0) {
            return Ok(mid);
        }
        let g_mid = g(mid);
        if g_mid == 0.0 {
            return Ok(mid);
        }
        if g_mid.signum() == g_lo.signum() {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Solver {
        solver: "bisection",
        residual: g(0.5 * (lo + hi)).abs(),
    })
}
