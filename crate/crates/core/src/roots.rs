//! Bracketed bisection used by the sourcing root finders.

/// Bisects `f` on `[lo, hi]` where `f(lo) > 0 >= f(hi)` until the bracket is
/// narrower than `tol`. Returns the midpoint of the final bracket.
pub(crate) fn bisect_decreasing<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    debug_assert!(lo <= hi);
    // 200 halvings take any f64 bracket below machine resolution.
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
