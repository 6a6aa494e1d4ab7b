//! Quadrature over half-lines.

/// Absolute tolerance used when a holding law has no closed-form integrated tail.
pub const QUADRATURE_TOLERANCE: f64 = 1e-10;

const FIRST_SEGMENT: f64 = 1.0 / 1024.0;
const MAX_SEGMENTS: usize = 4096;
const MAX_DEPTH: u32 = 40;

/// Double-exponential quadrature on `[a, b]`, bisecting wherever the error
/// estimate exceeds both `tol` and `1e-12` relative (kinks and jumps of `g`).
fn adaptive<F: Fn(f64) -> f64>(g: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let out = quadrature::integrate(g, a, b, tol);
    if !out.integral.is_finite() || !out.error_estimate.is_finite() {
        return out.integral;
    }
    if out.error_estimate <= tol.max(1e-12 * out.integral.abs()) || depth == MAX_DEPTH {
        return out.integral;
    }
    let mid = 0.5 * (a + b);
    adaptive(g, a, mid, tol, depth + 1) + adaptive(g, mid, b, tol, depth + 1)
}

/// `∫_0^∞ g(v) dv` for a non-negative, non-increasing `g`.
///
/// The half-line is cut into segments `[w_k, 2 w_k]` starting at
/// `w_0 = 2^-10`; each segment is integrated by adaptive double-exponential quadrature.
/// Integration stops once a segment contributes less than `abs_tol / 1000`
/// and `g(w) w` (a proxy for the remaining mass) is below the same level.
/// Returns `+∞` when the segments keep contributing until `w` overflows.
pub fn integrate_decreasing_tail<F>(g: F, abs_tol: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    let stop = abs_tol * 1e-3;
    let seg_tol = abs_tol / 64.0;
    let mut total = adaptive(&g, 0.0, FIRST_SEGMENT, seg_tol, 0);
    let mut lo = FIRST_SEGMENT;
    for _ in 0..MAX_SEGMENTS {
        let hi = 2.0 * lo;
        if !hi.is_finite() {
            break;
        }
        let piece = adaptive(&g, lo, hi, seg_tol, 0);
        total += piece;
        if !total.is_finite() {
            break;
        }
        if piece.abs() < stop && g(hi) * hi < stop {
            return total;
        }
        lo = hi;
    }
    f64::INFINITY
}
