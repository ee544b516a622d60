//! Scalar numerical primitives: bracketed bisection, adaptive Gauss-Kronrod
//! quadrature, and finite differences.

mod quad;
mod root;

pub use quad::{integrate, Integral, QuadConfig};
pub use root::{bisect, bisect_predicate, RootConfig};

/// First derivative by finite differences, falling back to a second-order
/// one-sided stencil when `x ± h` would leave `[lo, hi]`.
pub fn derivative<F: Fn(f64) -> f64>(f: F, x: f64, h: f64, lo: f64, hi: f64) -> f64 {
    if x - h >= lo && x + h <= hi {
        (f(x + h) - f(x - h)) / (2.0 * h)
    } else if x + 2.0 * h <= hi {
        (-3.0 * f(x) + 4.0 * f(x + h) - f(x + 2.0 * h)) / (2.0 * h)
    } else {
        (3.0 * f(x) - 4.0 * f(x - h) + f(x - 2.0 * h)) / (2.0 * h)
    }
}
