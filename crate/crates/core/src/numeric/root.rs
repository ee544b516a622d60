use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct RootConfig {
    /// Stop once the bracket is narrower than this.
    pub x_tol: f64,
    pub max_iter: u32,
}

impl Default for RootConfig {
    fn default() -> Self {
        RootConfig {
            x_tol: 1e-14,
            max_iter: 200,
        }
    }
}

/// Bisection on `[lo, hi]`. The endpoints must bracket a sign change (a zero
/// at either endpoint counts). Iteration stops at `x_tol` or when the
/// midpoint can no longer be represented strictly inside the bracket.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, cfg: RootConfig) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.is_nan() || fb.is_nan() || fa.signum() == fb.signum() {
        return Err(Error::NoSignChange { lo, hi });
    }
    let neg_at_a = fa < 0.0;
    for _ in 0..cfg.max_iter {
        if b - a <= cfg.x_tol {
            break;
        }
        let m = a + 0.5 * (b - a);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if (fm < 0.0) == neg_at_a {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(a + 0.5 * (b - a))
}

/// Locates the switch point of a predicate that holds at exactly one end of
/// `[lo, hi]`. Returns the final `(holds-side, fails-side)` pair so callers
/// can report a closed endpoint on the side where the predicate is true.
pub fn bisect_predicate<P: FnMut(f64) -> bool>(
    mut holds: P,
    lo: f64,
    hi: f64,
    cfg: RootConfig,
) -> Result<(f64, f64)> {
    let at_lo = holds(lo);
    if at_lo == holds(hi) {
        return Err(Error::NoSignChange { lo, hi });
    }
    // `yes` always satisfies the predicate, `no` never does.
    let (mut yes, mut no) = if at_lo { (lo, hi) } else { (hi, lo) };
    for _ in 0..cfg.max_iter {
        if (yes - no).abs() <= cfg.x_tol {
            break;
        }
        let m = yes + 0.5 * (no - yes);
        if m == yes || m == no {
            break;
        }
        if holds(m) {
            yes = m;
        } else {
            no = m;
        }
    }
    Ok((yes, no))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt_two() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, RootConfig::default()).unwrap();
        assert!((r - core::f64::consts::SQRT_2).abs() < 1e-14);
    }

    #[test]
    fn rejects_missing_sign_change() {
        let err = bisect(|x| x * x + 1.0, -1.0, 1.0, RootConfig::default()).unwrap_err();
        assert!(matches!(err, Error::NoSignChange { .. }));
    }

    #[test]
    fn endpoint_zero_is_returned() {
        assert_eq!(bisect(|x| x, 0.0, 1.0, RootConfig::default()).unwrap(), 0.0);
    }

    #[test]
    fn infinite_values_still_bracket() {
        let r = bisect(|x| if x == 0.0 { f64::NEG_INFINITY } else { x - 0.25 }, 0.0, 1.0, RootConfig::default())
            .unwrap();
        assert!((r - 0.25).abs() < 1e-14);
    }

    #[test]
    fn predicate_switch() {
        let (yes, no) = bisect_predicate(|x| x <= 0.3, 0.0, 1.0, RootConfig::default()).unwrap();
        assert!(yes <= 0.3 && no > 0.3 && no - yes < 1e-13);
    }
}
