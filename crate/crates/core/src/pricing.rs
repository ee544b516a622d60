//! The seller's period-1 problem.
//!
//! Under a uniform advertising strategy consumers buy myopically and the
//! seller posts the monopoly price p_M, the root of p − I(p). Under the
//! discriminatory strategy a consumer with value v buys iff
//! v ≥ p − (2q − 1)δ, so the seller faces demand shifted by the discount
//! c = (2q − 1)δ and the first-order condition becomes p − I(p − c) = 0.

use crate::model::ValueDistribution;
use crate::numeric::{self, RootConfig};
use crate::{Error, Result};

/// Step for the finite-difference slope of the inverse hazard.
pub const INVERSE_HAZARD_STEP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PricingSolution {
    pub p_m: f64,
    /// Discriminatory price; may exceed 1 when δ is large.
    pub p1: f64,
    pub v_star: f64,
    /// The interior root would put the cutoff below 0, so everyone buys at
    /// the highest all-buy price.
    pub corner_flag: bool,
    /// dp1/dq at the solution.
    pub p1_derivative: f64,
}

/// The amount (2q − 1)δ by which a buyer discounts the price when a
/// purchase is rewarded with the better ad.
pub fn discount(delta: f64, q: f64) -> f64 {
    (2.0 * q - 1.0) * delta
}

/// Purchase cutoff under the discriminatory strategy, clamped to `[0, 1]`.
pub fn induced_cutoff(price: f64, delta: f64, q: f64) -> f64 {
    (price - discount(delta, q)).clamp(0.0, 1.0)
}

/// Seller revenue p·(1 − F(cutoff)) when the advertiser discriminates.
pub fn discriminatory_revenue(dist: &ValueDistribution, delta: f64, q: f64, price: f64) -> f64 {
    price * (1.0 - dist.cdf(induced_cutoff(price, delta, q)))
}

pub fn monopoly_price(dist: &ValueDistribution) -> Result<f64> {
    numeric::bisect(|p| p - dist.inverse_hazard(p), 0.0, 1.0, RootConfig::default())
}

/// Solves the discriminatory first-order condition.
///
/// The search runs over the cutoff v = p − c on `[0, 1]`, where
/// v + c − I(v) is increasing; this is the price bracket `[c, 1 + c]`
/// shifted, and keeps full relative precision for cutoffs near zero.
pub fn discriminatory_price(dist: &ValueDistribution, delta: f64, q: f64) -> Result<PricingSolution> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::InvalidParams("delta must be positive"));
    }
    if !(0.5..=1.0).contains(&q) {
        return Err(Error::InvalidFidelity(q));
    }
    let p_m = monopoly_price(dist)?;
    let c = discount(delta, q);
    let foc = |v: f64| v + c - dist.inverse_hazard(v);

    let at_zero = foc(0.0);
    if at_zero > 0.0 {
        // revenue is increasing in p across the whole all-buy region
        return Ok(PricingSolution {
            p_m,
            p1: c,
            v_star: 0.0,
            corner_flag: true,
            p1_derivative: 2.0 * delta,
        });
    }
    let v_star = numeric::bisect(foc, 0.0, 1.0, RootConfig::default())?;
    debug_assert!(v_star < 1.0);
    let slope = numeric::derivative(|v| dist.inverse_hazard(v), v_star, INVERSE_HAZARD_STEP, 0.0, 1.0);
    Ok(PricingSolution {
        p_m,
        p1: v_star + c,
        v_star,
        corner_flag: false,
        p1_derivative: 2.0 * delta * slope / (slope - 1.0),
    })
}
