//! Welfare and information quantities at a classified equilibrium point.

use crate::equilibrium::{EquilibriumKind, EquilibriumPoint};
use crate::model::{AdChoice, Game, GameParams, TypeModel, ValueDistribution};
use crate::numeric::QuadConfig;
use crate::posterior::CutoffMasses;
use crate::pricing;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRow {
    pub consumer_surplus: f64,
    pub seller_profit: f64,
    pub advertiser_utility: f64,
    pub mi_bits: f64,
    pub posterior_gap: f64,
    /// Period-2 part of consumer surplus: δ times the chance of seeing ad A.
    pub cs_ad: f64,
    /// d(CS)/dq along the discriminatory path; `None` for uniform kinds and
    /// at the all-buy corner.
    pub cs_derivative: Option<f64>,
}

/// ∫_c^1 (v − p) f(v) dv.
fn purchase_surplus(dist: &ValueDistribution, price: f64, cutoff: f64) -> Result<f64> {
    let c = cutoff.clamp(0.0, 1.0);
    let mean = dist.partial_mean(c, 1.0, QuadConfig::default())?;
    Ok(mean - price * (1.0 - dist.cdf(c)))
}

/// δ × Pr(ad A) for the consumer population.
pub fn cs_ad(eq: &EquilibriumPoint, dist: &ValueDistribution, params: &GameParams) -> f64 {
    let delta = params.delta();
    match eq.kind {
        EquilibriumKind::Discriminatory => {
            let f = dist.cdf(eq.cutoff);
            delta * (eq.q * (1.0 - f) + (1.0 - eq.q) * f)
        }
        EquilibriumKind::UniformA => delta,
        EquilibriumKind::UniformB => 0.0,
    }
}

/// Expected period-1 purchase surplus plus the period-2 ad term.
pub fn consumer_surplus(eq: &EquilibriumPoint, dist: &ValueDistribution, params: &GameParams) -> Result<f64> {
    Ok(purchase_surplus(dist, eq.price, eq.cutoff)? + cs_ad(eq, dist, params))
}

/// Utility of a consumer with value v who best-responds at this point.
pub fn value_utility(eq: &EquilibriumPoint, params: &GameParams, v: f64) -> f64 {
    let delta = params.delta();
    let buys = v >= eq.cutoff;
    let period1 = if buys { v - eq.price } else { 0.0 };
    let ad = match eq.kind {
        EquilibriumKind::Discriminatory if buys => eq.q * delta,
        EquilibriumKind::Discriminatory => (1.0 - eq.q) * delta,
        EquilibriumKind::UniformA => delta,
        EquilibriumKind::UniformB => 0.0,
    };
    period1 + ad
}

pub fn seller_profit(eq: &EquilibriumPoint, dist: &ValueDistribution) -> f64 {
    eq.price * (1.0 - dist.cdf(eq.cutoff))
}

/// Ex-ante expected payoff of the advertiser.
pub fn advertiser_utility(eq: &EquilibriumPoint, params: &GameParams) -> f64 {
    let p = &eq.posteriors;
    match eq.kind {
        EquilibriumKind::Discriminatory => {
            p.p_sig1 * params.expected_payoff(p.r1, AdChoice::A) + p.p_sig0 * params.expected_payoff(p.r0, AdChoice::B)
        }
        kind => {
            let prior = p.p_sig1 * p.r1 + p.p_sig0 * p.r0;
            let ad = if kind == EquilibriumKind::UniformA { AdChoice::A } else { AdChoice::B };
            params.expected_payoff(prior, ad)
        }
    }
}

fn plogp(p: f64, expected: f64) -> f64 {
    if p > 0.0 && expected > 0.0 {
        p * libm::log2(p / expected)
    } else {
        0.0
    }
}

/// Mutual information in bits between the consumer's type and the reported
/// purchase bit, for cutoff `v_star` and fidelity q.
pub fn mutual_information(dist: &ValueDistribution, g: &TypeModel, v_star: f64, q: f64) -> Result<f64> {
    if !(0.5..=1.0).contains(&q) {
        return Err(Error::InvalidFidelity(q));
    }
    if q == 0.5 {
        return Ok(0.0);
    }
    let m = CutoffMasses::compute(dist, g, v_star, QuadConfig::default())?;
    Ok(mi_from_masses(&m, q))
}

pub(crate) fn mi_from_masses(m: &CutoffMasses, q: f64) -> f64 {
    let t2_below = (m.below - m.t1_below).max(0.0);
    let t2_above = (m.above() - m.t1_above).max(0.0);
    // rows: type t1, t2; columns: reported 1, reported 0
    let table = [
        [(1.0 - q) * m.t1_below + q * m.t1_above, q * m.t1_below + (1.0 - q) * m.t1_above],
        [(1.0 - q) * t2_below + q * t2_above, q * t2_below + (1.0 - q) * t2_above],
    ];
    let rows = [table[0][0] + table[0][1], table[1][0] + table[1][1]];
    let cols = [table[0][0] + table[1][0], table[0][1] + table[1][1]];
    let mut mi = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            mi += plogp(table[i][j], rows[i] * cols[j]);
        }
    }
    mi.max(0.0)
}

/// Closed-form d(CS)/dq along the discriminatory path.
pub fn cs_derivative(dist: &ValueDistribution, params: &GameParams, q: f64) -> Result<f64> {
    let s = pricing::discriminatory_price(dist, params.delta(), q)?;
    if s.corner_flag {
        return Err(Error::CornerSolution);
    }
    let f = dist.cdf(s.v_star);
    Ok(params.delta() * (1.0 - 2.0 * f) - s.p1_derivative * (1.0 - f))
}

/// Consumer surplus of the discriminatory candidate at q, whether or not it
/// is an equilibrium there.
pub fn discriminatory_surplus(game: &Game, q: f64) -> Result<f64> {
    let s = pricing::discriminatory_price(&game.dist, game.params.delta(), q)?;
    let f = game.dist.cdf(s.v_star);
    let ad = game.params.delta() * (q * (1.0 - f) + (1.0 - q) * f);
    Ok(purchase_surplus(&game.dist, s.p1, s.v_star)? + ad)
}

/// Every metric at one point. Accepts any point built for `game`, including
/// candidates whose equilibrium conditions fail.
pub fn evaluate(game: &Game, eq: &EquilibriumPoint) -> Result<MetricsRow> {
    let cs_derivative = match eq.kind {
        EquilibriumKind::Discriminatory if !eq.corner_flag => Some(cs_derivative(&game.dist, &game.params, eq.q)?),
        _ => None,
    };
    Ok(MetricsRow {
        consumer_surplus: consumer_surplus(eq, &game.dist, &game.params)?,
        seller_profit: seller_profit(eq, &game.dist),
        advertiser_utility: advertiser_utility(eq, &game.params),
        mi_bits: mutual_information(&game.dist, &game.types, eq.cutoff, eq.q)?,
        posterior_gap: eq.posteriors.gap(),
        cs_ad: cs_ad(eq, &game.dist, &game.params),
        cs_derivative,
    })
}
