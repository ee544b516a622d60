//! Monte-Carlo simulation of the literal game: sampled consumers, the
//! randomized-response channel and a fixed advertiser rule. Used to check
//! the analytic quantities independently.
//!
//! Samples are split into shards of [`SHARD`] draws. Shard `k` uses the
//! ChaCha8 stream `k` of the seed, so shards may run on any thread and the
//! merged [`Tally`] is identical as long as shards are merged in order.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::equilibrium::{EquilibriumKind, EquilibriumPoint};
use crate::metrics;
use crate::model::{AdChoice, AdvertiserStrategy, ConsumerType, Game, PrivacyLevel};
use crate::posterior;
use crate::{Error, Result};

pub const SHARD: u64 = 1 << 16;

/// What every agent does: the posted price, the consumers' purchase cutoff
/// and the advertiser's ad rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategyProfile {
    pub price: f64,
    pub cutoff: f64,
    pub strategy: AdvertiserStrategy,
}

impl StrategyProfile {
    pub fn of(eq: &EquilibriumPoint) -> Self {
        StrategyProfile {
            price: eq.price,
            cutoff: eq.cutoff,
            strategy: eq.kind.strategy(),
        }
    }
}

/// Raw counts and sums from a batch of simulated consumers.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Tally {
    pub n: u64,
    pub sig1: u64,
    pub t1: u64,
    pub t1_sig1: u64,
    pub t1_sig0: u64,
    pub cs: f64,
    pub cs_sq: f64,
    pub profit: f64,
    pub profit_sq: f64,
    pub adv: f64,
    pub adv_sq: f64,
}

impl Tally {
    pub fn merge(&mut self, o: &Tally) {
        self.n += o.n;
        self.sig1 += o.sig1;
        self.t1 += o.t1;
        self.t1_sig1 += o.t1_sig1;
        self.t1_sig0 += o.t1_sig0;
        self.cs += o.cs;
        self.cs_sq += o.cs_sq;
        self.profit += o.profit;
        self.profit_sq += o.profit_sq;
        self.adv += o.adv;
        self.adv_sq += o.adv_sq;
    }
}

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// `(index, count)` for each shard covering n draws.
pub fn shards(n: u64) -> impl Iterator<Item = (u64, u64)> {
    let full = n / SHARD;
    let rest = n % SHARD;
    (0..full).map(|k| (k, SHARD)).chain((rest > 0).then_some((full, rest)))
}

/// Simulates `count` consumers on stream `shard` of `seed`.
pub fn simulate_shard(game: &Game, q: f64, profile: &StrategyProfile, seed: u64, shard: u64, count: u64) -> Result<Tally> {
    let channel = PrivacyLevel::from_q(q)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard);
    let delta = game.params.delta();
    let mut t = Tally::default();
    for _ in 0..count {
        let v = game.dist.quantile(unit(&mut rng));
        let bought = v >= profile.cutoff;
        let reported = channel.transmit(bought, unit(&mut rng));
        let is_t1 = unit(&mut rng) < game.types.prob(v);
        let ad = profile.strategy.ad_for(reported);
        let ty = if is_t1 { ConsumerType::T1 } else { ConsumerType::T2 };

        let cs = if bought { v - profile.price } else { 0.0 } + if ad == AdChoice::A { delta } else { 0.0 };
        let profit = if bought { profile.price } else { 0.0 };
        let adv = game.params.payoff(ty, ad);

        t.n += 1;
        t.sig1 += reported as u64;
        t.t1 += is_t1 as u64;
        t.t1_sig1 += (is_t1 && reported) as u64;
        t.t1_sig0 += (is_t1 && !reported) as u64;
        t.cs += cs;
        t.cs_sq += cs * cs;
        t.profit += profit;
        t.profit_sq += profit * profit;
        t.adv += adv;
        t.adv_sq += adv * adv;
    }
    Ok(t)
}

/// An empirical mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

impl Estimate {
    fn proportion(hits: u64, n: u64) -> Option<Self> {
        (n > 0).then(|| {
            let p = hits as f64 / n as f64;
            Estimate {
                value: p,
                se: libm::sqrt(p * (1.0 - p) / n as f64),
            }
        })
    }

    fn mean(sum: f64, sum_sq: f64, n: u64) -> Self {
        let nf = n as f64;
        let m = sum / nf;
        let var = if n > 1 { ((sum_sq - nf * m * m) / (nf - 1.0)).max(0.0) } else { 0.0 };
        Estimate {
            value: m,
            se: libm::sqrt(var / nf),
        }
    }

    /// |value − truth| in standard errors; infinite when a zero-SE estimate
    /// misses the truth by more than `slack`.
    pub fn z(&self, truth: f64, slack: f64) -> f64 {
        let d = (self.value - truth).abs();
        if d <= slack {
            0.0
        } else if self.se > 0.0 {
            d / self.se
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimReport {
    pub n: u64,
    pub seed: u64,
    /// `None` when no consumer produced the signal.
    pub r1: Option<Estimate>,
    pub r0: Option<Estimate>,
    pub p_sig1: Estimate,
    pub consumer_surplus: Estimate,
    pub seller_profit: Estimate,
    pub advertiser_utility: Estimate,
    /// Plug-in estimate; the SE is the first-order delta-method value and
    /// vanishes where the true information is zero.
    pub mi_bits: Estimate,
}

impl SimReport {
    pub fn from_tally(t: &Tally, seed: u64) -> Result<Self> {
        if t.n == 0 {
            return Err(Error::InvalidSampleSize);
        }
        let sig0 = t.n - t.sig1;
        Ok(SimReport {
            n: t.n,
            seed,
            r1: Estimate::proportion(t.t1_sig1, t.sig1),
            r0: Estimate::proportion(t.t1_sig0, sig0),
            p_sig1: Estimate::proportion(t.sig1, t.n).expect("n > 0"),
            consumer_surplus: Estimate::mean(t.cs, t.cs_sq, t.n),
            seller_profit: Estimate::mean(t.profit, t.profit_sq, t.n),
            advertiser_utility: Estimate::mean(t.adv, t.adv_sq, t.n),
            mi_bits: plug_in_mi(t),
        })
    }
}

fn plug_in_mi(t: &Tally) -> Estimate {
    let n = t.n as f64;
    let t2_sig1 = t.sig1 - t.t1_sig1;
    let t2_sig0 = (t.n - t.t1) - t2_sig1;
    let cells = [
        (t.t1_sig1, t.t1, t.sig1),
        (t.t1_sig0, t.t1, t.n - t.sig1),
        (t2_sig1, t.n - t.t1, t.sig1),
        (t2_sig0, t.n - t.t1, t.n - t.sig1),
    ];
    let (mut mi, mut second) = (0.0, 0.0);
    for (c, row, col) in cells {
        if c == 0 {
            continue;
        }
        let p = c as f64 / n;
        let l = libm::log2(p * n * n / (row as f64 * col as f64));
        mi += p * l;
        second += p * l * l;
    }
    Estimate {
        value: mi.max(0.0),
        se: libm::sqrt((second - mi * mi).max(0.0) / n),
    }
}

/// Runs n simulated consumers serially. Deterministic in `(seed, n)`.
pub fn simulate(game: &Game, q: f64, profile: &StrategyProfile, n: u64, seed: u64) -> Result<SimReport> {
    if n == 0 {
        return Err(Error::InvalidSampleSize);
    }
    let mut total = Tally::default();
    for (k, count) in shards(n) {
        total.merge(&simulate_shard(game, q, profile, seed, k, count)?);
    }
    SimReport::from_tally(&total, seed)
}

/// Analytic counterparts of the simulated quantities for any profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Expected {
    pub r1: f64,
    pub r0: f64,
    pub p_sig1: f64,
    pub consumer_surplus: f64,
    pub seller_profit: f64,
    pub advertiser_utility: f64,
    pub mi_bits: f64,
}

pub fn expected(game: &Game, q: f64, profile: &StrategyProfile) -> Result<Expected> {
    let posteriors = posterior::posterior(&game.dist, &game.types, profile.cutoff, q)?;
    let kind = match profile.strategy {
        AdvertiserStrategy::Discriminatory => EquilibriumKind::Discriminatory,
        AdvertiserStrategy::AlwaysA => EquilibriumKind::UniformA,
        AdvertiserStrategy::AlwaysB => EquilibriumKind::UniformB,
    };
    let eq = EquilibriumPoint {
        kind,
        q,
        price: profile.price,
        cutoff: profile.cutoff,
        posteriors,
        boundary_flag: false,
        corner_flag: false,
    };
    Ok(Expected {
        r1: posteriors.r1,
        r0: posteriors.r0,
        p_sig1: posteriors.p_sig1,
        consumer_surplus: metrics::consumer_surplus(&eq, &game.dist, &game.params)?,
        seller_profit: metrics::seller_profit(&eq, &game.dist),
        advertiser_utility: metrics::advertiser_utility(&eq, &game.params),
        mi_bits: metrics::mutual_information(&game.dist, &game.types, profile.cutoff, q)?,
    })
}

/// Reports for an ascending list of sample sizes on one seed.
pub fn convergence_sweep(game: &Game, q: f64, profile: &StrategyProfile, ns: &[u64], seed: u64) -> Result<Vec<SimReport>> {
    if ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidSampleSize);
    }
    ns.iter().map(|&n| simulate(game, q, profile, n, seed)).collect()
}

/// Least-squares slope of log(err) against log(n). Pairs with a
/// non-positive error are skipped.
pub fn error_slope(ns: &[u64], errors: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = ns
        .iter()
        .zip(errors)
        .filter(|(_, e)| **e > 0.0)
        .map(|(n, e)| (libm::log(*n as f64), libm::log(*e)))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{GameParams, TypeModel, ValueDistribution};

    fn reference() -> Game {
        Game::new(
            ValueDistribution::Uniform01,
            TypeModel::Identity,
            GameParams::with_eta(1.0, 0.5).unwrap(),
        )
    }

    const SEED: u64 = 42;

    #[test]
    fn shard_plan_covers_n() {
        let plan: Vec<_> = shards(3 * SHARD + 5).collect();
        assert_eq!(plan.len(), 4);
        assert_eq!(plan[3], (3, 5));
        assert_eq!(plan.iter().map(|p| p.1).sum::<u64>(), 3 * SHARD + 5);
        assert_eq!(shards(0).count(), 0);
    }

    #[test]
    fn deterministic() {
        let g = reference();
        let p = StrategyProfile {
            price: 0.8,
            cutoff: 0.2,
            strategy: AdvertiserStrategy::Discriminatory,
        };
        let a = simulate(&g, 0.8, &p, 100_000, SEED).unwrap();
        let b = simulate(&g, 0.8, &p, 100_000, SEED).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, simulate(&g, 0.8, &p, 100_000, SEED + 1).unwrap());
    }

    #[test]
    fn reported_no_purchase_posterior() {
        let g = reference();
        let p = StrategyProfile {
            price: 0.8,
            cutoff: 0.2,
            strategy: AdvertiserStrategy::Discriminatory,
        };
        let r = simulate(&g, 0.8, &p, 400_000, SEED).unwrap();
        assert!(r.r0.unwrap().z((3.0 - 1.6) / 4.0, 0.0) < 3.0);
    }

    #[test]
    fn monopoly_profile_posteriors() {
        let g = reference();
        let p = StrategyProfile {
            price: 0.5,
            cutoff: 0.5,
            strategy: AdvertiserStrategy::AlwaysA,
        };
        let r = simulate(&g, 0.5, &p, 1_000_000, SEED).unwrap();
        assert!(r.r1.unwrap().z(0.5, 0.0) < 3.0);
        let r = simulate(&g, 0.8, &p, 1_000_000, SEED).unwrap();
        assert!(r.r1.unwrap().z((1.0 + 1.6) / 4.0, 0.0) < 3.0);
    }

    #[test]
    fn step_type_posterior() {
        let g = Game::new(
            ValueDistribution::Uniform01,
            TypeModel::step(0.05).unwrap(),
            GameParams::with_eta(0.9, 0.5).unwrap(),
        );
        let p = StrategyProfile {
            price: 0.77,
            cutoff: 0.23,
            strategy: AdvertiserStrategy::Discriminatory,
        };
        let r = simulate(&g, 0.8, &p, 1_000_000, SEED).unwrap();
        assert!(r.r0.unwrap().z(0.881_657, 0.0) < 3.0);
    }

    #[test]
    fn noiseless_all_buy_never_reports_zero() {
        let g = reference();
        let p = StrategyProfile {
            price: 1.0,
            cutoff: 0.0,
            strategy: AdvertiserStrategy::Discriminatory,
        };
        let r = simulate(&g, 1.0, &p, 10_000, SEED).unwrap();
        assert_eq!(r.p_sig1.value, 1.0);
        assert!(r.r0.is_none());
    }

    #[test]
    fn slope_of_exact_power_law() {
        let ns = [1_000, 10_000, 100_000];
        let errs: Vec<f64> = ns.iter().map(|&n| 1.0 / libm::sqrt(n as f64)).collect();
        assert!((error_slope(&ns, &errs).unwrap() + 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_samples_rejected() {
        let g = reference();
        let p = StrategyProfile {
            price: 0.5,
            cutoff: 0.5,
            strategy: AdvertiserStrategy::AlwaysA,
        };
        assert_eq!(simulate(&g, 0.7, &p, 0, SEED), Err(Error::InvalidSampleSize));
    }
}
