//! The advertiser's posterior belief that the consumer is of type t1 after
//! seeing the reported bit, when consumers follow a cutoff strategy.

use crate::model::{type_mass, TypeModel, ValueDistribution};
use crate::numeric::QuadConfig;
use crate::{Error, Result};

/// Signal probabilities below this are treated as zero-probability events.
pub const SIGNAL_TOL: f64 = 1e-12;

/// Step used when a posterior has to be recovered as a limit along the
/// equilibrium path.
pub const PATH_STEP: f64 = 1e-6;

/// The cutoff-dependent masses every posterior is assembled from. They do not
/// depend on q, so one quadrature pass serves any number of fidelity levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffMasses {
    pub v_star: f64,
    /// F(v*).
    pub below: f64,
    /// ∫₀^{v*} g f.
    pub t1_below: f64,
    /// ∫_{v*}^1 g f.
    pub t1_above: f64,
    g_at_zero: f64,
    g_at_one: f64,
}

impl CutoffMasses {
    pub fn compute(dist: &ValueDistribution, g: &TypeModel, v_star: f64, cfg: QuadConfig) -> Result<Self> {
        if !(0.0..=1.0).contains(&v_star) {
            return Err(Error::InvalidCutoff(v_star));
        }
        Ok(CutoffMasses {
            v_star,
            below: dist.cdf(v_star),
            t1_below: type_mass(dist, g, 0.0, v_star, cfg)?,
            t1_above: type_mass(dist, g, v_star, 1.0, cfg)?,
            g_at_zero: g.prob(0.0),
            g_at_one: g.prob(1.0),
        })
    }

    pub fn above(&self) -> f64 {
        1.0 - self.below
    }

    pub fn prior(&self) -> f64 {
        self.t1_below + self.t1_above
    }

    /// Mean of g below the cutoff, g(0) when nobody is below it.
    pub fn alpha1(&self) -> f64 {
        if self.below > 0.0 {
            (self.t1_below / self.below).clamp(0.0, 1.0)
        } else {
            self.g_at_zero
        }
    }

    /// Mean of g above the cutoff, g(1) when nobody is above it.
    pub fn alpha2(&self) -> f64 {
        if self.above() > 0.0 {
            (self.t1_above / self.above()).clamp(0.0, 1.0)
        } else {
            self.g_at_one
        }
    }

    /// Both posteriors at fidelity `q`. Accepts any q in `[0, 1]`, which is
    /// what the reflection identity r0(q) = r1(1 − q) needs; callers that
    /// represent a privacy level validate q themselves.
    pub fn at(&self, q: f64) -> PosteriorPair {
        let (a1, a2) = (self.alpha1(), self.alpha2());
        let f = self.below;
        // weights on (alpha1, alpha2) for each reported bit
        let (w1_lo, w1_hi) = ((1.0 - q) * f, q * (1.0 - f));
        let (w0_lo, w0_hi) = (q * f, (1.0 - q) * (1.0 - f));
        let p_sig1 = w1_lo + w1_hi;
        let p_sig0 = w0_lo + w0_hi;

        // A signal can only have probability zero when one side of the cutoff
        // is empty; the fixed-cutoff limit is then the mean of the other side.
        let empty = if f == 0.0 { a2 } else { a1 };
        let r1 = if p_sig1 > 0.0 { a1 + (a2 - a1) * (w1_hi / p_sig1) } else { empty };
        let r0 = if p_sig0 > 0.0 { a1 + (a2 - a1) * (w0_hi / p_sig0) } else { empty };

        PosteriorPair {
            r1: r1.clamp(0.0, 1.0),
            r0: r0.clamp(0.0, 1.0),
            alpha1: a1,
            alpha2: a2,
            p_sig1,
            p_sig0,
            limit_flag: p_sig1 < SIGNAL_TOL || p_sig0 < SIGNAL_TOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PosteriorPair {
    /// Pr(t1 | reported purchase).
    pub r1: f64,
    /// Pr(t1 | reported no purchase).
    pub r0: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub p_sig1: f64,
    pub p_sig0: f64,
    /// Set when a posterior conditions on a (numerically) zero-probability
    /// signal and was evaluated as a limit.
    pub limit_flag: bool,
}

impl PosteriorPair {
    pub fn gap(&self) -> f64 {
        (self.r1 - self.r0).max(0.0)
    }
}

pub fn posterior(dist: &ValueDistribution, g: &TypeModel, v_star: f64, q: f64) -> Result<PosteriorPair> {
    posterior_with(dist, g, v_star, q, QuadConfig::default())
}

pub fn posterior_with(
    dist: &ValueDistribution,
    g: &TypeModel,
    v_star: f64,
    q: f64,
    cfg: QuadConfig,
) -> Result<PosteriorPair> {
    if !(0.5..=1.0).contains(&q) {
        return Err(Error::InvalidFidelity(q));
    }
    Ok(CutoffMasses::compute(dist, g, v_star, cfg)?.at(q))
}

/// r(1, v*, q) − r(0, v*, q).
pub fn posterior_gap(dist: &ValueDistribution, g: &TypeModel, v_star: f64, q: f64) -> Result<f64> {
    posterior(dist, g, v_star, q).map(|p| p.gap())
}

/// Replaces any zero-probability-signal posterior in `at_q` by its limit
/// along a path `q ↦ eval(q)`, using a Richardson step from the left:
/// r ≈ 2·r(q − h) − r(q − 2h). Pairs without a degenerate signal are
/// returned untouched.
pub fn path_limit<E>(at_q: PosteriorPair, q: f64, eval: E) -> Result<PosteriorPair>
where
    E: Fn(f64) -> Result<PosteriorPair>,
{
    let fix1 = at_q.p_sig1 < SIGNAL_TOL;
    let fix0 = at_q.p_sig0 < SIGNAL_TOL;
    if !(fix1 || fix0) {
        return Ok(at_q);
    }
    let h = PATH_STEP;
    let near = eval(q - h)?;
    let far = eval(q - 2.0 * h)?;
    let extrapolate = |a: f64, b: f64| (2.0 * a - b).clamp(0.0, 1.0);
    let mut out = at_q;
    if fix1 {
        out.r1 = extrapolate(near.r1, far.r1);
    }
    if fix0 {
        out.r0 = extrapolate(near.r0, far.r0);
    }
    out.limit_flag = true;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const U: ValueDistribution = ValueDistribution::Uniform01;

    #[test]
    fn section4_posteriors_at_half() {
        let p = posterior(&U, &TypeModel::Identity, 0.5, 0.8).unwrap();
        assert!((p.r1 - 0.65).abs() < 1e-14);
        assert!((p.r0 - 0.35).abs() < 1e-14);
        assert!((p.gap() - 0.30).abs() < 1e-14);
    }

    #[test]
    fn full_privacy_returns_the_prior() {
        let te = ValueDistribution::trunc_exp(1.0).unwrap();
        for g in [TypeModel::Identity, TypeModel::step(0.4).unwrap()] {
            for v in [0.0, 0.2, 0.7, 1.0] {
                let prior = crate::model::prior_t1(&te, &g).unwrap();
                let p = posterior(&te, &g, v, 0.5).unwrap();
                assert!((p.r1 - prior).abs() < 1e-12 && (p.r0 - prior).abs() < 1e-12, "{g:?} {v}");
                assert_eq!(posterior_gap(&te, &g, v, 0.5).unwrap(), (p.r1 - p.r0).max(0.0));
            }
        }
    }

    #[test]
    fn step_type_posteriors() {
        let g = TypeModel::step(0.05).unwrap();
        let p = posterior(&U, &g, 0.23, 0.8).unwrap();
        // exact: 0.298 / 0.338 and 0.652 / 0.662
        assert!((p.r0 - 0.298 / 0.338).abs() < 1e-13);
        assert!((p.r0 - 0.881_657).abs() < 1e-6);
        assert!((p.r1 - 0.652 / 0.662).abs() < 1e-13);
        assert!((p.r1 - 0.984_84).abs() < 1e-4);
    }

    #[test]
    fn path_gap_at_point_eight() {
        // v*(q) = 1 − q on the reference model; closed forms give
        // 0.776/1.36 − 0.35 = 0.2205882...
        let q = 0.8;
        let r1 = (-2.0 * q * q * q + 5.0 * q * q - 3.0 * q + 1.0) / (4.0 * (q * q - q + 0.5));
        let r0 = (3.0 - 2.0 * q) / 4.0;
        let gap = posterior_gap(&U, &TypeModel::Identity, 1.0 - q, q).unwrap();
        assert!((gap - (r1 - r0)).abs() < 1e-12);
        assert!((gap - 0.220_588_235_294_117_6).abs() < 1e-12);
    }

    #[test]
    fn invalid_inputs() {
        assert!(matches!(posterior(&U, &TypeModel::Identity, 1.2, 0.7), Err(Error::InvalidCutoff(_))));
        assert!(matches!(posterior(&U, &TypeModel::Identity, 0.5, 0.3), Err(Error::InvalidFidelity(_))));
    }

    #[test]
    fn degenerate_signals_use_fixed_cutoff_limits() {
        let p = posterior(&U, &TypeModel::Identity, 0.0, 1.0).unwrap();
        assert!(p.limit_flag);
        assert_eq!(p.p_sig0, 0.0);
        assert!((p.r0 - 0.5).abs() < 1e-15);
        assert!((p.r1 - 0.5).abs() < 1e-15);

        let p = posterior(&U, &TypeModel::Identity, 1.0, 1.0).unwrap();
        assert!(p.limit_flag);
        assert!((p.r1 - 0.5).abs() < 1e-15);
        assert_eq!(p.r0, 0.5);
    }

    #[test]
    fn alpha_defaults_at_the_edges() {
        let g = TypeModel::affine(0.1, 0.8).unwrap();
        let m = CutoffMasses::compute(&U, &g, 0.0, QuadConfig::default()).unwrap();
        assert_eq!(m.alpha1(), 0.1);
        let m = CutoffMasses::compute(&U, &g, 1.0, QuadConfig::default()).unwrap();
        assert!((m.alpha2() - 0.9).abs() < 1e-15);
    }

    #[test]
    fn path_limit_recovers_linear_r0() {
        // r0 along v*(q) = 1 − q is (3 − 2q)/4, so the limit at q = 1 is 1/4.
        let eval = |q: f64| posterior(&U, &TypeModel::Identity, 1.0 - q, q);
        let at = eval(1.0).unwrap();
        assert!(at.limit_flag);
        let lim = path_limit(at, 1.0, eval).unwrap();
        assert!((lim.r0 - 0.25).abs() < 1e-9, "{}", lim.r0);
        assert!((lim.r1 - 0.5).abs() < 1e-12);
        assert!(lim.limit_flag);
    }
}
