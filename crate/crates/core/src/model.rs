//! Game primitives: the buyer-value law, the value-to-type map, the payoffs,
//! and the privacy level of the randomized-response channel.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::numeric::{self, QuadConfig, RootConfig};
use crate::{Error, Result};

/// Default number of points used by [`validate`].
pub const DEFAULT_VALIDATION_GRID: usize = 1024;

// ---------------------------------------------------------------------------
// Privacy level
// ---------------------------------------------------------------------------

/// A differential-privacy parameter, with ε = ∞ kept exact so that q = 1 is
/// representable without a sentinel float.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Epsilon {
    Finite(f64),
    Infinite,
}

impl Epsilon {
    pub fn is_infinite(self) -> bool {
        matches!(self, Epsilon::Infinite)
    }

    /// The finite value, or `cap` for ε = ∞ and for anything above `cap`.
    pub fn capped(self, cap: f64) -> f64 {
        match self {
            Epsilon::Finite(e) => e.min(cap),
            Epsilon::Infinite => cap,
        }
    }
}

impl fmt::Display for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Epsilon::Finite(e) => write!(f, "{e}"),
            Epsilon::Infinite => f.write_str("inf"),
        }
    }
}

/// q = e^ε / (1 + e^ε).
pub fn q_from_epsilon(epsilon: Epsilon) -> Result<f64> {
    match epsilon {
        Epsilon::Infinite => Ok(1.0),
        Epsilon::Finite(e) if e.is_nan() || e < 0.0 => Err(Error::InvalidEpsilon(e)),
        Epsilon::Finite(e) if e.is_infinite() => Ok(1.0),
        Epsilon::Finite(e) => Ok(1.0 / (1.0 + libm::exp(-e))),
    }
}

/// ε = ln(q / (1 − q)); q = 1 maps to [`Epsilon::Infinite`].
pub fn epsilon_from_q(q: f64) -> Result<Epsilon> {
    if !(0.5..=1.0).contains(&q) {
        return Err(Error::InvalidFidelity(q));
    }
    if q == 1.0 {
        return Ok(Epsilon::Infinite);
    }
    // 1 - q is exact for q >= 1/2.
    Ok(Epsilon::Finite(libm::log(q) - libm::log(1.0 - q)))
}

/// Fidelity of the randomized-response channel: the reported bit equals the
/// purchase bit with probability `q` and is flipped otherwise.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct PrivacyLevel {
    q: f64,
}

impl PrivacyLevel {
    pub fn from_q(q: f64) -> Result<Self> {
        if !(0.5..=1.0).contains(&q) {
            return Err(Error::InvalidFidelity(q));
        }
        Ok(PrivacyLevel { q })
    }

    pub fn from_epsilon(epsilon: Epsilon) -> Result<Self> {
        q_from_epsilon(epsilon).map(|q| PrivacyLevel { q })
    }

    pub fn q(self) -> f64 {
        self.q
    }

    pub fn epsilon(self) -> Epsilon {
        epsilon_from_q(self.q).expect("q validated at construction")
    }

    pub fn flip_probability(self) -> f64 {
        1.0 - self.q
    }

    /// Pr[reported | purchased] for the symmetric channel.
    pub fn likelihood(self, purchased: bool, reported: bool) -> f64 {
        if purchased == reported {
            self.q
        } else {
            1.0 - self.q
        }
    }

    /// Pushes a purchase bit through the channel given a uniform draw `u`.
    pub fn transmit(self, purchased: bool, u: f64) -> bool {
        if u < self.flip_probability() {
            !purchased
        } else {
            purchased
        }
    }
}

// ---------------------------------------------------------------------------
// Ads, types, strategies
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AdChoice {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConsumerType {
    T1,
    T2,
}

/// The three advertiser strategies that can appear in equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AdvertiserStrategy {
    /// Ad A on a reported purchase, ad B otherwise.
    Discriminatory,
    AlwaysA,
    AlwaysB,
}

impl AdvertiserStrategy {
    pub fn ad_for(self, reported_purchase: bool) -> AdChoice {
        match self {
            AdvertiserStrategy::Discriminatory if reported_purchase => AdChoice::A,
            AdvertiserStrategy::Discriminatory => AdChoice::B,
            AdvertiserStrategy::AlwaysA => AdChoice::A,
            AdvertiserStrategy::AlwaysB => AdChoice::B,
        }
    }
}

// ---------------------------------------------------------------------------
// Value distribution
// ---------------------------------------------------------------------------

/// A buyer-value law on `[0, 1]` supplied by the caller.
///
/// Implementors provide the CDF and density; the inverse hazard and the
/// quantile have generic defaults.
pub trait Distribution: Send + Sync {
    fn cdf(&self, v: f64) -> f64;
    fn density(&self, v: f64) -> f64;

    fn inverse_hazard(&self, v: f64) -> f64 {
        inverse_hazard_from(self.cdf(v), self.density(v))
    }

    /// Inverse CDF by bisection to 1e-12.
    fn quantile(&self, u: f64) -> f64 {
        quantile_by_bisection(|v| self.cdf(v), u)
    }
}

fn inverse_hazard_from(cdf: f64, density: f64) -> f64 {
    let survival = 1.0 - cdf;
    if survival <= 0.0 {
        0.0
    } else if density <= 0.0 {
        f64::INFINITY
    } else {
        survival / density
    }
}

fn quantile_by_bisection<F: Fn(f64) -> f64>(cdf: F, u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    let cfg = RootConfig {
        x_tol: 1e-12,
        max_iter: 200,
    };
    numeric::bisect(|v| cdf(v) - u, 0.0, 1.0, cfg).unwrap_or(u)
}

/// The buyer-value law F, supported on `[0, 1]`.
#[derive(Clone)]
pub enum ValueDistribution {
    Uniform01,
    /// Density λe^{λv}/(e^λ − 1) on `[0, 1]`. Positive λ tilts mass toward 1,
    /// negative λ is the ordinary exponential truncated to the unit interval.
    TruncExp { lambda: f64 },
    /// F(v) = v^k.
    PowerCdf { k: f64 },
    Custom(Arc<dyn Distribution>),
}

impl fmt::Debug for ValueDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueDistribution::Uniform01 => f.write_str("Uniform01"),
            ValueDistribution::TruncExp { lambda } => write!(f, "TruncExp({lambda})"),
            ValueDistribution::PowerCdf { k } => write!(f, "PowerCdf({k})"),
            ValueDistribution::Custom(_) => f.write_str("Custom"),
        }
    }
}

impl ValueDistribution {
    pub fn trunc_exp(lambda: f64) -> Result<Self> {
        if !lambda.is_finite() || lambda == 0.0 {
            return Err(Error::InvalidModel("trunc_exp lambda must be finite and non-zero"));
        }
        Ok(ValueDistribution::TruncExp { lambda })
    }

    pub fn power(k: f64) -> Result<Self> {
        if !k.is_finite() || k <= 0.0 {
            return Err(Error::InvalidModel("power exponent must be positive"));
        }
        Ok(ValueDistribution::PowerCdf { k })
    }

    pub fn custom<D: Distribution + 'static>(d: D) -> Self {
        ValueDistribution::Custom(Arc::new(d))
    }

    pub fn cdf(&self, v: f64) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        if v >= 1.0 {
            return 1.0;
        }
        match self {
            ValueDistribution::Uniform01 => v,
            ValueDistribution::TruncExp { lambda } => {
                libm::expm1(lambda * v) / libm::expm1(*lambda)
            }
            ValueDistribution::PowerCdf { k } => libm::pow(v, *k),
            ValueDistribution::Custom(d) => d.cdf(v),
        }
    }

    pub fn density(&self, v: f64) -> f64 {
        if !(0.0..=1.0).contains(&v) {
            return 0.0;
        }
        match self {
            ValueDistribution::Uniform01 => 1.0,
            ValueDistribution::TruncExp { lambda } => {
                lambda * libm::exp(lambda * v) / libm::expm1(*lambda)
            }
            ValueDistribution::PowerCdf { k } => k * libm::pow(v, k - 1.0),
            ValueDistribution::Custom(d) => d.density(v),
        }
    }

    /// I(v) = (1 − F(v)) / f(v).
    pub fn inverse_hazard(&self, v: f64) -> f64 {
        if v >= 1.0 {
            return 0.0;
        }
        let v = v.max(0.0);
        match self {
            ValueDistribution::Uniform01 => 1.0 - v,
            ValueDistribution::TruncExp { lambda } => libm::expm1(lambda * (1.0 - v)) / lambda,
            ValueDistribution::PowerCdf { k } => {
                if v == 0.0 {
                    return if *k > 1.0 { f64::INFINITY } else if *k == 1.0 { 1.0 } else { 0.0 };
                }
                (1.0 - libm::pow(v, *k)) / (k * libm::pow(v, k - 1.0))
            }
            ValueDistribution::Custom(d) => d.inverse_hazard(v),
        }
    }

    /// f(v) / (1 − F(v)); infinite where the survival function vanishes.
    pub fn hazard(&self, v: f64) -> f64 {
        let survival = 1.0 - self.cdf(v);
        if survival <= 0.0 {
            f64::INFINITY
        } else {
            self.density(v) / survival
        }
    }

    /// Inverse CDF. Closed forms for the built-in laws, bisection otherwise.
    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        match self {
            ValueDistribution::Uniform01 => u,
            ValueDistribution::TruncExp { lambda } => {
                (libm::log1p(u * libm::expm1(*lambda)) / lambda).clamp(0.0, 1.0)
            }
            ValueDistribution::PowerCdf { k } => libm::pow(u, 1.0 / k),
            ValueDistribution::Custom(d) => d.quantile(u),
        }
    }

    /// ∫_a^b v f(v) dv.
    pub(crate) fn partial_mean(&self, a: f64, b: f64, cfg: QuadConfig) -> Result<f64> {
        if !(a < b) {
            return Ok(0.0);
        }
        match self {
            ValueDistribution::Uniform01 => Ok(0.5 * (b * b - a * a)),
            _ => numeric::integrate(|v| v * self.density(v), a, b, &[], cfg).map(|i| i.value),
        }
    }
}

// ---------------------------------------------------------------------------
// Type model
// ---------------------------------------------------------------------------

/// g(v) = Pr(type t1 | value v).
#[derive(Clone)]
pub enum TypeModel {
    Identity,
    /// g(v) = 1 for v > threshold, 0 otherwise.
    Step { threshold: f64 },
    /// g(v) = a + b·v.
    Affine { a: f64, b: f64 },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for TypeModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeModel::Identity => f.write_str("Identity"),
            TypeModel::Step { threshold } => write!(f, "Step({threshold})"),
            TypeModel::Affine { a, b } => write!(f, "Affine({a}, {b})"),
            TypeModel::Custom(_) => f.write_str("Custom"),
        }
    }
}

impl TypeModel {
    pub fn step(threshold: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&threshold) {
            return Err(Error::InvalidModel("step threshold must lie in [0, 1]"));
        }
        Ok(TypeModel::Step { threshold })
    }

    pub fn affine(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || a < 0.0 || b < 0.0 || a + b > 1.0 {
            return Err(Error::InvalidModel("affine type model needs a >= 0, b >= 0, a + b <= 1"));
        }
        Ok(TypeModel::Affine { a, b })
    }

    pub fn custom<G: Fn(f64) -> f64 + Send + Sync + 'static>(g: G) -> Self {
        TypeModel::Custom(Arc::new(g))
    }

    pub fn prob(&self, v: f64) -> f64 {
        match self {
            TypeModel::Identity => v.clamp(0.0, 1.0),
            TypeModel::Step { threshold } => {
                if v > *threshold {
                    1.0
                } else {
                    0.0
                }
            }
            TypeModel::Affine { a, b } => a + b * v,
            TypeModel::Custom(g) => g(v),
        }
    }

    /// Known discontinuities, handed to the quadrature as split points.
    pub fn breakpoints(&self) -> &[f64] {
        match self {
            TypeModel::Step { threshold } => core::slice::from_ref(threshold),
            _ => &[],
        }
    }
}

// ---------------------------------------------------------------------------
// Payoffs
// ---------------------------------------------------------------------------

/// The consumer's ad bonus δ and the advertiser's four payoffs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GameParams {
    delta: f64,
    s1a: f64,
    s2a: f64,
    s1b: f64,
    s2b: f64,
}

impl GameParams {
    pub fn new(delta: f64, s1a: f64, s2a: f64, s1b: f64, s2b: f64) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::InvalidParams("delta must be positive"));
        }
        if !(s1a.is_finite() && s2a.is_finite() && s1b.is_finite() && s2b.is_finite()) {
            return Err(Error::InvalidParams("payoffs must be finite"));
        }
        if !(s1a > s1b) {
            return Err(Error::InvalidParams("need s1A > s1B"));
        }
        if !(s2b > s2a) {
            return Err(Error::InvalidParams("need s2B > s2A"));
        }
        Ok(GameParams {
            delta,
            s1a,
            s2a,
            s1b,
            s2b,
        })
    }

    /// Payoffs s1A = 1 − η, s2B = η, s1B = s2A = 0, which realise the given
    /// threshold exactly.
    pub fn with_eta(delta: f64, eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta < 1.0) {
            return Err(Error::InvalidParams("eta must lie in (0, 1)"));
        }
        GameParams::new(delta, 1.0 - eta, 0.0, 0.0, eta)
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn s1a(&self) -> f64 {
        self.s1a
    }

    pub fn s2a(&self) -> f64 {
        self.s2a
    }

    pub fn s1b(&self) -> f64 {
        self.s1b
    }

    pub fn s2b(&self) -> f64 {
        self.s2b
    }

    /// Posterior probability of t1 above which ad A is the better reply.
    pub fn eta(&self) -> f64 {
        (self.s2b - self.s2a) / (self.s1a - self.s2a - self.s1b + self.s2b)
    }

    pub fn payoff(&self, ty: ConsumerType, ad: AdChoice) -> f64 {
        match (ty, ad) {
            (ConsumerType::T1, AdChoice::A) => self.s1a,
            (ConsumerType::T2, AdChoice::A) => self.s2a,
            (ConsumerType::T1, AdChoice::B) => self.s1b,
            (ConsumerType::T2, AdChoice::B) => self.s2b,
        }
    }

    /// Expected advertiser payoff of `ad` when Pr(t1) = `r`.
    pub fn expected_payoff(&self, r: f64, ad: AdChoice) -> f64 {
        r * self.payoff(ConsumerType::T1, ad) + (1.0 - r) * self.payoff(ConsumerType::T2, ad)
    }
}

/// A complete game: value law, type model, payoffs.
#[derive(Debug, Clone)]
pub struct Game {
    pub dist: ValueDistribution,
    pub types: TypeModel,
    pub params: GameParams,
}

impl Game {
    pub fn new(dist: ValueDistribution, types: TypeModel, params: GameParams) -> Self {
        Game { dist, types, params }
    }

    pub fn validate(&self, grid: usize) -> ValidationReport {
        validate(&self.dist, &self.types, &self.params, grid)
    }
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Check {
    CdfStart,
    CdfEnd,
    CdfMonotone,
    DensityNonNegative,
    HazardMonotone,
    InverseHazardIdentity,
    TypeRange,
    TypeMonotone,
    Params,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub check: Check,
    /// Offending grid point, if the check is pointwise.
    pub at: Option<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub grid: usize,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, check: Check) -> bool {
        self.violations.iter().any(|v| v.check == check)
    }
}

/// Checks the standing assumptions on an `n`-point grid: a proper CDF with
/// non-negative density, non-decreasing hazard rate, consistency of the
/// inverse hazard, a non-decreasing type map in `[0, 1]`, and the payoff
/// ordering. Density and hazard are probed at cell midpoints so that
/// endpoint singularities do not trip the checks.
pub fn validate(dist: &ValueDistribution, g: &TypeModel, params: &GameParams, n: usize) -> ValidationReport {
    let n = n.max(2);
    let mut out = Vec::new();
    let mut flag = |check, at, value| out.push(Violation { check, at, value });

    let c0 = dist.cdf(0.0);
    if c0.abs() > 1e-12 {
        flag(Check::CdfStart, Some(0.0), c0);
    }
    let c1 = dist.cdf(1.0);
    if (c1 - 1.0).abs() > 1e-12 {
        flag(Check::CdfEnd, Some(1.0), c1);
    }

    let mut prev_cdf = c0;
    for i in 1..=n {
        let v = i as f64 / n as f64;
        let c = dist.cdf(v);
        if c < prev_cdf - 1e-12 {
            flag(Check::CdfMonotone, Some(v), c - prev_cdf);
        }
        prev_cdf = c;
    }

    let mut prev_hazard: Option<f64> = None;
    for i in 0..n {
        let v = (i as f64 + 0.5) / n as f64;
        let f = dist.density(v);
        if !(f >= 0.0) {
            flag(Check::DensityNonNegative, Some(v), f);
            continue;
        }
        let survival = 1.0 - dist.cdf(v);
        let ih = dist.inverse_hazard(v);
        let resid = ih * f - survival;
        if !(resid.abs() <= 1e-9 * survival.max(1e-12)) {
            flag(Check::InverseHazardIdentity, Some(v), resid);
        }
        if survival > 0.0 {
            let h = f / survival;
            if let Some(prev) = prev_hazard {
                if h < prev * (1.0 - 1e-9) - 1e-12 {
                    flag(Check::HazardMonotone, Some(v), h - prev);
                }
            }
            prev_hazard = Some(h);
        }
    }

    let mut prev_g: Option<f64> = None;
    for i in 0..=n {
        let v = i as f64 / n as f64;
        let p = g.prob(v);
        if !(-1e-12..=1.0 + 1e-12).contains(&p) {
            flag(Check::TypeRange, Some(v), p);
        }
        if let Some(prev) = prev_g {
            if p < prev - 1e-12 {
                flag(Check::TypeMonotone, Some(v), p - prev);
            }
        }
        prev_g = Some(p);
    }

    let eta = params.eta();
    if !(params.delta() > 0.0 && params.s1a() > params.s1b() && params.s2b() > params.s2a() && eta > 0.0 && eta < 1.0)
    {
        flag(Check::Params, None, eta);
    }

    ValidationReport { grid: n, violations: out }
}

/// ∫₀¹ g(v) f(v) dv, the advertiser's prior on type t1.
pub fn prior_t1(dist: &ValueDistribution, g: &TypeModel) -> Result<f64> {
    prior_t1_with(dist, g, QuadConfig::default())
}

pub fn prior_t1_with(dist: &ValueDistribution, g: &TypeModel, cfg: QuadConfig) -> Result<f64> {
    type_mass(dist, g, 0.0, 1.0, cfg).map(|m| m.clamp(0.0, 1.0))
}

/// ∫_a^b g(v) f(v) dv.
pub(crate) fn type_mass(dist: &ValueDistribution, g: &TypeModel, a: f64, b: f64, cfg: QuadConfig) -> Result<f64> {
    if !(a < b) {
        return Ok(0.0);
    }
    match (dist, g) {
        (ValueDistribution::Uniform01, TypeModel::Identity) => Ok(0.5 * (b * b - a * a)),
        (ValueDistribution::Uniform01, TypeModel::Step { threshold }) => Ok((b - a.max(*threshold)).max(0.0)),
        _ => numeric::integrate(|v| g.prob(v) * dist.density(v), a, b, g.breakpoints(), cfg).map(|i| i.value),
    }
}
