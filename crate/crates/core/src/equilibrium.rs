//! Which of the three pure-strategy equilibrium kinds exist at a privacy
//! level, and where their existence regions end.
//!
//! Conditions are checked in weak form with a tie tolerance of
//! [`ETA_TIE_TOL`]: points within that distance of η are accepted and carry
//! `boundary_flag`, so the endpoints of existence regions are classifiable.

use alloc::vec::Vec;

use crate::model::{prior_t1, AdvertiserStrategy, Game, GameParams};
use crate::numeric::{self, QuadConfig, RootConfig};
use crate::posterior::{self, CutoffMasses, PosteriorPair};
use crate::pricing::{self, PricingSolution};
use crate::{Error, Result};

pub const ETA_TIE_TOL: f64 = 1e-9;

/// Default number of q points on `[1/2, 1]` for interval scans.
pub const DEFAULT_GRID: usize = 513;

/// Bisection tolerance for refined region endpoints.
pub const BOUNDARY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EquilibriumKind {
    Discriminatory,
    UniformA,
    UniformB,
}

impl EquilibriumKind {
    pub const ALL: [EquilibriumKind; 3] = [
        EquilibriumKind::Discriminatory,
        EquilibriumKind::UniformA,
        EquilibriumKind::UniformB,
    ];

    pub fn strategy(self) -> AdvertiserStrategy {
        match self {
            EquilibriumKind::Discriminatory => AdvertiserStrategy::Discriminatory,
            EquilibriumKind::UniformA => AdvertiserStrategy::AlwaysA,
            EquilibriumKind::UniformB => AdvertiserStrategy::AlwaysB,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            EquilibriumKind::Discriminatory => "discriminatory",
            EquilibriumKind::UniformA => "uniform_a",
            EquilibriumKind::UniformB => "uniform_b",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        EquilibriumKind::ALL.into_iter().find(|k| k.label() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumPoint {
    pub kind: EquilibriumKind,
    pub q: f64,
    pub price: f64,
    pub cutoff: f64,
    pub posteriors: PosteriorPair,
    /// A binding posterior sits within [`ETA_TIE_TOL`] of η.
    pub boundary_flag: bool,
    /// Discriminatory price at the all-buy corner.
    pub corner_flag: bool,
}

/// One equilibrium kind evaluated at q whether or not its conditions hold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub point: EquilibriumPoint,
    pub holds: bool,
}

fn near(x: f64, eta: f64) -> bool {
    (x - eta).abs() <= ETA_TIE_TOL
}

fn discriminatory_condition(p: &PosteriorPair, eta: f64) -> (bool, bool) {
    let holds = p.r1 >= eta - ETA_TIE_TOL && p.r0 <= eta + ETA_TIE_TOL;
    (holds, near(p.r1, eta) || near(p.r0, eta))
}

fn uniform_a_condition(p: &PosteriorPair, eta: f64) -> (bool, bool) {
    (p.r1 > eta - ETA_TIE_TOL && p.r0 > eta - ETA_TIE_TOL, near(p.r0, eta))
}

fn uniform_b_condition(p: &PosteriorPair, eta: f64) -> (bool, bool) {
    (p.r1 < eta + ETA_TIE_TOL && p.r0 < eta + ETA_TIE_TOL, near(p.r1, eta))
}

/// Price, cutoff and posteriors of the discriminatory candidate at q. A
/// posterior conditioned on a zero-probability signal (everyone buys at
/// q = 1) is replaced by its limit along the equilibrium path.
pub fn discriminatory_candidate(game: &Game, q: f64) -> Result<(PricingSolution, PosteriorPair)> {
    let eval = |q: f64| -> Result<(PricingSolution, PosteriorPair)> {
        let s = pricing::discriminatory_price(&game.dist, game.params.delta(), q)?;
        let p = posterior::posterior(&game.dist, &game.types, s.v_star, q)?;
        Ok((s, p))
    };
    let (sol, post) = eval(q)?;
    let post = posterior::path_limit(post, q, |q| eval(q).map(|(_, p)| p))?;
    Ok((sol, post))
}

/// Masses at the monopoly cutoff, reusable across q.
pub fn monopoly_masses(game: &Game) -> Result<(f64, CutoffMasses)> {
    let p_m = pricing::monopoly_price(&game.dist)?;
    let m = CutoffMasses::compute(&game.dist, &game.types, p_m, QuadConfig::default())?;
    Ok((p_m, m))
}

/// All three kinds at q with their conditions evaluated. Used for
/// diagnostics and for plotting each kind across the whole q range.
pub fn candidates(game: &Game, q: f64) -> Result<[Candidate; 3]> {
    let (p_m, masses) = monopoly_masses(game)?;
    candidates_with(game, q, p_m, &masses)
}

fn candidates_with(game: &Game, q: f64, p_m: f64, masses: &CutoffMasses) -> Result<[Candidate; 3]> {
    if !(0.5..=1.0).contains(&q) {
        return Err(Error::InvalidFidelity(q));
    }
    let eta = game.params.eta();
    let (sol, dp) = discriminatory_candidate(game, q)?;
    let up = masses.at(q);
    let (d_holds, d_edge) = discriminatory_condition(&dp, eta);
    // at q = 1/2 both signals carry the prior, so the two conditions can only
    // meet at a tie and the advertiser has no reason to discriminate
    let d_holds = d_holds && q > 0.5;
    let (a_holds, a_edge) = uniform_a_condition(&up, eta);
    let (b_holds, b_edge) = uniform_b_condition(&up, eta);
    let uniform = |kind, boundary_flag| EquilibriumPoint {
        kind,
        q,
        price: p_m,
        cutoff: p_m,
        posteriors: up,
        boundary_flag,
        corner_flag: false,
    };
    Ok([
        Candidate {
            point: EquilibriumPoint {
                kind: EquilibriumKind::Discriminatory,
                q,
                price: sol.p1,
                cutoff: sol.v_star,
                posteriors: dp,
                boundary_flag: d_edge,
                corner_flag: sol.corner_flag,
            },
            holds: d_holds,
        },
        Candidate {
            point: uniform(EquilibriumKind::UniformA, a_edge),
            holds: a_holds,
        },
        Candidate {
            point: uniform(EquilibriumKind::UniformB, b_edge),
            holds: b_holds,
        },
    ])
}

/// Every equilibrium kind whose conditions hold at q, in kind order. The
/// result may be empty. Uniform A and B are never both returned: when both
/// posteriors tie with η the side of the prior decides (A on an exact tie).
pub fn classify(game: &Game, q: f64) -> Result<Vec<EquilibriumPoint>> {
    let (p_m, masses) = monopoly_masses(game)?;
    classify_with(game, q, p_m, &masses)
}

/// [`classify`] with the monopoly-cutoff masses supplied by the caller.
pub fn classify_with(game: &Game, q: f64, p_m: f64, masses: &CutoffMasses) -> Result<Vec<EquilibriumPoint>> {
    let [d, mut a, mut b] = candidates_with(game, q, p_m, masses)?;
    if a.holds && b.holds {
        let prior_above = masses.prior() >= game.params.eta();
        a.holds = prior_above;
        b.holds = !prior_above;
        a.point.boundary_flag = true;
        b.point.boundary_flag = true;
    }
    Ok([d, a, b].into_iter().filter(|c| c.holds).map(|c| c.point).collect())
}

impl EquilibriumPoint {
    /// Recomputes the posteriors at this point's cutoff and q and confirms
    /// they reproduce the stored values and still satisfy the kind's
    /// condition.
    pub fn self_check(&self, game: &Game) -> Result<bool> {
        let eta = game.params.eta();
        let fresh = match self.kind {
            EquilibriumKind::Discriminatory => {
                let (sol, p) = discriminatory_candidate(game, self.q)?;
                if (sol.v_star - self.cutoff).abs() > 1e-12 {
                    return Ok(false);
                }
                p
            }
            _ => posterior::posterior(&game.dist, &game.types, self.cutoff, self.q)?,
        };
        let same = (fresh.r1 - self.posteriors.r1).abs() <= 1e-12 && (fresh.r0 - self.posteriors.r0).abs() <= 1e-12;
        let (holds, _) = match self.kind {
            EquilibriumKind::Discriminatory => discriminatory_condition(&fresh, eta),
            EquilibriumKind::UniformA => uniform_a_condition(&fresh, eta),
            EquilibriumKind::UniformB => uniform_b_condition(&fresh, eta),
        };
        Ok(same && holds)
    }
}

// ---------------------------------------------------------------------------
// Uniform existence boundaries
// ---------------------------------------------------------------------------

/// Which reported bit's posterior meets η at a boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BindingSignal {
    /// r(1, ·, q) = η.
    ReportedPurchase,
    /// r(0, ·, q) = η.
    ReportedNoPurchase,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExistenceBoundary {
    pub kind: EquilibriumKind,
    pub q_bar: f64,
    pub side: BindingSignal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UniformRange {
    /// The uniform equilibrium exists on all of `[1/2, 1]`.
    Entire,
    /// It exists on `[1/2, q_bar]`.
    UpTo(ExistenceBoundary),
}

impl UniformRange {
    pub fn upper(&self) -> f64 {
        match self {
            UniformRange::Entire => 1.0,
            UniformRange::UpTo(b) => b.q_bar,
        }
    }
}

/// Largest q in `[1/2, 1]` at which a uniform equilibrium of `kind` still
/// exists: the last crossing of r(0, p_M, q) = η for kind A, of
/// r(1, p_M, q) = η for kind B.
pub fn uniform_boundary(game: &Game, kind: EquilibriumKind) -> Result<UniformRange> {
    let eta = game.params.eta();
    let prior = prior_t1(&game.dist, &game.types)?;
    let consistent = match kind {
        EquilibriumKind::UniformA => prior >= eta - ETA_TIE_TOL,
        EquilibriumKind::UniformB => prior <= eta + ETA_TIE_TOL,
        EquilibriumKind::Discriminatory => false,
    };
    if !consistent {
        return Err(Error::InconsistentKind);
    }
    let (_, masses) = monopoly_masses(game)?;
    let (side, margin): (BindingSignal, fn(&PosteriorPair, f64) -> f64) = match kind {
        EquilibriumKind::UniformA => (BindingSignal::ReportedNoPurchase, |p, eta| p.r0 - eta),
        _ => (BindingSignal::ReportedPurchase, |p, eta| eta - p.r1),
    };
    let s = |q: f64| margin(&masses.at(q), eta);
    if s(1.0) >= 0.0 {
        return Ok(UniformRange::Entire);
    }
    let n = DEFAULT_GRID;
    let qs = |i: usize| 0.5 + 0.5 * i as f64 / (n - 1) as f64;
    let last_ok = (0..n).rev().find(|&i| s(qs(i)) >= 0.0);
    let q_bar = match last_ok {
        None => 0.5,
        Some(i) => numeric::bisect(s, qs(i), qs(i + 1), RootConfig::default())?,
    };
    Ok(UniformRange::UpTo(ExistenceBoundary { kind, q_bar, side }))
}

// ---------------------------------------------------------------------------
// Discriminatory existence intervals
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QInterval {
    pub lo: f64,
    pub hi: f64,
}

impl QInterval {
    pub fn contains(&self, q: f64) -> bool {
        self.lo <= q && q <= self.hi
    }
}

/// Evenly spaced q values on `[1/2, 1]`.
pub fn q_grid(steps: usize) -> Vec<f64> {
    let n = steps.max(2);
    (0..n).map(|i| if i == n - 1 { 1.0 } else { 0.5 + 0.5 * i as f64 / (n - 1) as f64 }).collect()
}

/// Whether the discriminatory conditions hold at q.
pub fn discriminatory_exists(game: &Game, q: f64) -> Result<bool> {
    let (_, p) = discriminatory_candidate(game, q)?;
    Ok(q > 0.5 && discriminatory_condition(&p, game.params.eta()).0)
}

/// Maximal q-intervals on which a discriminatory equilibrium exists,
/// scanned on a `steps`-point grid with each interior endpoint refined by
/// bisection. Endpoints are reported on the side where the condition holds.
pub fn discriminatory_intervals(game: &Game, steps: usize) -> Result<Vec<QInterval>> {
    let qs = q_grid(steps);
    let holds = qs.iter().map(|&q| discriminatory_exists(game, q)).collect::<Result<Vec<_>>>()?;
    intervals_from_grid(game, &qs, &holds)
}

/// Refines the runs of `holds` over the ascending grid `qs` into intervals.
/// Split out so callers can evaluate the grid in parallel.
pub fn intervals_from_grid(game: &Game, qs: &[f64], holds: &[bool]) -> Result<Vec<QInterval>> {
    let cfg = RootConfig {
        x_tol: BOUNDARY_TOL,
        max_iter: 200,
    };
    // a failing evaluation inside the bisection counts as "does not hold"
    let pred = |q: f64| discriminatory_exists(game, q).unwrap_or(false);
    let mut out = Vec::new();
    let mut i = 0;
    while i < holds.len() {
        if !holds[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i + 1 < holds.len() && holds[i + 1] {
            i += 1;
        }
        let lo = if start == 0 {
            qs[0]
        } else {
            numeric::bisect_predicate(pred, qs[start], qs[start - 1], cfg)?.0
        };
        let hi = if i + 1 == holds.len() {
            qs[i]
        } else {
            numeric::bisect_predicate(pred, qs[i], qs[i + 1], cfg)?.0
        };
        out.push(QInterval { lo, hi });
        i += 1;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Consumer best response
// ---------------------------------------------------------------------------

/// Grid size used for the upper-interval certificate.
pub const CERTIFICATE_GRID: usize = 1001;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BestResponse {
    pub cutoff: f64,
    /// On the certificate grid the buyers form an upper interval that agrees
    /// with `cutoff`.
    pub certified: bool,
}

/// Period-1 utility of buying and of not buying for a consumer of value v.
pub fn purchase_utilities(params: &GameParams, strategy: AdvertiserStrategy, price: f64, q: f64, v: f64) -> (f64, f64) {
    let delta = params.delta();
    match strategy {
        AdvertiserStrategy::Discriminatory => (v - price + q * delta, (1.0 - q) * delta),
        AdvertiserStrategy::AlwaysA => (v - price + delta, delta),
        AdvertiserStrategy::AlwaysB => (v - price, 0.0),
    }
}

/// The consumer's cutoff against an advertiser strategy and a posted price,
/// together with a grid certificate that the buy set is an upper interval.
pub fn best_response_cutoff(params: &GameParams, strategy: AdvertiserStrategy, price: f64, q: f64) -> BestResponse {
    let cutoff = match strategy {
        AdvertiserStrategy::Discriminatory => pricing::induced_cutoff(price, params.delta(), q),
        _ => price.clamp(0.0, 1.0),
    };
    let n = CERTIFICATE_GRID;
    let mut seen_buyer = false;
    let mut certified = true;
    for i in 0..n {
        let v = i as f64 / (n - 1) as f64;
        let (buy, stay) = purchase_utilities(params, strategy, price, q, v);
        let buys = buy >= stay;
        if seen_buyer && !buys {
            certified = false;
        }
        seen_buyer |= buys;
        if (v > cutoff + 1e-12 && !buys) || (v < cutoff - 1e-12 && buys) {
            certified = false;
        }
    }
    BestResponse { cutoff, certified }
}
