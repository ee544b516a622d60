//! Property suite run by `adgame verify` on a configured model.

use adgame_core::equilibrium::{self, best_response_cutoff, q_grid, EquilibriumKind, EquilibriumPoint};
use adgame_core::metrics;
use adgame_core::model::{prior_t1, Game};
use adgame_core::numeric::QuadConfig;
use adgame_core::oracle::{self, StrategyProfile};
use adgame_core::posterior::{posterior_with, CutoffMasses};
use adgame_core::pricing::{discriminatory_price, discriminatory_revenue, monopoly_price};

use crate::config::RunConfig;
use crate::simulate::{simulate_parallel, SimRow};
use crate::{validate_model, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for PropertyCheck {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mark = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{mark}  {:<36} {}", self.name, self.detail)
    }
}

const CUTOFFS: [f64; 11] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];
const Z_LIMIT: f64 = 3.0;

struct Suite<'a> {
    game: &'a Game,
    qs: Vec<f64>,
    points: Vec<Vec<EquilibriumPoint>>,
    out: Vec<PropertyCheck>,
}

impl Suite<'_> {
    fn record(&mut self, name: &'static str, worst: f64, tol: f64, what: &str) {
        self.out.push(PropertyCheck {
            name,
            passed: worst <= tol,
            detail: format!("{what} {worst:.3e} (limit {tol:.0e})"),
        });
    }

    fn record_count(&mut self, name: &'static str, failures: usize, of: usize) {
        self.out.push(PropertyCheck {
            name,
            passed: failures == 0,
            detail: format!("{failures} of {of} cases fail"),
        });
    }
}

/// Runs every property. Returns `Err` only if the model fails validation
/// or a computation errors; failed properties are reported in the list.
pub fn run(cfg: &RunConfig, oracle_n: u64, seed: u64) -> Result<Vec<PropertyCheck>> {
    validate_model(cfg)?;
    let game = &cfg.game;
    let qs = q_grid(101);
    let points = qs.iter().map(|&q| equilibrium::classify(game, q)).collect::<adgame_core::Result<Vec<_>>>()?;
    let mut s = Suite {
        game,
        qs,
        points,
        out: Vec::new(),
    };
    posterior_properties(&mut s)?;
    pricing_properties(&mut s)?;
    equilibrium_properties(&mut s)?;
    metric_properties(&mut s)?;
    oracle_agreement(&mut s, oracle_n, seed)?;
    Ok(s.out)
}

fn posterior_properties(s: &mut Suite) -> Result<()> {
    let g = s.game;
    let prior = prior_t1(&g.dist, &g.types)?;
    let (mut mono, mut refl, mut order, mut total, mut refine) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let fine = QuadConfig::default().tightened(1e-2);
    for v in CUTOFFS {
        let m = CutoffMasses::compute(&g.dist, &g.types, v, QuadConfig::default())?;
        let mut last = m.at(0.5);
        for &q in &s.qs {
            let p = m.at(q);
            mono = mono.max(last.r1 - p.r1).max(p.r0 - last.r0);
            refl = refl.max((p.r0 - m.at(1.0 - q).r1).abs());
            order = order.max(p.r0 - p.r1);
            total = total.max((p.p_sig1 * p.r1 + p.p_sig0 * p.r0 - prior).abs());
            last = p;
        }
        for q in [0.5, 0.75, 1.0] {
            let a = m.at(q);
            let b = posterior_with(&g.dist, &g.types, v, q, fine)?;
            refine = refine.max((a.r1 - b.r1).abs()).max((a.r0 - b.r0).abs());
        }
    }
    s.record("posterior monotone in q", mono.max(0.0), 1e-12, "worst reversal");
    s.record("reflection r0(q) = r1(1-q)", refl, 1e-10, "max error");
    s.record("r1 >= r0", order.max(0.0), 1e-12, "worst excess");
    s.record("total probability", total, 1e-10, "max error");
    s.record("quadrature refinement", refine, 1e-9, "max change");
    Ok(())
}

fn pricing_properties(s: &mut Suite) -> Result<()> {
    let g = s.game;
    let delta = g.params.delta();
    let p_m = monopoly_price(&g.dist)?;
    let sols = s.qs.iter().map(|&q| discriminatory_price(&g.dist, delta, q)).collect::<adgame_core::Result<Vec<_>>>()?;

    let mut mono = 0.0f64;
    for w in sols.windows(2) {
        mono = mono.max(w[0].p1 - w[1].p1).max(w[1].v_star - w[0].v_star);
    }
    s.record("price rises, cutoff falls in q", mono.max(0.0), 1e-10, "worst reversal");

    let order = sols.iter().map(|x| (x.v_star - p_m).max(p_m - x.p1)).fold(0.0f64, f64::max);
    s.record("cutoff <= monopoly price <= price", order, 1e-10, "worst excess");

    let mut regret = 0.0f64;
    for q in [0.5, 0.6, 0.7, 0.8, 0.9, 1.0] {
        let sol = discriminatory_price(&g.dist, delta, q)?;
        let best = discriminatory_revenue(&g.dist, delta, q, sol.p1);
        let hi = 1.0 + (2.0 * q - 1.0) * delta;
        let n = 100_000;
        for i in 0..=n {
            let p = hi * i as f64 / n as f64;
            regret = regret.max(discriminatory_revenue(&g.dist, delta, q, p) - best);
        }
    }
    s.record("price is revenue optimal", regret, 1e-6, "max grid gain");

    let h = 1e-5;
    let mut slope = 0.0f64;
    for (q, sol) in s.qs.iter().zip(&sols) {
        if *q - h < 0.5 || *q + h > 1.0 || sol.corner_flag || sol.v_star < 1e-3 {
            continue;
        }
        let up = discriminatory_price(&g.dist, delta, q + h)?;
        let dn = discriminatory_price(&g.dist, delta, q - h)?;
        if up.corner_flag || dn.corner_flag {
            continue;
        }
        slope = slope.max(((up.p1 - dn.p1) / (2.0 * h) - sol.p1_derivative).abs());
    }
    s.record("price slope matches difference", slope, 1e-5, "max error");
    Ok(())
}

fn equilibrium_properties(s: &mut Suite) -> Result<()> {
    let g = s.game;
    let both = s
        .points
        .iter()
        .filter(|pts| {
            pts.iter().any(|p| p.kind == EquilibriumKind::UniformA) && pts.iter().any(|p| p.kind == EquilibriumKind::UniformB)
        })
        .count();
    s.record_count("never both uniform kinds", both, s.qs.len());

    let at_half = equilibrium::classify(g, 0.5)?;
    let prior = prior_t1(&g.dist, &g.types)?;
    let eta = g.params.eta();
    let expected = if prior >= eta { EquilibriumKind::UniformA } else { EquilibriumKind::UniformB };
    let ok = at_half.len() == 1 && (at_half[0].kind == expected || at_half[0].boundary_flag);
    s.record_count("one uniform kind at full privacy", usize::from(!ok), 1);

    let mut bad_check = 0;
    let mut bad_cert = 0;
    let mut total = 0;
    for p in s.points.iter().flatten() {
        total += 1;
        bad_check += usize::from(!p.self_check(g)?);
        let br = best_response_cutoff(&g.params, p.kind.strategy(), p.price, p.q);
        bad_cert += usize::from(!br.certified || (br.cutoff - p.cutoff).abs() > 1e-12);
    }
    s.record_count("equilibrium points self-check", bad_check, total);
    s.record_count("best-response certificate", bad_cert, total);
    Ok(())
}

fn metric_properties(s: &mut Suite) -> Result<()> {
    let g = s.game;
    let p_m = monopoly_price(&g.dist)?;
    let mut violations = 0;
    let mut overlaps = 0;
    for pts in &s.points {
        let Some(d) = pts.iter().find(|p| p.kind == EquilibriumKind::Discriminatory) else { continue };
        let md = metrics::evaluate(g, d)?;
        for u in pts.iter().filter(|p| p.kind != EquilibriumKind::Discriminatory) {
            overlaps += 1;
            let mu = metrics::evaluate(g, u)?;
            let mut ok = md.advertiser_utility >= mu.advertiser_utility - 1e-9;
            if u.kind == EquilibriumKind::UniformA {
                ok &= mu.consumer_surplus > md.consumer_surplus;
                ok &= md.seller_profit > mu.seller_profit;
                ok &= d.price > p_m && d.cutoff < p_m;
            } else {
                ok &= md.consumer_surplus >= mu.consumer_surplus - 1e-12;
            }
            violations += usize::from(!ok);
        }
    }
    s.record_count("coexistence orderings", violations, overlaps);

    let h = 1e-4;
    let mut worst = 0.0f64;
    for i in 1..=21 {
        let q = 0.5 + 0.5 * i as f64 / 22.0;
        let sol = discriminatory_price(&g.dist, g.params.delta(), q)?;
        if sol.corner_flag || sol.v_star < 1e-3 {
            continue;
        }
        let fd = (metrics::discriminatory_surplus(g, q + h)? - metrics::discriminatory_surplus(g, q - h)?) / (2.0 * h);
        worst = worst.max((fd - metrics::cs_derivative(&g.dist, &g.params, q)?).abs());
    }
    s.record("welfare derivative matches difference", worst, 1e-6, "max error");

    let mut bad = 0;
    let mut n = 0;
    for v in CUTOFFS {
        let m = CutoffMasses::compute(&g.dist, &g.types, v, QuadConfig::default())?;
        for &q in &s.qs {
            n += 1;
            let mi = metrics::mutual_information(&g.dist, &g.types, v, q)?;
            let p = m.at(q).p_sig1;
            let h2 = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
            let zero_expected = q == 0.5 || p == 0.0 || p == 1.0;
            let ok = (0.0..=1.0).contains(&mi) && mi <= h2(p) + h2(1.0 - p) + 1e-12 && (!zero_expected || mi == 0.0);
            bad += usize::from(!ok);
        }
    }
    s.record_count("mutual information bounds", bad, n);
    Ok(())
}

fn oracle_agreement(s: &mut Suite, n: u64, seed: u64) -> Result<()> {
    let g = s.game;
    let mut worst = 0.0f64;
    let mut where_ = String::new();
    for q in [0.5, 0.7, 0.9, 1.0] {
        for p in equilibrium::classify(g, q)? {
            let profile = StrategyProfile::of(&p);
            let row = SimRow {
                q,
                kind: p.kind,
                profile,
                expected: oracle::expected(g, q, &profile)?,
                report: simulate_parallel(g, q, &profile, n, seed)?,
            };
            for (name, truth, est) in row.comparisons() {
                let z = est.z(truth, 1e-9);
                if z > worst {
                    worst = z;
                    where_ = format!(" ({name} at q={q}, {})", p.kind.label());
                }
            }
        }
    }
    s.out.push(PropertyCheck {
        name: "oracle agreement",
        passed: worst <= Z_LIMIT,
        detail: format!("worst |z| {worst:.2}{where_}, n={n}, seed={seed}"),
    });
    Ok(())
}
