//! Parallel Monte-Carlo runs against classified equilibrium profiles.

use std::io::Write;
use std::path::Path;

use adgame_core::equilibrium;
use adgame_core::oracle::{self, Estimate, Expected, SimReport, StrategyProfile, Tally};
use adgame_core::Game;
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::table::fmt12;
use crate::{Error, Result};

/// Same result as [`oracle::simulate`], with shards spread over threads.
pub fn simulate_parallel(game: &Game, q: f64, profile: &StrategyProfile, n: u64, seed: u64) -> Result<SimReport> {
    let shards: Vec<(u64, u64)> = oracle::shards(n).collect();
    let tallies = shards
        .par_iter()
        .map(|&(k, count)| oracle::simulate_shard(game, q, profile, seed, k, count))
        .collect::<adgame_core::Result<Vec<_>>>()?;
    let mut total = Tally::default();
    for t in &tallies {
        total.merge(t);
    }
    Ok(SimReport::from_tally(&total, seed)?)
}

/// One simulated equilibrium with its analytic counterpart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimRow {
    pub q: f64,
    pub kind: equilibrium::EquilibriumKind,
    pub profile: StrategyProfile,
    pub expected: Expected,
    pub report: SimReport,
}

impl SimRow {
    /// `(name, analytic, empirical)` for every compared quantity. Posteriors
    /// conditioned on a signal that never occurred are left out.
    pub fn comparisons(&self) -> Vec<(&'static str, f64, Estimate)> {
        let (e, r) = (&self.expected, &self.report);
        let mut out = Vec::new();
        if let Some(x) = r.r1 {
            out.push(("r1", e.r1, x));
        }
        if let Some(x) = r.r0 {
            out.push(("r0", e.r0, x));
        }
        out.extend([
            ("p_sig1", e.p_sig1, r.p_sig1),
            ("cs", e.consumer_surplus, r.consumer_surplus),
            ("profit", e.seller_profit, r.seller_profit),
            ("adv_utility", e.advertiser_utility, r.advertiser_utility),
        ]);
        out
    }
}

/// Simulates every classified equilibrium at every grid q.
pub fn run(cfg: &RunConfig, n: u64, seed: u64) -> Result<Vec<SimRow>> {
    let game = &cfg.game;
    let mut rows = Vec::new();
    for q in cfg.grid.qs() {
        for p in equilibrium::classify(game, q)? {
            let profile = StrategyProfile::of(&p);
            rows.push(SimRow {
                q,
                kind: p.kind,
                profile,
                expected: oracle::expected(game, q, &profile)?,
                report: simulate_parallel(game, q, &profile, n, seed)?,
            });
        }
    }
    Ok(rows)
}

const QUANTITIES: [&str; 7] = ["r1", "r0", "p_sig1", "cs", "profit", "adv_utility", "mi_bits"];

pub fn write_csv<W: Write>(rows: &[SimRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header: Vec<String> = ["q", "kind", "price", "cutoff", "n", "seed"].map(String::from).to_vec();
    for name in QUANTITIES {
        header.extend([name.to_string(), format!("{name}_emp"), format!("{name}_se")]);
    }
    out.write_record(&header)?;
    for row in rows {
        let (e, r) = (&row.expected, &row.report);
        let mut rec = vec![
            fmt12(row.q),
            row.kind.label().to_string(),
            fmt12(row.profile.price),
            fmt12(row.profile.cutoff),
            r.n.to_string(),
            r.seed.to_string(),
        ];
        let cols: [(f64, Option<Estimate>); 7] = [
            (e.r1, r.r1),
            (e.r0, r.r0),
            (e.p_sig1, Some(r.p_sig1)),
            (e.consumer_surplus, Some(r.consumer_surplus)),
            (e.seller_profit, Some(r.seller_profit)),
            (e.advertiser_utility, Some(r.advertiser_utility)),
            (e.mi_bits, Some(r.mi_bits)),
        ];
        for (analytic, est) in cols {
            rec.push(fmt12(analytic));
            match est {
                Some(x) => rec.extend([fmt12(x.value), fmt12(x.se)]),
                None => rec.extend([String::new(), String::new()]),
            }
        }
        out.write_record(&rec)?;
    }
    out.flush().map_err(Error::io("<csv>"))?;
    Ok(())
}

pub fn write(rows: &[SimRow], path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(Error::io(dir))?;
    }
    let f = std::fs::File::create(path).map_err(Error::io(path))?;
    write_csv(rows, std::io::BufWriter::new(f))
}
