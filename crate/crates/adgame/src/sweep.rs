//! Parallel q sweeps with the existence-region endpoints added to the grid.

use std::path::{Path, PathBuf};

use adgame_core::equilibrium::{self, EquilibriumKind, QInterval, UniformRange};
use adgame_core::metrics;
use adgame_core::model::{epsilon_from_q, prior_t1};
use adgame_core::Game;
use rayon::prelude::*;

use crate::config::{Grid, RunConfig};
use crate::table::{CandidateTable, Entry, SweepRow, SweepTable};
use crate::{svg, Error, Result};

/// Where each kind's existence region ends, as found by the refinement pass.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Boundaries {
    pub uniform: Vec<(EquilibriumKind, UniformRange)>,
    pub discriminatory: Vec<QInterval>,
}

impl Boundaries {
    fn points(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.discriminatory.iter().flat_map(|i| [i.lo, i.hi]).collect();
        for (_, r) in &self.uniform {
            if let UniformRange::UpTo(b) = r {
                out.push(b.q_bar);
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct Sweep {
    pub table: SweepTable,
    pub candidates: CandidateTable,
    pub boundaries: Boundaries,
    pub eta: f64,
}

/// Existence-region endpoints for the model, scanned on `qs`.
pub fn boundaries(game: &Game, qs: &[f64]) -> Result<Boundaries> {
    let holds = qs
        .par_iter()
        .map(|&q| equilibrium::discriminatory_exists(game, q))
        .collect::<adgame_core::Result<Vec<_>>>()?;
    let discriminatory = equilibrium::intervals_from_grid(game, qs, &holds)?;
    let prior = prior_t1(&game.dist, &game.types)?;
    let eta = game.params.eta();
    let mut uniform = Vec::new();
    for kind in [EquilibriumKind::UniformA, EquilibriumKind::UniformB] {
        let side_ok = match kind {
            EquilibriumKind::UniformA => prior >= eta - equilibrium::ETA_TIE_TOL,
            _ => prior <= eta + equilibrium::ETA_TIE_TOL,
        };
        if side_ok {
            uniform.push((kind, equilibrium::uniform_boundary(game, kind)?));
        }
    }
    Ok(Boundaries { uniform, discriminatory })
}

fn merge_points(mut qs: Vec<f64>, extra: &[f64]) -> Vec<f64> {
    let (lo, hi) = (qs[0], qs[qs.len() - 1]);
    qs.extend(extra.iter().copied().filter(|q| (lo..=hi).contains(q)));
    qs.sort_by(f64::total_cmp);
    qs.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
    qs
}

/// Classifies and evaluates every grid point. For a q range the refined
/// region endpoints are inserted so each region's closing point appears.
pub fn run(cfg: &RunConfig) -> Result<Sweep> {
    let game = &cfg.game;
    let base = cfg.grid.qs();
    let boundaries = match cfg.grid {
        Grid::Range { .. } => boundaries(game, &base)?,
        Grid::Epsilons(_) => Boundaries::default(),
    };
    let qs = merge_points(base, &boundaries.points());

    let (p_m, masses) = equilibrium::monopoly_masses(game)?;
    let per_q = qs
        .par_iter()
        .map(|&q| -> adgame_core::Result<_> {
            let epsilon = epsilon_from_q(q)?;
            let points = equilibrium::classify_with(game, q, p_m, &masses)?;
            let mut rows = Vec::with_capacity(points.len().max(1));
            for p in &points {
                let m = metrics::evaluate(game, p)?;
                rows.push(SweepRow {
                    q,
                    epsilon,
                    entry: Some(Entry::new(p, &m)),
                });
            }
            if rows.is_empty() {
                rows.push(SweepRow { q, epsilon, entry: None });
            }
            Ok((rows, equilibrium::candidates(game, q)?))
        })
        .collect::<adgame_core::Result<Vec<_>>>()?;

    let mut table = SweepTable::default();
    let mut candidates = CandidateTable::default();
    for (rows, cands) in per_q {
        table.rows.extend(rows);
        candidates.rows.extend(cands);
    }
    Ok(Sweep {
        table,
        candidates,
        boundaries,
        eta: game.params.eta(),
    })
}

impl Sweep {
    /// Writes `sweep.csv`, `candidates.csv` and, if asked, the SVG figures
    /// into `dir`. Returns the paths written.
    pub fn write(&self, dir: &Path, with_svg: bool) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(Error::io(dir))?;
        let mut written = Vec::new();
        let sweep = dir.join("sweep.csv");
        self.table.write(&sweep)?;
        written.push(sweep);
        let cands = dir.join("candidates.csv");
        self.candidates.write(&cands)?;
        written.push(cands);
        if with_svg {
            for (name, body) in svg::figures(&self.table, &self.candidates, self.eta) {
                let path = dir.join(name);
                std::fs::write(&path, body).map_err(Error::io(&path))?;
                written.push(path);
            }
        }
        Ok(written)
    }

    /// Kind sets along q with repeats collapsed; an empty set marks a gap.
    /// With `skip_ties`, q values where some point sits on a tie with η are
    /// left out, so single-point overlaps at switch points do not show.
    pub fn regime_sequence(&self, skip_ties: bool) -> Vec<Vec<EquilibriumKind>> {
        let mut out: Vec<Vec<EquilibriumKind>> = Vec::new();
        for q in self.table.qs() {
            let tie = self.table.rows.iter().any(|r| r.q == q && r.entry.is_some_and(|e| e.boundary_flag));
            if skip_ties && tie {
                continue;
            }
            let kinds = self.table.kinds_at(q);
            if out.last() != Some(&kinds) {
                out.push(kinds);
            }
        }
        out
    }
}
