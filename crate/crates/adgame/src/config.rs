//! `key = value` run configuration files.
//!
//! Blank lines and lines starting with `#` are ignored. Unknown keys are
//! rejected so typos do not silently fall back to defaults.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use adgame_core::model::{q_from_epsilon, DEFAULT_VALIDATION_GRID};
use adgame_core::{Epsilon, Game, GameParams, TypeModel, ValueDistribution};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}`")]
    Duplicate { line: usize, key: String },
    #[error("`{key}`: cannot parse `{value}`")]
    BadValue { key: &'static str, value: String },
    #[error("`{0}` is required for this model")]
    Missing(&'static str),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] adgame_core::Error),
}

const KEYS: &[&str] = &[
    "distribution",
    "lambda",
    "power_k",
    "type_model",
    "step_threshold",
    "affine_a",
    "affine_b",
    "delta",
    "eta",
    "s1A",
    "s2A",
    "s1B",
    "s2B",
    "q_min",
    "q_max",
    "steps",
    "epsilons",
    "validation_grid",
    "out_dir",
    "n",
    "seed",
];

#[derive(Debug, Clone, PartialEq)]
pub enum Grid {
    Range { q_min: f64, q_max: f64, steps: usize },
    Epsilons(Vec<Epsilon>),
}

impl Grid {
    /// The q values of the grid in ascending order.
    pub fn qs(&self) -> Vec<f64> {
        match self {
            Grid::Range { q_min, q_max, steps } => {
                if q_min == q_max {
                    return vec![*q_min];
                }
                let last = steps - 1;
                (0..*steps)
                    .map(|i| if i == last { *q_max } else { q_min + (q_max - q_min) * i as f64 / last as f64 })
                    .collect()
            }
            Grid::Epsilons(eps) => {
                let mut qs: Vec<f64> = eps.iter().map(|e| q_from_epsilon(*e).expect("checked at parse")).collect();
                qs.sort_by(f64::total_cmp);
                qs.dedup();
                qs
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub game: Game,
    pub grid: Grid,
    pub validation_grid: usize,
    pub out_dir: PathBuf,
    pub n: u64,
    pub seed: u64,
}

struct Entries {
    map: BTreeMap<&'static str, String>,
}

impl Entries {
    fn raw(&self, key: &'static str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }

    fn parse<T: std::str::FromStr>(&self, key: &'static str) -> Result<Option<T>, ConfigError> {
        self.raw(key)
            .map(|v| {
                v.parse().map_err(|_| ConfigError::BadValue {
                    key,
                    value: v.to_string(),
                })
            })
            .transpose()
    }

    fn require<T: std::str::FromStr>(&self, key: &'static str) -> Result<T, ConfigError> {
        self.parse(key)?.ok_or(ConfigError::Missing(key))
    }
}

pub fn parse_epsilon(s: &str) -> Option<Epsilon> {
    match s.trim() {
        "inf" | "infinity" | "∞" => Some(Epsilon::Infinite),
        t => t.parse().ok().filter(|e: &f64| e.is_finite() && *e >= 0.0).map(Epsilon::Finite),
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut map = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { line: line_no })?;
            let k = k.trim();
            let key = KEYS.iter().find(|known| **known == k).ok_or_else(|| ConfigError::UnknownKey {
                line: line_no,
                key: k.to_string(),
            })?;
            if map.insert(*key, v.trim().to_string()).is_some() {
                return Err(ConfigError::Duplicate {
                    line: line_no,
                    key: k.to_string(),
                });
            }
        }
        let e = Entries { map };

        let dist = match e.raw("distribution").unwrap_or("uniform") {
            "uniform" => ValueDistribution::Uniform01,
            "trunc_exp" => ValueDistribution::trunc_exp(e.require("lambda")?)?,
            "power" => ValueDistribution::power(e.require("power_k")?)?,
            other => {
                return Err(ConfigError::BadValue {
                    key: "distribution",
                    value: other.to_string(),
                })
            }
        };
        let types = match e.raw("type_model").unwrap_or("identity") {
            "identity" => TypeModel::Identity,
            "step" => TypeModel::step(e.require("step_threshold")?)?,
            "affine" => TypeModel::affine(e.require("affine_a")?, e.require("affine_b")?)?,
            other => {
                return Err(ConfigError::BadValue {
                    key: "type_model",
                    value: other.to_string(),
                })
            }
        };
        let delta = e.parse("delta")?.unwrap_or(1.0);
        let payoff_keys = ["s1A", "s2A", "s1B", "s2B"];
        let params = match e.parse::<f64>("eta")? {
            Some(eta) => {
                if payoff_keys.iter().any(|k| e.raw(k).is_some()) {
                    return Err(ConfigError::Invalid("give either `eta` or the four payoffs, not both".into()));
                }
                GameParams::with_eta(delta, eta)?
            }
            None => GameParams::new(
                delta,
                e.parse("s1A")?.unwrap_or(1.0),
                e.parse("s2A")?.unwrap_or(0.0),
                e.parse("s1B")?.unwrap_or(0.0),
                e.parse("s2B")?.unwrap_or(1.0),
            )?,
        };

        let grid = match e.raw("epsilons") {
            Some(list) => {
                if ["q_min", "q_max", "steps"].iter().any(|k| e.raw(k).is_some()) {
                    return Err(ConfigError::Invalid("give either `epsilons` or a q range, not both".into()));
                }
                let eps = list
                    .split(',')
                    .map(|s| {
                        parse_epsilon(s).ok_or_else(|| ConfigError::BadValue {
                            key: "epsilons",
                            value: s.trim().to_string(),
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                if eps.is_empty() {
                    return Err(ConfigError::Missing("epsilons"));
                }
                Grid::Epsilons(eps)
            }
            None => {
                let q_min = e.parse("q_min")?.unwrap_or(0.5);
                let q_max = e.parse("q_max")?.unwrap_or(1.0);
                let steps = e.parse("steps")?.unwrap_or(adgame_core::equilibrium::DEFAULT_GRID);
                if !(0.5..=1.0).contains(&q_min) || !(0.5..=1.0).contains(&q_max) || q_min > q_max {
                    return Err(ConfigError::Invalid(format!("need 0.5 <= q_min <= q_max <= 1, got {q_min}, {q_max}")));
                }
                if steps < 2 {
                    return Err(ConfigError::Invalid(format!("steps must be at least 2, got {steps}")));
                }
                Grid::Range { q_min, q_max, steps }
            }
        };

        let validation_grid = e.parse("validation_grid")?.unwrap_or(DEFAULT_VALIDATION_GRID);
        if validation_grid < 2 {
            return Err(ConfigError::Invalid("validation_grid must be at least 2".into()));
        }
        let n = e.parse("n")?.unwrap_or(100_000);
        if n == 0 {
            return Err(ConfigError::Invalid("n must be positive".into()));
        }
        Ok(RunConfig {
            game: Game::new(dist, types, params),
            grid,
            validation_grid,
            out_dir: e.raw("out_dir").map(PathBuf::from).unwrap_or_else(|| PathBuf::from("out")),
            n,
            seed: e.parse("seed")?.unwrap_or(42),
        })
    }
}
