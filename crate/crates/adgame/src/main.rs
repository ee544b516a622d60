use std::path::{Path, PathBuf};
use std::process::ExitCode;

use adgame::config::parse_epsilon;
use adgame::table::{fmt12, Entry, SweepRow, SweepTable};
use adgame::{simulate, sweep, validate_model, verify, Error, RunConfig, EXIT_FAILURE, EXIT_NO_EQUILIBRIUM, EXIT_OK};
use adgame_core::equilibrium;
use adgame_core::metrics;
use adgame_core::model::{epsilon_from_q, q_from_epsilon};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "adgame", version, about = "Equilibria of the targeted-advertising game under a privacy constraint")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the equilibria at one privacy level and print their metrics.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Channel fidelity in [0.5, 1].
        #[arg(long, conflicts_with = "epsilon", required_unless_present = "epsilon")]
        q: Option<f64>,
        /// Privacy parameter; `inf` for no privacy.
        #[arg(long)]
        epsilon: Option<String>,
        /// Also write the rows as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Sweep the configured q grid and write CSV (and optionally SVG) output.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        svg: bool,
        /// Output directory; overrides `out_dir` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the property suite on the configured model.
    Verify {
        #[arg(long)]
        config: PathBuf,
        /// Oracle sample size; defaults to `n` from the config.
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Simulate every equilibrium on the grid and compare with the analytic values.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output file; defaults to `<out_dir>/simulate.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(path: &Path) -> Result<RunConfig, Error> {
    let cfg = RunConfig::load(path)?;
    validate_model(&cfg)?;
    Ok(cfg)
}

fn solve(config: PathBuf, q: Option<f64>, epsilon: Option<String>, csv: Option<PathBuf>) -> Result<u8, Error> {
    let cfg = load(&config)?;
    let q = match (q, epsilon) {
        (Some(q), _) => q,
        (None, Some(e)) => {
            let eps = parse_epsilon(&e).ok_or(adgame::ConfigError::BadValue { key: "epsilon", value: e })?;
            q_from_epsilon(eps).map_err(adgame::ConfigError::from)?
        }
        (None, None) => unreachable!("clap requires one of --q, --epsilon"),
    };
    let epsilon = epsilon_from_q(q).map_err(adgame::ConfigError::from)?;
    let game = &cfg.game;
    let points = equilibrium::classify(game, q)?;
    println!("q = {}  epsilon = {epsilon}  eta = {}", fmt12(q), fmt12(game.params.eta()));
    let mut table = SweepTable::default();
    for p in &points {
        let m = metrics::evaluate(game, p)?;
        let mut flags = Vec::new();
        if p.boundary_flag {
            flags.push("boundary");
        }
        if p.posteriors.limit_flag {
            flags.push("limit");
        }
        if p.corner_flag {
            flags.push("corner");
        }
        println!("{:<15} price {}  cutoff {}{}", p.kind.label(), fmt12(p.price), fmt12(p.cutoff), if flags.is_empty() { String::new() } else { format!("  [{}]", flags.join(", ")) });
        println!("  r1 {}  r0 {}  gap {}", fmt12(p.posteriors.r1), fmt12(p.posteriors.r0), fmt12(m.posterior_gap));
        println!(
            "  cs {}  (ad part {})  profit {}  advertiser {}  mi {} bits",
            fmt12(m.consumer_surplus),
            fmt12(m.cs_ad),
            fmt12(m.seller_profit),
            fmt12(m.advertiser_utility),
            fmt12(m.mi_bits)
        );
        if let Some(d) = m.cs_derivative {
            println!("  dCS/dq {}", fmt12(d));
        }
        table.rows.push(SweepRow {
            q,
            epsilon,
            entry: Some(Entry::new(p, &m)),
        });
    }
    if points.is_empty() {
        println!("no equilibrium");
        table.rows.push(SweepRow { q, epsilon, entry: None });
    }
    if let Some(path) = csv {
        table.write(&path)?;
    }
    Ok(if points.is_empty() { EXIT_NO_EQUILIBRIUM } else { EXIT_OK })
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Solve { config, q, epsilon, csv } => solve(config, q, epsilon, csv),
        Command::Sweep { config, svg, out } => {
            let cfg = load(&config)?;
            let s = sweep::run(&cfg)?;
            let dir = out.unwrap_or_else(|| cfg.out_dir.clone());
            for path in s.write(&dir, svg)? {
                println!("wrote {}", path.display());
            }
            for (kind, range) in &s.boundaries.uniform {
                println!("{} exists on [0.5, {}]", kind.label(), fmt12(range.upper()));
            }
            for iv in &s.boundaries.discriminatory {
                println!("discriminatory exists on [{}, {}]", fmt12(iv.lo), fmt12(iv.hi));
            }
            Ok(EXIT_OK)
        }
        Command::Verify { config, n, seed } => {
            let cfg = RunConfig::load(&config)?;
            let checks = verify::run(&cfg, n.unwrap_or(cfg.n), seed.unwrap_or(cfg.seed))?;
            for c in &checks {
                println!("{c}");
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            println!("{} of {} properties pass", checks.len() - failed, checks.len());
            Ok(if failed == 0 { EXIT_OK } else { EXIT_FAILURE })
        }
        Command::Simulate { config, n, seed, out } => {
            let cfg = load(&config)?;
            let n = n.unwrap_or(cfg.n);
            if n == 0 {
                return Err(adgame::ConfigError::Invalid("n must be positive".into()).into());
            }
            let rows = simulate::run(&cfg, n, seed.unwrap_or(cfg.seed))?;
            let path = out.unwrap_or_else(|| cfg.out_dir.join("simulate.csv"));
            simulate::write(&rows, &path)?;
            println!("wrote {} ({} rows)", path.display(), rows.len());
            Ok(EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { adgame::EXIT_INVALID } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
