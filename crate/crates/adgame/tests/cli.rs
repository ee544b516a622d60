use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use adgame::table::SweepTable;
use adgame::RunConfig;
use adgame_core::equilibrium::{self, EquilibriumKind};
use adgame_core::metrics;
use tempfile::TempDir;

fn adgame(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adgame")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn config(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_reference_model() {
    let d = TempDir::new().unwrap();
    let c = config(&d, "r.conf", "eta = 0.5\n");
    let o = adgame(&["solve", "--config", s(&c), "--q", "0.9"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.matches("discriminatory").count(), 1, "{text}");
    assert!(text.contains("price 0.9  cutoff 0.1"), "{text}");
}

#[test]
fn solve_gap_exits_three() {
    let d = TempDir::new().unwrap();
    let c = config(&d, "g.conf", "eta = 0.55\n");
    let o = adgame(&["solve", "--config", s(&c), "--q", "0.605"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("no equilibrium"));
}

#[test]
fn solve_uniform_a_and_csv() {
    let d = TempDir::new().unwrap();
    let c = config(&d, "s.conf", "eta = 0.45\n");
    let csv = d.path().join("row.csv");
    let o = adgame(&["solve", "--config", s(&c), "--q", "0.55", "--csv", s(&csv)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("uniform_a       price 0.5"));
    let t = SweepTable::read(&csv).unwrap();
    assert_eq!(t.kinds_at(0.55), [EquilibriumKind::UniformA]);
}

#[test]
fn solve_by_epsilon() {
    let d = TempDir::new().unwrap();
    let c = config(&d, "r.conf", "eta = 0.5\n");
    let o = adgame(&["solve", "--config", s(&c), "--epsilon", "inf"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("q = 1  epsilon = inf"), "{text}");
    assert!(text.contains("[boundary, limit]"));
}

#[test]
fn invalid_input_exits_two() {
    let d = TempDir::new().unwrap();
    let unknown = config(&d, "u.conf", "colour = blue\n");
    assert_eq!(adgame(&["solve", "--config", s(&unknown), "--q", "0.7"]).status.code(), Some(2));
    let ok = config(&d, "ok.conf", "");
    assert_eq!(adgame(&["solve", "--config", s(&ok), "--q", "0.3"]).status.code(), Some(2));
    assert_eq!(adgame(&["solve", "--config", "/nonexistent/x.conf", "--q", "0.7"]).status.code(), Some(2));
    assert_eq!(adgame(&["solve", "--config", s(&ok)]).status.code(), Some(2));
    let bad = config(&d, "b.conf", "distribution = power\npower_k = 0.5\n");
    let o = adgame(&["verify", "--config", s(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("HazardMonotone"));
}

fn sweep(dir: &TempDir, body: &str, svg: bool) -> (PathBuf, SweepTable) {
    let c = config(dir, "sweep.conf", body);
    let out = dir.path().join("out");
    let mut args = vec!["sweep", "--config", s(&c), "--out", s(&out)];
    if svg {
        args.push("--svg");
    }
    let o = adgame(&args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let t = SweepTable::read(&out.join("sweep.csv")).unwrap();
    (out, t)
}

/// Kind sets along q with repeats collapsed, skipping q values where a
/// point is flagged as a tie.
fn regimes(t: &SweepTable) -> Vec<Vec<EquilibriumKind>> {
    let mut out: Vec<Vec<EquilibriumKind>> = Vec::new();
    for q in t.qs() {
        if t.rows.iter().any(|r| r.q == q && r.entry.is_some_and(|e| e.boundary_flag)) {
            continue;
        }
        let k = t.kinds_at(q);
        if out.last() != Some(&k) {
            out.push(k);
        }
    }
    out
}

#[test]
fn sweep_sequences() {
    use EquilibriumKind::*;
    let d = TempDir::new().unwrap();
    let (_, gap) = sweep(&d, "eta = 0.55\nsteps = 101\n", false);
    assert_eq!(regimes(&gap), [vec![UniformB], vec![], vec![Discriminatory], vec![]]);
    let (_, sw) = sweep(&d, "eta = 0.45\nsteps = 101\n", false);
    assert_eq!(regimes(&sw), [vec![UniformA], vec![Discriminatory]]);
    let (_, all) = sweep(&d, "eta = 0.5\nsteps = 101\n", false);
    assert_eq!(regimes(&all), [vec![Discriminatory]]);
    assert!(all.qs().iter().filter(|&&q| q > 0.5).all(|&q| all.kinds_at(q).contains(&Discriminatory)));
}

#[test]
fn sweep_csv_round_trips_through_classify() {
    let d = TempDir::new().unwrap();
    let body = "type_model = step\nstep_threshold = 0.1\ndelta = 0.8\neta = 0.5\nsteps = 41\n";
    let (_, t) = sweep(&d, body, false);
    let cfg = RunConfig::parse(body).unwrap();
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(1.0);
    for q in t.qs() {
        let pts = equilibrium::classify(&cfg.game, q).unwrap();
        let kinds: Vec<_> = pts.iter().map(|p| p.kind).collect();
        assert_eq!(t.kinds_at(q), kinds, "q={q}");
        for p in &pts {
            let row = t.rows.iter().find(|r| r.q == q && r.entry.is_some_and(|e| e.kind == p.kind)).unwrap();
            let e = row.entry.unwrap();
            let m = metrics::evaluate(&cfg.game, p).unwrap();
            for (a, b) in [
                (e.price, p.price),
                (e.cutoff, p.cutoff),
                (e.r1, p.posteriors.r1),
                (e.r0, p.posteriors.r0),
                (e.cs, m.consumer_surplus),
                (e.profit, m.seller_profit),
                (e.adv_utility, m.advertiser_utility),
                (e.mi_bits, m.mi_bits),
            ] {
                assert!(close(a, b), "q={q} {a} vs {b}");
            }
        }
    }
}

#[test]
fn svg_output_is_byte_stable() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let (da, _) = sweep(&a, "eta = 0.55\nsteps = 65\n", true);
    let (db, _) = sweep(&b, "eta = 0.55\nsteps = 65\n", true);
    let mut names: Vec<_> = fs::read_dir(&da).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.iter().filter(|n| n.to_string_lossy().ends_with(".svg")).count(), 6);
    for n in names {
        assert_eq!(fs::read(da.join(&n)).unwrap(), fs::read(db.join(&n)).unwrap(), "{n:?}");
    }
}

#[test]
fn verify_passes_on_coexistence_model() {
    let d = TempDir::new().unwrap();
    let c = config(&d, "c.conf", "type_model = step\nstep_threshold = 0.1\ndelta = 0.8\neta = 0.5\n");
    let o = adgame(&["verify", "--config", s(&c)]);
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{text}");
    let line = text.lines().find(|l| l.contains("coexistence orderings")).unwrap();
    assert!(line.starts_with("PASS") && !line.contains(" 0 of 0 "), "{line}");
}

#[test]
fn verify_failure_exits_one() {
    let d = TempDir::new().unwrap();
    let c = config(&d, "r.conf", "eta = 0.5\n");
    // one sample has zero standard error, so the oracle check must fail
    let o = adgame(&["verify", "--config", s(&c), "--n", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL  oracle agreement"));
}

#[test]
fn simulate_is_reproducible_and_scales() {
    let d = TempDir::new().unwrap();
    let c = config(&d, "r.conf", "eta = 0.5\nepsilons = 1.3862943611198906\n");
    let run = |n: &str, name: &str| {
        let out = d.path().join(name);
        let o = adgame(&["simulate", "--config", s(&c), "--n", n, "--seed", "42", "--out", s(&out)]);
        assert_eq!(o.status.code(), Some(0));
        fs::read_to_string(out).unwrap()
    };
    let a = run("1000000", "a.csv");
    assert_eq!(a, run("1000000", "b.csv"));
    let small = run("1000", "c.csv");

    let field = |text: &str, col: &str| -> f64 {
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().unwrap().split(',').collect();
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        row[header.iter().position(|h| *h == col).unwrap()].parse().unwrap()
    };
    // q = 0.8 on the discriminatory path
    assert!((field(&a, "r1_emp") - field(&a, "r1")).abs() <= 3.0 * field(&a, "r1_se"));
    let ratio = field(&small, "r1_se") / field(&a, "r1_se");
    assert!((ratio - 1000f64.sqrt()).abs() < 0.15 * 1000f64.sqrt(), "ratio {ratio}");
}
