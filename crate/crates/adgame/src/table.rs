//! CSV tables for sweeps and for the per-kind candidate curves.

use std::io::{Read, Write};
use std::path::Path;

use adgame_core::equilibrium::{Candidate, EquilibriumKind, EquilibriumPoint};
use adgame_core::metrics::MetricsRow;
use adgame_core::model::epsilon_from_q;
use adgame_core::Epsilon;

use crate::{Error, Result};

/// ε values above this are written as the cap, with `epsilon_inf` marking
/// the genuine infinity at q = 1.
pub const EPSILON_CAP: f64 = 36.0;

pub const SWEEP_HEADER: [&str; 18] = [
    "q",
    "epsilon",
    "epsilon_inf",
    "kind",
    "price",
    "cutoff",
    "r1",
    "r0",
    "posterior_gap",
    "cs",
    "cs_ad",
    "cs_derivative",
    "profit",
    "adv_utility",
    "mi_bits",
    "boundary_flag",
    "limit_flag",
    "corner_flag",
];

pub const CANDIDATE_HEADER: [&str; 8] = ["q", "kind", "holds", "price", "cutoff", "r1", "r0", "boundary_flag"];

/// Formats to 12 significant digits, shortest form.
pub fn fmt12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("float formatting round-trips");
    format!("{rounded}")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry {
    pub kind: EquilibriumKind,
    pub price: f64,
    pub cutoff: f64,
    pub r1: f64,
    pub r0: f64,
    pub posterior_gap: f64,
    pub cs: f64,
    pub cs_ad: f64,
    pub cs_derivative: Option<f64>,
    pub profit: f64,
    pub adv_utility: f64,
    pub mi_bits: f64,
    pub boundary_flag: bool,
    pub limit_flag: bool,
    pub corner_flag: bool,
}

impl Entry {
    pub fn new(p: &EquilibriumPoint, m: &MetricsRow) -> Self {
        Entry {
            kind: p.kind,
            price: p.price,
            cutoff: p.cutoff,
            r1: p.posteriors.r1,
            r0: p.posteriors.r0,
            posterior_gap: m.posterior_gap,
            cs: m.consumer_surplus,
            cs_ad: m.cs_ad,
            cs_derivative: m.cs_derivative,
            profit: m.seller_profit,
            adv_utility: m.advertiser_utility,
            mi_bits: m.mi_bits,
            boundary_flag: p.boundary_flag,
            limit_flag: p.posteriors.limit_flag,
            corner_flag: p.corner_flag,
        }
    }
}

/// One row per (q, kind); `entry` is `None` on rows where no equilibrium
/// exists.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub q: f64,
    pub epsilon: Epsilon,
    pub entry: Option<Entry>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

fn epsilon_cells(e: Epsilon) -> (String, &'static str) {
    match e {
        Epsilon::Infinite => (fmt12(EPSILON_CAP), "1"),
        Epsilon::Finite(x) => (fmt12(x.min(EPSILON_CAP)), "0"),
    }
}

fn parse_f64(s: &str, col: &str) -> Result<f64> {
    s.parse().map_err(|_| Error::Format(format!("column {col}: `{s}` is not a number")))
}

fn parse_flag(s: &str, col: &str) -> Result<bool> {
    match s {
        "0" => Ok(false),
        "1" => Ok(true),
        _ => Err(Error::Format(format!("column {col}: `{s}` is not 0/1"))),
    }
}

fn check_header(found: &csv::StringRecord, want: &[&str]) -> Result<()> {
    if found.iter().eq(want.iter().copied()) {
        Ok(())
    } else {
        Err(Error::Format(format!("unexpected header {:?}", found.iter().collect::<Vec<_>>())))
    }
}

impl SweepTable {
    /// Distinct q values in row order.
    pub fn qs(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for r in &self.rows {
            if out.last() != Some(&r.q) {
                out.push(r.q);
            }
        }
        out
    }

    pub fn kinds_at(&self, q: f64) -> Vec<EquilibriumKind> {
        self.rows.iter().filter(|r| r.q == q).filter_map(|r| r.entry.map(|e| e.kind)).collect()
    }

    /// Entries of one kind in q order.
    pub fn series(&self, kind: EquilibriumKind) -> impl Iterator<Item = (f64, &Entry)> {
        self.rows.iter().filter_map(move |r| r.entry.as_ref().filter(|e| e.kind == kind).map(|e| (r.q, e)))
    }

    pub fn write_to<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(SWEEP_HEADER)?;
        for r in &self.rows {
            let (eps, eps_inf) = epsilon_cells(r.epsilon);
            let mut rec = vec![fmt12(r.q), eps, eps_inf.to_string()];
            match &r.entry {
                None => {
                    rec.push("none".into());
                    rec.extend((4..SWEEP_HEADER.len()).map(|_| String::new()));
                }
                Some(e) => {
                    rec.push(e.kind.label().into());
                    rec.extend([e.price, e.cutoff, e.r1, e.r0, e.posterior_gap, e.cs, e.cs_ad].map(fmt12));
                    rec.push(e.cs_derivative.map(fmt12).unwrap_or_default());
                    rec.extend([e.profit, e.adv_utility, e.mi_bits].map(fmt12));
                    rec.extend([e.boundary_flag, e.limit_flag, e.corner_flag].map(|b| flag(b).to_string()));
                }
            }
            out.write_record(&rec)?;
        }
        out.flush().map_err(Error::io("<csv>"))?;
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(Error::io(path))?;
        self.write_to(std::io::BufWriter::new(f))
    }

    pub fn read_from<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        check_header(rdr.headers()?, &SWEEP_HEADER)?;
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let cell = |i: usize| rec.get(i).unwrap_or("");
            let num = |i: usize| parse_f64(cell(i), SWEEP_HEADER[i]);
            let q = num(0)?;
            let epsilon = if parse_flag(cell(2), "epsilon_inf")? {
                Epsilon::Infinite
            } else {
                // the capped cell loses precision near q = 1, so rebuild from q
                epsilon_from_q(q).map_err(|e| Error::Format(e.to_string()))?
            };
            let entry = match cell(3) {
                "none" => None,
                label => {
                    let kind = EquilibriumKind::from_label(label).ok_or_else(|| Error::Format(format!("unknown kind `{label}`")))?;
                    Some(Entry {
                        kind,
                        price: num(4)?,
                        cutoff: num(5)?,
                        r1: num(6)?,
                        r0: num(7)?,
                        posterior_gap: num(8)?,
                        cs: num(9)?,
                        cs_ad: num(10)?,
                        cs_derivative: if cell(11).is_empty() { None } else { Some(num(11)?) },
                        profit: num(12)?,
                        adv_utility: num(13)?,
                        mi_bits: num(14)?,
                        boundary_flag: parse_flag(cell(15), "boundary_flag")?,
                        limit_flag: parse_flag(cell(16), "limit_flag")?,
                        corner_flag: parse_flag(cell(17), "corner_flag")?,
                    })
                }
            };
            rows.push(SweepRow { q, epsilon, entry });
        }
        Ok(SweepTable { rows })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(Error::io(path))?;
        Self::read_from(std::io::BufReader::new(f))
    }
}

/// Every kind at every q, whether or not its conditions hold.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CandidateTable {
    pub rows: Vec<Candidate>,
}

impl CandidateTable {
    pub fn write_to<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(CANDIDATE_HEADER)?;
        for c in &self.rows {
            let p = &c.point;
            out.write_record([
                fmt12(p.q),
                p.kind.label().into(),
                flag(c.holds).into(),
                fmt12(p.price),
                fmt12(p.cutoff),
                fmt12(p.posteriors.r1),
                fmt12(p.posteriors.r0),
                flag(p.boundary_flag).into(),
            ])?;
        }
        out.flush().map_err(Error::io("<csv>"))?;
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(Error::io(path))?;
        self.write_to(std::io::BufWriter::new(f))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digits() {
        assert_eq!(fmt12(0.5), "0.5");
        assert_eq!(fmt12(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt12(-2.0 / 3.0), "-0.666666666667");
        assert_eq!(fmt12(1e-20), "0.00000000000000000001");
        assert_eq!(fmt12(0.0), "0");
    }

    #[test]
    fn round_trip_with_none_rows() {
        let e = Entry {
            kind: EquilibriumKind::Discriminatory,
            price: 0.9,
            cutoff: 0.1,
            r1: 0.6,
            r0: 0.2,
            posterior_gap: 0.4,
            cs: 0.5,
            cs_ad: 0.3,
            cs_derivative: Some(-0.1),
            profit: 0.81,
            adv_utility: 0.55,
            mi_bits: 0.02,
            boundary_flag: false,
            limit_flag: false,
            corner_flag: false,
        };
        let t = SweepTable {
            rows: vec![
                SweepRow {
                    q: 0.9,
                    epsilon: epsilon_from_q(0.9).unwrap(),
                    entry: Some(e),
                },
                SweepRow {
                    q: 0.95,
                    epsilon: epsilon_from_q(0.95).unwrap(),
                    entry: None,
                },
                SweepRow {
                    q: 1.0,
                    epsilon: Epsilon::Infinite,
                    entry: Some(Entry {
                        cs_derivative: None,
                        limit_flag: true,
                        ..e
                    }),
                },
            ],
        };
        let mut buf = Vec::new();
        t.write_to(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.contains("0.95,2.94443897917,0,none,,,"), "{text}");
        assert!(text.contains("\n1,36,1,discriminatory,"));
        let back = SweepTable::read_from(&buf[..]).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn rejects_foreign_header() {
        assert!(matches!(SweepTable::read_from("a,b\n1,2\n".as_bytes()), Err(Error::Format(_))));
    }
}
