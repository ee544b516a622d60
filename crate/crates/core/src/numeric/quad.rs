use alloc::vec::Vec;

use crate::{Error, Result};

// Gauss-Kronrod 7/15 abscissae on [-1, 1] (non-negative half, descending).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss 7-point weights at XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            abs_tol: 1e-11,
            rel_tol: 1e-13,
            max_intervals: 4000,
        }
    }
}

impl QuadConfig {
    /// Same rule with every tolerance tightened by `factor`.
    pub fn tightened(self, factor: f64) -> Self {
        QuadConfig {
            abs_tol: self.abs_tol / factor,
            rel_tol: self.rel_tol / factor,
            max_intervals: self.max_intervals * 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

#[derive(Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Piece {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = h * x;
        let pair = f(c - dx) + f(c + dx);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Piece {
        a,
        b,
        value: kronrod * h,
        error: ((kronrod - gauss) * h).abs(),
    }
}

/// Globally adaptive Gauss-Kronrod integration of `f` over `[a, b]`, with the
/// interval pre-split at `breaks` (points outside `(a, b)` are ignored).
/// The piece with the largest error estimate is bisected until the summed
/// estimate meets `max(abs_tol, rel_tol * |value|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64], cfg: QuadConfig) -> Result<Integral> {
    if !(a < b) {
        return Ok(Integral { value: 0.0, error: 0.0 });
    }
    let mut cuts: Vec<f64> = Vec::with_capacity(breaks.len() + 2);
    cuts.push(a);
    cuts.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    cuts.push(b);
    cuts.sort_by(|x, y| x.total_cmp(y));
    cuts.dedup();

    let mut pieces: Vec<Piece> = cuts.windows(2).map(|w| gk15(&f, w[0], w[1])).collect();
    loop {
        let value: f64 = pieces.iter().map(|p| p.value).sum();
        let error: f64 = pieces.iter().map(|p| p.error).sum();
        if error <= cfg.abs_tol.max(cfg.rel_tol * value.abs()) {
            return Ok(Integral { value, error });
        }
        let (worst, _) = pieces
            .iter()
            .enumerate()
            .filter(|(_, p)| {
                let m = 0.5 * (p.a + p.b);
                m > p.a && m < p.b
            })
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .ok_or(Error::QuadratureDiverged { a, b, error })?;
        if pieces.len() >= cfg.max_intervals {
            return Err(Error::QuadratureDiverged { a, b, error });
        }
        let p = pieces[worst];
        let m = 0.5 * (p.a + p.b);
        pieces[worst] = gk15(&f, p.a, m);
        pieces.push(gk15(&f, m, p.b));
    }
}
