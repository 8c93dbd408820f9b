//! Adaptive Gauss–Kronrod (7/15) quadrature on finite intervals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{QfaError, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
    /// Evaluate even-integer norms of Gaussian mixtures through their exact
    /// moment expansion instead of quadrature.
    pub exact_even_moments: bool,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-7,
            abs_tol: 1e-300,
            max_intervals: 400_000,
            exact_even_moments: true,
        }
    }
}

impl QuadratureSettings {
    /// Same settings with every norm going through quadrature.
    pub fn quadrature_only(self) -> Self {
        Self { exact_even_moments: false, ..self }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

fn gk15(f: &impl Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    let c = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

struct Piece {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// `∫ f` over `[breaks[0], breaks[last]]`, starting from the given
/// subdivision and bisecting the worst piece until the error estimate
/// meets the tolerance.
pub fn integrate(f: impl Fn(f64) -> f64, breaks: &[f64], settings: &QuadratureSettings) -> Result<Integral> {
    assert!(breaks.len() >= 2, "need at least one interval");
    let mut heap = BinaryHeap::new();
    let (mut total, mut err) = (0.0, 0.0);
    for w in breaks.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let (value, error) = gk15(&f, w[0], w[1]);
        total += value;
        err += error;
        heap.push(Piece { lo: w[0], hi: w[1], value, error });
    }
    loop {
        let target = (settings.rel_tol * total.abs()).max(settings.abs_tol);
        if err <= target {
            return Ok(Integral { value: total, error: err, intervals: heap.len() });
        }
        let worst = heap.pop().expect("nonempty");
        let mid = 0.5 * (worst.lo + worst.hi);
        if heap.len() + 2 > settings.max_intervals || mid <= worst.lo || mid >= worst.hi {
            return Err(QfaError::QuadratureBudget { lo: worst.lo, hi: worst.hi, error: err });
        }
        let (v1, e1) = gk15(&f, worst.lo, mid);
        let (v2, e2) = gk15(&f, mid, worst.hi);
        total += v1 + v2 - worst.value;
        err += e1 + e2 - worst.error;
        heap.push(Piece { lo: worst.lo, hi: mid, value: v1, error: e1 });
        heap.push(Piece { lo: mid, hi: worst.hi, value: v2, error: e2 });
    }
}
