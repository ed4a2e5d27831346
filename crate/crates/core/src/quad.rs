//! Quadrature: adaptive Gauss–Kronrod, composite Gauss–Legendre and
//! derivative-corrected rules on uniform tables.

#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};
use std::collections::BinaryHeap;


const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let d = h * XGK[j];
        let s = f(c - d) + f(c + d);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Globally adaptive Gauss–Kronrod (7, 15) quadrature over `[a, b]`.
///
/// The interval is first split into `initial` equal pieces, which helps
/// with oscillatory integrands. Returns the value and the error estimate.
pub fn gauss_kronrod(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    abs_tol: f64,
    initial: usize,
) -> Result<(f64, f64)> {
    let initial = initial.max(1);
    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut err = 0.0;
    for i in 0..initial {
        let lo = a + (b - a) * i as f64 / initial as f64;
        let hi = a + (b - a) * (i + 1) as f64 / initial as f64;
        let (v, e) = gk15(f, lo, hi);
        total += v;
        err += e;
        heap.push(Piece { a: lo, b: hi, value: v, err: e });
    }
    let mut iterations = 0;
    while err > abs_tol {
        iterations += 1;
        if iterations > 20_000 {
            return Err(Error::Convergence(format!(
                "quadrature error estimate {err:e} above tolerance {abs_tol:e}"
            )));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        let (v1, e1) = gk15(f, worst.a, mid);
        let (v2, e2) = gk15(f, mid, worst.b);
        total += v1 + v2 - worst.value;
        err += e1 + e2 - worst.err;
        heap.push(Piece { a: worst.a, b: mid, value: v1, err: e1 });
        heap.push(Piece { a: mid, b: worst.b, value: v2, err: e2 });
        if iterations % 64 == 0 {
            // resum to shed accumulated rounding
            total = heap.iter().map(|p| p.value).sum();
            err = heap.iter().map(|p| p.err).sum();
        }
    }
    Ok((total, err))
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Flattened composite rule: nodes and weights over a union of panels.
#[derive(Clone, Debug)]
pub struct CompositeRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl CompositeRule {
    /// `panels` equal panels on `[a, b]`, each with an `order`-point Gauss–Legendre rule.
    pub fn gauss_legendre(a: f64, b: f64, panels: usize, order: usize) -> Self {
        let (gx, gw) = gauss_legendre(order);
        let width = (b - a) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let c = a + (p as f64 + 0.5) * width;
            for (xi, wi) in gx.iter().zip(&gw) {
                nodes.push(c + 0.5 * width * xi);
                weights.push(0.5 * width * wi);
            }
        }
        CompositeRule { nodes, weights }
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.iter().map(|(x, w)| w * f(x)).sum()
    }
}

/// Integral over a uniform table from values and first derivatives
/// (trapezoid with endpoint derivative correction, fourth order).
pub fn table_integral(h: f64, f: &[f64], df: &[f64]) -> f64 {
    let n = f.len();
    if n < 2 {
        return 0.0;
    }
    let mut s = 0.5 * (f[0] + f[n - 1]);
    s += f[1..n - 1].iter().sum::<f64>();
    h * s + h * h / 12.0 * (df[0] - df[n - 1])
}

/// Running integrals `∫_{x_i}^{x_end} f` on a uniform table, using the cubic
/// Hermite interpolant on each cell.
pub fn table_tail_integrals(h: f64, f: &[f64], df: &[f64]) -> Vec<f64> {
    let n = f.len();
    let mut out = vec![0.0; n];
    for i in (0..n.saturating_sub(1)).rev() {
        let cell = 0.5 * h * (f[i] + f[i + 1]) + h * h / 12.0 * (df[i] - df[i + 1]);
        out[i] = out[i + 1] + cell;
    }
    out
}
