//! Coordinates on spectral data: `τₙ`, the modified norming constants `rₙ`,
//! trace sums and recovery of the boundary parameter.

use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::solutions::Boundary;
use crate::specfun::{alpha, e_n, lambda0, s0, Parity};
use crate::spectrum::{SpectralData, Spectrum};
pub use crate::spectrum::TailModel;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// How far past the data the modelled tail is summed term by term, in units of `N`.
pub const TAIL_FACTOR: usize = 64;

impl TailModel {
    /// Tail `μₘ ≈ A / √(m + a)` written as `(A, a)`.
    pub fn amplitude(&self) -> (f64, f64) {
        match self.b {
            None => (self.v, 0.75),
            Some(b) => (self.v + 2.0 * b / PI, 0.25),
        }
    }

    /// Estimate the tail from data: `μₙ √(n + a)` averaged over the last quarter.
    pub fn fitted(mu: &[f64], boundary: Boundary) -> Self {
        let a = if boundary.b().is_some() { 0.25 } else { 0.75 };
        let start = mu.len() - (mu.len() / 4).max(1);
        let amp = mu[start..].iter().enumerate().map(|(i, m)| m * ((start + i) as f64 + a).sqrt()).sum::<f64>()
            / (mu.len() - start) as f64;
        match boundary {
            Boundary::Dirichlet => TailModel { v: amp, b: None },
            Boundary::Robin { b } => TailModel { v: amp - 2.0 * b / PI, b: Some(b) },
        }
    }
}

/// `Σ_{m≥0} μₘ / (2(n-m) + shift)` with data for `m < N`, the model tail up to
/// `TAIL_FACTOR·N` and an integral remainder beyond.
pub fn kernel_sum(mu: &[f64], n: usize, shift: i64, tail: &TailModel) -> f64 {
    let len = mu.len();
    let den = |m: usize| (2 * (n as i64 - m as i64) + shift) as f64;
    let mut s: f64 = mu.iter().enumerate().map(|(m, v)| v / den(m)).sum();
    let (amp, a) = tail.amplitude();
    if amp == 0.0 {
        return s;
    }
    let big = (TAIL_FACTOR * len.max(1)).max(n + 16);
    for m in len..big {
        s += amp / (m as f64 + a).sqrt() / den(m);
    }
    // ∫_{big-1/2}^∞ A (m+a)^{-1/2} / (-2 (m - c)) dm with c = n + shift/2
    let k2 = a + n as f64 + 0.5 * shift as f64;
    let u = (big as f64 - 0.5 + a).sqrt();
    let rest = if k2 > 0.0 {
        let k = k2.sqrt();
        ((u + k) / (u - k)).ln() / (2.0 * k)
    } else if k2 < 0.0 {
        let k = (-k2).sqrt();
        (0.5 * PI - (u / k).atan()) / k
    } else {
        1.0 / u
    };
    s - amp * rest
}

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::input(format!("sequence lengths differ ({a} vs {b})")));
    }
    if a == 0 {
        return Err(Error::input("empty spectral sequence"));
    }
    Ok(())
}

fn boundary_term(n: usize, q0: f64, parity: Parity) -> f64 {
    match parity {
        Parity::Odd => q0 / (4.0 * (2 * n + 1) as f64),
        Parity::Even => -q0 / (4.0 * (2.0 * n as f64 - 1.0)),
    }
}

fn shift_of(parity: Parity) -> i64 {
    match parity {
        Parity::Odd => 1,
        Parity::Even => -1,
    }
}

fn r_generic(mu: &[f64], q0: f64, s: &[f64], tail: &TailModel, parity: Parity) -> Result<Vec<f64>> {
    check_lengths(mu.len(), s.len())?;
    Ok((0..mu.len())
        .map(|n| {
            s[n] - s0(n, parity)
                - alpha(n, parity) * mu[n]
                - boundary_term(n, q0, parity)
                - 0.5 * kernel_sum(mu, n, shift_of(parity), tail)
        })
        .collect())
}

fn s_generic(mu: &[f64], q0: f64, r: &[f64], tail: &TailModel, parity: Parity) -> Result<Vec<f64>> {
    check_lengths(mu.len(), r.len())?;
    Ok((0..mu.len())
        .map(|n| {
            s0(n, parity)
                + alpha(n, parity) * mu[n]
                + boundary_term(n, q0, parity)
                + 0.5 * kernel_sum(mu, n, shift_of(parity), tail)
                + r[n]
        })
        .collect())
}

/// Modified norming constants `r₂ₙ₊₁` of a Dirichlet data set.
pub fn r_dirichlet(mu: &[f64], q0: f64, s: &[f64], tail: &TailModel) -> Result<Vec<f64>> {
    r_generic(mu, q0, s, tail, Parity::Odd)
}

/// Modified norming constants `r₂ₙ` of a Robin data set; `q0b = q(0) - 2b²`.
pub fn r_robin(mu: &[f64], q0b: f64, s: &[f64], tail: &TailModel) -> Result<Vec<f64>> {
    r_generic(mu, q0b, s, tail, Parity::Even)
}

/// Inverse of [`r_dirichlet`]: norming constants from `(μ, q(0), r)`.
pub fn s_dirichlet(mu: &[f64], q0: f64, r: &[f64], tail: &TailModel) -> Result<Vec<f64>> {
    s_generic(mu, q0, r, tail, Parity::Odd)
}

/// Inverse of [`r_robin`].
pub fn s_robin(mu: &[f64], q0b: f64, r: &[f64], tail: &TailModel) -> Result<Vec<f64>> {
    s_generic(mu, q0b, r, tail, Parity::Even)
}

/// Fill the `r` entries of a data set in place.
pub fn fill_r(data: &mut SpectralData) -> Result<()> {
    let mu = data.mus();
    let s = data.norming();
    let q0 = data.boundary_datum().ok_or_else(|| Error::input("missing boundary datum"))?;
    let r = match data.boundary {
        Boundary::Dirichlet => r_dirichlet(&mu, q0, &s, &data.truncation.tail)?,
        Boundary::Robin { .. } => r_robin(&mu, q0, &s, &data.truncation.tail)?,
    };
    for (e, r) in data.entries.iter_mut().zip(r) {
        e.r = r;
    }
    Ok(())
}

/// The coordinates of one data set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoordinateSet {
    pub mu: Vec<f64>,
    /// `τₙ = μ₂ₙ - μ₂ₙ₊₁`, present when both spectra are known.
    pub tau: Option<Vec<f64>>,
    pub r: Vec<f64>,
    pub v: f64,
    pub q0: f64,
}

impl CoordinateSet {
    pub fn from_data(data: &SpectralData) -> Result<Self> {
        let mut d = data.clone();
        fill_r(&mut d)?;
        Ok(CoordinateSet {
            mu: d.mus(),
            tau: None,
            r: d.entries.iter().map(|e| e.r).collect(),
            v: d.truncation.tail.v,
            q0: d.boundary_datum().unwrap_or(0.0),
        })
    }

    /// Partial sums `Σ_{n<k} (1+n)^{3/2} rₙ²`.
    pub fn weighted_partial_sums(&self) -> Vec<f64> {
        self.r
            .iter()
            .enumerate()
            .scan(0.0, |acc, (n, r)| {
                *acc += (1.0 + n as f64).powf(1.5) * r * r;
                Some(*acc)
            })
            .collect()
    }
}

/// `τₙ = μ₂ₙ - μ₂ₙ₊₁`.
pub fn tau(mu_even: &[f64], mu_odd: &[f64]) -> Result<Vec<f64>> {
    check_lengths(mu_even.len(), mu_odd.len())?;
    Ok(mu_even.iter().zip(mu_odd).map(|(a, b)| a - b).collect())
}

/// `q(0) ≈ 2 Σ τₙ` with the modelled tail `v/√(n+1/4) - v/√(n+3/4)`.
pub fn q0_from_tau(tau: &[f64], tail: &TailModel) -> f64 {
    let len = tau.len();
    let mut s: f64 = tau.iter().sum();
    let v = tail.v;
    if v != 0.0 {
        let big = TAIL_FACTOR * len.max(1);
        for m in len..big {
            let x = m as f64;
            s += v * (1.0 / (x + 0.25).sqrt() - 1.0 / (x + 0.75).sqrt());
        }
        let x = big as f64 - 0.5;
        s += 2.0 * v * ((x + 0.75).sqrt() - (x + 0.25).sqrt());
    }
    2.0 * s
}

/// Minimal number of Robin modes accepted by [`recover_b`].
pub const RECOVER_B_MIN_MODES: usize = 8;

/// Terms `(-1)ⁿ e^{-s₂ₙ} / ẇ_N(λ₂ₙ) - 2 Eₙ/√π` whose sum is `-b`.
pub fn b_terms(data: &SpectralData) -> Result<Vec<f64>> {
    if data.boundary.b().is_none() {
        return Err(Error::input("boundary parameter recovery needs a Robin data set"));
    }
    data.entries
        .iter()
        .map(|e| {
            let w = e.ws_dot.ok_or_else(|| Error::input(format!("entry {} lacks ws_dot", e.n)))?;
            let sign = if e.n % 2 == 0 { 1.0 } else { -1.0 };
            Ok(sign * (-e.s).exp() / w - 2.0 * e_n(e.n) / PI.sqrt())
        })
        .collect()
}

/// Recover `b` from a Robin data set.
///
/// Partial sums `Sₖ` of the terms are fitted by `A + c/√(k+1)` over the last quarter and
/// `b = -A`.
pub fn recover_b(data: &SpectralData) -> Result<f64> {
    if data.entries.len() < RECOVER_B_MIN_MODES {
        return Err(Error::input(format!(
            "boundary parameter recovery needs at least {RECOVER_B_MIN_MODES} modes, got {}",
            data.entries.len()
        )));
    }
    let terms = b_terms(data)?;
    let partial: Vec<f64> = terms
        .iter()
        .scan(0.0, |acc, t| {
            *acc += t;
            Some(*acc)
        })
        .collect();
    let len = partial.len();
    let start = len - len / 4;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    let cnt = (len - start) as f64;
    for (k, &y) in partial.iter().enumerate().skip(start) {
        let x = 1.0 / ((k + 1) as f64).sqrt();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let c = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    let a = (sy - c * sx) / cnt;
    Ok(-a)
}

/// Partial trace sums at `N` modes; all tend to zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceDefects {
    #[serde(rename = "N")]
    pub n: usize,
    pub dirichlet_defect: f64,
    pub neumann_defect: f64,
    pub robin_defect: f64,
}

/// Trace defects for every truncation `1..=N` from one forward solve per boundary.
pub fn trace_defects_sweep(q: &Potential, b: f64, count: usize) -> Result<Vec<TraceDefects>> {
    let defect = |boundary: Boundary| -> Result<Vec<f64>> {
        let sp = Spectrum::new(q, boundary);
        let lambdas = sp.eigenvalues(count)?;
        let mut acc = 0.0;
        Ok(lambdas
            .iter()
            .enumerate()
            .map(|(n, l)| {
                acc += l - sp.lambda0(n) - sp.first_order_shift(n);
                acc
            })
            .collect())
    };
    let d = defect(Boundary::Dirichlet)?;
    let nn = defect(Boundary::robin(0.0))?;
    let r = if b == 0.0 { nn.clone() } else { defect(Boundary::robin(b))? };
    Ok((0..count)
        .map(|i| TraceDefects {
            n: i + 1,
            dirichlet_defect: d[i],
            neumann_defect: nn[i],
            robin_defect: r[i] + 0.5 * b * b,
        })
        .collect())
}

/// Trace defects at `N` modes.
pub fn trace_defects(q: &Potential, b: f64, count: usize) -> Result<TraceDefects> {
    Ok(*trace_defects_sweep(q, b, count)?.last().expect("count ≥ 1"))
}

/// Membership test for admissible eigenvalue sequences: `λ⁰ₙ + μₙ` strictly increasing.
pub fn is_admissible(mu: &[f64], parity: Parity) -> bool {
    mu.windows(2).enumerate().all(|(n, w)| lambda0(n, parity) + w[0] < lambda0(n + 1, parity) + w[1])
        && mu.iter().all(|m| m.is_finite())
}
