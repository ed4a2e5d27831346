//! Isospectral flows shifting a single norming constant.

use crate::error::{Error, Result};
use crate::potential::{Potential, GRID_DECAY_TOL};
use crate::solutions::{Boundary, SolverConfig};
use crate::spectrum::Spectrum;
use serde::Serialize;

/// Default grid spacing of transformed potentials built from non-grid input.
pub const FLOW_GRID_H: f64 = 1.0 / 200.0;

#[derive(Clone, Debug, Serialize)]
pub struct FlowResult {
    #[serde(skip)]
    pub q_new: Potential,
    pub boundary: Boundary,
    #[serde(with = "crate::io::num17_opt")]
    pub b_new: Option<f64>,
    pub n: usize,
    #[serde(with = "crate::io::num17")]
    pub t: f64,
    #[serde(with = "crate::io::num17")]
    pub eta_min: f64,
    #[serde(with = "crate::io::num17")]
    pub eta_max: f64,
}

/// `q - 2 (log η)″` with `η = 1 + (eᵗ - 1) ∫ₓ^∞ ψₙ²`, where `ψₙ` is the `n`-th Dirichlet eigenfunction.
pub fn dirichlet_flow(q: &Potential, n: usize, t: f64) -> Result<FlowResult> {
    flow(q, Boundary::Dirichlet, n, t)
}

/// Robin analogue: `ψₙ` under `ψ'(0) = bψ(0)`, and `b ↦ b + (1 - e^{-t}) ψₙ(0)²`.
pub fn robin_flow(q: &Potential, b: f64, n: usize, t: f64) -> Result<FlowResult> {
    flow(q, Boundary::robin(b), n, t)
}

fn flow(q: &Potential, boundary: Boundary, n: usize, t: f64) -> Result<FlowResult> {
    if !t.is_finite() {
        return Err(Error::input(format!("flow parameter must be finite, got {t}")));
    }
    let (h, grid_len) = match q {
        Potential::Grid(g) => (g.h(), g.samples().len()),
        _ => (FLOW_GRID_H, 0),
    };
    let cfg = SolverConfig { table_h: h, ..SolverConfig::default() };
    let sp = Spectrum::with_config(q, boundary, cfg);
    let ef = sp.eigenfunction(n)?;
    let psi = &ef.psi;
    let c = t.exp_m1();

    let mut samples = Vec::with_capacity(psi.len().max(grid_len));
    let (mut eta_min, mut eta_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..psi.len() {
        let (p, dp) = (psi.y[i], psi.dy[i]);
        let eta = 1.0 + c * ef.tail[i];
        let d1 = -c * p * p;
        let d2 = -2.0 * c * p * dp;
        let ll = d2 / eta - (d1 / eta).powi(2);
        eta_min = eta_min.min(eta);
        eta_max = eta_max.max(eta);
        samples.push(q.eval(psi.x(i)) - 2.0 * ll);
    }
    // beyond the table ψ is negligible and q is left as it is
    let mut i = samples.len();
    while i < grid_len || samples.last().is_some_and(|v| v.abs() > GRID_DECAY_TOL) {
        samples.push(q.eval(i as f64 * h));
        i += 1;
        if i > 100_000_000 {
            return Err(Error::Range("transformed potential does not decay".into()));
        }
    }
    let q_new = Potential::grid(h, samples)?;
    let b_new = boundary.b().map(|b| b - (-t).exp_m1() * psi.y[0].powi(2));
    Ok(FlowResult { q_new, boundary, b_new, n, t, eta_min, eta_max })
}

impl FlowResult {
    /// Boundary condition of the transformed problem.
    pub fn new_boundary(&self) -> Boundary {
        match self.b_new {
            Some(b) => Boundary::robin(b),
            None => Boundary::Dirichlet,
        }
    }
}
