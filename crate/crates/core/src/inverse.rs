//! Reconstruction of `q` (and `b`) from truncated spectral data.

use crate::coords::{fill_r, r_dirichlet, r_robin, TailModel};
use crate::darboux::{dirichlet_flow, robin_flow};
use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::solutions::Boundary;
use crate::specfun::scaled_hermite_into;
use crate::spectrum::{SpectralData, Spectrum};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

/// `(μ, q(0), r)` for Dirichlet or `(μ, q(0) - 2b², r)` for Robin, with `N` modes.
pub fn forward_map(q: &Potential, boundary: Boundary, count: usize) -> Result<SpectralData> {
    let mut data = Spectrum::new(q, boundary).spectral_data(count)?;
    fill_r(&mut data)?;
    Ok(data)
}

#[derive(Clone, Debug, PartialEq)]
pub struct InverseConfig {
    pub max_iter: usize,
    /// Initial step fraction of the Gauss–Newton update.
    pub damping: f64,
    /// Target for the weighted residual norm.
    pub tol: f64,
    /// Number of Hermite coefficients; `N + ⌈N/2⌉` when `None`.
    pub k: Option<usize>,
    /// Exponent `p` of the row weights `(1+n)^p`.
    pub weight_exponent: f64,
    /// Set the `r` coordinates exactly with Darboux flows after the fit.
    pub polish: bool,
}

impl Default for InverseConfig {
    fn default() -> Self {
        InverseConfig { max_iter: 25, damping: 1.0, tol: 1e-7, k: None, weight_exponent: 0.75, polish: true }
    }
}

#[derive(Clone, Debug)]
pub struct InverseProblem {
    pub target: SpectralData,
    pub config: InverseConfig,
}

#[derive(Clone, Debug, Serialize)]
pub struct Reconstruction {
    #[serde(skip)]
    pub q: Potential,
    /// Hermite coefficients of the fitted potential (before any Darboux polish).
    #[serde(with = "crate::io::num17_vec")]
    pub coeffs: Vec<f64>,
    #[serde(with = "crate::io::num17_opt")]
    pub b: Option<f64>,
    #[serde(with = "crate::io::num17_vec")]
    pub residual_history: Vec<f64>,
    pub iterations: usize,
    pub polished: bool,
    pub converged: bool,
}

/// Current iterate of the unknowns.
#[derive(Clone, Debug)]
struct Iterate {
    c: Vec<f64>,
    b: Option<f64>,
}

impl Iterate {
    fn potential(&self) -> Result<Potential> {
        if self.c.iter().all(|v| *v == 0.0) {
            return Ok(Potential::zero());
        }
        Potential::hermite(self.c.clone())
    }

    fn to_vector(&self) -> DVector<f64> {
        DVector::from_iterator(self.c.len() + self.b.is_some() as usize, self.c.iter().copied().chain(self.b))
    }

    fn from_vector(v: &DVector<f64>, k: usize, robin: bool) -> Self {
        Iterate { c: v.as_slice()[..k].to_vec(), b: robin.then(|| v[k]) }
    }
}

/// Data-side quantities compared during the fit.
struct Fitter<'a> {
    target: &'a SpectralData,
    tail: TailModel,
    weights: Vec<f64>,
    k: usize,
    robin: bool,
}

/// Values of the data map and, optionally, its Jacobian in `(c, b)`.
struct Evaluation {
    residual: DVector<f64>,
    jacobian: Option<DMatrix<f64>>,
}

impl<'a> Fitter<'a> {
    fn new(target: &'a SpectralData, cfg: &InverseConfig) -> Result<Self> {
        target.validate()?;
        let n = target.n;
        let k = cfg.k.unwrap_or(n + n.div_ceil(2));
        if k == 0 {
            return Err(Error::input("need at least one Hermite coefficient"));
        }
        let robin = matches!(target.boundary, Boundary::Robin { .. });
        // only the tail amplitude of the target is used, never its boundary parameter
        let (amp, _) = target.truncation.tail.amplitude();
        let tail = if robin { TailModel { v: amp, b: Some(0.0) } } else { TailModel { v: amp, b: None } };
        let weights = (0..n).map(|i| (1.0 + i as f64).powf(cfg.weight_exponent)).collect();
        Ok(Fitter { target, tail, weights, k, robin })
    }

    fn r_of(&self, mu: &[f64], datum: f64, s: &[f64]) -> Result<Vec<f64>> {
        if self.robin {
            r_robin(mu, datum, s, &self.tail)
        } else {
            r_dirichlet(mu, datum, s, &self.tail)
        }
    }

    fn rows(&self) -> usize {
        2 * self.target.n + 1
    }

    fn unknowns(&self) -> usize {
        self.k + self.robin as usize
    }

    fn target_vector(&self) -> Result<Vec<f64>> {
        let t = self.target;
        let mu = t.mus();
        let datum = t.boundary_datum().unwrap_or(0.0);
        let r = self.r_of(&mu, datum, &t.norming())?;
        Ok(self.stack(&mu, datum, &r))
    }

    fn stack(&self, mu: &[f64], datum: f64, r: &[f64]) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.rows());
        v.extend(mu.iter().zip(&self.weights).map(|(m, w)| m * w));
        v.push(datum);
        v.extend(r.iter().zip(&self.weights).map(|(r, w)| r * w));
        v
    }

    fn evaluate(&self, it: &Iterate, with_jacobian: bool) -> Result<Evaluation> {
        let q = it.potential()?;
        self.evaluate_potential(&q, it.b, with_jacobian)
    }

    fn evaluate_potential(&self, q: &Potential, b: Option<f64>, with_jacobian: bool) -> Result<Evaluation> {
        let n = self.target.n;
        let boundary = match b {
            Some(b) => Boundary::robin(b),
            None => Boundary::Dirichlet,
        };
        let sp = Spectrum::new(q, boundary);
        let lambdas = sp.eigenvalues(n)?;
        let rows: Vec<ModeRow> =
            lambdas.par_iter().enumerate().map(|(i, &l)| mode_row(&sp, i, l, self.k, with_jacobian)).collect::<Result<_>>()?;
        let mu: Vec<f64> = rows.iter().map(|r| r.mu).collect();
        let s: Vec<f64> = rows.iter().map(|r| r.s).collect();
        let bb = b.unwrap_or(0.0);
        let datum = q.q_at_zero() - 2.0 * bb * bb;
        let r = self.r_of(&mu, datum, &s)?;
        let value = self.stack(&mu, datum, &r);
        let target = self.target_vector()?;
        let residual = DVector::from_iterator(value.len(), value.iter().zip(&target).map(|(a, b)| a - b));
        let jacobian = if with_jacobian { Some(self.jacobian(&rows, b)?) } else { None };
        Ok(Evaluation { residual, jacobian })
    }

    /// Chain `(dμ, d datum, ds)` through the affine map to `r`.
    fn jacobian(&self, rows: &[ModeRow], b: Option<f64>) -> Result<DMatrix<f64>> {
        let n = self.target.n;
        let cols = self.unknowns();
        let mut dmu = vec![vec![0.0; cols]; n];
        let mut ds = vec![vec![0.0; cols]; n];
        let mut ddatum = vec![0.0; cols];
        let mut basis0 = vec![0.0; 2 * self.k];
        scaled_hermite_into(0.0, &mut basis0);
        for j in 0..self.k {
            ddatum[j] = basis0[2 * j];
        }
        for (i, row) in rows.iter().enumerate() {
            dmu[i][..self.k].copy_from_slice(&row.dmu);
            ds[i][..self.k].copy_from_slice(&row.ds);
            if self.robin {
                dmu[i][self.k] = row.psi0 * row.psi0;
                ds[i][self.k] = row.psi0 * row.chi0;
            }
        }
        if let Some(b) = b {
            ddatum[self.k] = -4.0 * b;
        }
        // r is affine in (μ, datum, s) with the tail held fixed
        let zero = vec![0.0; n];
        let r_offset = self.r_of(&zero, 0.0, &zero)?;
        let mut jac = DMatrix::zeros(self.rows(), cols);
        for c in 0..cols {
            let mu_c: Vec<f64> = dmu.iter().map(|r| r[c]).collect();
            let s_c: Vec<f64> = ds.iter().map(|r| r[c]).collect();
            let r_c = self.r_of(&mu_c, ddatum[c], &s_c)?;
            let col = self.stack(&mu_c, ddatum[c], &r_c.iter().zip(&r_offset).map(|(a, b)| a - b).collect::<Vec<_>>());
            for (i, v) in col.into_iter().enumerate() {
                jac[(i, c)] = v;
            }
        }
        Ok(jac)
    }
}

/// One mode's data and its gradients in the Hermite coefficients.
struct ModeRow {
    mu: f64,
    s: f64,
    dmu: Vec<f64>,
    ds: Vec<f64>,
    psi0: f64,
    chi0: f64,
}

fn mode_row(sp: &Spectrum<'_>, n: usize, lambda: f64, k: usize, with_gradient: bool) -> Result<ModeRow> {
    let d = sp.datum(n, lambda)?;
    let mut row = ModeRow { mu: d.mu, s: d.s, dmu: vec![0.0; k], ds: vec![0.0; k], psi0: 0.0, chi0: 0.0 };
    if !with_gradient {
        return Ok(row);
    }
    let ef = crate::spectrum::Eigenfunction::build(sp, n, lambda)?;
    let chi = ef.chi(sp)?;
    let len = ef.psi.len().min(chi.len());
    let h = ef.psi.h;
    let mut buf = vec![0.0; 2 * k];
    for i in 0..len {
        let w = simpson_weight(i, len) * h;
        if w == 0.0 {
            continue;
        }
        scaled_hermite_into(ef.psi.x(i), &mut buf);
        let p = ef.psi.y[i];
        let (pp, pc) = (p * p, p * chi.y[i]);
        for j in 0..k {
            row.dmu[j] += w * buf[2 * j] * pp;
            row.ds[j] += w * buf[2 * j] * pc;
        }
    }
    row.psi0 = ef.psi.y[0];
    row.chi0 = chi.y[0];
    Ok(row)
}

/// Composite Simpson weights over the largest odd prefix; the last interval, if any, by the trapezoid rule.
fn simpson_weight(i: usize, len: usize) -> f64 {
    let odd_len = if len % 2 == 1 { len } else { len - 1 };
    let mut w = if i >= odd_len {
        0.0
    } else if i == 0 || i == odd_len - 1 {
        1.0 / 3.0
    } else if i % 2 == 1 {
        4.0 / 3.0
    } else {
        2.0 / 3.0
    };
    if odd_len < len && i + 2 >= len {
        w += 0.5;
    }
    w
}

fn solve_least_squares(jac: &DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    jac.clone()
        .svd(true, true)
        .solve(rhs, 1e-12)
        .map_err(|e| Error::Convergence(format!("least-squares solve failed: {e}")))
}

/// Fit `q` (and `b`) to the target data.
pub fn reconstruct(problem: &InverseProblem) -> Result<Reconstruction> {
    let cfg = &problem.config;
    let fitter = Fitter::new(&problem.target, cfg)?;
    if !crate::coords::is_admissible(&problem.target.mus(), problem.target.boundary.parity()) {
        return Err(Error::input("target eigenvalues are not admissible"));
    }
    let k = fitter.k;
    let zero = Iterate { c: vec![0.0; k], b: fitter.robin.then_some(0.0) };

    // linearisation at the free problem
    let at_zero = fitter.evaluate(&zero, true)?;
    let step = solve_least_squares(at_zero.jacobian.as_ref().unwrap(), &(-&at_zero.residual))?;
    let mut x = Iterate::from_vector(&(zero.to_vector() + step), k, fitter.robin);

    let mut eval = fitter.evaluate(&x, true)?;
    let mut history = vec![at_zero.residual.norm(), eval.residual.norm()];
    if history[0] <= history[1] {
        x = zero;
        eval = at_zero;
        history.pop();
    }
    let mut iterations = 0;
    let mut damping = cfg.damping;
    while eval.residual.norm() > cfg.tol && iterations < cfg.max_iter {
        iterations += 1;
        let jac = eval.jacobian.as_ref().unwrap();
        let step = solve_least_squares(jac, &(-&eval.residual))?;
        let base = x.to_vector();
        let current = eval.residual.norm();
        let mut accepted = None;
        let mut t = damping;
        while t > 1e-4 {
            let trial = Iterate::from_vector(&(&base + &step * t), k, fitter.robin);
            let e = fitter.evaluate(&trial, false)?;
            if e.residual.norm() < current {
                accepted = Some(trial);
                break;
            }
            t *= 0.5;
        }
        let Some(next) = accepted else { break };
        damping = (2.0 * t).min(1.0);
        x = next;
        eval = fitter.evaluate(&x, true)?;
        history.push(eval.residual.norm());
    }
    let fitted = eval.residual.norm();
    let mut q = x.potential()?;
    let mut b = x.b;
    let mut polished = false;
    if cfg.polish && fitted <= cfg.tol.max(1e-6) {
        let (pq, pb) = polish(&fitter, q.clone(), b)?;
        let e = fitter.evaluate_potential(&pq, pb, false)?;
        if e.residual.norm() <= fitted {
            q = pq;
            b = pb;
            polished = true;
            history.push(e.residual.norm());
        }
    }
    let last = *history.last().unwrap();
    Ok(Reconstruction { q, coeffs: x.c, b, residual_history: history, iterations, polished, converged: last <= cfg.tol })
}

/// Shift each `rₙ` onto its target with a Darboux flow.
fn polish(fitter: &Fitter<'_>, mut q: Potential, mut b: Option<f64>) -> Result<(Potential, Option<f64>)> {
    let target = fitter.target_vector()?;
    let n = fitter.target.n;
    let e = fitter.evaluate_potential(&q, b, false)?;
    for m in 0..n {
        let row = n + 1 + m;
        let current = e.residual[row] + target[row];
        let t = (target[row] - current) / fitter.weights[m];
        if t.abs() < 1e-14 {
            continue;
        }
        let flow = match b {
            Some(bb) => robin_flow(&q, bb, m, t)?,
            None => dirichlet_flow(&q, m, t)?,
        };
        q = flow.q_new;
        b = flow.b_new.or(b);
    }
    Ok((q, b))
}

/// Jacobian of the weighted data map at `(q, b)` in the Hermite basis of order `k`, next to
/// central differences of [`forward_map`] for the listed columns.
pub fn jacobian_check(
    target: &SpectralData,
    coeffs: &[f64],
    b: Option<f64>,
    columns: &[usize],
    eps: f64,
) -> Result<Vec<(DVector<f64>, DVector<f64>)>> {
    let cfg = InverseConfig { k: Some(coeffs.len()), ..InverseConfig::default() };
    let fitter = Fitter::new(target, &cfg)?;
    let it = Iterate { c: coeffs.to_vec(), b };
    let jac = fitter.evaluate(&it, true)?.jacobian.unwrap();
    columns
        .iter()
        .map(|&c| {
            let mut v = it.to_vector();
            v[c] += eps;
            let plus = fitter.evaluate(&Iterate::from_vector(&v, coeffs.len(), b.is_some()), false)?.residual;
            v[c] -= 2.0 * eps;
            let minus = fitter.evaluate(&Iterate::from_vector(&v, coeffs.len(), b.is_some()), false)?.residual;
            Ok((jac.column(c).into_owned(), (plus - minus) / (2.0 * eps)))
        })
        .collect()
}
