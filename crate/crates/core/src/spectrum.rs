//! Eigenvalues, norming constants and normalised eigenfunctions of the
//! Dirichlet and Robin problems.

use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::quad::table_integral;
use crate::solutions::{Boundary, BoundaryTrace, Shooter, SolverConfig, Table};
use crate::specfun::{e_n, hermite_function, lambda0, s0, Parity};
use rayon::prelude::*;
use roots::{find_root_brent, Convergency};
use serde::{Deserialize, Serialize};

const WINDOW: f64 = 2.0 - 1e-6;

/// Parameters of the leading-order tail `μₙ ≈ 2v/√λ⁰ₙ (+ 2Eₙ b/√π)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailModel {
    /// `π⁻¹ ∫₀^∞ q`.
    #[serde(with = "crate::io::num17")]
    pub v: f64,
    #[serde(with = "crate::io::num17_opt", default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
}

impl TailModel {
    pub fn new(q: &Potential, boundary: Boundary) -> Self {
        TailModel { v: q.integral() / std::f64::consts::PI, b: boundary.b() }
    }

    /// Modelled `μₙ` for mode index `n` of the given parity.
    pub fn mu(&self, n: usize) -> f64 {
        let parity = if self.b.is_some() { Parity::Even } else { Parity::Odd };
        let mut mu = 2.0 * self.v / lambda0(n, parity).sqrt();
        if let Some(b) = self.b {
            mu += 2.0 * e_n(n) * b / std::f64::consts::PI.sqrt();
        }
        mu
    }
}

/// Spectral data of one mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralDatum {
    pub n: usize,
    #[serde(with = "crate::io::num17")]
    pub lambda: f64,
    #[serde(with = "crate::io::num17")]
    pub mu: f64,
    #[serde(with = "crate::io::num17")]
    pub s: f64,
    #[serde(with = "crate::io::num17", default)]
    pub r: f64,
    #[serde(with = "crate::io::num17_opt", default, skip_serializing_if = "Option::is_none")]
    pub ws_dot: Option<f64>,
    /// `‖ψ₊(·, λₙ)‖²₊`.
    #[serde(skip)]
    pub norm_sq_psi_plus: Option<f64>,
    /// `‖φ(·, λₙ)‖²₊` (Dirichlet) or `‖θ + bφ‖²₊` (Robin).
    #[serde(skip)]
    pub norm_sq_phi: Option<f64>,
}

/// Truncation of an infinite spectral sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    #[serde(rename = "N")]
    pub n: usize,
    pub tail: TailModel,
}

/// Finite spectral data set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralData {
    pub boundary: Boundary,
    #[serde(rename = "N")]
    pub n: usize,
    pub entries: Vec<SpectralDatum>,
    #[serde(with = "crate::io::num17_opt", default, skip_serializing_if = "Option::is_none")]
    pub q0: Option<f64>,
    #[serde(with = "crate::io::num17_opt", default, skip_serializing_if = "Option::is_none")]
    pub q0_minus_2b2: Option<f64>,
    pub truncation: Truncation,
}

impl SpectralData {
    /// Boundary datum `q(0)` (Dirichlet) or `q(0) - 2b²` (Robin).
    pub fn boundary_datum(&self) -> Option<f64> {
        match self.boundary {
            Boundary::Dirichlet => self.q0,
            Boundary::Robin { .. } => self.q0_minus_2b2,
        }
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.lambda).collect()
    }

    pub fn mus(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.mu).collect()
    }

    pub fn norming(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.s).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let d: SpectralData = serde_json::from_str(text)?;
        d.validate()?;
        Ok(d)
    }

    /// Checks indices, sizes and monotonicity.
    pub fn validate(&self) -> Result<()> {
        if self.entries.len() != self.n || self.n == 0 {
            return Err(Error::input(format!("N = {} but {} entries", self.n, self.entries.len())));
        }
        let parity = self.boundary.parity();
        for (i, e) in self.entries.iter().enumerate() {
            if e.n != i {
                return Err(Error::input(format!("entry {i} carries index {}", e.n)));
            }
            if ![e.lambda, e.mu, e.s, e.r].iter().all(|v| v.is_finite()) {
                return Err(Error::input(format!("entry {i} has non-finite values")));
            }
            if (e.lambda - lambda0(i, parity) - e.mu).abs() > 1e-8 * e.lambda.abs().max(1.0) {
                return Err(Error::input(format!("entry {i}: lambda and mu disagree")));
            }
        }
        if self.entries.windows(2).any(|w| w[1].lambda <= w[0].lambda) {
            return Err(Error::input("eigenvalues are not strictly increasing"));
        }
        if self.boundary_datum().is_none() {
            return Err(Error::input("missing boundary datum (q0 or q0_minus_2b2)"));
        }
        Ok(())
    }
}

/// Spectral solver bound to a potential and boundary condition.
#[derive(Clone, Debug)]
pub struct Spectrum<'a> {
    pub shooter: Shooter<'a>,
    pub boundary: Boundary,
}

struct XTol(f64, usize);

impl Convergency<f64> for XTol {
    fn is_root_found(&mut self, y: f64) -> bool {
        y == 0.0
    }
    fn is_converged(&mut self, x1: f64, x2: f64) -> bool {
        (x1 - x2).abs() <= self.0 * x1.abs().max(1.0)
    }
    fn is_iteration_limit_reached(&mut self, iter: usize) -> bool {
        iter >= self.1
    }
}

impl<'a> Spectrum<'a> {
    pub fn new(q: &'a Potential, boundary: Boundary) -> Self {
        Spectrum { shooter: Shooter::new(q), boundary }
    }

    pub fn with_config(q: &'a Potential, boundary: Boundary, cfg: SolverConfig) -> Self {
        Spectrum { shooter: Shooter::with_config(q, cfg), boundary }
    }

    pub fn q(&self) -> &'a Potential {
        self.shooter.q
    }

    pub fn parity(&self) -> Parity {
        self.boundary.parity()
    }

    pub fn lambda0(&self, n: usize) -> f64 {
        lambda0(n, self.parity())
    }

    /// First-order guess `2(q, (ψ⁰ₘ)²)₊ (+ 2Eₙ b/√π)` for `μₙ`.
    pub fn first_order_shift(&self, n: usize) -> f64 {
        let m = match self.parity() {
            Parity::Odd => 2 * n + 1,
            Parity::Even => 2 * n,
        };
        let q = self.q();
        let mut mu = 0.0;
        if !q.is_zero() {
            let rule = q.quadrature_rule(2.0 * (2.0 * m as f64 + 1.0).sqrt());
            mu = 2.0 * rule.integrate(|x| q.eval(x) * hermite_function(m, x).powi(2));
        }
        if let Some(b) = self.boundary.b() {
            mu += 2.0 * e_n(n) * b / std::f64::consts::PI.sqrt();
        }
        mu
    }

    fn x_start_for(&self, n: usize) -> f64 {
        self.shooter.x_start(self.lambda0(n) + 4.0)
    }

    fn zeros(&self, t: &BoundaryTrace) -> usize {
        match self.boundary {
            Boundary::Dirichlet => t.zeros,
            Boundary::Robin { .. } => t.zeros_with_origin(),
        }
    }

    fn f(&self, lambda: f64, x0: f64) -> Result<f64> {
        Ok(self.shooter.psi_plus(lambda, x0)?.wronskian_normalised(self.boundary))
    }

    fn brent(&self, a: f64, fa: f64, b: f64, fb: f64, x0: f64) -> Result<f64> {
        if fa == 0.0 {
            return Ok(a);
        }
        if fb == 0.0 {
            return Ok(b);
        }
        let mut failure = None;
        let root = find_root_brent(
            a,
            b,
            |l| {
                if (l - a).abs() < 1e-300 {
                    return fa;
                }
                if (l - b).abs() < 1e-300 {
                    return fb;
                }
                match self.f(l, x0) {
                    Ok(v) => v,
                    Err(e) => {
                        failure.get_or_insert(e);
                        f64::NAN
                    }
                }
            },
            &mut XTol(1e-15, 200),
        );
        if let Some(e) = failure {
            return Err(e);
        }
        root.map_err(|e| Error::Root(format!("{e:?} in [{a}, {b}]")))
    }

    /// Eigenvalue of mode `n` (index `2n+1` for Dirichlet, `2n` for Robin).
    pub fn eigenvalue(&self, n: usize) -> Result<f64> {
        let l0 = self.lambda0(n);
        let x0 = self.x_start_for(n);
        let lo = l0 - WINDOW;
        let hi = l0 + WINDOW;
        let seed = (l0 + self.first_order_shift(n)).clamp(lo + 1e-3, hi - 1e-3);
        let (flo, fs, fhi) = (self.f(lo, x0)?, self.f(seed, x0)?, self.f(hi, x0)?);
        let mut candidates = Vec::new();
        if flo * fs <= 0.0 {
            candidates.push((lo, flo, seed, fs));
        }
        if fs * fhi <= 0.0 {
            candidates.push((seed, fs, hi, fhi));
        }
        for (a, fa, b, fb) in candidates {
            let root = self.brent(a, fa, b, fb, x0)?;
            if self.zeros(&self.shooter.psi_plus(root, x0)?) == n {
                return Ok(root);
            }
        }
        self.widened_scan(n, x0)
    }

    fn widened_scan(&self, n: usize, x0: f64) -> Result<f64> {
        let l0 = self.lambda0(n);
        let x0 = x0.max(self.shooter.x_start(l0 + 8.0));
        let steps = 160;
        let mut prev: Option<(f64, f64)> = None;
        let mut report = Vec::new();
        for i in 0..=steps {
            let l = l0 - 4.0 + 8.0 * i as f64 / steps as f64;
            let fl = self.f(l, x0)?;
            if let Some((pl, pf)) = prev {
                if pf * fl <= 0.0 {
                    let root = self.brent(pl, pf, l, fl, x0)?;
                    let z = self.zeros(&self.shooter.psi_plus(root, x0)?);
                    if z == n {
                        return Ok(root);
                    }
                    report.push(format!("{root:.6} ({z} zeros)"));
                }
            }
            prev = Some((l, fl));
        }
        Err(Error::Root(format!(
            "no root with {n} zeros within {l0} ± 4; roots found: [{}]",
            report.join(", ")
        )))
    }

    /// First `count` eigenvalues, strictly increasing.
    pub fn eigenvalues(&self, count: usize) -> Result<Vec<f64>> {
        if count == 0 {
            return Err(Error::input("number of modes must be at least 1"));
        }
        let out: Vec<f64> = (0..count).into_par_iter().map(|n| self.eigenvalue(n)).collect::<Result<_>>()?;
        if out.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Root("computed eigenvalues are not increasing".into()));
        }
        Ok(out)
    }

    /// `s = -log|ψ₊'(0)|` (Dirichlet) or `-log|ψ₊(0)|` (Robin).
    pub fn norming_constant_at(&self, lambda: f64) -> Result<f64> {
        let t = self.shooter.trace(lambda)?;
        Ok(self.s_of(&t))
    }

    fn s_of(&self, t: &BoundaryTrace) -> f64 {
        match self.boundary {
            Boundary::Dirichlet => -t.dpsi().ln_abs(),
            Boundary::Robin { .. } => -t.psi().ln_abs(),
        }
    }

    /// Full spectral datum at a computed eigenvalue.
    pub fn datum(&self, n: usize, lambda: f64) -> Result<SpectralDatum> {
        let ef = Eigenfunction::build(self, n, lambda)?;
        let wd = self.shooter.wronskian_dot(lambda, self.boundary)?;
        let s = self.s_of(&ef.trace);
        let norm_phi = ef.norm_sq_initial(self)?;
        Ok(SpectralDatum {
            n,
            lambda,
            mu: lambda - self.lambda0(n),
            s,
            r: 0.0,
            ws_dot: Some(wd.value()),
            norm_sq_psi_plus: Some(ef.trace.norm().value()),
            norm_sq_phi: Some(norm_phi),
        })
    }

    /// Norming constants and norms at the given eigenvalues (index = position).
    pub fn norming_constants(&self, lambdas: &[f64]) -> Result<Vec<SpectralDatum>> {
        lambdas.par_iter().enumerate().map(|(n, &l)| self.datum(n, l)).collect()
    }

    /// Complete data set for the first `count` modes (with `r` left at zero).
    pub fn spectral_data(&self, count: usize) -> Result<SpectralData> {
        let lambdas = self.eigenvalues(count)?;
        let entries = self.norming_constants(&lambdas)?;
        let q0 = self.q().q_at_zero();
        let (q0, q0b) = match self.boundary {
            Boundary::Dirichlet => (Some(q0), None),
            Boundary::Robin { b } => (None, Some(q0 - 2.0 * b * b)),
        };
        Ok(SpectralData {
            boundary: self.boundary,
            n: count,
            entries,
            q0,
            q0_minus_2b2: q0b,
            truncation: Truncation { n: count, tail: TailModel::new(self.q(), self.boundary) },
        })
    }

    /// Normalised eigenfunction of mode `n`.
    pub fn eigenfunction(&self, n: usize) -> Result<Eigenfunction> {
        let lambda = self.eigenvalue(n)?;
        Eigenfunction::build(self, n, lambda)
    }

    /// Compare analytic gradients of `λₙ` and `sₙ` in direction `v` with central differences.
    pub fn gradient_check(&self, n: usize, v: &Potential, eps: f64) -> Result<GradientCheck> {
        let q = self.q();
        let mut cfg = self.shooter.cfg.clone();
        cfg.min_start = cfg.min_start.max(v.support());
        let sp = Spectrum::with_config(q, self.boundary, cfg.clone());
        let ef = sp.eigenfunction(n)?;
        let chi = ef.chi(&sp)?;
        let h = ef.psi.h;
        let len = ef.psi.len();
        let (mut f1, mut d1, mut f2, mut d2) = (vec![0.0; len], vec![0.0; len], vec![0.0; len], vec![0.0; len]);
        for i in 0..len {
            let (vv, dv) = v.eval_with_derivative(ef.psi.x(i));
            let (p, dp) = (ef.psi.y[i], ef.psi.dy[i]);
            let (c, dc) = (chi.y[i], chi.dy[i]);
            f1[i] = vv * p * p;
            d1[i] = dv * p * p + 2.0 * vv * p * dp;
            f2[i] = vv * p * c;
            d2[i] = dv * p * c + vv * (dp * c + p * dc);
        }
        let measure = |q: &Potential, b: Boundary| -> Result<(f64, f64)> {
            let sp = Spectrum::with_config(q, b, cfg.clone());
            let l = sp.eigenvalue(n)?;
            Ok((l, sp.norming_constant_at(l)?))
        };
        let qp = Potential::combination(vec![(1.0, q.clone()), (eps, v.clone())]);
        let qm = Potential::combination(vec![(1.0, q.clone()), (-eps, v.clone())]);
        let (lp, sp_) = if v.is_zero() { (0.0, 0.0) } else { measure(&qp, self.boundary)? };
        let (lm, sm) = if v.is_zero() { (0.0, 0.0) } else { measure(&qm, self.boundary)? };
        let mut out = GradientCheck {
            lambda: Comparison { analytic: table_integral(h, &f1, &d1), finite_diff: (lp - lm) / (2.0 * eps) },
            s: Comparison { analytic: table_integral(h, &f2, &d2), finite_diff: (sp_ - sm) / (2.0 * eps) },
            b_lambda: None,
            b_s: None,
        };
        if let Boundary::Robin { b } = self.boundary {
            let (lp, sp_) = measure(q, Boundary::robin(b + eps))?;
            let (lm, sm) = measure(q, Boundary::robin(b - eps))?;
            out.b_lambda = Some(Comparison { analytic: ef.psi.y[0].powi(2), finite_diff: (lp - lm) / (2.0 * eps) });
            out.b_s = Some(Comparison { analytic: ef.psi.y[0] * chi.y[0], finite_diff: (sp_ - sm) / (2.0 * eps) });
        }
        Ok(out)
    }
}

/// Analytic value next to its finite-difference estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Comparison {
    pub analytic: f64,
    pub finite_diff: f64,
}

impl Comparison {
    pub fn abs_error(&self) -> f64 {
        (self.analytic - self.finite_diff).abs()
    }
}

/// Gradient comparisons of `λₙ` and `sₙ`; the `b_*` entries are Robin derivatives in `b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradientCheck {
    pub lambda: Comparison,
    pub s: Comparison,
    pub b_lambda: Option<Comparison>,
    pub b_s: Option<Comparison>,
}

/// Normalised eigenfunction `ψₙ` on `[0, x_end]`.
#[derive(Clone, Debug)]
pub struct Eigenfunction {
    pub n: usize,
    pub lambda: f64,
    pub boundary: Boundary,
    pub psi: Table,
    /// `∫ₓ^∞ ψₙ²` at each node.
    pub tail: Vec<f64>,
    pub trace: BoundaryTrace,
}

impl Eigenfunction {
    /// Tabulate at a known eigenvalue; the sign makes `ψ'(0) > 0` (Dirichlet) or `ψ(0) > 0` (Robin).
    pub fn build(sp: &Spectrum<'_>, n: usize, lambda: f64) -> Result<Self> {
        let (mut psi, tail, trace) = sp.shooter.psi_plus_table(lambda)?;
        let sign = match sp.boundary {
            Boundary::Dirichlet => trace.dpsi0.signum(),
            Boundary::Robin { .. } => trace.psi0.signum(),
        };
        if sign < 0.0 {
            psi.y.iter_mut().for_each(|v| *v = -*v);
            psi.dy.iter_mut().for_each(|v| *v = -*v);
        }
        Ok(Eigenfunction { n, lambda, boundary: sp.boundary, psi, tail, trace })
    }

    /// `∫₀^∞ ψₙ²` recomputed from the table.
    pub fn norm_sq(&self) -> f64 {
        let f: Vec<f64> = self.psi.y.iter().map(|p| p * p).collect();
        let df: Vec<f64> = self.psi.y.iter().zip(&self.psi.dy).map(|(p, d)| 2.0 * p * d).collect();
        table_integral(self.psi.h, &f, &df) + self.tail[self.psi.len() - 1]
    }

    /// Companion solution `χₙ` with `{χₙ, ψₙ} = 1` on the same grid.
    pub fn chi(&self, sp: &Spectrum<'_>) -> Result<Table> {
        let (th, ph) = sp.shooter.theta_phi(self.lambda, self.psi.x_end())?;
        let len = self.psi.len().min(th.len());
        let mut y = Vec::with_capacity(len);
        let mut dy = Vec::with_capacity(len);
        match self.boundary {
            Boundary::Dirichlet => {
                let c = sp.shooter.log_derivative_in_lambda(self.lambda, true)?;
                let d0 = self.psi.dy[0];
                for i in 0..len {
                    y.push(th.y[i] / d0 - c * self.psi.y[i]);
                    dy.push(th.dy[i] / d0 - c * self.psi.dy[i]);
                }
            }
            Boundary::Robin { .. } => {
                let c = sp.shooter.log_derivative_in_lambda(self.lambda, false)?;
                let p0 = self.psi.y[0];
                for i in 0..len {
                    y.push(-ph.y[i] / p0 - c * self.psi.y[i]);
                    dy.push(-ph.dy[i] / p0 - c * self.psi.dy[i]);
                }
            }
        }
        Ok(Table { h: self.psi.h, y, dy })
    }

    /// `‖φ‖²₊` (Dirichlet) or `‖θ + bφ‖²₊` (Robin) by quadrature: forward solution up to
    /// just past the turning point, matched to the tail of `ψₙ` beyond.
    pub fn norm_sq_initial(&self, sp: &Spectrum<'_>) -> Result<f64> {
        let h = self.psi.h;
        let x_m = ((self.lambda.max(0.0) + 1.0).sqrt() + 1.5).min(self.psi.x_end());
        let i_m = (x_m / h).round() as usize;
        let (th, ph) = sp.shooter.theta_phi(self.lambda, i_m as f64 * h)?;
        let b = self.boundary.b().unwrap_or(0.0);
        let (y, dy): (Vec<f64>, Vec<f64>) = match self.boundary {
            Boundary::Dirichlet => (ph.y.clone(), ph.dy.clone()),
            Boundary::Robin { .. } => (
                th.y.iter().zip(&ph.y).map(|(t, p)| t + b * p).collect(),
                th.dy.iter().zip(&ph.dy).map(|(t, p)| t + b * p).collect(),
            ),
        };
        let f: Vec<f64> = y.iter().map(|v| v * v).collect();
        let df: Vec<f64> = y.iter().zip(&dy).map(|(v, d)| 2.0 * v * d).collect();
        let ratio = y[i_m] / self.psi.y[i_m];
        Ok(table_integral(h, &f, &df) + ratio * ratio * self.tail[i_m])
    }
}

/// Closed-form norming constant of the free problem (`b = 0` for Robin).
pub fn free_norming_constant(n: usize, boundary: Boundary) -> f64 {
    s0(n, boundary.parity())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_spectra() {
        let q = Potential::zero();
        let d = Spectrum::new(&q, Boundary::Dirichlet).eigenvalues(4).unwrap();
        let r = Spectrum::new(&q, Boundary::robin(0.0)).eigenvalues(4).unwrap();
        for n in 0..4 {
            assert!((d[n] - (4 * n + 3) as f64).abs() < 1e-9);
            assert!((r[n] - (4 * n + 1) as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn free_norming_constants() {
        let q = Potential::zero();
        let sd = Spectrum::new(&q, Boundary::Dirichlet);
        let s = sd.norming_constant_at(3.0).unwrap();
        assert!((s + 0.5 * 2f64.ln()).abs() < 1e-9);
        let sn = Spectrum::new(&q, Boundary::robin(0.0));
        assert!(sn.norming_constant_at(1.0).unwrap().abs() < 1e-9);
        for n in 0..5 {
            let s = sd.norming_constant_at(lambda0(n, Parity::Odd)).unwrap();
            assert!((s - free_norming_constant(n, Boundary::Dirichlet)).abs() < 1e-8);
        }
    }

    #[test]
    fn norm_identities_hold() {
        let q = Potential::gaussian(0.3, 1.0);
        for boundary in [Boundary::Dirichlet, Boundary::robin(0.4)] {
            let sp = Spectrum::new(&q, boundary);
            for n in 0..4 {
                let l = sp.eigenvalue(n).unwrap();
                let d = sp.datum(n, l).unwrap();
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                let lhs = sign * d.ws_dot.unwrap() * (-d.s).exp();
                assert!((lhs / d.norm_sq_psi_plus.unwrap() - 1.0).abs() < 1e-6, "{boundary:?} n = {n}");
                let lhs = sign * d.ws_dot.unwrap() * d.s.exp();
                assert!((lhs / d.norm_sq_phi.unwrap() - 1.0).abs() < 1e-6, "{boundary:?} n = {n}");
            }
        }
    }

    #[test]
    fn eigenfunction_normalisation() {
        let q = Potential::zero();
        let ef = Spectrum::new(&q, Boundary::Dirichlet).eigenfunction(0).unwrap();
        for i in (0..ef.psi.len()).step_by(97) {
            let want = 2f64.sqrt() * hermite_function(1, ef.psi.x(i));
            assert!((ef.psi.y[i] - want).abs() < 1e-7);
        }
        let q = Potential::gaussian(0.3, 1.0);
        let sp = Spectrum::new(&q, Boundary::robin(-0.7));
        let ef = sp.eigenfunction(2).unwrap();
        assert!((ef.norm_sq() - 1.0).abs() < 1e-8);
        assert!((ef.psi.dy[0] + 0.7 * ef.psi.y[0]).abs() < 1e-7);
        assert!(ef.psi.y[0] > 0.0);
    }

    #[test]
    fn chi_wronskian() {
        let q = Potential::gaussian(0.3, 1.0);
        for boundary in [Boundary::Dirichlet, Boundary::robin(0.5)] {
            let sp = Spectrum::new(&q, boundary);
            let ef = sp.eigenfunction(1).unwrap();
            let chi = ef.chi(&sp).unwrap();
            for i in (0..chi.len()).step_by(50) {
                let w = chi.y[i] * ef.psi.dy[i] - chi.dy[i] * ef.psi.y[i];
                assert!((w - 1.0).abs() < 1e-6, "{boundary:?} x = {}", chi.x(i));
            }
        }
    }

    #[test]
    fn robin_b_gradient_at_ground_state() {
        let q = Potential::zero();
        let sp = Spectrum::new(&q, Boundary::robin(0.0));
        let g = sp.gradient_check(0, &Potential::zero(), 1e-4).unwrap();
        assert_eq!(g.lambda.analytic, 0.0);
        assert_eq!(g.lambda.finite_diff, 0.0);
        let bl = g.b_lambda.unwrap();
        assert!((bl.analytic - 2.0 / std::f64::consts::PI.sqrt()).abs() < 1e-7);
        assert!(bl.abs_error() < 1e-6);
        assert!(g.b_s.unwrap().abs_error() < 1e-5);
    }

    #[test]
    fn json_round_trip() {
        let q = Potential::gaussian(0.2, 1.0);
        let data = Spectrum::new(&q, Boundary::robin(0.25)).spectral_data(3).unwrap();
        let back = SpectralData::from_json(&data.to_json().unwrap()).unwrap();
        assert_eq!(back.entries.len(), 3);
        for (a, b) in data.entries.iter().zip(&back.entries) {
            assert_eq!(a.lambda, b.lambda);
            assert_eq!(a.s, b.s);
        }
        assert_eq!(back.boundary, Boundary::robin(0.25));
        assert!(back.q0.is_none() && back.q0_minus_2b2.is_some());
    }
}
