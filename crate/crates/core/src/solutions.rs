//! Fundamental solutions of `-ψ'' + (x² + q - λ)ψ = 0` on the half-line.
//!
//! `ψ₊` is fixed absolutely by its behaviour at infinity: beyond the support
//! of `q` it coincides with the free Weber solution, which is evaluated in
//! the far field and then carried inward with pair renormalisation and a
//! log-scale accumulator. `θ`, `φ` start at the origin and are carried
//! outward.

use crate::error::{Error, Result};
use crate::ode::{Dopri5, Mesh, Step};
use crate::potential::Potential;
use crate::quad::table_integral;
use crate::specfun::weber_tail;
use serde::{Deserialize, Serialize};

/// Boundary condition at the origin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Boundary {
    /// `ψ(0) = 0`.
    Dirichlet,
    /// `ψ'(0) = b ψ(0)`.
    Robin {
        #[serde(with = "crate::io::num17")]
        b: f64,
    },
}

impl Boundary {
    pub fn robin(b: f64) -> Self {
        Boundary::Robin { b }
    }

    pub fn b(&self) -> Option<f64> {
        match self {
            Boundary::Dirichlet => None,
            Boundary::Robin { b } => Some(*b),
        }
    }

    pub fn parity(&self) -> crate::specfun::Parity {
        match self {
            Boundary::Dirichlet => crate::specfun::Parity::Odd,
            Boundary::Robin { .. } => crate::specfun::Parity::Even,
        }
    }

    /// Parse `dirichlet`, `neumann` or `robin:B`.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim().to_ascii_lowercase();
        if t == "dirichlet" {
            return Ok(Boundary::Dirichlet);
        }
        if t == "neumann" {
            return Ok(Boundary::robin(0.0));
        }
        if let Some(rest) = t.strip_prefix("robin:") {
            let b: f64 = rest
                .parse()
                .map_err(|_| Error::input(format!("cannot parse Robin parameter {rest:?}")))?;
            if !b.is_finite() {
                return Err(Error::input("Robin parameter must be finite"));
            }
            return Ok(Boundary::robin(b));
        }
        Err(Error::input(format!("unknown boundary condition {text:?} (expected dirichlet or robin:B)")))
    }
}

/// A real number stored as `m · e^{ln}` to survive huge dynamic ranges.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scaled {
    pub m: f64,
    pub ln: f64,
}

impl Scaled {
    pub fn new(m: f64, ln: f64) -> Self {
        Scaled { m, ln }
    }

    pub fn sign(&self) -> f64 {
        if self.m == 0.0 {
            0.0
        } else {
            self.m.signum()
        }
    }

    /// `ln|value|`.
    pub fn ln_abs(&self) -> f64 {
        self.m.abs().ln() + self.ln
    }

    /// Plain value (may overflow to `±∞` or underflow to 0).
    pub fn value(&self) -> f64 {
        self.m * self.ln.exp()
    }

    pub fn mul(&self, other: &Scaled) -> Scaled {
        Scaled { m: self.m * other.m, ln: self.ln + other.ln }
    }

    pub fn div(&self, other: &Scaled) -> Scaled {
        Scaled { m: self.m / other.m, ln: self.ln - other.ln }
    }

    pub fn scale(&self, f: f64) -> Scaled {
        Scaled { m: self.m * f, ln: self.ln }
    }
}

/// Numerical settings shared by all solvers.
#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub rtol: f64,
    pub atol: f64,
    /// Distance kept between the turning point and the inward starting point.
    pub margin: f64,
    /// Smallest admissible starting point.
    pub min_start: f64,
    /// Node spacing of function tables.
    pub table_h: f64,
    /// Step of λ difference quotients.
    pub fd_step: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { rtol: 1e-11, atol: 1e-12, margin: 7.0, min_start: 10.0, table_h: 1.0 / 200.0, fd_step: 1e-5 }
    }
}

impl SolverConfig {
    fn stepper(&self, h_max: f64) -> Dopri5 {
        Dopri5 { rtol: self.rtol, atol: self.atol, h_init: 1e-2, h_max, max_steps: 5_000_000 }
    }
}

/// `f'(0)` from `f(-2h), …, f(2h)`.
fn five_point(f: &[f64], h: f64) -> f64 {
    (8.0 * (f[3] - f[1]) - (f[4] - f[0])) / (12.0 * h)
}

/// Boundary values of `ψ₊(·, λ, q)` at the origin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryTrace {
    pub lambda: f64,
    pub x_start: f64,
    /// Mantissa of `ψ₊(0)`.
    pub psi0: f64,
    /// Mantissa of `ψ₊'(0)`.
    pub dpsi0: f64,
    /// True value = mantissa · e^{log_scale}.
    pub log_scale: f64,
    /// Mantissa of `‖ψ₊‖²₊`, in units of `e^{2 log_scale}`.
    pub norm_sq: f64,
    /// Sign changes of `ψ₊` on `(0, x_start)`, the origin itself excluded.
    pub zeros: usize,
    /// Sign of `ψ₊` at the last interior mesh point.
    pub last_sign: f64,
}

impl BoundaryTrace {
    pub fn psi(&self) -> Scaled {
        Scaled::new(self.psi0, self.log_scale)
    }

    pub fn dpsi(&self) -> Scaled {
        Scaled::new(self.dpsi0, self.log_scale)
    }

    pub fn norm(&self) -> Scaled {
        Scaled::new(self.norm_sq, 2.0 * self.log_scale)
    }

    /// `w_D = -ψ₊(0)` or `w_N = ψ₊'(0) - b ψ₊(0)`.
    pub fn wronskian(&self, boundary: Boundary) -> Scaled {
        match boundary {
            Boundary::Dirichlet => Scaled::new(-self.psi0, self.log_scale),
            Boundary::Robin { b } => Scaled::new(self.dpsi0 - b * self.psi0, self.log_scale),
        }
    }

    /// Scale-free version of the Wronskian, used for root finding.
    pub fn wronskian_normalised(&self, boundary: Boundary) -> f64 {
        self.wronskian(boundary).m / self.psi0.hypot(self.dpsi0)
    }

    /// Number of zeros of `ψ₊` on `(0, ∞)`, including one between the last mesh point and the origin.
    pub fn zeros_with_origin(&self) -> usize {
        let s = if self.psi0 == 0.0 { 0.0 } else { self.psi0.signum() };
        self.zeros + usize::from(s != 0.0 && s != self.last_sign)
    }
}

/// Uniform table `(x_i = i h, y_i, y'_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub h: f64,
    pub y: Vec<f64>,
    pub dy: Vec<f64>,
}

impl Table {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.h
    }

    pub fn x_end(&self) -> f64 {
        self.x(self.len() - 1)
    }

    pub fn truncated(&self, len: usize) -> Table {
        let len = len.min(self.len());
        Table { h: self.h, y: self.y[..len].to_vec(), dy: self.dy[..len].to_vec() }
    }
}

/// Shooting solver bound to one potential.
#[derive(Clone, Debug)]
pub struct Shooter<'a> {
    pub q: &'a Potential,
    pub cfg: SolverConfig,
}

const RENORM_HI: f64 = 1e2;
const RENORM_LO: f64 = 1e-2;

impl<'a> Shooter<'a> {
    pub fn new(q: &'a Potential) -> Self {
        Shooter { q, cfg: SolverConfig::default() }
    }

    pub fn with_config(q: &'a Potential, cfg: SolverConfig) -> Self {
        Shooter { q, cfg }
    }

    /// Default inward starting point for `λ`, a multiple of 1/4.
    pub fn x_start(&self, lambda: f64) -> f64 {
        let turning = (lambda.max(0.0) + 1.0).sqrt();
        let x = (turning + self.cfg.margin).max(self.cfg.min_start).max(self.q.support());
        (x * 4.0).ceil() / 4.0
    }

    fn h_max(&self) -> f64 {
        match self.q.knot_spacing() {
            Some(h) => (4.0 * h).min(0.25),
            None => 0.25,
        }
    }

    /// Integrate `ψ₊` inward from `x_start` to the origin.
    pub fn psi_plus(&self, lambda: f64, x_start: f64) -> Result<BoundaryTrace> {
        self.psi_plus_impl(lambda, x_start, &[0.0], Mesh::Adaptive(None), &mut |_, _, _| {})
    }

    /// Integrate `ψ₊` and report the state at each stop (descending, ending at 0).
    ///
    /// The callback receives the stop index, the state `[ψ, ψ', ∫ₓ ψ²]` in mantissa
    /// form, and the current log scale.
    pub fn psi_plus_impl(
        &self,
        lambda: f64,
        x_start: f64,
        stops: &[f64],
        mesh: Mesh<'_>,
        at_stop: &mut dyn FnMut(usize, &[f64; 3], f64),
    ) -> Result<BoundaryTrace> {
        if !lambda.is_finite() {
            return Err(Error::input(format!("λ = {lambda} is not finite")));
        }
        let tail = weber_tail(x_start, lambda)?;
        let q = self.q;
        let rhs = |x: f64, y: &[f64; 3]| [y[1], (x * x + q.eval(x) - lambda) * y[0], -y[0] * y[0]];
        let y0 = [tail.sign, tail.sign * tail.log_derivative, 0.5 / tail.log_derivative.abs()];
        let mut log_scale = tail.ln_abs;
        let mut zeros = 0usize;
        let mut prev_sign = tail.sign;
        let mut last_sign = tail.sign;
        let y = self.cfg.stepper(self.h_max()).integrate(
            &rhs,
            x_start,
            y0,
            stops,
            mesh,
            &mut |s: Step<'_, 3>| {
                let mut changed = false;
                let m = s.y[0].abs().max(s.y[1].abs());
                if m > RENORM_HI || (m < RENORM_LO && m > 0.0) {
                    s.y[0] /= m;
                    s.y[1] /= m;
                    s.y[2] /= m * m;
                    log_scale += m.ln();
                    changed = true;
                }
                if s.x > 0.0 && s.y[0] != 0.0 {
                    let sg = s.y[0].signum();
                    if sg != prev_sign {
                        zeros += 1;
                        prev_sign = sg;
                    }
                    last_sign = sg;
                }
                if let Some(i) = s.stop {
                    at_stop(i, s.y, log_scale);
                }
                changed
            },
        )?;
        Ok(BoundaryTrace {
            lambda,
            x_start,
            psi0: y[0],
            dpsi0: y[1],
            log_scale,
            norm_sq: y[2],
            zeros,
            last_sign,
        })
    }

    /// `ψ₊(0, λ)` boundary trace at the default starting point.
    pub fn trace(&self, lambda: f64) -> Result<BoundaryTrace> {
        self.psi_plus(lambda, self.x_start(lambda))
    }

    /// Traces at `λ + jh`, `j = -2..=2`, on one common mesh.
    pub fn trace_stencil(&self, lambda: f64) -> Result<[BoundaryTrace; 5]> {
        let h = self.cfg.fd_step * lambda.abs().max(1.0);
        let x0 = self.x_start(lambda + 2.0 * h);
        let mut mesh = Vec::new();
        let mid = self.psi_plus_impl(lambda, x0, &[0.0], Mesh::Adaptive(Some(&mut mesh)), &mut |_, _, _| {})?;
        let at = |j: f64| self.psi_plus_impl(lambda + j * h, x0, &[0.0], Mesh::Replay(&mesh), &mut |_, _, _| {});
        Ok([at(-2.0)?, at(-1.0)?, mid, at(1.0)?, at(2.0)?])
    }

    /// Wronskian `w(λ)` as a scaled number.
    pub fn wronskian(&self, lambda: f64, boundary: Boundary) -> Result<Scaled> {
        Ok(self.trace(lambda)?.wronskian(boundary))
    }

    /// `∂_λ w(λ)` by a five-point difference on a frozen mesh.
    pub fn wronskian_dot(&self, lambda: f64, boundary: Boundary) -> Result<Scaled> {
        let t = self.trace_stencil(lambda)?;
        let base = t[2].log_scale;
        let w: Vec<f64> = t
            .iter()
            .map(|t| {
                let w = t.wronskian(boundary);
                w.m * (w.ln - base).exp()
            })
            .collect();
        Ok(Scaled::new(five_point(&w, t[3].lambda - t[2].lambda), base))
    }

    /// `∂_λ log|ψ₊(0, λ)|` (`derivative = false`) or `∂_λ log|ψ₊'(0, λ)|` (`true`).
    pub fn log_derivative_in_lambda(&self, lambda: f64, derivative: bool) -> Result<f64> {
        let t = self.trace_stencil(lambda)?;
        let pick = |t: &BoundaryTrace| if derivative { t.dpsi().ln_abs() } else { t.psi().ln_abs() };
        let v: Vec<f64> = t.iter().map(pick).collect();
        Ok(five_point(&v, t[3].lambda - t[2].lambda))
    }

    /// Table of `ψ₊(·, λ)` divided by `‖ψ₊‖₊` on `[0, x_start]`, plus the boundary trace.
    ///
    /// The third returned vector holds `∫ₓ^∞ ψ²` of the normalised function.
    pub fn psi_plus_table(&self, lambda: f64) -> Result<(Table, Vec<f64>, BoundaryTrace)> {
        let h = self.cfg.table_h;
        let x0 = self.x_start(lambda);
        let n = (x0 / h).round() as usize;
        let x0 = n as f64 * h;
        let stops: Vec<f64> = (0..n).rev().map(|i| i as f64 * h).collect();
        let mut raw = vec![[0.0; 3]; n + 1];
        let mut scales = vec![0.0; n + 1];
        let tail = weber_tail(x0, lambda)?;
        raw[n] = [tail.sign, tail.sign * tail.log_derivative, 0.5 / tail.log_derivative.abs()];
        scales[n] = tail.ln_abs;
        let trace = self.psi_plus_impl(lambda, x0, &stops, Mesh::Adaptive(None), &mut |i, y, ls| {
            let node = n - 1 - i;
            raw[node] = *y;
            scales[node] = ls;
        })?;
        let l0 = trace.log_scale;
        let norm = trace.norm_sq;
        let inv = 1.0 / norm.sqrt();
        let mut y = Vec::with_capacity(n + 1);
        let mut dy = Vec::with_capacity(n + 1);
        let mut tails = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let f = (scales[i] - l0).exp();
            y.push(raw[i][0] * f * inv);
            dy.push(raw[i][1] * f * inv);
            tails.push(raw[i][2] * f * f / norm);
        }
        Ok((Table { h, y, dy }, tails, trace))
    }

    /// Forward tables of `θ` (`θ(0)=1, θ'(0)=0`) and `φ` (`φ(0)=0, φ'(0)=1`) on `[0, x_end]`.
    pub fn theta_phi(&self, lambda: f64, x_end: f64) -> Result<(Table, Table)> {
        let h = self.cfg.table_h;
        let n = (x_end / h).round() as usize;
        let stops: Vec<f64> = (1..=n).map(|i| i as f64 * h).collect();
        let q = self.q;
        let rhs = |x: f64, y: &[f64; 4]| {
            let v = x * x + q.eval(x) - lambda;
            [y[1], v * y[0], y[3], v * y[2]]
        };
        let mut th = Table { h, y: vec![1.0], dy: vec![0.0] };
        let mut ph = Table { h, y: vec![0.0], dy: vec![1.0] };
        self.cfg.stepper(self.h_max()).integrate(
            &rhs,
            0.0,
            [1.0, 0.0, 0.0, 1.0],
            &stops,
            Mesh::Adaptive(None),
            &mut |s: Step<'_, 4>| {
                if s.stop.is_some() {
                    th.y.push(s.y[0]);
                    th.dy.push(s.y[1]);
                    ph.y.push(s.y[2]);
                    ph.dy.push(s.y[3]);
                }
                false
            },
        )?;
        Ok((th, ph))
    }

    /// Table of `θ` or `φ` on `[0, x_end]`.
    pub fn initial_solution(&self, lambda: f64, kind: InitialKind, x_end: f64) -> Result<Table> {
        let (th, ph) = self.theta_phi(lambda, x_end)?;
        Ok(match kind {
            InitialKind::Theta => th,
            InitialKind::Phi => ph,
        })
    }

    /// First Born term `(ψ₊⁽¹⁾(0), ψ₊⁽¹⁾'(0)) = (∫ ψ⁰₊ φ⁰ q, -∫ ψ⁰₊ θ⁰ q)`.
    pub fn born_first_term(&self, lambda: f64) -> Result<(f64, f64)> {
        let zero = Potential::zero();
        let free = Shooter::with_config(&zero, self.cfg.clone());
        let x_end = self.q.support();
        if x_end == 0.0 || self.q.is_zero() {
            return Ok((0.0, 0.0));
        }
        let lam_start = free.x_start(lambda).max(x_end);
        let h = self.cfg.table_h;
        let n = (lam_start / h).round() as usize;
        let x0 = n as f64 * h;
        let stops: Vec<f64> = (0..n).rev().map(|i| i as f64 * h).collect();
        let mut psi = vec![0.0; n + 1];
        let mut dpsi = vec![0.0; n + 1];
        let mut scales = vec![0.0; n + 1];
        let tail = weber_tail(x0, lambda)?;
        psi[n] = tail.sign;
        dpsi[n] = tail.sign * tail.log_derivative;
        scales[n] = tail.ln_abs;
        free.psi_plus_impl(lambda, x0, &stops, Mesh::Adaptive(None), &mut |i, y, ls| {
            let node = n - 1 - i;
            psi[node] = y[0];
            dpsi[node] = y[1];
            scales[node] = ls;
        })?;
        let (th, ph) = free.theta_phi(lambda, x0)?;
        let mut f_phi = Vec::with_capacity(n + 1);
        let mut df_phi = Vec::with_capacity(n + 1);
        let mut f_th = Vec::with_capacity(n + 1);
        let mut df_th = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let x = i as f64 * h;
            let (qv, dq) = self.q.eval_with_derivative(x);
            let e = scales[i].exp();
            let (p, dp) = (psi[i] * e, dpsi[i] * e);
            f_phi.push(p * ph.y[i] * qv);
            df_phi.push((dp * ph.y[i] + p * ph.dy[i]) * qv + p * ph.y[i] * dq);
            f_th.push(p * th.y[i] * qv);
            df_th.push((dp * th.y[i] + p * th.dy[i]) * qv + p * th.y[i] * dq);
        }
        Ok((table_integral(h, &f_phi, &df_phi), -table_integral(h, &f_th, &df_th)))
    }
}

/// Which initial-value solution to tabulate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitialKind {
    Theta,
    Phi,
}
