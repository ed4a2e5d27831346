//! Perturbations `q` on the half-line.
//!
//! Three representations are supported: samples on a uniform grid
//! (not-a-knot cubic spline, zero beyond the grid), finite expansions in the
//! rescaled even Hermite functions `ψ̃⁰₂ₖ`, and closed-form sums of terms
//! `a xᵖ e^{-c x²} cos(ω x)`. Linear combinations of these are also allowed.

use crate::error::{Error, Result};
use crate::quad::{gauss_kronrod, CompositeRule};
use crate::specfun::scaled_hermite_into;

/// Sample-decay tolerance required at the right end of a grid potential.
pub const GRID_DECAY_TOL: f64 = 1e-10;

/// Cubic spline with not-a-knot end conditions on a uniform grid starting at 0.
#[derive(Clone, Debug, PartialEq)]
pub struct GridPotential {
    h: f64,
    samples: Vec<f64>,
    curvature: Vec<f64>,
}

impl GridPotential {
    pub fn new(h: f64, samples: Vec<f64>) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::input(format!("grid spacing must be positive, got {h}")));
        }
        if samples.len() < 4 {
            return Err(Error::input("grid potential needs at least 4 samples"));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("grid potential has non-finite samples"));
        }
        let curvature = not_a_knot_curvature(h, &samples);
        Ok(GridPotential { h, samples, curvature })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn x_max(&self) -> f64 {
        self.h * (self.samples.len() - 1) as f64
    }

    fn cell(&self, x: f64) -> (usize, f64, f64) {
        let n = self.samples.len();
        let j = ((x / self.h).floor() as usize).min(n - 2);
        let a = x - j as f64 * self.h;
        let b = self.h - a;
        (j, a, b)
    }

    fn eval_both(&self, x: f64) -> (f64, f64) {
        let x = x.abs();
        if x > self.x_max() {
            return (0.0, 0.0);
        }
        let (j, a, b) = self.cell(x);
        let h = self.h;
        let (m0, m1) = (self.curvature[j], self.curvature[j + 1]);
        let c0 = self.samples[j] / h - m0 * h / 6.0;
        let c1 = self.samples[j + 1] / h - m1 * h / 6.0;
        let v = m0 * b * b * b / (6.0 * h) + m1 * a * a * a / (6.0 * h) + c0 * b + c1 * a;
        let d = -m0 * b * b / (2.0 * h) + m1 * a * a / (2.0 * h) - c0 + c1;
        (v, d)
    }
}

fn not_a_knot_curvature(h: f64, y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let r: Vec<f64> = (0..n)
        .map(|i| if i == 0 || i == n - 1 { 0.0 } else { 6.0 * (y[i - 1] - 2.0 * y[i] + y[i + 1]) / (h * h) })
        .collect();
    let mut m = vec![0.0; n];
    m[1] = r[1] / 6.0;
    m[n - 2] = r[n - 2] / 6.0;
    if n > 5 {
        // tridiagonal rows 2..=n-3 with known neighbours m[1], m[n-2]
        let k = n - 4;
        let mut diag = vec![4.0; k];
        let mut rhs: Vec<f64> = (2..n - 2).map(|i| r[i]).collect();
        rhs[0] -= m[1];
        rhs[k - 1] -= m[n - 2];
        for i in 1..k {
            let w = 1.0 / diag[i - 1];
            diag[i] -= w;
            rhs[i] -= w * rhs[i - 1];
        }
        let mut sol = vec![0.0; k];
        sol[k - 1] = rhs[k - 1] / diag[k - 1];
        for i in (0..k - 1).rev() {
            sol[i] = (rhs[i] - sol[i + 1]) / diag[i];
        }
        m[2..n - 2].copy_from_slice(&sol);
    }
    m[0] = 2.0 * m[1] - m[2];
    m[n - 1] = 2.0 * m[n - 2] - m[n - 3];
    m
}

/// Finite expansion `Σ cₖ ψ̃⁰₂ₖ`.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitePotential {
    coeffs: Vec<f64>,
    support: f64,
}

impl HermitePotential {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::input("Hermite potential needs finite, non-empty coefficients"));
        }
        let mut p = HermitePotential { coeffs, support: 0.0 };
        p.support = scan_support(|x| p.eval_both(x).0, 60.0);
        Ok(p)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    fn eval_both(&self, x: f64) -> (f64, f64) {
        let x = x.abs();
        let len = 2 * self.coeffs.len() + 1;
        let mut buf = vec![0.0; len];
        scaled_hermite_into(x, &mut buf);
        let mut v = 0.0;
        let mut d = 0.0;
        for (k, c) in self.coeffs.iter().enumerate() {
            let n = 2 * k;
            v += c * buf[n];
            // ψ̃ₙ' = √2 (√(n/2) ψ̃ₙ₋₁ - √((n+1)/2) ψ̃ₙ₊₁)
            let lower = if n > 0 { (n as f64).sqrt() * buf[n - 1] } else { 0.0 };
            d += c * (lower - ((n + 1) as f64).sqrt() * buf[n + 1]);
        }
        (v, d)
    }
}

/// One closed-form term `a xᵖ e^{-c x²} cos(ω x)`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Term {
    #[serde(with = "crate::io::num17")]
    pub a: f64,
    #[serde(default)]
    pub p: u32,
    #[serde(with = "crate::io::num17")]
    pub c: f64,
    #[serde(default, with = "crate::io::num17")]
    pub w: f64,
}

impl Term {
    pub fn gaussian(a: f64, c: f64) -> Self {
        Term { a, p: 0, c, w: 0.0 }
    }

    fn eval_both(&self, x: f64) -> (f64, f64) {
        let g = (-self.c * x * x).exp();
        let (s, co) = (self.w * x).sin_cos();
        let xp = x.powi(self.p as i32);
        let dxp = if self.p == 0 { 0.0 } else { self.p as f64 * x.powi(self.p as i32 - 1) };
        let v = self.a * xp * g * co;
        let d = self.a * g * (dxp * co - 2.0 * self.c * x * xp * co - self.w * xp * s);
        (v, d)
    }

    fn support(&self) -> f64 {
        let thresh = (1e-18f64).ln();
        let peak = (self.p as f64 / (2.0 * self.c)).sqrt();
        let mut x = peak.max(0.0);
        let la = self.a.abs().max(1e-300).ln();
        while la + self.p as f64 * x.max(1e-300).ln() - self.c * x * x > thresh {
            x += 0.05;
        }
        x
    }
}

/// Closed-form potential made of [`Term`]s.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosedForm {
    terms: Vec<Term>,
    support: f64,
}

impl ClosedForm {
    pub fn new(terms: Vec<Term>) -> Result<Self> {
        for t in &terms {
            if t.c <= 0.0 || !t.a.is_finite() || !t.w.is_finite() || !t.c.is_finite() {
                return Err(Error::input("closed-form terms need finite a, ω and a positive decay rate c"));
            }
        }
        let support = terms.iter().map(Term::support).fold(0.0, f64::max);
        Ok(ClosedForm { terms, support })
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }
}

fn scan_support(f: impl Fn(f64) -> f64, limit: f64) -> f64 {
    let step = 0.1;
    let n = (limit / step) as usize;
    let vals: Vec<f64> = (0..=n).map(|i| f(i as f64 * step).abs()).collect();
    let peak = vals.iter().cloned().fold(0.0, f64::max);
    if peak == 0.0 {
        return 0.0;
    }
    let last = vals.iter().rposition(|v| *v > 1e-18 * peak.max(1.0)).unwrap_or(0);
    ((last + 5) as f64 * step).min(limit)
}

/// A perturbation `q ∈ H₊`.
#[derive(Clone, Debug, PartialEq)]
pub enum Potential {
    Grid(GridPotential),
    Hermite(HermitePotential),
    ClosedForm(ClosedForm),
    Sum(Vec<(f64, Potential)>),
}

impl Potential {
    pub fn zero() -> Self {
        Potential::ClosedForm(ClosedForm { terms: Vec::new(), support: 0.0 })
    }

    /// `a e^{-c x²}`.
    pub fn gaussian(a: f64, c: f64) -> Self {
        Potential::ClosedForm(ClosedForm::new(vec![Term::gaussian(a, c)]).expect("valid gaussian"))
    }

    pub fn closed_form(terms: Vec<Term>) -> Result<Self> {
        Ok(Potential::ClosedForm(ClosedForm::new(terms)?))
    }

    pub fn hermite(coeffs: Vec<f64>) -> Result<Self> {
        Ok(Potential::Hermite(HermitePotential::new(coeffs)?))
    }

    /// Grid potential; the last sample must have decayed below [`GRID_DECAY_TOL`].
    pub fn grid(h: f64, samples: Vec<f64>) -> Result<Self> {
        let g = GridPotential::new(h, samples)?;
        let tail = *g.samples.last().unwrap();
        if tail.abs() > GRID_DECAY_TOL {
            return Err(Error::input(format!(
                "grid potential has not decayed at x_max = {} (|q| = {:e})",
                g.x_max(),
                tail.abs()
            )));
        }
        Ok(Potential::Grid(g))
    }

    /// Sample `f` on `[0, x_max]` with spacing `h`.
    pub fn sampled(f: impl Fn(f64) -> f64, h: f64, x_max: f64) -> Result<Self> {
        let n = (x_max / h).round() as usize;
        Potential::grid(h, (0..=n).map(|i| f(i as f64 * h)).collect())
    }

    /// `Σ wᵢ pᵢ`.
    pub fn combination(parts: Vec<(f64, Potential)>) -> Self {
        Potential::Sum(parts)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Potential::Sum(vec![(factor, self.clone())])
    }

    /// `q(x)` (even extension for negative `x`).
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Potential::Grid(g) => g.eval_both(x).0,
            Potential::ClosedForm(c) => c.terms.iter().map(|t| t.eval_both(x.abs()).0).sum(),
            Potential::Sum(parts) => parts.iter().map(|(w, p)| w * p.eval(x)).sum(),
            Potential::Hermite(h) => h.eval_both(x).0,
        }
    }

    /// `q'(x)` for `x ≥ 0`.
    pub fn derivative(&self, x: f64) -> f64 {
        self.eval_with_derivative(x).1
    }

    pub fn eval_with_derivative(&self, x: f64) -> (f64, f64) {
        match self {
            Potential::Grid(g) => g.eval_both(x),
            Potential::Hermite(h) => h.eval_both(x),
            Potential::ClosedForm(c) => c.terms.iter().fold((0.0, 0.0), |acc, t| {
                let (v, d) = t.eval_both(x);
                (acc.0 + v, acc.1 + d)
            }),
            Potential::Sum(parts) => parts.iter().fold((0.0, 0.0), |acc, (w, p)| {
                let (v, d) = p.eval_with_derivative(x);
                (acc.0 + w * v, acc.1 + w * d)
            }),
        }
    }

    pub fn q_at_zero(&self) -> f64 {
        self.eval(0.0)
    }

    /// Point beyond which `|q|` is negligible (zero for grids).
    pub fn support(&self) -> f64 {
        match self {
            Potential::Grid(g) => g.x_max(),
            Potential::Hermite(h) => h.support,
            Potential::ClosedForm(c) => c.support,
            Potential::Sum(parts) => parts.iter().map(|(_, p)| p.support()).fold(0.0, f64::max),
        }
    }

    /// Breakpoints where `q` is only piecewise smooth (grid knots), if any.
    pub fn knot_spacing(&self) -> Option<f64> {
        match self {
            Potential::Grid(g) => Some(g.h),
            Potential::Sum(parts) => parts.iter().filter_map(|(_, p)| p.knot_spacing()).reduce(f64::min),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Potential::ClosedForm(c) => c.terms.iter().all(|t| t.a == 0.0),
            Potential::Grid(g) => g.samples.iter().all(|v| *v == 0.0),
            Potential::Hermite(h) => h.coeffs.iter().all(|v| *v == 0.0),
            Potential::Sum(parts) => parts.iter().all(|(w, p)| *w == 0.0 || p.is_zero()),
        }
    }

    /// A composite Gauss–Legendre rule resolving `q` times functions oscillating with
    /// wavenumber up to `k` on `[0, support]`.
    pub fn quadrature_rule(&self, k: f64) -> CompositeRule {
        let x_max = self.support().max(1e-3);
        let width = match self.knot_spacing() {
            Some(h) => h * (0.5 / (h * (1.0 + k / 4.0))).floor().max(1.0),
            None => 0.5 / (1.0 + k / 4.0),
        };
        let panels = (x_max / width).ceil().max(1.0) as usize;
        CompositeRule::gauss_legendre(0.0, panels as f64 * width, panels, 12)
    }

    /// `∫₀^∞ q`.
    pub fn integral(&self) -> f64 {
        self.quadrature_rule(0.0).integrate(|x| self.eval(x))
    }

    /// `‖q‖²_{H₊} = ∫ (q² + q'² + x² q²)`.
    pub fn h_plus_norm_sq(&self) -> f64 {
        self.quadrature_rule(0.0).integrate(|x| {
            let (v, d) = self.eval_with_derivative(x);
            v * v * (1.0 + x * x) + d * d
        })
    }

    /// `‖q‖_{H₊}`.
    pub fn h_plus_norm(&self) -> f64 {
        self.h_plus_norm_sq().sqrt()
    }

    /// Coefficient `cₖ` of `q = Σ cₖ ψ̃⁰₂ₖ`, i.e. `2 (q, ψ̃⁰₂ₖ)₊`, by adaptive quadrature.
    pub fn hermite_coefficient(&self, k: usize) -> Result<f64> {
        let x_max = self.support().max(1e-3);
        let f = |x: f64| {
            let mut buf = vec![0.0; 2 * k + 1];
            scaled_hermite_into(x, &mut buf);
            self.eval(x) * buf[2 * k]
        };
        let pieces = ((x_max * (1.0 + (k as f64).sqrt())) as usize).max(4);
        let (v, _) = gauss_kronrod(&f, 0.0, x_max, 1e-11, pieces)?;
        Ok(2.0 * v)
    }

    /// First `len` coefficients of the even Hermite expansion.
    pub fn hermite_coefficients(&self, len: usize) -> Vec<f64> {
        let rule = self.quadrature_rule(2.0 * (4.0 * len as f64).sqrt());
        let mut out = vec![0.0; len];
        let mut buf = vec![0.0; 2 * len];
        for (x, w) in rule.iter() {
            let qv = self.eval(x);
            if qv == 0.0 {
                continue;
            }
            scaled_hermite_into(x, &mut buf);
            for k in 0..len {
                out[k] += 2.0 * w * qv * buf[2 * k];
            }
        }
        out
    }

    /// Project onto the first `len` even Hermite functions.
    pub fn to_hermite(&self, len: usize) -> Result<Potential> {
        Potential::hermite(self.hermite_coefficients(len))
    }

    /// Resample on a uniform grid.
    pub fn to_grid(&self, h: f64, x_max: f64) -> Result<Potential> {
        Potential::sampled(|x| self.eval(x), h, x_max)
    }
}
