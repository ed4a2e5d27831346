//! Identity suites: each check compares a computed value with its exact counterpart.

use crate::coords::{b_terms, q0_from_tau, recover_b, tau, trace_defects, TailModel, RECOVER_B_MIN_MODES};
use crate::darboux::{dirichlet_flow, robin_flow};
use crate::error::{Error, Result};
use crate::hardy::{f_plus, f_split, g_from_f, g_plus, hat_sequences, p_plus_conj_inv_sqrt, PowerSeries, TailKind};
use crate::potential::{Potential, Term};
use crate::solutions::{Boundary, Table};
use crate::spectrum::Spectrum;
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    #[serde(with = "crate::io::num17")]
    pub value: f64,
    #[serde(with = "crate::io::num17")]
    pub expected: f64,
    #[serde(with = "crate::io::num17")]
    pub tol: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, expected: f64, tol: f64) -> Self {
        let pass = (value - expected).abs() <= tol;
        Check { name: name.into(), value, expected, tol, pass }
    }

    /// A deviation measure that must stay below `tol`.
    pub fn error(name: impl Into<String>, err: f64, tol: f64) -> Self {
        Check::new(name, err, 0.0, tol)
    }

    pub fn defect(&self) -> f64 {
        (self.value - self.expected).abs()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Traces,
    Gradients,
    Hardy,
    Darboux,
    All,
}

impl Suite {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "traces" => Suite::Traces,
            "gradients" => Suite::Gradients,
            "hardy" => Suite::Hardy,
            "darboux" => Suite::Darboux,
            "all" => Suite::All,
            _ => return Err(Error::input(format!("unknown suite '{s}' (traces|gradients|hardy|darboux|all)"))),
        })
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn extend(&mut self, checks: Vec<Check>) {
        self.checks.extend(checks);
    }
}

pub fn run(q: &Potential, b: f64, suite: Suite, modes: usize) -> Result<Report> {
    let mut r = Report::default();
    if matches!(suite, Suite::Traces | Suite::All) {
        r.extend(traces(q, b, modes)?);
    }
    if matches!(suite, Suite::Gradients | Suite::All) {
        r.extend(gradients(q, b)?);
    }
    if matches!(suite, Suite::Hardy | Suite::All) {
        r.extend(hardy(q)?);
    }
    if matches!(suite, Suite::Darboux | Suite::All) {
        r.extend(darboux(q, b)?);
    }
    Ok(r)
}

/// Trace sums, `q(0) = 2Στₙ`, and recovery of `b`.
pub fn traces(q: &Potential, b: f64, modes: usize) -> Result<Vec<Check>> {
    let d = trace_defects(q, b, modes)?;
    let mut out = vec![
        Check::new("dirichlet_trace_defect", d.dirichlet_defect, 0.0, 1e-2),
        Check::new("neumann_trace_defect", d.neumann_defect, 0.0, 1e-2),
        Check::new("robin_trace_sum", d.robin_defect - 0.5 * b * b, -0.5 * b * b, 2e-2),
    ];
    let mus = |boundary: Boundary| -> Result<Vec<f64>> {
        let sp = Spectrum::new(q, boundary);
        Ok(sp.eigenvalues(modes)?.iter().enumerate().map(|(n, l)| l - sp.lambda0(n)).collect())
    };
    let (mu_d, mu_n) = (mus(Boundary::Dirichlet)?, mus(Boundary::robin(0.0))?);
    let estimate = q0_from_tau(&tau(&mu_n, &mu_d)?, &TailModel::new(q, Boundary::Dirichlet));
    out.push(Check::new("q0_from_tau", estimate, q.q_at_zero(), 5e-2));
    let count = modes.max(RECOVER_B_MIN_MODES);
    let data = Spectrum::new(q, Boundary::robin(b)).spectral_data(count)?;
    if b == 0.0 && q.is_zero() {
        let worst = b_terms(&data)?.iter().fold(0.0f64, |a, t| a.max(t.abs()));
        out.push(Check::error("b_terms_vanish", worst, 1e-8));
    } else {
        out.push(Check::new("b_recovery", recover_b(&data)?, b, (5e-2 * b.abs()).max(1e-6)));
    }
    Ok(out)
}

/// Direction fixtures for gradient comparisons.
pub fn gradient_directions() -> Vec<(&'static str, Potential)> {
    vec![
        ("gauss", Potential::gaussian(1.0, 1.0)),
        ("x2_gauss", Potential::closed_form(vec![Term { a: 1.0, p: 2, c: 1.5, w: 0.0 }]).expect("valid term")),
    ]
}

/// Analytic gradients against central differences (20 pairs) and the gradient products.
pub fn gradients(q: &Potential, b: f64) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let mut worst = 0.0f64;
    let mut worst_b = 0.0f64;
    let rel = |c: &crate::spectrum::Comparison| c.abs_error() / c.analytic.abs().max(1e-3);
    for boundary in [Boundary::Dirichlet, Boundary::robin(b)] {
        let sp = Spectrum::new(q, boundary);
        for n in 0..5 {
            for (_, v) in gradient_directions() {
                let g = sp.gradient_check(n, &v, 1e-4)?;
                worst = worst.max(rel(&g.lambda)).max(rel(&g.s));
                for c in [g.b_lambda, g.b_s].into_iter().flatten() {
                    worst_b = worst_b.max(rel(&c));
                }
            }
        }
    }
    out.push(Check::error("gradient_relative_error", worst, 1e-4));
    out.push(Check::error("b_gradient_relative_error", worst_b, 1e-4));
    out.extend(gradient_products(q, Boundary::Dirichlet, 6)?);
    out.extend(gradient_products(q, Boundary::robin(b), 6)?);
    Ok(out)
}

/// `∫₀^X f g` over two tables on the same grid (composite Simpson).
fn table_dot(h: f64, f: &[f64], g: &[f64]) -> f64 {
    let len = f.len().min(g.len());
    let odd = if len % 2 == 1 { len } else { len - 1 };
    let mut s = f[0] * g[0] + f[odd - 1] * g[odd - 1];
    for i in 1..odd - 1 {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f[i] * g[i];
    }
    let mut total = s * h / 3.0;
    if odd < len {
        total += 0.5 * h * (f[odd - 1] * g[odd - 1] + f[len - 1] * g[len - 1]);
    }
    total
}

struct ModeTables {
    pp: Vec<f64>,
    dpp: Vec<f64>,
    pc: Vec<f64>,
    dpc: Vec<f64>,
    h: f64,
}

fn mode_tables(sp: &Spectrum<'_>, n: usize) -> Result<ModeTables> {
    let ef = sp.eigenfunction(n)?;
    let chi: Table = ef.chi(sp)?;
    let len = ef.psi.len().min(chi.len());
    let (p, dp) = (&ef.psi.y[..len], &ef.psi.dy[..len]);
    Ok(ModeTables {
        pp: p.iter().map(|v| v * v).collect(),
        dpp: p.iter().zip(dp).map(|(v, d)| 2.0 * v * d).collect(),
        pc: p.iter().zip(&chi.y).map(|(v, c)| v * c).collect(),
        dpc: (0..len).map(|i| dp[i] * chi.y[i] + p[i] * chi.dy[i]).collect(),
        h: ef.psi.h,
    })
}

/// The four gradient-product identities for modes `n, m < count`, as worst deviations.
pub fn gradient_products(q: &Potential, boundary: Boundary, count: usize) -> Result<Vec<Check>> {
    let sp = Spectrum::new(q, boundary);
    let tables: Vec<ModeTables> = (0..count).map(|n| mode_tables(&sp, n)).collect::<Result<_>>()?;
    let robin = boundary.b().is_some();
    let mut worst = [0.0f64; 4];
    for (n, a) in tables.iter().enumerate() {
        for (m, c) in tables.iter().enumerate() {
            let d = if n == m { 1.0 } else { 0.0 };
            let len = a.pp.len().min(c.pp.len());
            // ψχ ≈ -1/(2x) - a/x³ beyond the table
            let x = (len - 1) as f64 * a.h;
            let (an, am) = (-x.powi(3) * (a.pc[len - 1] + 0.5 / x), -x.powi(3) * (c.pc[len - 1] + 0.5 / x));
            let tail = -0.5 * a.pc[len - 1] * c.pc[len - 1] + (am - an) / (8.0 * x.powi(4));
            let values = [
                table_dot(a.h, &a.dpp, &c.pp),
                table_dot(a.h, &a.dpc, &c.pp),
                table_dot(a.h, &a.dpp, &c.pc),
                table_dot(a.h, &a.dpc, &c.pc) + tail,
            ];
            let expected = if robin {
                let (ppn, pcn, ppm, pcm) = (a.pp[0], a.pc[0], c.pp[0], c.pc[0]);
                [-0.5 * ppn * ppm, 0.5 * (-d - pcn * ppm), 0.5 * (d - ppn * pcm), -0.5 * pcn * pcm]
            } else {
                [0.0, -0.5 * d, 0.5 * d, 0.0]
            };
            for k in 0..4 {
                worst[k] = worst[k].max((values[k] - expected[k]).abs());
            }
        }
    }
    let tag = if robin { "robin" } else { "dirichlet" };
    let names = ["psi2_psi2", "psichi_psi2", "psi2_psichi", "psichi_psichi"];
    Ok(names.iter().zip(worst).map(|(nm, w)| Check::error(format!("{tag}_product_{nm}"), w, 1e-5)).collect())
}

/// Generating-function identities of the Hardy-space description.
pub fn hardy(q: &Potential) -> Result<Vec<Check>> {
    let k = 64;
    let hats = hat_sequences(q, 32)?;
    let f = f_plus(q, 4 * k);
    let via_f = f.mul(&PowerSeries::inv_sqrt_one_minus(4 * k));
    let g_long = g_plus(q, 4 * k);
    let via_g = p_plus_conj_inv_sqrt(&g_long, 32, Some(TailKind::Alternating));
    let max_err = |a: &[f64], b: &[f64]| a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    let g = g_plus(q, k);
    let gasf = g_from_f(&f, k);

    let len = 4096;
    let (f_n, f_d) = f_split(&f.truncated(2 * len));
    let g_n = f_d.scale(-PI / 2.0);
    let g_d = f_n.shift_left().scale(-PI / 2.0);
    let even = p_plus_conj_inv_sqrt(&g_n, 16, Some(TailKind::Monotone(2.0)));
    let odd = p_plus_conj_inv_sqrt(&g_d, 16, Some(TailKind::Monotone(2.0)));
    let parity_err = (0..16).fold(0.0f64, |m, n| {
        m.max((even.coeffs[n] - hats.q_check[2 * n]).abs()).max((odd.coeffs[n] - hats.q_check[2 * n + 1]).abs())
    });
    Ok(vec![
        Check::error("q_hat_from_f", max_err(&via_f.coeffs[..32], &hats.q_hat), 1e-6),
        Check::error("q_check_from_g", max_err(&via_g.coeffs, &hats.q_check), 1e-6),
        Check::error("g_from_f", max_err(&gasf.coeffs, &g.coeffs), 1e-6),
        Check::error("g_parts_from_f_parts", parity_err, 1e-6),
        Check::new("f_at_minus_one", f.eval(-1.0), 2f64.powf(-1.5) * q.q_at_zero(), 1e-6),
        Check::new("f_at_one", f.eval(1.0), q.integral() / (2.0 * PI).sqrt(), 1e-6),
    ])
}

/// Flow cases `(n, t)` exercised by the Darboux suite.
pub const DARBOUX_CASES: [(usize, f64); 4] = [(0, 1.0), (1, -1.0), (2, 0.5), (3, -0.75)];

/// Isospectrality, single norming-constant shift and boundary invariants of the flows.
pub fn darboux(q: &Potential, b: f64) -> Result<Vec<Check>> {
    let modes = 6;
    let mut out = Vec::new();
    for boundary in [Boundary::Dirichlet, Boundary::robin(b)] {
        let base = Spectrum::new(q, boundary).spectral_data(modes)?;
        let (mut lam, mut target, mut other, mut inv) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for (n, t) in DARBOUX_CASES {
            let flow = match boundary {
                Boundary::Dirichlet => dirichlet_flow(q, n, t)?,
                Boundary::Robin { b } => robin_flow(q, b, n, t)?,
            };
            let new = Spectrum::new(&flow.q_new, flow.new_boundary()).spectral_data(modes)?;
            for (m, (a, c)) in base.entries.iter().zip(&new.entries).enumerate() {
                lam = lam.max((c.lambda - a.lambda).abs());
                if m == n {
                    target = target.max((c.s - a.s - t).abs());
                } else {
                    other = other.max((c.s - a.s).abs());
                }
            }
            let before = base.boundary_datum().unwrap_or(0.0);
            let bn = flow.b_new.unwrap_or(0.0);
            inv = inv.max((flow.q_new.q_at_zero() - 2.0 * bn * bn - before).abs());
        }
        let tag = if boundary.b().is_some() { "robin" } else { "dirichlet" };
        out.push(Check::error(format!("{tag}_flow_eigenvalue_drift"), lam, 1e-7));
        out.push(Check::error(format!("{tag}_flow_target_shift"), target, 1e-6));
        out.push(Check::error(format!("{tag}_flow_other_drift"), other, 1e-6));
        out.push(Check::error(format!("{tag}_flow_boundary_invariant"), inv, 1e-8));
    }
    Ok(out)
}
