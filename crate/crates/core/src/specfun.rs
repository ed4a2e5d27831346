//! Special functions of the unperturbed oscillator.
//!
//! Log-Gamma and digamma, the decaying Weber solution `ψ⁰₊(x, λ)` (at the
//! origin in closed form, in the far field via an asymptotic expansion plus
//! a stable order recurrence), normalised Hermite functions, the companion
//! solution `χₙ⁰` and the per-mode constants of the free problem.

use crate::error::{Error, Result};
use crate::ode::{Dopri5, Mesh};
use std::f64::consts::{LN_2, PI};

const LN_PI: f64 = 1.144_729_885_849_400_2;
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

//==============================================================================
// Gamma family
//==============================================================================

/// `sin(πx)` with exact zeros at the integers.
pub fn sin_pi(x: f64) -> f64 {
    let r = x.rem_euclid(2.0);
    if r == 0.0 || r == 1.0 {
        0.0
    } else if r == 0.5 {
        1.0
    } else if r == 1.5 {
        -1.0
    } else {
        (PI * r).sin()
    }
}

/// `cos(πx)` with exact zeros at the half-integers.
pub fn cos_pi(x: f64) -> f64 {
    let r = x.rem_euclid(2.0);
    if r == 0.5 || r == 1.5 {
        0.0
    } else if r == 0.0 {
        1.0
    } else if r == 1.0 {
        -1.0
    } else {
        (PI * r).cos()
    }
}

fn stirling_ln_gamma(x: f64) -> f64 {
    let x2 = x * x;
    let series = (1.0 / 12.0
        - (1.0 / 360.0 - (1.0 / 1260.0 - (1.0 / 1680.0 - 1.0 / (1188.0 * x2)) / x2) / x2) / x2)
        / x;
    (x - 0.5) * x.ln() - x + HALF_LN_2PI + series
}

/// `ln|Γ(x)|`; `+∞` at the poles.
pub fn ln_gamma(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x <= 0.0 && x == x.floor() {
        return f64::INFINITY;
    }
    if x < 0.5 {
        // reflection
        return LN_PI - sin_pi(x).abs().ln() - ln_gamma(1.0 - x);
    }
    if x >= 15.0 {
        return stirling_ln_gamma(x);
    }
    let mut shift = 0.0;
    let mut prod = 1.0;
    let mut y = x;
    while y < 15.0 {
        prod *= y;
        y += 1.0;
        if prod > 1e250 {
            shift += prod.ln();
            prod = 1.0;
        }
    }
    stirling_ln_gamma(y) - prod.ln() - shift
}

/// Sign of `Γ(x)` (zero at the poles).
pub fn gamma_sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x == x.floor() {
        0.0
    } else if (x.floor() as i64).rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `Γ(x)`; overflows to `±∞` above `x ≈ 171.6`.
pub fn gamma(x: f64) -> f64 {
    gamma_sign(x) * ln_gamma(x).exp()
}

/// `(sign, ln|1/Γ(z)|)` for the entire function `1/Γ`; sign is zero at the poles of `Γ`.
pub fn ln_rgamma(z: f64) -> (f64, f64) {
    if z > 0.0 {
        return (1.0, -ln_gamma(z));
    }
    let s = sin_pi(z);
    if s == 0.0 {
        return (0.0, f64::NEG_INFINITY);
    }
    // 1/Γ(z) = sin(πz) Γ(1 - z) / π
    (s.signum(), s.abs().ln() + ln_gamma(1.0 - z) - LN_PI)
}

/// Digamma `ψ(x) = Γ'(x)/Γ(x)`.
pub fn digamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return f64::NAN;
    }
    if x < 0.5 {
        return digamma(1.0 - x) - PI * cos_pi(x) / sin_pi(x);
    }
    let mut acc = 0.0;
    let mut y = x;
    while y < 15.0 {
        acc -= 1.0 / y;
        y += 1.0;
    }
    let r = 1.0 / (y * y);
    let tail = r
        * (1.0 / 12.0
            - r * (1.0 / 120.0 - r * (1.0 / 252.0 - r * (1.0 / 240.0 - r / 132.0))));
    acc + y.ln() - 0.5 / y - tail
}

/// Central-binomial ratio `Eₙ = (2n)!/(2²ⁿ (n!)²)`, the Taylor coefficients of `(1 - z)^(-1/2)`.
pub fn e_n(n: usize) -> f64 {
    if n < 64 {
        let mut e = 1.0;
        for k in 0..n {
            e *= (2 * k + 1) as f64 / (2 * k + 2) as f64;
        }
        e
    } else {
        let n = n as f64;
        (ln_gamma(n + 0.5) - ln_gamma(n + 1.0) - 0.5 * LN_PI).exp()
    }
}

/// `E₀, …, E_{len-1}`.
pub fn e_seq(len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    let mut e = 1.0;
    for k in 0..len {
        out.push(e);
        e *= (2 * k + 1) as f64 / (2 * k + 2) as f64;
    }
    out
}

//==============================================================================
// Weber solution
//==============================================================================

/// `ψ⁰₊(0, λ)` and `(ψ⁰₊)'(0, λ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeberZero {
    pub value: f64,
    pub derivative: f64,
}

/// Signed logarithms of [`WeberZero`]; usable far beyond the `f64` range.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeberZeroLn {
    pub value_sign: f64,
    pub value_ln: f64,
    pub derivative_sign: f64,
    pub derivative_ln: f64,
}

/// Closed form of the decaying solution at the origin in logarithmic form.
pub fn weber_at_zero_ln(lambda: f64) -> WeberZeroLn {
    let base = 0.5 * LN_PI + 0.25 * (lambda - 1.0) * LN_2;
    let (sv, lv) = ln_rgamma(0.25 * (3.0 - lambda));
    let (sd, ld) = ln_rgamma(0.25 * (1.0 - lambda));
    WeberZeroLn {
        value_sign: sv,
        value_ln: base + lv,
        derivative_sign: -sd,
        derivative_ln: base + LN_2 + ld,
    }
}

/// Closed form of `ψ⁰₊(0, λ)` and its derivative.
///
/// Fails with [`Error::Range`] once either value leaves the `f64` range.
pub fn weber_at_zero(lambda: f64) -> Result<WeberZero> {
    if !lambda.is_finite() {
        return Err(Error::input(format!("λ = {lambda} is not finite")));
    }
    let w = weber_at_zero_ln(lambda);
    if w.value_ln > 709.0 || w.derivative_ln > 709.0 {
        return Err(Error::Range(format!("ψ⁰₊(0, {lambda}) overflows")));
    }
    Ok(WeberZero {
        value: w.value_sign * w.value_ln.exp(),
        derivative: w.derivative_sign * w.derivative_ln.exp(),
    })
}

/// `ψ⁰₊(x, λ)` in the classically forbidden region, as sign, `ln|ψ|` and `ψ'/ψ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeberTail {
    pub sign: f64,
    pub ln_abs: f64,
    pub log_derivative: f64,
}

/// Scaled `D_μ(z) z^{-μ} e^{z²/4}` from its large-`z` expansion, for small `|μ|`.
fn pcf_scaled_series(mu: f64, z2: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut s = 0.0;
    loop {
        let next = -term * (mu - 2.0 * s) * (mu - 2.0 * s - 1.0) / (2.0 * (s + 1.0) * z2);
        if next.abs() > term.abs() && s > 0.0 {
            break;
        }
        sum += next;
        if next.abs() <= 1e-17 * sum.abs() {
            break;
        }
        term = next;
        s += 1.0;
        if s > 400.0 {
            break;
        }
    }
    sum
}

/// Decaying Weber solution `ψ⁰₊(x, λ) = D_{(λ-1)/2}(√2 x)` for `x` beyond the turning point.
///
/// Requires `√2 x ≥ 12` and `x² ≥ λ + 1`; the order is raised from `(-1, 0]` by the
/// three-term recurrence, which is forward-stable in that region.
pub fn weber_tail(x: f64, lambda: f64) -> Result<WeberTail> {
    let z = std::f64::consts::SQRT_2 * x;
    if z < 12.0 || x * x < lambda + 1.0 {
        return Err(Error::input(format!(
            "far-field Weber evaluation needs x beyond the turning point (x = {x}, λ = {lambda})"
        )));
    }
    let z2 = z * z;
    let nu = 0.5 * (lambda - 1.0);
    let (d_nu, d_num1) = if nu <= 0.0 {
        (pcf_scaled_series(nu, z2), pcf_scaled_series(nu - 1.0, z2))
    } else {
        let m = nu.ceil();
        let nu0 = nu - m;
        let mut prev = pcf_scaled_series(nu0 - 1.0, z2);
        let mut cur = pcf_scaled_series(nu0, z2);
        let mut order = nu0;
        for _ in 0..(m as usize) {
            let next = cur - order * prev / z2;
            prev = cur;
            cur = next;
            order += 1.0;
        }
        (cur, prev)
    };
    if d_nu == 0.0 || !d_nu.is_finite() {
        return Err(Error::Range(format!("far-field Weber value degenerate at x = {x}")));
    }
    let ln_abs = nu * z.ln() - 0.25 * z2 + d_nu.abs().ln();
    let dlog_z = nu * d_num1 / (z * d_nu) - 0.5 * z;
    Ok(WeberTail {
        sign: d_nu.signum(),
        ln_abs,
        log_derivative: std::f64::consts::SQRT_2 * dlog_z,
    })
}

//==============================================================================
// Hermite functions
//==============================================================================

/// Normalised Hermite functions `ψ₀⁰(x), …, ψ_{len-1}⁰(x)` written into `out`.
///
/// The three-term recurrence runs on a rescaled pair so that neither the
/// Gaussian factor nor the polynomial growth over- or underflows prematurely.
pub fn hermite_functions_into(x: f64, out: &mut [f64]) {
    let len = out.len();
    if len == 0 {
        return;
    }
    let mut ln_scale = -0.5 * x * x - 0.25 * LN_PI;
    let mut factor = ln_scale.exp();
    let mut p_prev = 0.0;
    let mut p = 1.0;
    out[0] = p * factor;
    for n in 0..len - 1 {
        let nf = n as f64;
        let next = x * (2.0 / (nf + 1.0)).sqrt() * p - (nf / (nf + 1.0)).sqrt() * p_prev;
        p_prev = p;
        p = next;
        if p.abs() > 1e150 {
            p *= 1e-150;
            p_prev *= 1e-150;
            ln_scale += 150.0 * std::f64::consts::LN_10;
            factor = ln_scale.exp();
        }
        out[n + 1] = p * factor;
    }
}

/// `ψ₀⁰(x), …, ψ_{len-1}⁰(x)`.
pub fn hermite_functions(len: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; len];
    hermite_functions_into(x, &mut out);
    out
}

/// Normalised Hermite function `ψₙ⁰(x)`.
pub fn hermite_function(n: usize, x: f64) -> f64 {
    let mut buf = vec![0.0; n + 1];
    hermite_functions_into(x, &mut buf);
    buf[n]
}

/// `(ψₙ⁰(x), (ψₙ⁰)'(x))`.
pub fn hermite_function_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut buf = vec![0.0; n + 2];
    hermite_functions_into(x, &mut buf);
    let nf = n as f64;
    let lower = if n > 0 { (0.5 * nf).sqrt() * buf[n - 1] } else { 0.0 };
    (buf[n], lower - (0.5 * (nf + 1.0)).sqrt() * buf[n + 1])
}

/// Rescaled Hermite function `ψ̃ₙ⁰(x) = 2^{1/4} ψₙ⁰(√2 x)`.
pub fn scaled_hermite(n: usize, x: f64) -> f64 {
    2f64.powf(0.25) * hermite_function(n, std::f64::consts::SQRT_2 * x)
}

/// `ψ̃₀⁰(x), …, ψ̃_{len-1}⁰(x)` written into `out`.
pub fn scaled_hermite_into(x: f64, out: &mut [f64]) {
    hermite_functions_into(std::f64::consts::SQRT_2 * x, out);
    let c = 2f64.powf(0.25);
    out.iter_mut().for_each(|v| *v *= c);
}

//==============================================================================
// Second solution
//==============================================================================

/// Companion solution `χₙ⁰` of the free equation at `λ = 2n + 1`.
///
/// Normalised by `χψ' - χ'ψ = 1` with `ψₙ⁰χₙ⁰` odd; obtained by forward
/// integration from the origin. Returns `(χ(x), χ'(x))`.
pub fn second_solution(n: usize, x: f64) -> Result<(f64, f64)> {
    if !(0.0..=30.0).contains(&x) {
        return Err(Error::input(format!("χ⁰ evaluation needs 0 ≤ x ≤ 30, got {x}")));
    }
    let (c0, d0) = second_solution_at_zero(n);
    if x == 0.0 {
        return Ok((c0, d0));
    }
    let lambda = 2.0 * n as f64 + 1.0;
    let rhs = |t: f64, y: &[f64; 2]| [y[1], (t * t - lambda) * y[0]];
    let y = Dopri5::precise().integrate(&rhs, 0.0, [c0, d0], &[x], Mesh::Adaptive(None), &mut |_| false)?;
    Ok((y[0], y[1]))
}

/// Initial data `(χₙ⁰(0), (χₙ⁰)'(0))`.
pub fn second_solution_at_zero(n: usize) -> (f64, f64) {
    let (p, dp) = hermite_function_with_derivative(n, 0.0);
    if n % 2 == 0 {
        (0.0, -1.0 / p)
    } else {
        (1.0 / dp, 0.0)
    }
}

//==============================================================================
// Unperturbed constants
//==============================================================================

/// Parity class of a mode: odd modes live on the Dirichlet problem, even ones on Neumann.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

/// Free-problem data of mode `2n` (even) or `2n + 1` (odd).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnperturbedConstants {
    pub lambda0: f64,
    /// `ψ⁰₊(0, λ⁰)`.
    pub kappa: f64,
    /// `(ψ⁰₊)'(0, λ⁰)`.
    pub kappa_prime: f64,
    /// `∂_λ ψ⁰₊(0, λ⁰)`.
    pub kappa_dot: f64,
    /// `∂_λ (ψ⁰₊)'(0, λ⁰)`.
    pub kappa_dot_prime: f64,
    /// Norming constant `s⁰`.
    pub s0: f64,
    /// `-∂_λ log|ψ⁰₊'(0)|` (odd) or `-∂_λ log|ψ⁰₊(0)|` (even) at `λ⁰`.
    pub alpha: f64,
    pub e_n: f64,
}

/// Unperturbed eigenvalue of mode `n` in the given parity class.
pub fn lambda0(n: usize, parity: Parity) -> f64 {
    match parity {
        Parity::Even => 4.0 * n as f64 + 1.0,
        Parity::Odd => 4.0 * n as f64 + 3.0,
    }
}

/// Closed-form norming constant of the free problem.
pub fn s0(n: usize, parity: Parity) -> f64 {
    let nf = n as f64;
    match parity {
        Parity::Odd => -((nf + 1.5) * LN_2 + ln_gamma(nf + 1.5) - 0.5 * LN_PI),
        Parity::Even => -(nf * LN_2 + ln_gamma(nf + 0.5) - 0.5 * LN_PI),
    }
}

/// Closed-form `α`: `-(ln 2)/4 - ψ(n + 3/2)/4` (odd) or `-(ln 2)/4 - ψ(n + 1/2)/4` (even).
pub fn alpha(n: usize, parity: Parity) -> f64 {
    let nf = n as f64;
    let arg = match parity {
        Parity::Odd => nf + 1.5,
        Parity::Even => nf + 0.5,
    };
    -0.25 * LN_2 - 0.25 * digamma(arg)
}

/// All free-problem constants of one mode.
pub fn unperturbed_constants(n: usize, parity: Parity) -> Result<UnperturbedConstants> {
    let l0 = lambda0(n, parity);
    let w = weber_at_zero(l0)?;
    let h = 1e-4 * l0.abs().max(1.0);
    let wp = weber_at_zero(l0 + h)?;
    let wm = weber_at_zero(l0 - h)?;
    Ok(UnperturbedConstants {
        lambda0: l0,
        kappa: w.value,
        kappa_prime: w.derivative,
        kappa_dot: (wp.value - wm.value) / (2.0 * h),
        kappa_dot_prime: (wp.derivative - wm.derivative) / (2.0 * h),
        s0: s0(n, parity),
        alpha: alpha(n, parity),
        e_n: e_n(n),
    })
}
