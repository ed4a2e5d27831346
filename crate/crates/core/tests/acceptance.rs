//! One PASS/FAIL line per acceptance criterion.

use oscispec_core::coords::{b_terms, recover_b, trace_defects_sweep, CoordinateSet};
use oscispec_core::inverse::{forward_map, reconstruct, InverseConfig, InverseProblem};
use oscispec_core::potential::Term;
use oscispec_core::specfun::{lambda0, s0};
use oscispec_core::verify::{self, Check};
use oscispec_core::{Boundary, Potential, Result, Spectrum};
use std::time::{Duration, Instant};

struct Outcome {
    pass: bool,
    detail: String,
}

fn gaussian() -> Potential {
    Potential::gaussian(0.3, 1.0)
}

fn fixtures() -> Vec<Potential> {
    vec![
        gaussian(),
        Potential::closed_form(vec![Term { a: 0.5, p: 2, c: 1.0, w: 0.0 }]).unwrap(),
        Potential::closed_form(vec![Term { a: 0.2, p: 0, c: 0.5, w: 1.0 }]).unwrap(),
    ]
}

fn checks(list: &[Check]) -> Outcome {
    let failed: Vec<String> =
        list.iter().filter(|c| !c.pass).map(|c| format!("{}={:.3e} (tol {:.0e})", c.name, c.defect(), c.tol)).collect();
    let worst = list.iter().map(|c| c.defect() / c.tol).fold(0.0, f64::max);
    Outcome {
        pass: failed.is_empty(),
        detail: if failed.is_empty() {
            format!("{} checks, worst defect/tol {worst:.2}", list.len())
        } else {
            format!("failed: {}", failed.join(", "))
        },
    }
}

fn timed(limit: Duration, out: Result<Outcome>, start: Instant) -> Outcome {
    let elapsed = start.elapsed();
    let mut o = out.unwrap_or_else(|e| Outcome { pass: false, detail: format!("error: {e}") });
    o.pass &= elapsed <= limit;
    o.detail = format!("{}; {:.1} s (limit {} s)", o.detail, elapsed.as_secs_f64(), limit.as_secs());
    o
}

fn unperturbed() -> Result<Outcome> {
    let q = Potential::zero();
    let (mut dl, mut ds) = (0.0f64, 0.0f64);
    for boundary in [Boundary::Dirichlet, Boundary::robin(0.0)] {
        let parity = boundary.parity();
        let d = Spectrum::new(&q, boundary).spectral_data(16)?;
        for e in &d.entries {
            dl = dl.max((e.lambda - lambda0(e.n, parity)).abs());
            ds = ds.max((e.s - s0(e.n, parity)).abs());
        }
    }
    Ok(Outcome { pass: dl < 1e-8 && ds < 1e-7, detail: format!("max|Δλ|={dl:.2e}, max|Δs|={ds:.2e}") })
}

fn norm_identities() -> Result<Outcome> {
    let q = gaussian();
    let mut worst = 0.0f64;
    for boundary in [Boundary::Dirichlet, Boundary::robin(0.0)] {
        let sp = Spectrum::new(&q, boundary);
        for n in 0..=10 {
            let d = sp.datum(n, sp.eigenvalue(n)?)?;
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let w = sign * d.ws_dot.unwrap_or(f64::NAN);
            worst = worst.max((w * (-d.s).exp() / d.norm_sq_psi_plus.unwrap_or(f64::NAN) - 1.0).abs());
            worst = worst.max((w * d.s.exp() / d.norm_sq_phi.unwrap_or(f64::NAN) - 1.0).abs());
        }
    }
    Ok(Outcome { pass: worst < 1e-6, detail: format!("max relative error {worst:.2e}") })
}

fn trace_identities() -> Result<Outcome> {
    let mut list = verify::traces(&gaussian(), 0.0, 64)?;
    list.retain(|c| c.name != "b_recovery" && c.name != "robin_trace_sum");
    let robin = verify::traces(&Potential::zero(), 0.5, 64)?;
    list.extend(robin.into_iter().filter(|c| c.name == "robin_trace_sum"));
    let mut o = checks(&list);
    let sweep = trace_defects_sweep(&gaussian(), 0.0, 64)?;
    let at = |n: usize| sweep[n - 1];
    let decreasing = [16, 32, 64].windows(2).all(|w| {
        at(w[1]).dirichlet_defect.abs() < at(w[0]).dirichlet_defect.abs()
            && at(w[1]).neumann_defect.abs() < at(w[0]).neumann_defect.abs()
    });
    o.pass &= decreasing;
    o.detail = format!(
        "{}; dirichlet defect at N=16/32/64: {:.1e}/{:.1e}/{:.1e}",
        o.detail,
        at(16).dirichlet_defect,
        at(32).dirichlet_defect,
        at(64).dirichlet_defect
    );
    Ok(o)
}

fn b_recovery() -> Result<Outcome> {
    let data = Spectrum::new(&gaussian(), Boundary::robin(0.5)).spectral_data(48)?;
    let b = recover_b(&data)?;
    let rel = (b - 0.5).abs() / 0.5;
    let free = Spectrum::new(&Potential::zero(), Boundary::robin(0.0)).spectral_data(48)?;
    let worst = b_terms(&free)?.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    Ok(Outcome {
        pass: rel < 5e-2 && worst < 1e-8,
        detail: format!("b={b:.5} (relative error {rel:.2e}); free terms max {worst:.1e}"),
    })
}

fn darboux() -> Result<Outcome> {
    Ok(checks(&verify::darboux(&gaussian(), 0.4)?))
}

fn gradients() -> Result<Outcome> {
    Ok(checks(&verify::gradients(&gaussian(), 0.4)?))
}

fn hardy() -> Result<Outcome> {
    let mut list = Vec::new();
    for q in fixtures() {
        list.extend(verify::hardy(&q)?);
    }
    Ok(checks(&list))
}

fn l2_error(a: &Potential, b: &Potential) -> f64 {
    let h = 1e-3;
    ((0..=6000).map(|i| (a.eval(i as f64 * h) - b.eval(i as f64 * h)).powi(2)).sum::<f64>() * h).sqrt()
}

fn inverse() -> Result<Outcome> {
    let q = gaussian();
    let mut parts = Vec::new();
    let mut pass = true;
    for boundary in [Boundary::Dirichlet, Boundary::robin(0.4)] {
        let target = forward_map(&q, boundary, 8)?;
        let rec = reconstruct(&InverseProblem { target, config: InverseConfig::default() })?;
        let err = l2_error(&rec.q, &q);
        let db = match (boundary.b(), rec.b) {
            (Some(b), Some(got)) => (got - b).abs(),
            (None, None) => 0.0,
            _ => f64::INFINITY,
        };
        pass &= rec.converged && rec.iterations <= 25 && err < 1e-3 && db < 1e-3;
        parts.push(format!("{}: L2 {err:.1e}, |Δb| {db:.1e}, {} iterations", boundary_tag(boundary), rec.iterations));
    }
    Ok(Outcome { pass, detail: parts.join("; ") })
}

fn boundary_tag(b: Boundary) -> &'static str {
    if b.b().is_some() {
        "robin"
    } else {
        "dirichlet"
    }
}

fn flattening() -> Result<Outcome> {
    let mut worst = 0.0f64;
    for q in fixtures() {
        for boundary in [Boundary::Dirichlet, Boundary::robin(0.0)] {
            let sums = CoordinateSet::from_data(&forward_map(&q, boundary, 48)?)?.weighted_partial_sums();
            let total = *sums.last().unwrap();
            let increment = total - sums[sums.len() - sums.len() / 4 - 1];
            worst = worst.max(increment / total);
        }
    }
    Ok(Outcome { pass: worst < 0.1, detail: format!("largest last-quartile share {:.2}%", 100.0 * worst) })
}

type Criterion = (&'static str, u64, fn() -> Result<Outcome>);

fn main() {
    let criteria: [Criterion; 9] = [
        ("unperturbed exactness", 10, unperturbed),
        ("norm identities", 30, norm_identities),
        ("trace identities", 300, trace_identities),
        ("boundary parameter recovery", 300, b_recovery),
        ("darboux flows", 120, darboux),
        ("gradient suite", 300, gradients),
        ("hardy identities", 300, hardy),
        ("inverse round trip", 600, inverse),
        ("weighted r flattening", 300, flattening),
    ];
    let mut all = true;
    for (i, (name, limit, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = timed(Duration::from_secs(*limit), f(), start);
        all &= o.pass;
        println!("{} {}. {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    if !all {
        std::process::exit(1);
    }
}
