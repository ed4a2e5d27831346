use crate::output::{csv, emit, json, num, nums};
use crate::{Cli, Command, Format, Options};
use oscispec_core::coords::fill_r;
use oscispec_core::darboux::{dirichlet_flow, robin_flow};
use oscispec_core::hardy::{f_plus, g_plus, hat_sequences, tilde_q};
use oscispec_core::inverse::{reconstruct, InverseConfig, InverseProblem};
use oscispec_core::io::{fmt17, potential_to_csv, read_potential, PotentialDoc};
use oscispec_core::specfun::unperturbed_constants;
use oscispec_core::verify::{self, Suite};
use oscispec_core::{Boundary, Error, Potential, Result, SolverConfig, SpectralData, Spectrum};
use serde_json::json;
use std::path::{Path, PathBuf};

const DEFAULT_MODES: usize = 16;
const DEFAULT_VERIFY_MODES: usize = 48;
const DEFAULT_ORDER: usize = 32;
const CSV_H: f64 = 0.01;

pub fn run(cli: &Cli) -> Result<u8> {
    let o = &cli.opts;
    check_numbers(o)?;
    let boundary = Boundary::parse(&o.boundary)?;
    match &cli.command {
        Command::Forward => forward(o, boundary),
        Command::Verify { suite } => verify_cmd(o, boundary, Suite::parse(suite)?),
        Command::Darboux { mode, time } => darboux(o, boundary, *mode, *time),
        Command::Invert { data, max_iter, no_polish } => invert(o, data, *max_iter, !no_polish),
        Command::WeberTable => weber_table(o, boundary),
        Command::HardyTransform => hardy_transform(o, boundary),
    }
}

fn check_numbers(o: &Options) -> Result<()> {
    for (name, v) in [("--tol", o.tol), ("--xmax", o.xmax)] {
        if let Some(v) = v {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::input(format!("{name} must be positive and finite, got {v}")));
            }
        }
    }
    for (name, v) in [("--modes", o.modes), ("--order", o.order)] {
        if v == Some(0) {
            return Err(Error::input(format!("{name} must be at least 1")));
        }
    }
    Ok(())
}

/// Resolves the potential path, falling back to `$OSCISPEC_FIXTURES`.
fn resolve(path: &Path) -> Result<PathBuf> {
    if path.exists() {
        return Ok(path.to_path_buf());
    }
    if let Some(dir) = std::env::var_os("OSCISPEC_FIXTURES") {
        let dir = PathBuf::from(dir);
        for candidate in [dir.join(path), dir.join(path).with_extension("json")] {
            if candidate.exists() {
                return Ok(candidate);
            }
        }
    }
    Err(Error::input(format!("potential file {} not found", path.display())))
}

fn potential(o: &Options) -> Result<Potential> {
    let path = o.potential.as_deref().ok_or_else(|| Error::input("--potential is required"))?;
    read_potential(&resolve(path)?).map_err(|e| match e {
        Error::Io(io) => Error::input(format!("{}: {io}", path.display())),
        e => e,
    })
}

fn solver_config(o: &Options) -> SolverConfig {
    let mut cfg = SolverConfig::default();
    if let Some(t) = o.tol {
        cfg.rtol = t;
        cfg.atol = t * 0.1;
    }
    if let Some(x) = o.xmax {
        cfg.min_start = x;
    }
    cfg
}

fn done(o: &Options, text: String) -> Result<u8> {
    emit(&text, o.out.as_deref())?;
    Ok(0)
}

fn forward(o: &Options, boundary: Boundary) -> Result<u8> {
    let q = potential(o)?;
    if o.dry_run {
        return Ok(0);
    }
    let modes = o.modes.unwrap_or(DEFAULT_MODES);
    let mut data = Spectrum::with_config(&q, boundary, solver_config(o)).spectral_data(modes)?;
    fill_r(&mut data)?;
    let text = match o.format {
        Format::Json => json(&data)?,
        Format::Csv => csv(
            &["n", "lambda", "mu", "s", "r"],
            data.entries.iter().map(|e| vec![e.n.to_string(), fmt17(e.lambda), fmt17(e.mu), fmt17(e.s), fmt17(e.r)]),
        )?,
    };
    done(o, text)
}

fn verify_cmd(o: &Options, boundary: Boundary, suite: Suite) -> Result<u8> {
    let q = potential(o)?;
    if o.dry_run {
        return Ok(0);
    }
    let b = boundary.b().unwrap_or(0.0);
    let report = verify::run(&q, b, suite, o.modes.unwrap_or(DEFAULT_VERIFY_MODES))?;
    let pass = report.all_pass();
    let text = match o.format {
        Format::Json => json(&json!({ "pass": pass, "checks": report.checks }))?,
        Format::Csv => csv(
            &["name", "value", "expected", "tol", "pass"],
            report.checks.iter().map(|c| {
                vec![c.name.clone(), fmt17(c.value), fmt17(c.expected), fmt17(c.tol), c.pass.to_string()]
            }),
        )?,
    };
    emit(&text, o.out.as_deref())?;
    Ok(if pass { 0 } else { 1 })
}

fn darboux(o: &Options, boundary: Boundary, mode: usize, time: f64) -> Result<u8> {
    let q = potential(o)?;
    if !time.is_finite() {
        return Err(Error::input("--time must be finite"));
    }
    if o.dry_run {
        return Ok(0);
    }
    let r = match boundary {
        Boundary::Dirichlet => dirichlet_flow(&q, mode, time)?,
        Boundary::Robin { b } => robin_flow(&q, b, mode, time)?,
    };
    let text = match o.format {
        Format::Json => json(&json!({ "flow": r, "potential": PotentialDoc::from_potential(&r.q_new) }))?,
        Format::Csv => potential_to_csv(&r.q_new, CSV_H, o.xmax.unwrap_or(r.q_new.support())),
    };
    done(o, text)
}

fn invert(o: &Options, data: &Path, max_iter: usize, polish: bool) -> Result<u8> {
    let text = std::fs::read_to_string(data).map_err(|e| Error::input(format!("{}: {e}", data.display())))?;
    let target = SpectralData::from_json(&text).map_err(|e| match e {
        Error::Json(j) => Error::input(format!("malformed spectral data: {j}")),
        e => e,
    })?;
    if max_iter == 0 {
        return Err(Error::input("--max-iter must be at least 1"));
    }
    if o.dry_run {
        return Ok(0);
    }
    let mut config = InverseConfig { max_iter, k: o.order, polish, ..InverseConfig::default() };
    if let Some(t) = o.tol {
        config.tol = t;
    }
    let rec = reconstruct(&InverseProblem { target, config })?;
    let text = match o.format {
        Format::Json => json(&json!({ "reconstruction": rec, "potential": PotentialDoc::from_potential(&rec.q) }))?,
        Format::Csv => csv(
            &["iteration", "residual"],
            rec.residual_history.iter().enumerate().map(|(i, r)| vec![i.to_string(), fmt17(*r)]),
        )?,
    };
    emit(&text, o.out.as_deref())?;
    if rec.converged {
        Ok(0)
    } else {
        eprintln!("oscispec: reconstruction did not reach the tolerance");
        Ok(3)
    }
}

fn weber_table(o: &Options, boundary: Boundary) -> Result<u8> {
    if o.dry_run {
        return Ok(0);
    }
    let parity = boundary.parity();
    let rows = (0..o.modes.unwrap_or(DEFAULT_MODES))
        .map(|n| unperturbed_constants(n, parity).map(|c| (n, c)))
        .collect::<Result<Vec<_>>>()?;
    let text = match o.format {
        Format::Json => json(&json!({
            "parity": format!("{parity:?}").to_lowercase(),
            "rows": rows.iter().map(|(n, c)| json!({
                "n": n,
                "lambda0": num(c.lambda0),
                "psi0": num(c.kappa),
                "dpsi0": num(c.kappa_prime),
                "s0": num(c.s0),
                "alpha": num(c.alpha),
                "e_n": num(c.e_n),
            })).collect::<Vec<_>>(),
        }))?,
        Format::Csv => csv(
            &["n", "lambda0", "psi0", "dpsi0", "s0", "alpha", "e_n"],
            rows.iter().map(|(n, c)| {
                vec![
                    n.to_string(),
                    fmt17(c.lambda0),
                    fmt17(c.kappa),
                    fmt17(c.kappa_prime),
                    fmt17(c.s0),
                    fmt17(c.alpha),
                    fmt17(c.e_n),
                ]
            }),
        )?,
    };
    done(o, text)
}

fn hardy_transform(o: &Options, boundary: Boundary) -> Result<u8> {
    let q = potential(o)?;
    if o.dry_run {
        return Ok(0);
    }
    let k = o.order.unwrap_or(DEFAULT_ORDER);
    let f = f_plus(&q, k);
    let g = g_plus(&q, k);
    let hats = hat_sequences(&q, k)?;
    let tq = tilde_q(&q, k, boundary.b().unwrap_or(0.0));
    let text = match o.format {
        Format::Json => json(&json!({
            "order": k,
            "F": nums(&f.coeffs),
            "G": nums(&g.coeffs),
            "q_hat": nums(&hats.q_hat),
            "q_check": nums(&hats.q_check),
            "tilde_q_minus_one": num(tq.minus_one),
            "tilde_q": nums(&tq.values),
        }))?,
        Format::Csv => csv(
            &["n", "F", "G", "q_hat", "q_check", "tilde_q"],
            (0..k).map(|n| {
                vec![
                    n.to_string(),
                    fmt17(f.coeffs[n]),
                    fmt17(g.coeffs[n]),
                    fmt17(hats.q_hat[n]),
                    fmt17(hats.q_check[n]),
                    fmt17(tq.values[n]),
                ]
            }),
        )?,
    };
    done(o, text)
}
