//! File formats: potentials, spectral data and reports as JSON or CSV.
//!
//! Floating-point numbers are written as decimal strings with 17
//! significant digits so that output is byte-for-byte reproducible;
//! readers accept either strings or plain JSON numbers.

use crate::error::{Error, Result};
use crate::potential::{Potential, Term};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Format with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

fn parse_num(s: &str) -> std::result::Result<f64, String> {
    s.trim().parse::<f64>().map_err(|e| format!("bad number {s:?}: {e}"))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum NumRepr {
    Num(f64),
    Str(String),
}

impl NumRepr {
    fn value<E: serde::de::Error>(self) -> std::result::Result<f64, E> {
        match self {
            NumRepr::Num(v) => Ok(v),
            NumRepr::Str(s) => parse_num(&s).map_err(E::custom),
        }
    }
}

/// Serde adapter for `f64` fields.
pub mod num17 {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&fmt17(*v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        NumRepr::deserialize(d)?.value()
    }
}

/// Serde adapter for `Option<f64>` fields.
pub mod num17_opt {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match v {
            Some(x) => s.serialize_str(&fmt17(*x)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<f64>, D::Error> {
        Option::<NumRepr>::deserialize(d)?.map(|n| n.value()).transpose()
    }
}

/// Serde adapter for `Vec<f64>` fields.
pub mod num17_vec {
    use super::*;
    use serde::ser::SerializeSeq;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            seq.serialize_element(&fmt17(*x))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
        Vec::<NumRepr>::deserialize(d)?.into_iter().map(|n| n.value()).collect()
    }
}

//==============================================================================
// Potentials
//==============================================================================

/// On-disk form of a [`Potential`].
#[derive(Serialize, Deserialize, Debug, Clone)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialDoc {
    Grid {
        #[serde(with = "num17")]
        h: f64,
        #[serde(default, with = "num17_opt", skip_serializing_if = "Option::is_none")]
        x_max: Option<f64>,
        #[serde(with = "num17_vec")]
        samples: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        metadata: Option<String>,
    },
    Hermite {
        #[serde(with = "num17_vec")]
        coeffs: Vec<f64>,
        #[serde(default, with = "num17_opt", skip_serializing_if = "Option::is_none")]
        x_max: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        metadata: Option<String>,
    },
    ClosedForm {
        terms: Vec<Term>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        metadata: Option<String>,
    },
    Sum {
        parts: Vec<WeightedDoc>,
    },
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct WeightedDoc {
    #[serde(with = "num17")]
    pub weight: f64,
    pub potential: PotentialDoc,
}

impl PotentialDoc {
    pub fn from_potential(q: &Potential) -> Self {
        match q {
            Potential::Grid(g) => PotentialDoc::Grid {
                h: g.h(),
                x_max: Some(g.x_max()),
                samples: g.samples().to_vec(),
                metadata: None,
            },
            Potential::Hermite(h) => {
                PotentialDoc::Hermite { coeffs: h.coeffs().to_vec(), x_max: None, metadata: None }
            }
            Potential::ClosedForm(c) => PotentialDoc::ClosedForm { terms: c.terms().to_vec(), metadata: None },
            Potential::Sum(parts) => PotentialDoc::Sum {
                parts: parts
                    .iter()
                    .map(|(w, p)| WeightedDoc { weight: *w, potential: PotentialDoc::from_potential(p) })
                    .collect(),
            },
        }
    }

    pub fn into_potential(self) -> Result<Potential> {
        match self {
            PotentialDoc::Grid { h, x_max, samples, .. } => {
                if let Some(xm) = x_max {
                    let implied = h * (samples.len().max(1) - 1) as f64;
                    if (xm - implied).abs() > 1e-9 * xm.abs().max(1.0) {
                        return Err(Error::input(format!(
                            "grid x_max = {xm} disagrees with h·(samples - 1) = {implied}"
                        )));
                    }
                }
                Potential::grid(h, samples)
            }
            PotentialDoc::Hermite { coeffs, .. } => Potential::hermite(coeffs),
            PotentialDoc::ClosedForm { terms, .. } => Potential::closed_form(terms),
            PotentialDoc::Sum { parts } => Ok(Potential::Sum(
                parts
                    .into_iter()
                    .map(|w| Ok((w.weight, w.potential.into_potential()?)))
                    .collect::<Result<Vec<_>>>()?,
            )),
        }
    }
}

/// Parse a potential from JSON text.
pub fn potential_from_json(text: &str) -> Result<Potential> {
    let doc: PotentialDoc =
        serde_json::from_str(text).map_err(|e| Error::input(format!("malformed potential: {e}")))?;
    doc.into_potential()
}

/// Serialise a potential as pretty JSON.
pub fn potential_to_json(q: &Potential) -> Result<String> {
    Ok(serde_json::to_string_pretty(&PotentialDoc::from_potential(q))?)
}

/// Read a potential from a `.json` file or a two-column `x,q` CSV file on a uniform grid.
pub fn read_potential(path: &Path) -> Result<Potential> {
    let text = std::fs::read_to_string(path)?;
    if path.extension().and_then(|e| e.to_str()) == Some("csv") {
        potential_from_csv(&text)
    } else {
        potential_from_json(&text)
    }
}

/// Parse an `x,q` CSV (header optional) into a grid potential.
pub fn potential_from_csv(text: &str) -> Result<Potential> {
    let mut xs = Vec::new();
    let mut qs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() < 2 {
            return Err(Error::input(format!("line {}: expected two columns", i + 1)));
        }
        match (parse_num(cols[0]), parse_num(cols[1])) {
            (Ok(x), Ok(q)) => {
                xs.push(x);
                qs.push(q);
            }
            _ if xs.is_empty() => continue,
            _ => return Err(Error::input(format!("line {}: not numeric", i + 1))),
        }
    }
    if xs.len() < 4 {
        return Err(Error::input("CSV potential needs at least 4 rows"));
    }
    if xs[0] != 0.0 {
        return Err(Error::input("CSV potential must start at x = 0"));
    }
    let h = xs[1] - xs[0];
    for (i, x) in xs.iter().enumerate() {
        if (x - i as f64 * h).abs() > 1e-9 * (1.0 + x.abs()) {
            return Err(Error::input("CSV potential must be on a uniform grid"));
        }
    }
    Potential::grid(h, qs)
}

/// Write a potential sampled at spacing `h` as `x,q` CSV.
pub fn potential_to_csv(q: &Potential, h: f64, x_max: f64) -> String {
    let mut out = String::from("x,q\n");
    let n = (x_max / h).round() as usize;
    for i in 0..=n {
        let x = i as f64 * h;
        out.push_str(&format!("{},{}\n", fmt17(x), fmt17(q.eval(x))));
    }
    out
}
