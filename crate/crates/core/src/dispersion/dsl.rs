//! Text format for dispersion models.
//!
//! ```text
//! # comment
//! dim 3          # header, required first directive
//! sqrt           # optional: model is the square root of the polynomial
//! const 5
//! cos 1 0 0 -3   # cos term: d integer frequencies then the coefficient
//! sin 1 1 0 0.25 # sin term, same layout
//! ```

use super::{DispersionModel, TrigPoly};
use crate::{LabError, Result};

/// Grammar summary, reproduced in `--help` output and the README.
pub const DSL_GRAMMAR: &str = "\
dim <d>                 header, first non-comment line
sqrt                    optional flag: take the square root of the polynomial
const <c>               constant offset (default 0, at most one line)
cos <k1> .. <kd> <c>    cosine term with integer frequency vector
sin <k1> .. <kd> <c>    sine term with integer frequency vector
#                       comment lines and blank lines are ignored";

/// Parses the text model format into a [`DispersionModel`].
pub fn parse_model(name: &str, text: &str) -> Result<DispersionModel> {
    let mut dim: Option<usize> = None;
    let mut sqrt = false;
    let mut constant: Option<f64> = None;
    let mut terms: Vec<(Vec<i64>, f64, f64)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let err = |message: String| LabError::Parse {
            line: line_no,
            message,
        };
        match fields[0] {
            "dim" => {
                if dim.is_some() {
                    return Err(err("duplicate dim header".into()));
                }
                if fields.len() != 2 {
                    return Err(err("expected: dim <d>".into()));
                }
                let d: usize = fields[1]
                    .parse()
                    .map_err(|_| err(format!("bad dimension {:?}", fields[1])))?;
                if d == 0 || d > 8 {
                    return Err(err(format!("dimension {d} out of range 1..=8")));
                }
                dim = Some(d);
            }
            "sqrt" => {
                if fields.len() != 1 {
                    return Err(err("sqrt takes no arguments".into()));
                }
                sqrt = true;
            }
            "const" => {
                if fields.len() != 2 {
                    return Err(err("expected: const <c>".into()));
                }
                if constant.is_some() {
                    return Err(err("duplicate const line".into()));
                }
                constant = Some(
                    fields[1]
                        .parse()
                        .map_err(|_| err(format!("bad constant {:?}", fields[1])))?,
                );
            }
            kind @ ("cos" | "sin") => {
                let d = dim.ok_or_else(|| err("dim header must come first".into()))?;
                if fields.len() != d + 2 {
                    return Err(err(format!("expected: {kind} <{d} frequencies> <coeff>")));
                }
                let mut m = Vec::with_capacity(d);
                for f in &fields[1..=d] {
                    m.push(
                        f.parse::<i64>()
                            .map_err(|_| err(format!("bad frequency {f:?}")))?,
                    );
                }
                let c: f64 = fields[d + 1]
                    .parse()
                    .map_err(|_| err(format!("bad coefficient {:?}", fields[d + 1])))?;
                if kind == "cos" {
                    terms.push((m, c, 0.0));
                } else {
                    terms.push((m, 0.0, c));
                }
            }
            other => return Err(err(format!("unknown directive {other:?}"))),
        }
    }

    let dim = dim.ok_or(LabError::Parse {
        line: 0,
        message: "missing dim header".into(),
    })?;

    // Merge cos/sin lines sharing a frequency before the duplicate check.
    let mut merged: Vec<(Vec<i64>, f64, f64)> = Vec::new();
    for (m, a, b) in terms {
        if let Some(e) = merged.iter_mut().find(|e| e.0 == m) {
            if (e.1 != 0.0 && a != 0.0) || (e.2 != 0.0 && b != 0.0) {
                return Err(LabError::InvalidModel(format!(
                    "duplicate {} term for frequency {m:?}",
                    if a != 0.0 { "cos" } else { "sin" }
                )));
            }
            e.1 += a;
            e.2 += b;
        } else {
            merged.push((m, a, b));
        }
    }

    let poly = TrigPoly::new(dim, constant.unwrap_or(0.0), merged)?;
    if sqrt {
        DispersionModel::sqrt_of(name, poly)
    } else {
        Ok(DispersionModel::trig(name, poly))
    }
}
