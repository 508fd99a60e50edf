//! JSON document for polynomial systems:
//!
//! ```json
//! {"nvars": 2, "degrees": [2, 2],
//!  "polynomials": [[{"exponents": [2, 0], "coeff": [1.0, 0.0]}, ...], ...],
//!  "point": [[0.0, 0.0], [0.0, 0.0]]}
//! ```

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::C64;
use crate::polysys::{Polynomial, PolynomialSystem};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Term {
    exponents: Vec<u32>,
    coeff: [f64; 2],
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    nvars: usize,
    degrees: Vec<u32>,
    polynomials: Vec<Vec<Term>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    point: Option<Vec<[f64; 2]>>,
}

fn parse_err(line: usize, reason: impl Into<String>) -> Error {
    Error::Parse {
        line,
        reason: reason.into(),
    }
}

/// Parse a system and its optional point. Duplicate monomials are summed and
/// zero coefficients dropped.
pub fn parse_polysys(text: &str) -> Result<(PolynomialSystem, Option<Vec<C64>>)> {
    let doc: Document =
        serde_json::from_str(text).map_err(|e| parse_err(e.line(), e.to_string()))?;
    if doc.nvars == 0 {
        return Err(parse_err(0, "nvars must be positive"));
    }
    if doc.polynomials.is_empty() {
        return Err(parse_err(0, "polynomial list is empty"));
    }
    if doc.degrees.len() != doc.polynomials.len() {
        return Err(parse_err(
            0,
            format!(
                "{} degrees for {} polynomials",
                doc.degrees.len(),
                doc.polynomials.len()
            ),
        ));
    }
    if let Some(i) = doc.degrees.iter().position(|&d| d == 0) {
        return Err(parse_err(0, format!("degree of polynomial {i} must be positive")));
    }
    let mut polys = Vec::with_capacity(doc.polynomials.len());
    for (i, terms) in doc.polynomials.iter().enumerate() {
        if let Some(t) = terms.iter().find(|t| t.exponents.len() != doc.nvars) {
            return Err(parse_err(
                0,
                format!(
                    "polynomial {i}: exponent vector {:?} does not have {} entries",
                    t.exponents, doc.nvars
                ),
            ));
        }
        if let Some(t) = terms.iter().find(|t| !t.coeff.iter().all(|v| v.is_finite())) {
            return Err(parse_err(0, format!("polynomial {i}: non-finite coefficient {:?}", t.coeff)));
        }
        polys.push(Polynomial::from_terms(
            doc.nvars,
            terms
                .iter()
                .map(|t| (t.exponents.clone(), C64::new(t.coeff[0], t.coeff[1]))),
        ));
    }
    let system = PolynomialSystem::new(doc.nvars, polys, doc.degrees)?;
    let point = match doc.point {
        Some(p) if p.len() != doc.nvars => {
            return Err(parse_err(0, format!("point has {} coordinates, expected {}", p.len(), doc.nvars)))
        }
        Some(p) => Some(p.iter().map(|v| C64::new(v[0], v[1])).collect()),
        None => None,
    };
    Ok((system, point))
}

pub fn read_polysys(path: impl AsRef<Path>) -> Result<(PolynomialSystem, Option<Vec<C64>>)> {
    parse_polysys(&fs::read_to_string(path)?)
}

/// Canonical serialization: terms in graded-lex order, no zero coefficients.
pub fn format_polysys(f: &PolynomialSystem, point: Option<&[C64]>) -> String {
    let doc = Document {
        nvars: f.nvars(),
        degrees: f.degrees().to_vec(),
        polynomials: f
            .polys()
            .iter()
            .map(|p| {
                p.terms()
                    .map(|(m, v)| Term {
                        exponents: m.0.clone(),
                        coeff: [v.re, v.im],
                    })
                    .collect()
            })
            .collect(),
        point: point.map(|p| p.iter().map(|v| [v.re, v.im]).collect()),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("plain data serializes");
    s.push('\n');
    s
}

pub fn write_polysys(path: impl AsRef<Path>, f: &PolynomialSystem, point: Option<&[C64]>) -> Result<()> {
    fs::write(path, format_polysys(f, point))?;
    Ok(())
}
