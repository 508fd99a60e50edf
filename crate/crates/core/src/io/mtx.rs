//! Matrix Market reader and writer.

use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Coordinate,
    Array,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Field {
    Real,
    Complex,
    Integer,
    Pattern,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    Hermitian,
    Skew,
}

fn parse_err(line: usize, reason: impl Into<String>) -> Error {
    Error::Parse {
        line,
        reason: reason.into(),
    }
}

fn parse_header(line: &str) -> Result<(Format, Field, Symmetry)> {
    let words: Vec<String> = line.split_whitespace().map(str::to_ascii_lowercase).collect();
    if words.len() != 5 || words[0] != "%%matrixmarket" {
        return Err(parse_err(1, "expected '%%MatrixMarket matrix <format> <field> <symmetry>'"));
    }
    if words[1] != "matrix" {
        return Err(Error::UnsupportedQualifier(words[1].clone()));
    }
    let format = match words[2].as_str() {
        "coordinate" => Format::Coordinate,
        "array" => Format::Array,
        other => return Err(Error::UnsupportedQualifier(other.to_string())),
    };
    let field = match words[3].as_str() {
        "real" | "double" => Field::Real,
        "complex" => Field::Complex,
        "integer" => Field::Integer,
        "pattern" => Field::Pattern,
        other => return Err(Error::UnsupportedQualifier(other.to_string())),
    };
    let symmetry = match words[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "hermitian" => Symmetry::Hermitian,
        "skew-symmetric" => Symmetry::Skew,
        other => return Err(Error::UnsupportedQualifier(other.to_string())),
    };
    if format == Format::Array && field == Field::Pattern {
        return Err(Error::UnsupportedQualifier("array pattern".into()));
    }
    if field == Field::Pattern && symmetry == Symmetry::Skew {
        return Err(Error::UnsupportedQualifier("pattern skew-symmetric".into()));
    }
    Ok((format, field, symmetry))
}

fn parse_usize(tok: Option<&str>, line: usize, what: &str) -> Result<usize> {
    tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?
        .parse()
        .map_err(|_| parse_err(line, format!("invalid {what}")))
}

fn parse_f64(tok: Option<&str>, line: usize) -> Result<f64> {
    let t = tok.ok_or_else(|| parse_err(line, "missing value"))?;
    t.parse()
        .map_err(|_| parse_err(line, format!("invalid number '{t}'")))
}

fn parse_value<'a>(
    toks: &mut impl Iterator<Item = &'a str>,
    field: Field,
    line: usize,
) -> Result<C64> {
    let v = match field {
        Field::Pattern => C64::new(1.0, 0.0),
        Field::Real | Field::Integer => C64::new(parse_f64(toks.next(), line)?, 0.0),
        Field::Complex => C64::new(parse_f64(toks.next(), line)?, parse_f64(toks.next(), line)?),
    };
    if toks.next().is_some() {
        return Err(parse_err(line, "trailing tokens"));
    }
    Ok(v)
}

/// Mirror image of an off-diagonal stored entry.
fn mirror(sym: Symmetry, v: C64) -> Option<C64> {
    match sym {
        Symmetry::General => None,
        Symmetry::Symmetric => Some(v),
        Symmetry::Hermitian => Some(v.conj()),
        Symmetry::Skew => Some(-v),
    }
}

/// Parse Matrix Market text. Coordinate files give sparse matrices, array
/// files dense ones. Symmetric, Hermitian and skew-symmetric storage is
/// expanded; pattern entries become 1.
pub fn parse_matrix_market(text: &str) -> Result<ComplexMatrix> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let (format, field, sym) = parse_header(header)?;
    let mut data = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (size_line, size) = data.next().ok_or_else(|| parse_err(1, "missing size line"))?;
    let mut toks = size.split_whitespace();
    let rows = parse_usize(toks.next(), size_line, "row count")?;
    let cols = parse_usize(toks.next(), size_line, "column count")?;
    if sym != Symmetry::General && rows != cols {
        return Err(parse_err(size_line, "symmetric storage needs a square matrix"));
    }

    match format {
        Format::Coordinate => {
            let nnz = parse_usize(toks.next(), size_line, "entry count")?;
            if toks.next().is_some() {
                return Err(parse_err(size_line, "trailing tokens"));
            }
            let mut triplets = Vec::with_capacity(nnz);
            let mut seen = 0;
            for (ln, l) in data {
                seen += 1;
                if seen > nnz {
                    return Err(parse_err(ln, "more entries than declared"));
                }
                let mut toks = l.split_whitespace();
                let i = parse_usize(toks.next(), ln, "row index")?;
                let j = parse_usize(toks.next(), ln, "column index")?;
                if i == 0 || j == 0 || i > rows || j > cols {
                    return Err(parse_err(ln, format!("index ({i}, {j}) out of range")));
                }
                let v = parse_value(&mut toks, field, ln)?;
                let (i, j) = (i - 1, j - 1);
                if sym != Symmetry::General && i < j {
                    return Err(parse_err(ln, "entry above the diagonal in symmetric storage"));
                }
                if sym == Symmetry::Skew && i == j {
                    return Err(parse_err(ln, "diagonal entry in skew-symmetric storage"));
                }
                triplets.push((i, j, v));
                if i != j {
                    if let Some(w) = mirror(sym, v) {
                        triplets.push((j, i, w));
                    }
                }
            }
            if seen < nnz {
                return Err(parse_err(text.lines().count(), format!("expected {nnz} entries, found {seen}")));
            }
            ComplexMatrix::from_triplets(rows, cols, triplets)
        }
        Format::Array => {
            if toks.next().is_some() {
                return Err(parse_err(size_line, "trailing tokens"));
            }
            // column-major; only the lower triangle for symmetric kinds
            let slots: Vec<(usize, usize)> = (0..cols)
                .flat_map(|j| {
                    let start = match sym {
                        Symmetry::General => 0,
                        Symmetry::Skew => j + 1,
                        _ => j,
                    };
                    (start..rows).map(move |i| (i, j))
                })
                .collect();
            let mut m = DMatrix::zeros(rows, cols);
            let mut it = slots.iter();
            for (ln, l) in data {
                let &(i, j) = it.next().ok_or_else(|| parse_err(ln, "more entries than the matrix holds"))?;
                let v = parse_value(&mut l.split_whitespace(), field, ln)?;
                m[(i, j)] = v;
                if i != j {
                    if let Some(w) = mirror(sym, v) {
                        m[(j, i)] = w;
                    }
                }
            }
            if it.next().is_some() {
                return Err(parse_err(text.lines().count(), "fewer entries than the matrix holds"));
            }
            Ok(ComplexMatrix::from_dense(m))
        }
    }
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<ComplexMatrix> {
    parse_matrix_market(&fs::read_to_string(path)?)
}

/// Coordinate `general` text with 17 significant digits, `real` when every
/// entry has zero imaginary part and `complex` otherwise.
pub fn format_matrix_market(a: &ComplexMatrix) -> String {
    let t = a.triplets();
    let complex = t.iter().any(|e| e.2.im != 0.0);
    let mut out = format!(
        "%%MatrixMarket matrix coordinate {} general\n{} {} {}\n",
        if complex { "complex" } else { "real" },
        a.nrows(),
        a.ncols(),
        t.len()
    );
    for (i, j, v) in t {
        if complex {
            out.push_str(&format!("{} {} {:.16e} {:.16e}\n", i + 1, j + 1, v.re, v.im));
        } else {
            out.push_str(&format!("{} {} {:.16e}\n", i + 1, j + 1, v.re));
        }
    }
    out
}

pub fn write_matrix(path: impl AsRef<Path>, a: &ComplexMatrix) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(format_matrix_market(a).as_bytes())?;
    Ok(())
}
