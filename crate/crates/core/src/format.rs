//! The line-oriented operator-spec text format.
//!
//! ```text
//! # comment
//! factor II_1
//! atom 0 0 value 1/2
//! block rect 0 0 1 1 value 1/4
//! block seg 0 0 1 0 value 1/4
//! ```
//!
//! or, for a matrix,
//!
//! ```text
//! factor I_fin 2
//! matrix 2
//! 1+0i 0+0i
//! 0+0i 0+1i
//! ```
//!
//! Coordinates are exact dyadic rationals `p/q` (or integers); values use
//! the factor's notation (`3`, `aleph0`, `1/2`, `inf`). Matrix entries are
//! `a+bi` with decimal doubles.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::dimlat::{DimError, FactorType};
use crate::distance::{CMatrix, DistanceError, NormalMatrix};
use crate::dyadic::Dyadic;
use crate::region::{DyadicPoint, OpenRegion, Rect, Segment};
use crate::specmeas::{Atom, Block, Shape, SpecError, SpectralMeasure};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("invalid operator: {0}")]
    Invariant(String),
}

impl From<SpecError> for FormatError {
    fn from(e: SpecError) -> Self {
        FormatError::Invariant(e.to_string())
    }
}

impl From<DistanceError> for FormatError {
    fn from(e: DistanceError) -> Self {
        FormatError::Invariant(e.to_string())
    }
}

/// The content of one operator-spec file.
#[derive(Debug, Clone)]
pub enum Operator {
    Measure(SpectralMeasure),
    Matrix {
        factor: FactorType,
        matrix: NormalMatrix,
    },
}

impl Operator {
    pub fn factor(&self) -> FactorType {
        match self {
            Operator::Measure(m) => m.factor(),
            Operator::Matrix { factor, .. } => *factor,
        }
    }
}

impl PartialEq for Operator {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Operator::Measure(a), Operator::Measure(b)) => a == b,
            (
                Operator::Matrix {
                    factor: f,
                    matrix: a,
                },
                Operator::Matrix {
                    factor: g,
                    matrix: b,
                },
            ) => f == g && a.matrix() == b.matrix(),
            _ => false,
        }
    }
}

fn syntax(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Syntax {
        line,
        msg: msg.into(),
    }
}

fn parse_factor(line: usize, words: &[&str]) -> Result<FactorType, FormatError> {
    let number = |w: Option<&&str>| -> Result<u64, FormatError> {
        w.ok_or_else(|| syntax(line, "missing factor parameter"))?
            .parse()
            .map_err(|_| syntax(line, "factor parameter must be a nonnegative integer"))
    };
    let f = match words {
        ["I_fin", rest @ ..] if rest.len() == 1 => {
            let n = number(rest.first())?;
            if n == 0 {
                return Err(syntax(line, "I_fin needs n >= 1"));
            }
            FactorType::IFin(n)
        }
        ["I_inf", rest @ ..] if rest.len() == 1 => {
            let k = number(rest.first())?;
            FactorType::IInf(u32::try_from(k).map_err(|_| syntax(line, "aleph index too large"))?)
        }
        ["II_1"] => FactorType::II1,
        ["II_inf"] => FactorType::IIInf,
        ["III"] => FactorType::III,
        _ => {
            return Err(syntax(
                line,
                format!("unknown factor `{}`", words.join(" ")),
            ))
        }
    };
    Ok(f)
}

fn dyadic(line: usize, w: &str) -> Result<Dyadic, FormatError> {
    w.parse().map_err(|e| syntax(line, format!("{e}")))
}

/// Parses `a+bi`, `a-bi`, `a`, or `bi`.
pub fn parse_complex(text: &str) -> Option<Complex64> {
    let t = text.trim();
    let finite = |z: Complex64| (z.re.is_finite() && z.im.is_finite()).then_some(z);
    let Some(body) = t.strip_suffix('i') else {
        return finite(Complex64::new(t.parse().ok()?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    match split {
        Some(i) => {
            let re: f64 = body[..i].parse().ok()?;
            let im_text = &body[i..];
            let im: f64 = match im_text {
                "+" => 1.0,
                "-" => -1.0,
                s => s.parse().ok()?,
            };
            finite(Complex64::new(re, im))
        }
        None => {
            let im: f64 = match body {
                "" | "+" => 1.0,
                "-" => -1.0,
                s => s.parse().ok()?,
            };
            finite(Complex64::new(0.0, im))
        }
    }
}

pub fn format_complex(z: Complex64) -> String {
    if z.im.is_sign_negative() {
        format!("{}{}i", z.re, z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

/// Parses one operator-spec document.
pub fn parse_spec(text: &str) -> Result<Operator, FormatError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (hline, header) = lines
        .next()
        .ok_or_else(|| syntax(1, "empty file; expected `factor`"))?;
    let words: Vec<&str> = header.split_whitespace().collect();
    if words.first() != Some(&"factor") {
        return Err(syntax(hline, "first record must be `factor`"));
    }
    let factor = parse_factor(hline, &words[1..])?;

    let mut atoms = Vec::new();
    let mut blocks = Vec::new();
    let mut matrix: Option<CMatrix> = None;

    while let Some((ln, line)) = lines.next() {
        let words: Vec<&str> = line.split_whitespace().collect();
        match words.as_slice() {
            ["atom", x, y, "value", v] => {
                if matrix.is_some() {
                    return Err(syntax(ln, "a file holds either a measure or a matrix"));
                }
                let pt = DyadicPoint::new(dyadic(ln, x)?, dyadic(ln, y)?);
                let val = factor.parse_value(v).map_err(|e| dim_syntax(ln, e))?;
                atoms.push(Atom { pt, val });
            }
            ["block", kind, x0, y0, x1, y1, "value", v] => {
                if matrix.is_some() {
                    return Err(syntax(ln, "a file holds either a measure or a matrix"));
                }
                let (a, b) = (
                    DyadicPoint::new(dyadic(ln, x0)?, dyadic(ln, y0)?),
                    DyadicPoint::new(dyadic(ln, x1)?, dyadic(ln, y1)?),
                );
                let shape = match *kind {
                    "rect" => {
                        if a.x > b.x || a.y > b.y {
                            return Err(syntax(
                                ln,
                                "rect corners must be lower-left then upper-right",
                            ));
                        }
                        Shape::Rect(Rect::new(a.x, a.y, b.x, b.y))
                    }
                    "seg" => Shape::Seg(Segment::new(a, b).map_err(|e| syntax(ln, e.to_string()))?),
                    other => return Err(syntax(ln, format!("unknown block kind `{other}`"))),
                };
                let val = factor.parse_value(v).map_err(|e| dim_syntax(ln, e))?;
                blocks.push(Block { shape, val });
            }
            ["matrix", n] => {
                if matrix.is_some() || !atoms.is_empty() || !blocks.is_empty() {
                    return Err(syntax(ln, "a file holds either a measure or a matrix"));
                }
                let n: usize = n
                    .parse()
                    .map_err(|_| syntax(ln, "matrix size must be a positive integer"))?;
                if n == 0 {
                    return Err(syntax(ln, "matrix size must be a positive integer"));
                }
                let mut m = CMatrix::zeros(n, n);
                for r in 0..n {
                    let (rl, row) = lines
                        .next()
                        .ok_or_else(|| syntax(ln + r + 1, format!("expected {n} matrix rows")))?;
                    let entries: Vec<&str> = row.split_whitespace().collect();
                    if entries.len() != n {
                        return Err(syntax(
                            rl,
                            format!("expected {n} entries, found {}", entries.len()),
                        ));
                    }
                    for (c, e) in entries.iter().enumerate() {
                        m[(r, c)] = parse_complex(e)
                            .ok_or_else(|| syntax(rl, format!("bad complex entry `{e}`")))?;
                    }
                }
                matrix = Some(m);
            }
            _ => return Err(syntax(ln, format!("unrecognized record `{line}`"))),
        }
    }

    match matrix {
        Some(m) => {
            if let FactorType::IFin(n) = factor {
                if n as usize != m.nrows() {
                    return Err(FormatError::Invariant(format!(
                        "matrix is {0}×{0} but the factor is I_fin {n}",
                        m.nrows()
                    )));
                }
            } else {
                return Err(FormatError::Invariant(format!(
                    "matrices live in I_fin factors, not {factor}"
                )));
            }
            Ok(Operator::Matrix {
                factor,
                matrix: NormalMatrix::new(m)?,
            })
        }
        None => Ok(Operator::Measure(SpectralMeasure::new(
            factor, atoms, blocks,
        )?)),
    }
}

fn dim_syntax(line: usize, e: DimError) -> FormatError {
    syntax(line, e.to_string())
}

/// Writes an operator in the text format; `parse_spec` reads it back to an
/// equal operator.
pub fn serialize(op: &Operator) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "factor {}", op.factor());
    match op {
        Operator::Measure(m) => {
            for a in m.atoms() {
                let _ = writeln!(out, "atom {} {} value {}", a.pt.x, a.pt.y, a.val);
            }
            for b in m.blocks() {
                let (kind, r) = match b.shape {
                    Shape::Rect(r) => ("rect", r),
                    Shape::Seg(s) => ("seg", s.as_rect()),
                };
                let _ = writeln!(
                    out,
                    "block {kind} {} {} {} {} value {}",
                    r.x0, r.y0, r.x1, r.y1, b.val
                );
            }
        }
        Operator::Matrix { matrix, .. } => {
            let m = matrix.matrix();
            let _ = writeln!(out, "matrix {}", m.nrows());
            for r in 0..m.nrows() {
                let row: Vec<String> = (0..m.ncols()).map(|c| format_complex(m[(r, c)])).collect();
                let _ = writeln!(out, "{}", row.join(" "));
            }
        }
    }
    out
}

/// Writes an open region as one `open x0 y0 x1 y1` record per rectangle.
pub fn region_text(o: &OpenRegion) -> String {
    let mut out = String::new();
    for r in o.rects() {
        let _ = writeln!(out, "open {} {} {} {}", r.x0, r.y0, r.x1, r.y1);
    }
    out
}

/// Reads the records written by [`region_text`].
pub fn parse_region(text: &str) -> Result<OpenRegion, FormatError> {
    let mut rects = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let ln = i + 1;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        let ["open", x0, y0, x1, y1] = words.as_slice() else {
            return Err(syntax(ln, format!("unrecognized region record `{line}`")));
        };
        let (x0, y0, x1, y1) = (
            dyadic(ln, x0)?,
            dyadic(ln, y0)?,
            dyadic(ln, x1)?,
            dyadic(ln, y1)?,
        );
        if x0 > x1 || y0 > y1 {
            return Err(syntax(
                ln,
                "rect corners must be lower-left then upper-right",
            ));
        }
        rects.push(Rect::new(x0, y0, x1, y1));
    }
    Ok(OpenRegion::from_rects(rects))
}
