//! `.vtx` point files and `.lin` constraint files.
//!
//! ```text
//! # .vtx: header `n N`, then N rows of n rationals
//! 4 2
//! 1 6 2 1
//! 1 6 1 2
//!
//! # .lin: `REL RHS c1 .. cn`
//! EQ 10 1 1 1 1
//! GE 3 0 1 1 0
//! ```
//!
//! Blank lines and lines starting with `#` are ignored in both formats.

use thiserror::Error;

use super::{LinearConstraint, PolytopeError, Relation, VertexSet};
use crate::ratlinalg::{format_rational, parse_rational, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error(transparent)]
    Set(#[from] PolytopeError),
}

fn syntax(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax { line, message: message.into() }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_values(line_no: usize, tokens: &[&str]) -> Result<Vec<Rational>, ParseError> {
    tokens
        .iter()
        .map(|t| parse_rational(t).map_err(|e| syntax(line_no, e.to_string())))
        .collect()
}

pub fn parse_vtx(text: &str) -> Result<VertexSet, ParseError> {
    let mut lines = content_lines(text);
    let (header_no, header) = lines.next().ok_or_else(|| syntax(1, "missing `n N` header"))?;
    let header: Vec<&str> = header.split_whitespace().collect();
    let [n, count] = header.as_slice() else {
        return Err(syntax(header_no, "header must be `n N`"));
    };
    let n: usize = n.parse().map_err(|_| syntax(header_no, "bad dimension"))?;
    let count: usize = count.parse().map_err(|_| syntax(header_no, "bad point count"))?;
    let mut points = Vec::with_capacity(count);
    let mut last_line = header_no;
    for (line_no, line) in lines {
        last_line = line_no;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != n {
            return Err(syntax(line_no, format!("expected {n} values, found {}", tokens.len())));
        }
        if points.len() == count {
            return Err(syntax(line_no, format!("more than {count} points")));
        }
        points.push(parse_values(line_no, &tokens)?);
    }
    if points.len() != count {
        return Err(syntax(last_line, format!("expected {count} points, found {}", points.len())));
    }
    Ok(VertexSet::new(points)?)
}

pub fn format_vtx(set: &VertexSet) -> String {
    let mut out = format!("{} {}\n", set.ambient_dim(), set.len());
    for p in set.points() {
        let row: Vec<String> = p.iter().map(format_rational).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// Parses one `REL RHS c1 .. cn` line (line number 1 in errors).
pub fn parse_lin_line(line: &str) -> Result<LinearConstraint, ParseError> {
    parse_lin_tokens(1, line)
}

fn parse_lin_tokens(line_no: usize, line: &str) -> Result<LinearConstraint, ParseError> {
    let tokens: Vec<&str> = line.split_whitespace().collect();
    if tokens.len() < 3 {
        return Err(syntax(line_no, "expected `REL RHS c1 .. cn`"));
    }
    let relation = match tokens[0].to_ascii_uppercase().as_str() {
        "EQ" => Relation::Eq,
        "GE" => Relation::Ge,
        "LE" => Relation::Le,
        other => return Err(syntax(line_no, format!("unknown relation `{other}`"))),
    };
    let rhs = parse_values(line_no, &tokens[1..2])?.remove(0);
    let coeffs = parse_values(line_no, &tokens[2..])?;
    let c = LinearConstraint::new(coeffs, relation, rhs);
    if c.is_trivial() {
        return Err(syntax(line_no, "all coefficients are zero"));
    }
    Ok(c)
}

/// Parses a constraint file; when `width` is given every row must have that many coefficients.
pub fn parse_lin(text: &str, width: Option<usize>) -> Result<Vec<LinearConstraint>, ParseError> {
    let mut out: Vec<LinearConstraint> = Vec::new();
    for (line_no, line) in content_lines(text) {
        let c = parse_lin_tokens(line_no, line)?;
        let expected = width.or_else(|| out.first().map(LinearConstraint::width));
        if let Some(w) = expected {
            if c.width() != w {
                return Err(syntax(line_no, format!("expected {w} coefficients, found {}", c.width())));
            }
        }
        out.push(c);
    }
    Ok(out)
}

pub fn format_lin(constraints: &[LinearConstraint]) -> String {
    constraints.iter().map(|c| format!("{c}\n")).collect()
}
