//! TSPLIB reader for explicit full-matrix ATSP instances.

use super::{AtspInstance, TspError};
use crate::ratlinalg::{format_rational, parse_rational, Rational};

fn unsupported(msg: impl Into<String>) -> TspError {
    TspError::UnsupportedFormat(msg.into())
}

/// Parses `TYPE: ATSP` with `EDGE_WEIGHT_TYPE: EXPLICIT` and `EDGE_WEIGHT_FORMAT: FULL_MATRIX`.
///
/// The weight section is read as a whitespace-separated token stream up to `EOF` or the end
/// of input, and must hold exactly `DIMENSION²` entries.
pub fn parse_tsplib_atsp(text: &str) -> Result<AtspInstance, TspError> {
    let mut name = String::new();
    let mut dimension: Option<usize> = None;
    let mut kind = None;
    let mut weight_type = None;
    let mut weight_format = None;
    let mut lines = text.lines();
    let mut in_section = false;
    for line in lines.by_ref() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with("EDGE_WEIGHT_SECTION") {
            in_section = true;
            break;
        }
        if line == "EOF" {
            break;
        }
        let Some((key, value)) = line.split_once(':') else {
            return Err(unsupported(format!("unexpected header line `{line}`")));
        };
        let value = value.trim().to_string();
        match key.trim() {
            "NAME" => name = value,
            "TYPE" => kind = Some(value),
            "DIMENSION" => {
                dimension = Some(value.parse().map_err(|_| unsupported(format!("bad DIMENSION `{value}`")))?)
            }
            "EDGE_WEIGHT_TYPE" => weight_type = Some(value),
            "EDGE_WEIGHT_FORMAT" => weight_format = Some(value),
            _ => {}
        }
    }
    let require = |field: &str, got: &Option<String>, want: &str| match got.as_deref() {
        Some(v) if v == want => Ok(()),
        Some(v) => Err(unsupported(format!("{field} `{v}`, only `{want}` is supported"))),
        None => Err(unsupported(format!("missing {field}"))),
    };
    require("TYPE", &kind, "ATSP")?;
    require("EDGE_WEIGHT_TYPE", &weight_type, "EXPLICIT")?;
    require("EDGE_WEIGHT_FORMAT", &weight_format, "FULL_MATRIX")?;
    let n = dimension.ok_or_else(|| unsupported("missing DIMENSION"))?;
    if !in_section {
        return Err(unsupported("missing EDGE_WEIGHT_SECTION"));
    }
    let tokens: Vec<&str> = lines
        .flat_map(str::split_whitespace)
        .take_while(|t| *t != "EOF")
        .collect();
    if tokens.len() != n * n {
        return Err(TspError::DimensionMismatch { expected: n * n, found: tokens.len() });
    }
    let values: Vec<Rational> = tokens
        .iter()
        .map(|t| parse_rational(t).map_err(|e| unsupported(e.to_string())))
        .collect::<Result<_, _>>()?;
    let costs = values.chunks(n).map(<[Rational]>::to_vec).collect();
    AtspInstance::new(name, costs)
}

/// Writes an instance in the format [`parse_tsplib_atsp`] reads.
pub fn format_tsplib_atsp(inst: &AtspInstance) -> String {
    let mut out = format!(
        "NAME: {}\nTYPE: ATSP\nDIMENSION: {}\nEDGE_WEIGHT_TYPE: EXPLICIT\nEDGE_WEIGHT_FORMAT: FULL_MATRIX\nEDGE_WEIGHT_SECTION\n",
        inst.name,
        inst.n()
    );
    for row in &inst.costs {
        out.push_str(&row.iter().map(format_rational).collect::<Vec<_>>().join(" "));
        out.push('\n');
    }
    out.push_str("EOF\n");
    out
}
