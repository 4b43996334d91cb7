//! Plain-text dump of a model, for debugging.
//!
//! ```text
//! VARS 2
//! x 0 inf C
//! t 0 1 B
//! OBJ MAX 1 2
//! LE 4 1 1
//! ```
//!
//! Constraint lines use the `.lin` syntax `REL RHS c1 .. cn`.

use std::fmt::Write;

use super::{Integrality, MipModel, OptimizerError, Sense, Variable};
use crate::polytope::{LinearConstraint, Relation};
use crate::ratlinalg::{format_rational, parse_rational, Rational};

pub fn format_model(model: &MipModel) -> String {
    let mut out = String::new();
    let bound = |b: &Option<Rational>, inf: &str| b.as_ref().map_or(inf.to_string(), format_rational);
    writeln!(out, "VARS {}", model.num_vars()).unwrap();
    for v in &model.variables {
        let kind = match v.integrality {
            Integrality::Continuous => 'C',
            Integrality::Binary => 'B',
        };
        writeln!(out, "{} {} {} {}", v.name, bound(&v.lower, "-inf"), bound(&v.upper, "inf"), kind).unwrap();
    }
    let sense = match model.sense {
        Sense::Min => "MIN",
        Sense::Max => "MAX",
    };
    write!(out, "OBJ {sense}").unwrap();
    for c in &model.objective {
        write!(out, " {}", format_rational(c)).unwrap();
    }
    out.push('\n');
    for c in &model.constraints {
        writeln!(out, "{c}").unwrap();
    }
    out
}

pub fn parse_model(text: &str) -> Result<MipModel, OptimizerError> {
    let bad = |line: usize, msg: &str| OptimizerError::InvalidModel(format!("line {line}: {msg}"));
    let num = |line: usize, tok: &str| parse_rational(tok).map_err(|e| bad(line, &e.0));
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (no, header) = lines.next().ok_or_else(|| bad(1, "missing VARS header"))?;
    let count: usize = header
        .strip_prefix("VARS")
        .and_then(|r| r.trim().parse().ok())
        .ok_or_else(|| bad(no, "expected `VARS k`"))?;
    let mut model = MipModel::new(Sense::Min);
    for _ in 0..count {
        let (no, line) = lines.next().ok_or_else(|| bad(no, "missing variable line"))?;
        let t: Vec<&str> = line.split_whitespace().collect();
        if t.len() != 4 {
            return Err(bad(no, "expected `name lower upper C|B`"));
        }
        let lower = if t[1] == "-inf" { None } else { Some(num(no, t[1])?) };
        let upper = if t[2] == "inf" { None } else { Some(num(no, t[2])?) };
        let integrality = match t[3] {
            "C" => Integrality::Continuous,
            "B" => Integrality::Binary,
            _ => return Err(bad(no, "integrality must be C or B")),
        };
        model.add_variable(Variable { name: t[0].to_string(), lower, upper, integrality });
    }
    let (no, obj) = lines.next().ok_or_else(|| bad(no, "missing OBJ line"))?;
    let t: Vec<&str> = obj.split_whitespace().collect();
    if t.len() != count + 2 || t[0] != "OBJ" {
        return Err(bad(no, "expected `OBJ MIN|MAX c1 .. ck`"));
    }
    model.sense = match t[1] {
        "MIN" => Sense::Min,
        "MAX" => Sense::Max,
        _ => return Err(bad(no, "sense must be MIN or MAX")),
    };
    model.objective = t[2..].iter().map(|tok| num(no, tok)).collect::<Result<_, _>>()?;
    for (no, line) in lines {
        let t: Vec<&str> = line.split_whitespace().collect();
        if t.len() != count + 2 {
            return Err(bad(no, "constraint width mismatch"));
        }
        let relation = match t[0] {
            "EQ" => Relation::Eq,
            "GE" => Relation::Ge,
            "LE" => Relation::Le,
            _ => return Err(bad(no, "unknown relation")),
        };
        let rhs = num(no, t[1])?;
        let coeffs = t[2..].iter().map(|tok| num(no, tok)).collect::<Result<_, _>>()?;
        model.add_constraint(LinearConstraint::new(coeffs, relation, rhs))?;
    }
    model.validate()?;
    Ok(model)
}
