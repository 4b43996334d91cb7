//! Bound reports: one `BOUND instance model beta value` line per solve, and an aligned
//! instance-by-column table.

use std::fmt;

use crate::ratlinalg::{to_f64, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Sd,
    TspH,
    TspHStar,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Sd => "SD",
            ModelKind::TspH => "TSP_H",
            ModelKind::TspHStar => "TSP_H*",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundRow {
    pub instance: String,
    pub model: ModelKind,
    /// `None` for models without a discount factor.
    pub beta: Option<Rational>,
    pub value: f64,
}

impl BoundRow {
    fn column(&self) -> String {
        match &self.beta {
            Some(b) => format!("{}({})", self.model, to_f64(b)),
            None => self.model.to_string(),
        }
    }
}

pub fn format_bound_line(row: &BoundRow) -> String {
    let beta = row.beta.as_ref().map_or("-".to_string(), |b| to_f64(b).to_string());
    format!("BOUND {} {} {} {:.4}", row.instance, row.model, beta, row.value)
}

/// Instances down, `model(beta)` columns across in first-seen order; values at 4 decimals.
pub fn format_bounds_table(rows: &[BoundRow]) -> String {
    let mut columns: Vec<String> = Vec::new();
    let mut instances: Vec<&str> = Vec::new();
    for r in rows {
        let c = r.column();
        if !columns.contains(&c) {
            columns.push(c);
        }
        if !instances.contains(&r.instance.as_str()) {
            instances.push(&r.instance);
        }
    }
    let mut grid: Vec<Vec<String>> = vec![std::iter::once("Problem".to_string()).chain(columns.iter().cloned()).collect()];
    for inst in &instances {
        let mut line = vec![inst.to_string()];
        for c in &columns {
            let cell = rows
                .iter()
                .find(|r| r.instance == *inst && r.column() == *c)
                .map_or("-".to_string(), |r| format!("{:.4}", r.value));
            line.push(cell);
        }
        grid.push(line);
    }
    let widths: Vec<usize> =
        (0..grid[0].len()).map(|k| grid.iter().map(|l| l[k].chars().count()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for line in grid {
        let cells: Vec<String> = line
            .iter()
            .enumerate()
            .map(|(k, s)| if k == 0 { format!("{s:<w$}", w = widths[k]) } else { format!("{s:>w$}", w = widths[k]) })
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}
