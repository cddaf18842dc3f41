//! Grid sweeps over one or two functionality axes.

use mcdp_core::lang::PortInfo;
use mcdp_core::solver::SolveStatus;
use mcdp_core::{IterationBudget, Value};
use rayon::prelude::*;
use serde_json::{json, Value as Json};

use crate::query::{bind, iterations, point_json, render_point, run, Prepared};
use crate::quantity::{format_number, Quantity};
use crate::CliError;

#[derive(Clone, Debug, PartialEq)]
pub struct Axis {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
    pub log: bool,
    /// Unit of `min` and `max`; the port's declared unit when absent.
    pub unit: Option<String>,
}

impl Axis {
    /// Parses `name[unit]:min:max:steps[:log]`.
    pub fn parse(text: &str) -> Result<Axis, CliError> {
        let usage = || CliError::Usage(format!("expected name:min:max:steps[:log], got `{text}`"));
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 4 && parts.len() != 5 {
            return Err(usage());
        }
        let log = match parts.get(4) {
            None | Some(&"lin") => false,
            Some(&"log") => true,
            Some(_) => return Err(usage()),
        };
        let (name, unit) = match parts[0].split_once('[') {
            Some((n, u)) => (n, Some(u.strip_suffix(']').ok_or_else(usage)?.to_string())),
            None => (parts[0], None),
        };
        let num = |s: &str| s.parse::<f64>().map_err(|_| usage());
        let axis = Axis {
            name: name.to_string(),
            min: num(parts[1])?,
            max: num(parts[2])?,
            steps: parts[3].parse().map_err(|_| usage())?,
            log,
            unit,
        };
        if axis.steps < 2 {
            return Err(CliError::Usage(format!("axis {} needs at least 2 steps", axis.name)));
        }
        if !(axis.min >= 0.0 && axis.max >= axis.min && axis.max.is_finite()) {
            return Err(CliError::Usage(format!("axis {} needs 0 <= min <= max", axis.name)));
        }
        if axis.log && axis.min <= 0.0 {
            return Err(CliError::Usage(format!("log axis {} needs min > 0", axis.name)));
        }
        Ok(axis)
    }

    /// Grid values, endpoints included.
    pub fn values(&self) -> Vec<f64> {
        let n = self.steps - 1;
        (0..=n)
            .map(|i| {
                if i == 0 {
                    return self.min;
                }
                if i == n {
                    return self.max;
                }
                let t = i as f64 / n as f64;
                if self.log {
                    (self.min.ln() + t * (self.max.ln() - self.min.ln())).exp()
                } else {
                    self.min + t * (self.max - self.min)
                }
            })
            .collect()
    }

    fn quantity(&self, x: f64) -> Quantity {
        Quantity { value: Some(x), unit: self.unit.clone() }
    }
}

#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub x: Axis,
    pub y: Option<Axis>,
    pub fixed: Vec<(String, Quantity)>,
}

/// One grid point.
#[derive(Clone, Debug)]
pub struct Row {
    pub x: f64,
    pub y: Option<f64>,
    pub functionality: Value,
    pub status: SolveStatus,
    pub iterations: Vec<usize>,
    /// Minimal resources with their coproduct tags.
    pub solutions: Vec<(Value, Vec<String>)>,
}

impl Row {
    pub fn count(&self) -> usize {
        self.solutions.len()
    }

    /// Tags of all minimal solutions, sorted, deduplicated.
    pub fn winners(&self) -> Vec<String> {
        let mut w: Vec<String> = self.solutions.iter().flat_map(|(_, t)| t.clone()).collect();
        w.sort();
        w.dedup();
        w
    }
}

/// Solves every grid point; rows come back in grid order (x outer, y inner).
pub fn sweep(p: &Prepared, spec: &SweepSpec, budget: IterationBudget) -> Result<Vec<Row>, CliError> {
    for a in std::iter::once(&spec.x).chain(&spec.y) {
        if !p.provides.iter().any(|q| q.name == a.name) {
            return Err(CliError::Usage(format!("model has no functionality named {}", a.name)));
        }
    }
    if spec.y.as_ref().is_some_and(|y| y.name == spec.x.name) {
        return Err(CliError::Usage("the two axes must differ".into()));
    }
    let ys: Vec<Option<f64>> = match &spec.y {
        Some(y) => y.values().into_iter().map(Some).collect(),
        None => vec![None],
    };
    let mut points = Vec::new();
    for x in spec.x.values() {
        for &y in &ys {
            let mut b = spec.fixed.clone();
            b.push((spec.x.name.clone(), spec.x.quantity(x)));
            if let (Some(axis), Some(y)) = (&spec.y, y) {
                b.push((axis.name.clone(), axis.quantity(y)));
            }
            points.push((x, y, bind(&p.provides, &b)?));
        }
    }
    points
        .into_par_iter()
        .map(|(x, y, f)| {
            let r = run(p, &f, budget)?;
            let solutions = r
                .antichain
                .items()
                .iter()
                .map(|(v, t)| (v.clone(), t.iter().map(|s| s.to_string()).collect()))
                .collect();
            Ok(Row { x, y, status: r.status, iterations: iterations(&r), solutions, functionality: f })
        })
        .collect()
}

fn encode_solutions(row: &Row, requires: &[PortInfo]) -> String {
    row.solutions
        .iter()
        .map(|(v, tags)| {
            let point = render_point(v, requires);
            if tags.is_empty() {
                point
            } else {
                format!("{point} [{}]", tags.join(" "))
            }
        })
        .collect::<Vec<_>>()
        .join(" | ")
}

pub fn to_csv(p: &Prepared, spec: &SweepSpec, rows: &[Row]) -> String {
    let mut out = spec.x.name.clone();
    if let Some(y) = &spec.y {
        out.push(',');
        out.push_str(&y.name);
    }
    out.push_str(",status,iterations,n_solutions,winners,solutions\n");
    for r in rows {
        let mut cols = vec![format_number(r.x)];
        if let Some(y) = r.y {
            cols.push(format_number(y));
        }
        cols.push(r.status.to_string());
        cols.push(r.iterations.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" "));
        cols.push(r.count().to_string());
        cols.push(r.winners().join(" "));
        cols.push(format!("\"{}\"", encode_solutions(r, &p.requires).replace('"', "\"\"")));
        out.push_str(&cols.join(","));
        out.push('\n');
    }
    out
}

pub fn to_json(p: &Prepared, rows: &[Row]) -> Json {
    Json::Array(
        rows.iter()
            .map(|r| {
                json!({
                    "functionality": point_json(&r.functionality, &p.provides),
                    "status": r.status.to_string(),
                    "iterations": r.iterations,
                    "n_solutions": r.count(),
                    "winners": r.winners(),
                    "solutions": r.solutions.iter().map(|(v, t)| json!({
                        "resources": point_json(v, &p.requires),
                        "tags": t,
                    })).collect::<Vec<_>>(),
                })
            })
            .collect(),
    )
}
