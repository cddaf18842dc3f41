//! Queries against a compiled model: bind functionalities, pick objectives, solve, render.

use std::collections::BTreeSet;

use mcdp_core::graph::{Node, PortRef};
use mcdp_core::lang::{CompiledModel, PortInfo};
use mcdp_core::posets::{bundle, Value};
use mcdp_core::solver::{solve, SolveResult, SolveStatus};
use mcdp_core::{DesignProblem, DpTree, IterationBudget};
use serde_json::{json, Map, Value as Json};

use crate::quantity::{components, magnitude, render, Quantity};
use crate::CliError;

/// A model prepared for repeated solving.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub provides: Vec<PortInfo>,
    pub requires: Vec<PortInfo>,
    pub tree: DpTree,
}

/// Keeps only the `objective` resources. The others are terminated with ⊤, or hard-limited
/// when they appear in `limits`.
pub fn restrict(
    mut model: CompiledModel,
    objective: Option<&[String]>,
    limits: &[(String, Quantity)],
) -> Result<CompiledModel, CliError> {
    for name in objective.into_iter().flatten().chain(limits.iter().map(|(n, _)| n)) {
        if !model.requires.iter().any(|p| &p.name == name) {
            return Err(CliError::Usage(format!("model has no resource named {name}")));
        }
    }
    let keep = |name: &str| {
        objective.is_none_or(|o| o.iter().any(|n| n == name)) && !limits.iter().any(|(n, _)| n == name)
    };
    let mut requires = Vec::new();
    let mut exposed = Vec::new();
    let old = std::mem::take(&mut model.graph.exposed_res);
    for (info, (name, at)) in model.requires.iter().zip(old) {
        if keep(&name) {
            requires.push(info.clone());
            exposed.push((name, at));
            continue;
        }
        let dp = match limits.iter().find(|(n, _)| *n == name) {
            Some((_, q)) => DesignProblem::limit(&format!("limit:{name}"), info.poset.clone(), q.to_value(info)?)?,
            None => DesignProblem::top_terminator(&format!("ignore:{name}"), info.poset.clone()),
        };
        let node = model.graph.add_node(Node::new(dp.name(), dp.clone(), &["in"], &[])?);
        model.graph.connect(at, PortRef::new(node, 0));
    }
    model.graph.exposed_res = exposed;
    model.requires = requires;
    Ok(model)
}

pub fn prepare(model: &CompiledModel) -> Result<Prepared, CliError> {
    Ok(Prepared { provides: model.provides.clone(), requires: model.requires.clone(), tree: model.tree()? })
}

/// The functionality value for `bindings`; every exposed functionality must be bound once.
pub fn bind(provides: &[PortInfo], bindings: &[(String, Quantity)]) -> Result<Value, CliError> {
    let mut seen = BTreeSet::new();
    for (name, _) in bindings {
        if !provides.iter().any(|p| &p.name == name) {
            return Err(CliError::Usage(format!("model has no functionality named {name}")));
        }
        if !seen.insert(name.as_str()) {
            return Err(CliError::Usage(format!("{name} is bound more than once")));
        }
    }
    let mut parts = Vec::new();
    for p in provides {
        let (_, q) = bindings
            .iter()
            .find(|(n, _)| *n == p.name)
            .ok_or_else(|| CliError::Usage(format!("functionality {} is not bound; pass -f {}=...", p.name, p.name)))?;
        parts.push(q.to_value(p)?);
    }
    Ok(match parts.len() {
        1 => parts.pop().expect("one part"),
        _ => Value::Tuple(parts),
    })
}

pub fn run(p: &Prepared, f: &Value, budget: IterationBudget) -> Result<SolveResult, CliError> {
    let fun = bundle(p.provides.iter().map(|i| i.poset.clone()).collect());
    fun.check(f)?;
    Ok(solve(&p.tree, f, budget)?)
}

/// Kleene iterations per loop trace.
pub fn iterations(r: &SolveResult) -> Vec<usize> {
    r.traces.iter().map(|t| t.iterations()).collect()
}

/// `mass = 1 kg, cost = 29.3 USD`.
pub fn render_point(v: &Value, ports: &[PortInfo]) -> String {
    if ports.is_empty() {
        return "feasible".into();
    }
    components(v, ports.len())
        .iter()
        .zip(ports)
        .map(|(c, p)| format!("{} = {}", p.name, render(c, p)))
        .collect::<Vec<_>>()
        .join(", ")
}

fn tags_of(r: &SolveResult) -> Vec<Vec<String>> {
    r.antichain.items().iter().map(|(_, t)| t.iter().map(|s| s.to_string()).collect()).collect()
}

pub fn render_text(p: &Prepared, f: &Value, r: &SolveResult) -> String {
    let mut out = String::new();
    out.push_str(&format!("query: {}\n", render_point(f, &p.provides)));
    let its = iterations(r);
    let its = if its.is_empty() { String::new() } else { format!(" (Kleene iterations: {its:?})") };
    match r.status {
        SolveStatus::Infeasible => {
            out.push_str(&format!("status: infeasible{its}\n"));
            out.push_str("certificate: the minimal resource antichain is empty; no implementation provides this functionality\n");
        }
        s => {
            out.push_str(&format!("status: {}{its}\n", s));
            out.push_str(&format!("minimal resources ({}):\n", r.antichain.len()));
            for ((v, _), tags) in r.antichain.items().iter().zip(tags_of(r)) {
                let tags = if tags.is_empty() { String::new() } else { format!("  [{}]", tags.join(", ")) };
                out.push_str(&format!("  {}{tags}\n", render_point(v, &p.requires)));
            }
        }
    }
    out
}

pub fn point_json(v: &Value, ports: &[PortInfo]) -> Json {
    let mut m = Map::new();
    for (c, p) in components(v, ports.len()).iter().zip(ports) {
        let value = match magnitude(c, p) {
            Some(x) => json!(x),
            None => json!("⊤"),
        };
        m.insert(p.name.clone(), json!({"value": value, "unit": unit_label(p)}));
    }
    Json::Object(m)
}

fn unit_label(p: &PortInfo) -> String {
    match &p.unit {
        mcdp_core::lang::units::Unit::Nat => "Nat".into(),
        u => u.text().to_string(),
    }
}

pub fn render_json(p: &Prepared, f: &Value, r: &SolveResult) -> Json {
    let solutions: Vec<Json> = r
        .antichain
        .items()
        .iter()
        .zip(tags_of(r))
        .map(|((v, _), tags)| json!({"resources": point_json(v, &p.requires), "tags": tags}))
        .collect();
    json!({
        "functionality": point_json(f, &p.provides),
        "status": r.status.to_string(),
        "iterations": iterations(r),
        "solutions": solutions,
    })
}

/// One row per minimal solution; resource columns in declared units, then tags.
pub fn render_csv(p: &Prepared, r: &SolveResult) -> String {
    let mut out = String::new();
    let mut header: Vec<String> = p.requires.iter().map(|q| format!("{}[{}]", q.name, unit_label(q))).collect();
    header.push("tags".into());
    out.push_str(&header.join(","));
    out.push('\n');
    for ((v, _), tags) in r.antichain.items().iter().zip(tags_of(r)) {
        let mut row: Vec<String> = components(v, p.requires.len())
            .iter()
            .zip(&p.requires)
            .map(|(c, q)| magnitude(c, q).map_or("inf".into(), crate::quantity::format_number))
            .collect();
        row.push(tags.join("|"));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
