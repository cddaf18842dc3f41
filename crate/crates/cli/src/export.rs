//! Text artifacts: graph diagrams, composition trees and Kleene traces.

use mcdp_core::graph::AfsStrategy;
use mcdp_core::lang::CompiledModel;
use mcdp_core::{DpTree, IterationBudget, Value};

use crate::query::{prepare, run};
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Artifact {
    /// The co-design graph in DOT.
    Dot,
    /// The composition tree as a single expression.
    Tree,
    /// The composition tree, one operator per line.
    TreeIndented,
    /// The composition tree in DOT.
    TreeDot,
    /// JSON lines of every Kleene ascent for a query.
    Trace,
}

fn tree(model: &CompiledModel) -> Result<DpTree, CliError> {
    // Exhaustive search keeps the chosen AFS, hence the tree, stable across runs.
    Ok(match model.graph.to_tree(AfsStrategy::Exhaustive) {
        Ok(t) => t,
        Err(_) => model.tree()?,
    })
}

/// Renders `what`; `query` is needed for traces only.
pub fn export(model: &CompiledModel, what: Artifact, query: Option<(&Value, IterationBudget)>) -> Result<String, CliError> {
    Ok(match what {
        Artifact::Dot => model.graph.to_dot(),
        Artifact::Tree => format!("{}\n", tree(model)?.to_compact_text()),
        Artifact::TreeIndented => tree(model)?.to_indented(),
        Artifact::TreeDot => tree(model)?.to_dot(),
        Artifact::Trace => {
            let (f, budget) = query.ok_or_else(|| CliError::Usage("a trace needs -f bindings".into()))?;
            run(&prepare(model)?, f, budget)?.trace_json_lines()
        }
    })
}
