//! Series, parallel, loop and coproduct composition, evaluated recursively.
//!
//! | tree            | h                                         |
//! |-----------------|-------------------------------------------|
//! | series(a, b)    | f ↦ Min ⋃_{s ∈ h_a(f)} h_b(s)             |
//! | par(a, b)       | ⟨f₁, f₂⟩ ↦ h_a(f₁) ⊠ h_b(f₂)              |
//! | loop(c)         | f₁ ↦ lfp(R ↦ Min ⋃_{r ∈ R} h_c(f₁, r) ∩ ↑r) |
//! | coproduct(a, b) | f ↦ Min(h_a(f) ∪ h_b(f))                  |

use std::fmt::{self, Write as _};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::posets::{Poset, Tag, TagSet, TaggedAntichain, Value};
use crate::primitives::{Body, DesignProblem};
use crate::solver::{self, AscentTrace, IterationBudget, TraceStatus};

#[derive(Clone, Debug)]
pub enum TreeNode {
    Leaf(Arc<DesignProblem>),
    Series(Box<DpTree>, Box<DpTree>),
    Parallel(Box<DpTree>, Box<DpTree>),
    /// The child has F = F₁ × R and resources R; the loop feeds R back.
    Loop(Box<DpTree>),
    Coproduct(Vec<(Tag, DpTree)>),
}

/// A composition tree with cached interface posets.
#[derive(Clone, Debug)]
pub struct DpTree {
    node: TreeNode,
    fun: Poset,
    res: Poset,
}

/// Mutable evaluation state threaded through a solve: budget and collected loop traces.
#[derive(Debug)]
pub struct EvalContext {
    pub budget: IterationBudget,
    pub traces: Vec<AscentTrace>,
}

impl EvalContext {
    pub fn new(budget: IterationBudget) -> EvalContext {
        EvalContext { budget, traces: Vec::new() }
    }
}

impl DpTree {
    pub fn leaf(dp: DesignProblem) -> DpTree {
        Self::leaf_arc(Arc::new(dp))
    }

    pub fn leaf_arc(dp: Arc<DesignProblem>) -> DpTree {
        DpTree { fun: dp.fun().clone(), res: dp.res().clone(), node: TreeNode::Leaf(dp) }
    }

    pub fn series(a: DpTree, b: DpTree) -> Result<DpTree> {
        if a.res != b.fun {
            return Err(Error::InvalidComposition(format!(
                "series: resources {} of the first do not match functionality {} of the second",
                a.res, b.fun
            )));
        }
        Ok(DpTree { fun: a.fun.clone(), res: b.res.clone(), node: TreeNode::Series(Box::new(a), Box::new(b)) })
    }

    pub fn par(a: DpTree, b: DpTree) -> DpTree {
        DpTree {
            fun: Poset::product(vec![a.fun.clone(), b.fun.clone()]),
            res: Poset::product(vec![a.res.clone(), b.res.clone()]),
            node: TreeNode::Parallel(Box::new(a), Box::new(b)),
        }
    }

    pub fn feedback(child: DpTree) -> Result<DpTree> {
        let f1 = match child.fun.factors() {
            Some([f1, r]) if *r == child.res => f1.clone(),
            _ => {
                return Err(Error::InvalidComposition(format!(
                    "loop: child functionality {} must be a pair ending in its resources {}",
                    child.fun, child.res
                )))
            }
        };
        Ok(DpTree { fun: f1, res: child.res.clone(), node: TreeNode::Loop(Box::new(child)) })
    }

    pub fn coproduct(branches: Vec<(Tag, DpTree)>) -> Result<DpTree> {
        let Some((_, first)) = branches.first() else {
            return Err(Error::InvalidComposition("coproduct needs at least one branch".into()));
        };
        let (fun, res) = (first.fun.clone(), first.res.clone());
        for (name, b) in &branches {
            if b.fun != fun || b.res != res {
                return Err(Error::InvalidComposition(format!(
                    "coproduct branch {name} has interface {} → {}, expected {fun} → {res}",
                    b.fun, b.res
                )));
            }
        }
        Ok(DpTree { fun, res, node: TreeNode::Coproduct(branches) })
    }

    pub fn node(&self) -> &TreeNode {
        &self.node
    }

    pub fn fun(&self) -> &Poset {
        &self.fun
    }

    pub fn res(&self) -> &Poset {
        &self.res
    }

    /// Number of Loop nodes, not descending into composite leaves.
    pub fn loop_count(&self) -> usize {
        match &self.node {
            TreeNode::Leaf(_) => 0,
            TreeNode::Series(a, b) | TreeNode::Parallel(a, b) => a.loop_count() + b.loop_count(),
            TreeNode::Loop(c) => 1 + c.loop_count(),
            TreeNode::Coproduct(bs) => bs.iter().map(|(_, b)| b.loop_count()).sum(),
        }
    }

    /// All leaves in left-to-right order.
    pub fn leaves(&self) -> Vec<&Arc<DesignProblem>> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a Arc<DesignProblem>>) {
        match &self.node {
            TreeNode::Leaf(dp) => out.push(dp),
            TreeNode::Series(a, b) | TreeNode::Parallel(a, b) => {
                a.collect_leaves(out);
                b.collect_leaves(out);
            }
            TreeNode::Loop(c) => c.collect_leaves(out),
            TreeNode::Coproduct(bs) => bs.iter().for_each(|(_, b)| b.collect_leaves(out)),
        }
    }

    /// h(f) with the default budget; loop traces are discarded.
    pub fn eval(&self, f: &Value) -> Result<TaggedAntichain> {
        self.eval_in(f, &mut EvalContext::new(IterationBudget::default()))
    }

    pub fn eval_in(&self, f: &Value, ctx: &mut EvalContext) -> Result<TaggedAntichain> {
        self.fun.check(f)?;
        match &self.node {
            TreeNode::Leaf(dp) => match dp.body() {
                Body::Composite(t) => t.eval_in(f, ctx),
                _ => Ok(TaggedAntichain::untagged(dp.eval(f)?)),
            },
            TreeNode::Series(a, b) => {
                let mid = a.eval_in(f, ctx)?;
                let mut candidates = Vec::new();
                for (s, tags) in mid.items() {
                    for (r, more) in b.eval_in(s, ctx)?.items() {
                        candidates.push((r.clone(), union(tags, more)));
                    }
                }
                TaggedAntichain::min_of(self.res.clone(), candidates)
            }
            TreeNode::Parallel(a, b) => {
                let Value::Tuple(parts) = f else { unreachable!("checked member of a pair") };
                let ha = a.eval_in(&parts[0], ctx)?;
                if ha.is_empty() {
                    return Ok(TaggedAntichain::empty(self.res.clone()));
                }
                let hb = b.eval_in(&parts[1], ctx)?;
                let mut candidates = Vec::with_capacity(ha.len() * hb.len());
                for (x, tx) in ha.items() {
                    for (y, ty) in hb.items() {
                        candidates.push((Value::pair(x.clone(), y.clone()), union(tx, ty)));
                    }
                }
                TaggedAntichain::min_of(self.res.clone(), candidates)
            }
            TreeNode::Loop(child) => eval_loop(child, f, ctx),
            TreeNode::Coproduct(branches) => {
                let mut candidates = Vec::new();
                for (name, b) in branches {
                    for (r, tags) in b.eval_in(f, ctx)?.items() {
                        let mut tags = tags.clone();
                        tags.insert(name.clone());
                        candidates.push((r.clone(), tags));
                    }
                }
                TaggedAntichain::min_of(self.res.clone(), candidates)
            }
        }
    }

    /// Ψ for a loop child at `f1`, exposed for certificates and tests.
    pub fn loop_psi(&self, f1: &Value, r: &TaggedAntichain, ctx: &mut EvalContext) -> Result<TaggedAntichain> {
        let TreeNode::Loop(child) = &self.node else {
            return Err(Error::InvalidComposition("not a loop".into()));
        };
        psi(child, f1, r, ctx)
    }

    /// Parenthesized form, e.g. `loop(series(par(a, b), c))`.
    pub fn to_text(&self) -> String {
        match &self.node {
            TreeNode::Leaf(dp) => dp.name().to_string(),
            TreeNode::Series(a, b) => format!("series({}, {})", a.to_text(), b.to_text()),
            TreeNode::Parallel(a, b) => format!("par({}, {})", a.to_text(), b.to_text()),
            TreeNode::Loop(c) => format!("loop({})", c.to_text()),
            TreeNode::Coproduct(bs) => {
                let parts: Vec<String> = bs.iter().map(|(n, b)| format!("{n}: {}", b.to_text())).collect();
                format!("coproduct({})", parts.join(", "))
            }
        }
    }

    /// Parenthesized form with plumbing hidden: `mux:` leaves vanish, `id:` leaves print as
    /// `Id`, and nodes left with one child collapse into it.
    pub fn to_compact_text(&self) -> String {
        self.compact().unwrap_or_else(|| "Id".into())
    }

    fn compact(&self) -> Option<String> {
        match &self.node {
            TreeNode::Leaf(dp) if dp.name().starts_with("mux:") => None,
            TreeNode::Leaf(dp) if dp.name().starts_with("id:") => Some("Id".into()),
            TreeNode::Leaf(dp) => Some(dp.name().to_string()),
            TreeNode::Series(a, b) | TreeNode::Parallel(a, b) => {
                let op = if matches!(self.node, TreeNode::Series(..)) { "series" } else { "par" };
                match (a.compact(), b.compact()) {
                    (Some(x), Some(y)) => Some(format!("{op}({x}, {y})")),
                    (x, None) => x,
                    (None, y) => y,
                }
            }
            TreeNode::Loop(c) => Some(format!("loop({})", c.compact().unwrap_or_else(|| "Id".into()))),
            TreeNode::Coproduct(bs) => {
                let parts: Vec<String> = bs
                    .iter()
                    .map(|(n, b)| format!("{n}: {}", b.compact().unwrap_or_else(|| "Id".into())))
                    .collect();
                Some(format!("coproduct({})", parts.join(", ")))
            }
        }
    }

    /// Indented text, one node per line, with interface posets.
    pub fn to_indented(&self) -> String {
        let mut out = String::new();
        self.indent_into(0, &mut out);
        out
    }

    fn indent_into(&self, depth: usize, out: &mut String) {
        let pad = "  ".repeat(depth);
        let sig = format!("{} → {}", self.fun, self.res);
        match &self.node {
            TreeNode::Leaf(dp) => {
                let _ = writeln!(out, "{pad}{}  : {sig}", dp.name());
            }
            TreeNode::Series(a, b) | TreeNode::Parallel(a, b) => {
                let op = if matches!(self.node, TreeNode::Series(..)) { "series" } else { "par" };
                let _ = writeln!(out, "{pad}{op}  : {sig}");
                a.indent_into(depth + 1, out);
                b.indent_into(depth + 1, out);
            }
            TreeNode::Loop(c) => {
                let _ = writeln!(out, "{pad}loop  : {sig}");
                c.indent_into(depth + 1, out);
            }
            TreeNode::Coproduct(bs) => {
                let _ = writeln!(out, "{pad}coproduct  : {sig}");
                for (n, b) in bs {
                    let _ = writeln!(out, "{pad}  [{n}]");
                    b.indent_into(depth + 2, out);
                }
            }
        }
    }

    /// DOT rendering of the tree.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph tree {\n  node [fontname=\"Helvetica\"];\n");
        let mut counter = 0;
        self.dot_into(&mut out, &mut counter);
        out.push_str("}\n");
        out
    }

    fn dot_into(&self, out: &mut String, counter: &mut usize) -> usize {
        let id = *counter;
        *counter += 1;
        let (label, shape) = match &self.node {
            TreeNode::Leaf(dp) => (dp.name().to_string(), "box"),
            TreeNode::Series(..) => ("series".to_string(), "ellipse"),
            TreeNode::Parallel(..) => ("par".to_string(), "ellipse"),
            TreeNode::Loop(_) => ("loop".to_string(), "doublecircle"),
            TreeNode::Coproduct(_) => ("coproduct".to_string(), "diamond"),
        };
        let _ = writeln!(out, "  n{id} [label=\"{}\", shape={shape}];", escape(&label));
        let children: Vec<(Option<&Tag>, &DpTree)> = match &self.node {
            TreeNode::Leaf(_) => Vec::new(),
            TreeNode::Series(a, b) | TreeNode::Parallel(a, b) => vec![(None, a), (None, b)],
            TreeNode::Loop(c) => vec![(None, c)],
            TreeNode::Coproduct(bs) => bs.iter().map(|(n, b)| (Some(n), b)).collect(),
        };
        for (tag, c) in children {
            let cid = c.dot_into(out, counter);
            match tag {
                Some(t) => {
                    let _ = writeln!(out, "  n{id} -> n{cid} [label=\"{}\"];", escape(t));
                }
                None => {
                    let _ = writeln!(out, "  n{id} -> n{cid};");
                }
            }
        }
        id
    }
}

impl fmt::Display for DpTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

pub(crate) fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn union(a: &TagSet, b: &TagSet) -> TagSet {
    if b.is_empty() {
        return a.clone();
    }
    a.union(b).cloned().collect()
}

/// Ψ(R) = Min ⋃_{r ∈ R} h(f₁, r) ∩ ↑r, with ∩ taken on up-sets.
fn psi(child: &DpTree, f1: &Value, r: &TaggedAntichain, ctx: &mut EvalContext) -> Result<TaggedAntichain> {
    let rp = child.res.clone();
    let mut candidates = Vec::new();
    for (x, _) in r.items() {
        let h = child.eval_in(&Value::pair(f1.clone(), x.clone()), ctx)?;
        for (s, tags) in h.items() {
            for m in rp.minimal_upper_bounds(s, x) {
                candidates.push((m, tags.clone()));
            }
        }
    }
    TaggedAntichain::min_of(rp, candidates)
}

fn eval_loop(child: &DpTree, f1: &Value, ctx: &mut EvalContext) -> Result<TaggedAntichain> {
    let bottom = TaggedAntichain::untagged(child.res.bottom_antichain());
    let budget = ctx.budget;
    let (trace, last) = solver::kleene_tagged(bottom, budget, |r| psi(child, f1, r, ctx))?;
    let result = match trace.status {
        TraceStatus::Infeasible => TaggedAntichain::empty(child.res.clone()),
        _ => last,
    };
    ctx.traces.push(trace);
    Ok(result)
}
