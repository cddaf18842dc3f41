//! Co-design graphs: named design problems wired resource → functionality.
//!
//! Every port is bound exactly once, either by one edge or by one exposure. Exposed
//! functionality and resource ports, in exposure order, define the composite F and R.

mod afs;
mod decompose;

use std::collections::HashSet;
use std::fmt::{self, Write as _};
use std::sync::Arc;

pub use afs::{afs_width, candidate_edges, design_complexity, find_afs, is_acyclic_without, AfsStrategy, Complexity};
pub use decompose::decompose;

use crate::compose::{escape, DpTree};
use crate::error::{Error, Result};
use crate::posets::{bundle, Poset};
use crate::primitives::DesignProblem;

#[derive(Clone, Debug, PartialEq)]
pub struct Port {
    pub name: String,
    pub poset: Poset,
}

impl Port {
    pub fn new(name: &str, poset: Poset) -> Port {
        Port { name: name.into(), poset }
    }
}

/// A graph node: a design problem whose F and R are split into named ports by the port
/// convention (no port: One, one port: the poset itself, several: a product).
#[derive(Clone, Debug)]
pub struct Node {
    pub name: String,
    pub dp: Arc<DesignProblem>,
    pub fun_ports: Vec<Port>,
    pub res_ports: Vec<Port>,
}

fn split_ports(p: &Poset, names: &[&str]) -> Result<Vec<Port>> {
    match names {
        [] if p.is_one() => Ok(Vec::new()),
        [only] => Ok(vec![Port::new(only, p.clone())]),
        _ => match p.factors() {
            Some(fs) if fs.len() == names.len() => {
                Ok(fs.iter().zip(names).map(|(q, n)| Port::new(n, q.clone())).collect())
            }
            _ => Err(Error::InvalidGraph(format!("cannot split {p} into ports {names:?}"))),
        },
    }
}

impl Node {
    pub fn new(name: &str, dp: DesignProblem, fun_ports: &[&str], res_ports: &[&str]) -> Result<Node> {
        Self::from_arc(name, Arc::new(dp), fun_ports, res_ports)
    }

    pub fn from_arc(name: &str, dp: Arc<DesignProblem>, fun_ports: &[&str], res_ports: &[&str]) -> Result<Node> {
        let fun_ports = split_ports(dp.fun(), fun_ports)?;
        let res_ports = split_ports(dp.res(), res_ports)?;
        Ok(Node { name: name.into(), dp, fun_ports, res_ports })
    }

    /// One port named `f` (unless F is One) and one named `r` (unless R is One).
    pub fn simple(name: &str, dp: DesignProblem) -> Node {
        let f: &[&str] = if dp.fun().is_one() { &[] } else { &["f"] };
        let r: &[&str] = if dp.res().is_one() { &[] } else { &["r"] };
        Self::new(name, dp, f, r).expect("single ports always fit")
    }

    pub fn fun_port(&self, name: &str) -> Option<usize> {
        self.fun_ports.iter().position(|p| p.name == name)
    }

    pub fn res_port(&self, name: &str) -> Option<usize> {
        self.res_ports.iter().position(|p| p.name == name)
    }
}

/// A port of a node: `node` index and port index on the relevant side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PortRef {
    pub node: usize,
    pub port: usize,
}

impl PortRef {
    pub fn new(node: usize, port: usize) -> PortRef {
        PortRef { node, port }
    }
}

/// Resource port `src` feeds functionality port `dst`: R_src ⪯ F_dst.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub src: PortRef,
    pub dst: PortRef,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Functionality,
    Resource,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Functionality => "functionality",
            Side::Resource => "resource",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Diagnostic {
    PosetMismatch { edge: usize, from: String, to: String, src: Poset, dst: Poset },
    UnboundPort { node: String, port: String, side: Side },
    MultiplyBound { node: String, port: String, side: Side, count: usize },
    DanglingReference { what: String },
    DuplicateName { name: String },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::PosetMismatch { edge, from, to, src, dst } => {
                write!(f, "edge {edge} ({from} → {to}): resource poset {src} ≠ functionality poset {dst}")
            }
            Diagnostic::UnboundPort { node, port, side } => {
                write!(f, "{side} port {node}.{port} is neither connected nor exposed")
            }
            Diagnostic::MultiplyBound { node, port, side, count } => {
                write!(f, "{side} port {node}.{port} is bound {count} times")
            }
            Diagnostic::DanglingReference { what } => write!(f, "dangling reference: {what}"),
            Diagnostic::DuplicateName { name } => write!(f, "duplicate name {name}"),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct CoDesignGraph {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    pub exposed_fun: Vec<(String, PortRef)>,
    pub exposed_res: Vec<(String, PortRef)>,
}

impl CoDesignGraph {
    pub fn new() -> CoDesignGraph {
        CoDesignGraph::default()
    }

    pub fn add_node(&mut self, node: Node) -> usize {
        self.nodes.push(node);
        self.nodes.len() - 1
    }

    pub fn connect(&mut self, src: PortRef, dst: PortRef) -> usize {
        self.edges.push(Edge { src, dst });
        self.edges.len() - 1
    }

    pub fn expose_fun(&mut self, name: &str, at: PortRef) {
        self.exposed_fun.push((name.into(), at));
    }

    pub fn expose_res(&mut self, name: &str, at: PortRef) {
        self.exposed_res.push((name.into(), at));
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.name == name)
    }

    fn resolve(&self, spec: &str, side: Side) -> Result<PortRef> {
        let (node, port) = spec
            .split_once('.')
            .ok_or_else(|| Error::InvalidGraph(format!("expected node.port, got {spec}")))?;
        let n = self.node_index(node).ok_or_else(|| Error::InvalidGraph(format!("no node {node}")))?;
        let p = match side {
            Side::Functionality => self.nodes[n].fun_port(port),
            Side::Resource => self.nodes[n].res_port(port),
        }
        .ok_or_else(|| Error::InvalidGraph(format!("no {side} port {spec}")))?;
        Ok(PortRef::new(n, p))
    }

    /// `connect_named("a.r", "b.f")`.
    pub fn connect_named(&mut self, src: &str, dst: &str) -> Result<usize> {
        let s = self.resolve(src, Side::Resource)?;
        let d = self.resolve(dst, Side::Functionality)?;
        Ok(self.connect(s, d))
    }

    pub fn expose_fun_named(&mut self, name: &str, port: &str) -> Result<()> {
        let p = self.resolve(port, Side::Functionality)?;
        self.expose_fun(name, p);
        Ok(())
    }

    pub fn expose_res_named(&mut self, name: &str, port: &str) -> Result<()> {
        let p = self.resolve(port, Side::Resource)?;
        self.expose_res(name, p);
        Ok(())
    }

    pub fn fun_port_poset(&self, p: PortRef) -> Option<&Poset> {
        self.nodes.get(p.node)?.fun_ports.get(p.port).map(|x| &x.poset)
    }

    pub fn res_port_poset(&self, p: PortRef) -> Option<&Poset> {
        self.nodes.get(p.node)?.res_ports.get(p.port).map(|x| &x.poset)
    }

    /// Composite functionality poset.
    pub fn fun_poset(&self) -> Poset {
        bundle(self.exposed_fun.iter().filter_map(|(_, p)| self.fun_port_poset(*p).cloned()).collect())
    }

    /// Composite resource poset.
    pub fn res_poset(&self) -> Poset {
        bundle(self.exposed_res.iter().filter_map(|(_, p)| self.res_port_poset(*p).cloned()).collect())
    }

    pub fn port_label(&self, p: PortRef, side: Side) -> String {
        let Some(n) = self.nodes.get(p.node) else { return format!("?{}", p.node) };
        let ports = match side {
            Side::Functionality => &n.fun_ports,
            Side::Resource => &n.res_ports,
        };
        match ports.get(p.port) {
            Some(port) => format!("{}.{}", n.name, port.name),
            None => format!("{}.?{}", n.name, p.port),
        }
    }

    /// Empty iff the graph is well formed.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let mut names = HashSet::new();
        for n in &self.nodes {
            if !names.insert(n.name.as_str()) {
                out.push(Diagnostic::DuplicateName { name: n.name.clone() });
            }
        }
        let mut fun_names = HashSet::new();
        for (name, _) in &self.exposed_fun {
            if !fun_names.insert(name.as_str()) {
                out.push(Diagnostic::DuplicateName { name: name.clone() });
            }
        }
        let mut res_names = HashSet::new();
        for (name, _) in &self.exposed_res {
            if !res_names.insert(name.as_str()) {
                out.push(Diagnostic::DuplicateName { name: name.clone() });
            }
        }
        let mut fun_count: Vec<Vec<usize>> = self.nodes.iter().map(|n| vec![0; n.fun_ports.len()]).collect();
        let mut res_count: Vec<Vec<usize>> = self.nodes.iter().map(|n| vec![0; n.res_ports.len()]).collect();
        let bump = |counts: &mut Vec<Vec<usize>>, p: PortRef, what: String, out: &mut Vec<Diagnostic>| {
            match counts.get_mut(p.node).and_then(|c| c.get_mut(p.port)) {
                Some(c) => {
                    *c += 1;
                    true
                }
                None => {
                    out.push(Diagnostic::DanglingReference { what });
                    false
                }
            }
        };
        for (i, e) in self.edges.iter().enumerate() {
            let ok_src = bump(&mut res_count, e.src, format!("edge {i} source"), &mut out);
            let ok_dst = bump(&mut fun_count, e.dst, format!("edge {i} target"), &mut out);
            if ok_src && ok_dst {
                let src = self.res_port_poset(e.src).expect("checked");
                let dst = self.fun_port_poset(e.dst).expect("checked");
                if src != dst {
                    out.push(Diagnostic::PosetMismatch {
                        edge: i,
                        from: self.port_label(e.src, Side::Resource),
                        to: self.port_label(e.dst, Side::Functionality),
                        src: src.clone(),
                        dst: dst.clone(),
                    });
                }
            }
        }
        for (name, p) in &self.exposed_fun {
            bump(&mut fun_count, *p, format!("exposed functionality {name}"), &mut out);
        }
        for (name, p) in &self.exposed_res {
            bump(&mut res_count, *p, format!("exposed resource {name}"), &mut out);
        }
        for (ni, n) in self.nodes.iter().enumerate() {
            for (side, counts, ports) in [
                (Side::Functionality, &fun_count[ni], &n.fun_ports),
                (Side::Resource, &res_count[ni], &n.res_ports),
            ] {
                for (pi, &c) in counts.iter().enumerate() {
                    let port = ports[pi].name.clone();
                    if c == 0 {
                        out.push(Diagnostic::UnboundPort { node: n.name.clone(), port, side });
                    } else if c > 1 {
                        out.push(Diagnostic::MultiplyBound { node: n.name.clone(), port, side, count: c });
                    }
                }
            }
        }
        out
    }

    /// Validates, finds an AFS with `strategy` and decomposes.
    pub fn to_tree(&self, strategy: AfsStrategy) -> Result<DpTree> {
        let diags = self.validate();
        if let Some(d) = diags.first() {
            return Err(Error::InvalidGraph(d.to_string()));
        }
        let afs = find_afs(self, strategy)?;
        decompose(self, &afs)
    }

    /// Exhaustive AFS search when within its size bound, greedy otherwise.
    pub fn to_tree_auto(&self) -> Result<DpTree> {
        match self.to_tree(AfsStrategy::Exhaustive) {
            Err(Error::BudgetExceeded(_)) => self.to_tree(AfsStrategy::Greedy),
            other => other,
        }
    }

    /// DOT rendering: green functionality ports, red resource ports, edges labelled ⪯.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph codesign {\n  rankdir=LR;\n  node [fontname=\"Helvetica\"];\n");
        for (i, n) in self.nodes.iter().enumerate() {
            let mut cells = String::new();
            for (j, p) in n.fun_ports.iter().enumerate() {
                let _ = write!(cells, "<td port=\"f{j}\" bgcolor=\"#c8f0c8\">{}</td>", html(&p.name));
            }
            let _ = write!(cells, "<td><b>{}</b></td>", html(&n.name));
            for (j, p) in n.res_ports.iter().enumerate() {
                let _ = write!(cells, "<td port=\"r{j}\" bgcolor=\"#f4c4c4\">{}</td>", html(&p.name));
            }
            let _ = writeln!(
                out,
                "  n{i} [shape=plaintext, label=<<table border=\"0\" cellborder=\"1\" cellspacing=\"0\"><tr>{cells}</tr></table>>];"
            );
        }
        for (i, e) in self.edges.iter().enumerate() {
            let _ = writeln!(out, "  n{}:r{} -> n{}:f{} [label=\"⪯\", tooltip=\"edge {i}\"];", e.src.node, e.src.port, e.dst.node, e.dst.port);
        }
        for (k, (name, p)) in self.exposed_fun.iter().enumerate() {
            let _ = writeln!(out, "  fun{k} [shape=plaintext, fontcolor=\"#1a7f1a\", label=\"{}\"];", escape(name));
            let _ = writeln!(out, "  fun{k} -> n{}:f{} [color=\"#1a7f1a\"];", p.node, p.port);
        }
        for (k, (name, p)) in self.exposed_res.iter().enumerate() {
            let _ = writeln!(out, "  res{k} [shape=plaintext, fontcolor=\"#a01818\", label=\"{}\"];", escape(name));
            let _ = writeln!(out, "  n{}:r{} -> res{k} [color=\"#a01818\"];", p.node, p.port);
        }
        out.push_str("}\n");
        out
    }
}

fn html(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
