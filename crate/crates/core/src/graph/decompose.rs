//! Graph → composition tree.
//!
//! AFS edges are cut into a loop-in wire (read by the edge's target) and a loop-out wire
//! (written by its source). The remaining DAG is staged by longest-path level; each stage runs
//! the level's nodes in parallel beside an identity carrying every still-pending wire, and mux
//! lifts between stages reshuffle the bundle. With a non-empty AFS the whole chain sits inside
//! one loop whose state is ⟨exposed resources, loop-out values⟩, followed by a projection onto
//! the exposed resources.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{CoDesignGraph, Side};
use crate::compose::DpTree;
use crate::error::{Error, Result};
use crate::posets::{bundle, Poset};
use crate::primitives::{DesignProblem, Expr};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Wire {
    Fun(usize),
    Res(usize),
    Edge(usize),
    LoopIn(usize),
    LoopOut(usize),
    /// The fed-back copy of exposed resource k; never read.
    Dead(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tpl {
    W(Wire),
    T(Vec<Tpl>),
}

fn tpl_of(ws: &[Wire]) -> Tpl {
    match ws {
        [w] => Tpl::W(*w),
        _ => Tpl::T(ws.iter().map(|w| Tpl::W(*w)).collect()),
    }
}

impl Tpl {
    fn wires(&self, out: &mut Vec<Wire>) {
        match self {
            Tpl::W(w) => out.push(*w),
            Tpl::T(ts) => ts.iter().for_each(|t| t.wires(out)),
        }
    }

    fn paths(&self, prefix: &mut Vec<usize>, out: &mut HashMap<Wire, Vec<usize>>) {
        match self {
            Tpl::W(w) => {
                out.insert(*w, prefix.clone());
            }
            Tpl::T(ts) => {
                for (i, t) in ts.iter().enumerate() {
                    prefix.push(i);
                    t.paths(prefix, out);
                    prefix.pop();
                }
            }
        }
    }

    /// Expression reading this template out of a value laid out as `from`.
    fn projection(&self, from: &HashMap<Wire, Vec<usize>>) -> Result<Expr> {
        match self {
            Tpl::W(w) => from
                .get(w)
                .map(|p| Expr::Input(p.clone()))
                .ok_or_else(|| Error::InvalidGraph(format!("internal: wire {w:?} is not available"))),
            Tpl::T(ts) => Ok(Expr::Tuple(ts.iter().map(|t| t.projection(from)).collect::<Result<_>>()?)),
        }
    }
}

struct Ctx<'a> {
    g: &'a CoDesignGraph,
    afs: &'a [usize],
}

impl Ctx<'_> {
    fn poset(&self, w: Wire) -> Poset {
        let g = self.g;
        let res = |p| g.res_port_poset(p).cloned().expect("validated");
        let fun = |p| g.fun_port_poset(p).cloned().expect("validated");
        match w {
            Wire::Fun(k) => fun(g.exposed_fun[k].1),
            Wire::Res(k) | Wire::Dead(k) => res(g.exposed_res[k].1),
            Wire::Edge(e) => res(g.edges[e].src),
            Wire::LoopIn(l) | Wire::LoopOut(l) => res(g.edges[self.afs[l]].src),
        }
    }

    fn tpl_poset(&self, t: &Tpl) -> Poset {
        match t {
            Tpl::W(w) => self.poset(*w),
            Tpl::T(ts) => Poset::product(ts.iter().map(|t| self.tpl_poset(t)).collect()),
        }
    }

    fn name(&self, w: Wire) -> String {
        let g = self.g;
        match w {
            Wire::Fun(k) => g.exposed_fun[k].0.clone(),
            Wire::Res(k) => g.exposed_res[k].0.clone(),
            Wire::Dead(_) => "_".into(),
            Wire::Edge(e) => g.port_label(g.edges[e].src, Side::Resource),
            Wire::LoopIn(l) => format!("↺{}", g.port_label(g.edges[self.afs[l]].src, Side::Resource)),
            Wire::LoopOut(l) => format!("{}↺", g.port_label(g.edges[self.afs[l]].src, Side::Resource)),
        }
    }

    fn render(&self, t: &Tpl, out: &mut String) {
        match t {
            Tpl::W(w) => out.push_str(&self.name(*w)),
            Tpl::T(ts) => {
                out.push('⟨');
                for (i, t) in ts.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    self.render(t, out);
                }
                out.push('⟩');
            }
        }
    }

    fn mux(&self, from: &Tpl, to: &Tpl) -> Result<DpTree> {
        let mut paths = HashMap::new();
        from.paths(&mut Vec::new(), &mut paths);
        let expr = to.projection(&paths)?;
        let mut name = String::from("mux:");
        self.render(to, &mut name);
        Ok(DpTree::leaf(DesignProblem::lift(&name, self.tpl_poset(from), self.tpl_poset(to), expr)?))
    }
}

/// Decomposes a valid graph given an arc feedback set (edge indices).
pub fn decompose(g: &CoDesignGraph, afs: &[usize]) -> Result<DpTree> {
    if let Some(d) = g.validate().first() {
        return Err(Error::InvalidGraph(d.to_string()));
    }
    let mut sorted = afs.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != afs.len() || sorted.last().is_some_and(|&e| e >= g.edges.len()) {
        return Err(Error::InvalidAfs(format!("{afs:?} is not a set of edge indices")));
    }
    if !super::is_acyclic_without(g, &sorted) {
        return Err(Error::InvalidAfs(format!("removing edges {sorted:?} leaves a cycle")));
    }
    let afs = sorted.as_slice();
    let cx = Ctx { g, afs };
    let loop_of = |e: usize| afs.iter().position(|&a| a == e);

    // Wire bound to each port.
    let mut fun_wire: Vec<Vec<Option<Wire>>> = g.nodes.iter().map(|n| vec![None; n.fun_ports.len()]).collect();
    let mut res_wire: Vec<Vec<Option<Wire>>> = g.nodes.iter().map(|n| vec![None; n.res_ports.len()]).collect();
    for (k, (_, p)) in g.exposed_fun.iter().enumerate() {
        fun_wire[p.node][p.port] = Some(Wire::Fun(k));
    }
    for (k, (_, p)) in g.exposed_res.iter().enumerate() {
        res_wire[p.node][p.port] = Some(Wire::Res(k));
    }
    for (i, e) in g.edges.iter().enumerate() {
        let (fw, rw) = match loop_of(i) {
            Some(l) => (Wire::LoopIn(l), Wire::LoopOut(l)),
            None => (Wire::Edge(i), Wire::Edge(i)),
        };
        fun_wire[e.dst.node][e.dst.port] = Some(fw);
        res_wire[e.src.node][e.src.port] = Some(rw);
    }
    let fun_wires = |v: usize| -> Vec<Wire> { fun_wire[v].iter().map(|w| w.expect("validated")).collect() };
    let res_wires = |v: usize| -> Vec<Wire> { res_wire[v].iter().map(|w| w.expect("validated")).collect() };

    // Longest-path levels over the DAG without the AFS.
    let n = g.nodes.len();
    let mut level = vec![0usize; n];
    let mut indeg = vec![0usize; n];
    let mut succ = vec![Vec::new(); n];
    for (i, e) in g.edges.iter().enumerate() {
        if loop_of(i).is_none() {
            succ[e.src.node].push(e.dst.node);
            indeg[e.dst.node] += 1;
        }
    }
    let mut queue: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    while let Some(u) = queue.pop() {
        for &v in &succ[u] {
            level[v] = level[v].max(level[u] + 1);
            indeg[v] -= 1;
            if indeg[v] == 0 {
                queue.push(v);
            }
        }
    }
    let depth = level.iter().copied().max().map_or(0, |m| m + 1);
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); depth];
    for v in 0..n {
        groups[level[v]].push(v);
    }
    for grp in &mut groups {
        grp.sort_by(|&a, &b| g.nodes[a].name.cmp(&g.nodes[b].name).then(a.cmp(&b)));
    }

    let cyclic = !afs.is_empty();
    let f1: Vec<Wire> = (0..g.exposed_fun.len()).map(Wire::Fun).collect();
    let r1: Vec<Wire> = (0..g.exposed_res.len()).map(Wire::Res).collect();
    let r1_dead: Vec<Wire> = (0..g.exposed_res.len()).map(Wire::Dead).collect();
    let r2_in: Vec<Wire> = (0..afs.len()).map(Wire::LoopIn).collect();
    let r2_out: Vec<Wire> = (0..afs.len()).map(Wire::LoopOut).collect();
    let (start, last) = if cyclic {
        (
            Tpl::T(vec![tpl_of(&f1), Tpl::T(vec![tpl_of(&r1_dead), tpl_of(&r2_in)])]),
            Tpl::T(vec![tpl_of(&r1), tpl_of(&r2_out)]),
        )
    } else {
        (tpl_of(&f1), tpl_of(&r1))
    };

    let mut pending: Vec<Wire> = Vec::new();
    start.wires(&mut pending);
    pending.retain(|w| !matches!(w, Wire::Dead(_)));
    let mut cur = start.clone();
    let mut chain: Vec<DpTree> = Vec::new();
    for grp in &groups {
        let consumed: Vec<Wire> = grp.iter().flat_map(|&v| fun_wires(v)).collect();
        let rest: Vec<Wire> = pending.iter().copied().filter(|w| !consumed.contains(w)).collect();
        let mut block: Option<(DpTree, Tpl, Tpl)> = None;
        for &v in grp.iter().rev() {
            let leaf = DpTree::leaf_arc(g.nodes[v].dp.clone());
            let (fin, rout) = (tpl_of(&fun_wires(v)), tpl_of(&res_wires(v)));
            block = Some(match block {
                None => (leaf, fin, rout),
                Some((t, i, o)) => (DpTree::par(leaf, t), Tpl::T(vec![fin, i]), Tpl::T(vec![rout, o])),
            });
        }
        let (btree, bin, bout) = block.expect("levels are non-empty");
        let (stage, sin, sout) = if rest.is_empty() {
            (btree, bin, bout)
        } else {
            let rt = tpl_of(&rest);
            let mut name = String::from("id:");
            let names: Vec<String> = rest.iter().map(|w| cx.name(*w)).collect();
            let _ = write!(name, "{}", names.join(","));
            let id = DpTree::leaf(DesignProblem::identity(&name, cx.tpl_poset(&rt)));
            (DpTree::par(id, btree), Tpl::T(vec![rt.clone(), bin]), Tpl::T(vec![rt, bout]))
        };
        if cur != sin {
            chain.push(cx.mux(&cur, &sin)?);
        }
        chain.push(stage);
        cur = sout;
        pending = rest;
        pending.extend(grp.iter().flat_map(|&v| res_wires(v)));
    }
    if cur != last || chain.is_empty() {
        chain.push(cx.mux(&cur, &last)?);
    }
    let mut it = chain.into_iter();
    let mut tree = it.next().expect("chain is non-empty");
    for t in it {
        tree = DpTree::series(tree, t)?;
    }
    if !cyclic {
        return Ok(tree);
    }
    let r1p = bundle(r1.iter().map(|&w| cx.poset(w)).collect());
    let looped = DpTree::feedback(tree)?;
    let proj = DesignProblem::lift("mux:proj", looped.res().clone(), r1p, Expr::proj(0))?;
    DpTree::series(looped, DpTree::leaf(proj))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{AfsStrategy, Node, PortRef};
    use crate::posets::{Antichain, Value};
    use crate::primitives::Implementation;

    fn nat_catalogue(name: &str, rows: &[(u64, u64)]) -> DesignProblem {
        let entries = rows
            .iter()
            .enumerate()
            .map(|(i, &(f, r))| Implementation { id: format!("{name}{i}"), provides: Value::Nat(f), requires: Value::Nat(r) })
            .collect();
        DesignProblem::catalogue(name, Poset::nat(), Poset::nat(), entries).unwrap()
    }

    fn nat(n: u64) -> Value {
        Value::Nat(n)
    }

    #[test]
    fn series_chain() {
        let mut g = CoDesignGraph::new();
        let a = g.add_node(Node::simple("a", nat_catalogue("a", &[(5, 2), (10, 4)])));
        let b = g.add_node(Node::simple("b", nat_catalogue("b", &[(3, 7), (4, 9)])));
        g.connect(PortRef::new(a, 0), PortRef::new(b, 0));
        g.expose_fun("f", PortRef::new(a, 0));
        g.expose_res("r", PortRef::new(b, 0));
        let t = g.to_tree(AfsStrategy::Exhaustive).unwrap();
        assert_eq!(t.to_compact_text(), "series(a, b)");
        assert_eq!(t.eval(&nat(4)).unwrap().values(), Antichain::singleton(Poset::nat(), nat(7)).unwrap());
        assert_eq!(t.eval(&nat(6)).unwrap().values(), Antichain::singleton(Poset::nat(), nat(9)).unwrap());
    }

    /// a → b → c → a with c exposing the resource; edge indices 0: a→b, 1: b→c, 2: c→a.
    fn triangle() -> CoDesignGraph {
        let nn = Poset::product(vec![Poset::nat(), Poset::nat()]);
        let maxf = DesignProblem::lift("a", nn, Poset::nat(), Expr::Max(vec![Expr::proj(0), Expr::proj(1)])).unwrap();
        let both = DesignProblem::lift(
            "c",
            Poset::nat(),
            Poset::product(vec![Poset::nat(), Poset::nat()]),
            Expr::Tuple(vec![Expr::input(), Expr::input()]),
        )
        .unwrap();
        let mut g = CoDesignGraph::new();
        let a = g.add_node(Node::new("a", maxf, &["x", "fb"], &["r"]).unwrap());
        let b = g.add_node(Node::simple("b", nat_catalogue("b", &[(1, 2), (3, 3), (5, 8)])));
        let c = g.add_node(Node::new("c", both, &["f"], &["out", "back"]).unwrap());
        g.connect(PortRef::new(a, 0), PortRef::new(b, 0));
        g.connect(PortRef::new(b, 0), PortRef::new(c, 0));
        g.connect(PortRef::new(c, 1), PortRef::new(a, 1));
        g.expose_fun("x", PortRef::new(a, 0));
        g.expose_res("out", PortRef::new(c, 0));
        g
    }

    #[test]
    fn loop_shape_and_fixed_point() {
        let g = triangle();
        let afs = crate::graph::find_afs(&g, AfsStrategy::Exhaustive).unwrap();
        assert_eq!(afs, vec![0]);
        let t = decompose(&g, &afs).unwrap();
        assert_eq!(t.loop_count(), 1);
        // x = 1: r = max(1, back) must reach b's threshold; the loop settles at 2 → 3 → 3.
        let r = t.eval(&nat(1)).unwrap().values();
        assert_eq!(r, Antichain::singleton(Poset::nat(), nat(3)).unwrap());
        // Beyond the catalogue: infeasible.
        assert!(t.eval(&nat(6)).unwrap().is_empty());
    }

    #[test]
    fn any_afs_gives_the_same_answer() {
        let g = triangle();
        for afs in [vec![0], vec![1], vec![2], vec![0, 2]] {
            let t = decompose(&g, &afs).unwrap();
            for x in 0..7 {
                let want = decompose(&g, &[0]).unwrap().eval(&nat(x)).unwrap().values();
                assert_eq!(t.eval(&nat(x)).unwrap().values(), want, "afs {afs:?} at {x}");
            }
        }
    }

    #[test]
    fn bad_afs_is_rejected() {
        let g = triangle();
        assert!(matches!(decompose(&g, &[]), Err(Error::InvalidAfs(_))));
        assert!(matches!(decompose(&g, &[9]), Err(Error::InvalidAfs(_))));
    }

    #[test]
    fn parallel_nodes_share_a_stage() {
        let nn = Poset::product(vec![Poset::nat(), Poset::nat()]);
        let mut g = CoDesignGraph::new();
        let s = g.add_node(Node::new("split", DesignProblem::identity("split", nn.clone()), &["p", "q"], &["p", "q"]).unwrap());
        let x = g.add_node(Node::simple("x", nat_catalogue("x", &[(1, 10)])));
        let y = g.add_node(Node::simple("y", nat_catalogue("y", &[(1, 20)])));
        g.connect(PortRef::new(s, 0), PortRef::new(x, 0));
        g.connect(PortRef::new(s, 1), PortRef::new(y, 0));
        g.expose_fun("p", PortRef::new(s, 0));
        g.expose_fun("q", PortRef::new(s, 1));
        g.expose_res("a", PortRef::new(x, 0));
        g.expose_res("b", PortRef::new(y, 0));
        let t = g.to_tree(AfsStrategy::Exhaustive).unwrap();
        assert_eq!(t.to_compact_text(), "series(split, par(x, y))");
        let r = t.eval(&Value::pair(nat(1), nat(0))).unwrap().values();
        assert_eq!(r.elements(), &[Value::pair(nat(10), nat(20))]);
    }

    #[test]
    fn empty_graph_is_identity_on_one() {
        let g = CoDesignGraph::new();
        let t = g.to_tree(AfsStrategy::Exhaustive).unwrap();
        assert!(t.fun().is_one() && t.res().is_one());
        assert_eq!(t.eval(&Value::unit()).unwrap().values().elements(), &[Value::unit()]);
    }
}
