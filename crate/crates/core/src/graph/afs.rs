//! Arc feedback sets: edge sets whose removal leaves the graph acyclic.
//!
//! Only edges inside a nontrivial strongly connected component (or self-loops) can lie on a
//! cycle, so searches range over those candidates.

use super::CoDesignGraph;
use crate::error::{Error, Result};
use crate::posets::{Extent, Poset};
use std::collections::VecDeque;

/// Exhaustive search is refused beyond this many candidate edges.
pub const EXHAUSTIVE_CANDIDATE_LIMIT: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AfsStrategy {
    /// A minimum-cardinality AFS, lexicographically first among those.
    Exhaustive,
    /// Repeatedly removes the edge lying on the most shortest cycles.
    Greedy,
}

fn node_edges(g: &CoDesignGraph, removed: &[bool]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); g.nodes.len()];
    for (i, e) in g.edges.iter().enumerate() {
        if !removed[i] {
            adj[e.src.node].push(e.dst.node);
        }
    }
    adj
}

/// Kahn's algorithm on the node graph without the marked edges.
fn acyclic(n: usize, adj: &[Vec<usize>]) -> bool {
    let mut indeg = vec![0usize; n];
    for vs in adj {
        for &v in vs {
            indeg[v] += 1;
        }
    }
    let mut queue: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut seen = 0;
    while let Some(u) = queue.pop() {
        seen += 1;
        for &v in &adj[u] {
            indeg[v] -= 1;
            if indeg[v] == 0 {
                queue.push(v);
            }
        }
    }
    seen == n
}

pub fn is_acyclic_without(g: &CoDesignGraph, afs: &[usize]) -> bool {
    let mut removed = vec![false; g.edges.len()];
    for &e in afs {
        if let Some(r) = removed.get_mut(e) {
            *r = true;
        }
    }
    acyclic(g.nodes.len(), &node_edges(g, &removed))
}

/// Strongly connected component id per node (Tarjan, iterative).
fn scc(n: usize, adj: &[Vec<usize>]) -> Vec<usize> {
    const UNSET: usize = usize::MAX;
    let mut index = vec![UNSET; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![UNSET; n];
    let mut stack = Vec::new();
    let mut next = 0;
    let mut ncomp = 0;
    for root in 0..n {
        if index[root] != UNSET {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (u, ref mut i)) = call.last_mut() {
            if *i < adj[u].len() {
                let v = adj[u][*i];
                *i += 1;
                if index[v] == UNSET {
                    index[v] = next;
                    low[v] = next;
                    next += 1;
                    stack.push(v);
                    on_stack[v] = true;
                    call.push((v, 0));
                } else if on_stack[v] {
                    low[u] = low[u].min(index[v]);
                }
            } else {
                call.pop();
                if let Some(&(p, _)) = call.last() {
                    low[p] = low[p].min(low[u]);
                }
                if low[u] == index[u] {
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp[w] = ncomp;
                        if w == u {
                            break;
                        }
                    }
                    ncomp += 1;
                }
            }
        }
    }
    comp
}

/// Edges that lie on some cycle, in edge order.
pub fn candidate_edges(g: &CoDesignGraph) -> Vec<usize> {
    let adj = node_edges(g, &vec![false; g.edges.len()]);
    let comp = scc(g.nodes.len(), &adj);
    let mut size = vec![0usize; g.nodes.len()];
    for &c in &comp {
        size[c] += 1;
    }
    g.edges
        .iter()
        .enumerate()
        .filter(|(_, e)| e.src.node == e.dst.node || (comp[e.src.node] == comp[e.dst.node] && size[comp[e.src.node]] > 1))
        .map(|(i, _)| i)
        .collect()
}

fn mask_edges(cands: &[usize], mask: u32) -> Vec<usize> {
    cands.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e).collect()
}

/// Masks over `n` bits by increasing popcount, each cardinality in increasing numeric order.
fn masks_by_cardinality(n: usize) -> impl Iterator<Item = u32> {
    let limit = 1u64 << n;
    (0..=n).flat_map(move |k| {
        // Gosper's hack enumerates k-subsets in increasing order.
        let mut m: u64 = (1u64 << k) - 1;
        std::iter::from_fn(move || {
            if m >= limit {
                return None;
            }
            let out = m as u32;
            if m == 0 {
                m = limit;
            } else {
                let c = m & m.wrapping_neg();
                let r = m + c;
                m = (((r ^ m) >> 2) / c) | r;
            }
            Some(out)
        })
    })
}

fn check_budget(cands: &[usize]) -> Result<()> {
    if cands.len() > EXHAUSTIVE_CANDIDATE_LIMIT {
        return Err(Error::BudgetExceeded(format!(
            "{} candidate feedback edges exceed the exhaustive limit of {EXHAUSTIVE_CANDIDATE_LIMIT}",
            cands.len()
        )));
    }
    Ok(())
}

pub fn find_afs(g: &CoDesignGraph, strategy: AfsStrategy) -> Result<Vec<usize>> {
    match strategy {
        AfsStrategy::Exhaustive => exhaustive(g),
        AfsStrategy::Greedy => Ok(greedy(g)),
    }
}

fn exhaustive(g: &CoDesignGraph) -> Result<Vec<usize>> {
    let cands = candidate_edges(g);
    check_budget(&cands)?;
    for mask in masks_by_cardinality(cands.len()) {
        let afs = mask_edges(&cands, mask);
        if is_acyclic_without(g, &afs) {
            return Ok(afs);
        }
    }
    Err(Error::InvalidAfs("removing every cyclic edge left a cycle".into()))
}

/// Shortest cycle length through edge `e` (u→v) and the number of such shortest v→u paths.
fn shortest_cycles_through(adj: &[Vec<(usize, usize)>], removed: &[bool], u: usize, v: usize) -> Option<(usize, u64)> {
    if u == v {
        return Some((1, 1));
    }
    let n = adj.len();
    let mut dist = vec![usize::MAX; n];
    let mut count = vec![0u64; n];
    let mut q = VecDeque::new();
    dist[v] = 0;
    count[v] = 1;
    q.push_back(v);
    while let Some(x) = q.pop_front() {
        for &(y, e) in &adj[x] {
            if removed[e] {
                continue;
            }
            if dist[y] == usize::MAX {
                dist[y] = dist[x] + 1;
                count[y] = count[x];
                q.push_back(y);
            } else if dist[y] == dist[x] + 1 {
                count[y] = count[y].saturating_add(count[x]);
            }
        }
    }
    (dist[u] != usize::MAX).then(|| (dist[u] + 1, count[u]))
}

fn greedy(g: &CoDesignGraph) -> Vec<usize> {
    let mut adj = vec![Vec::new(); g.nodes.len()];
    for (i, e) in g.edges.iter().enumerate() {
        adj[e.src.node].push((e.dst.node, i));
    }
    let mut removed = vec![false; g.edges.len()];
    let mut afs = Vec::new();
    while !acyclic(g.nodes.len(), &node_edges(g, &removed)) {
        // Prefer short cycles, then many of them, then the lowest edge index.
        let mut best: Option<(usize, u64, usize)> = None;
        for (i, e) in g.edges.iter().enumerate() {
            if removed[i] {
                continue;
            }
            if let Some((len, cnt)) = shortest_cycles_through(&adj, &removed, e.src.node, e.dst.node) {
                let better = match best {
                    None => true,
                    Some((bl, bc, _)) => len < bl || (len == bl && cnt > bc),
                };
                if better {
                    best = Some((len, cnt, i));
                }
            }
        }
        let (_, _, e) = best.expect("a cyclic graph has an edge on a cycle");
        removed[e] = true;
        afs.push(e);
    }
    afs.sort_unstable();
    afs
}

/// Design complexity: the least width of ∏ R_e over inclusion-minimal AFSs, with a witness.
#[derive(Clone, Debug, PartialEq)]
pub struct Complexity {
    pub width: Extent,
    pub witness: Vec<usize>,
}

/// Width of the product of the edge posets in `afs`; the empty product has width 1.
pub fn afs_width(g: &CoDesignGraph, afs: &[usize]) -> Extent {
    let factors: Vec<Poset> = afs
        .iter()
        .filter_map(|&e| g.edges.get(e).and_then(|edge| g.res_port_poset(edge.src).cloned()))
        .collect();
    Poset::product(factors).width_height().0
}

pub fn design_complexity(g: &CoDesignGraph) -> Result<Complexity> {
    let cands = candidate_edges(g);
    check_budget(&cands)?;
    let mut minimal: Vec<u32> = Vec::new();
    for mask in masks_by_cardinality(cands.len()) {
        if minimal.iter().any(|&m| m & !mask == 0) {
            continue;
        }
        if is_acyclic_without(g, &mask_edges(&cands, mask)) {
            minimal.push(mask);
        }
    }
    let mut best: Option<(u64, Vec<usize>)> = None;
    for &m in &minimal {
        let afs = mask_edges(&cands, m);
        if let Extent::Finite(w) = afs_width(g, &afs) {
            if best.as_ref().is_none_or(|(bw, _)| w < *bw) {
                best = Some((w, afs));
            }
        }
    }
    Ok(match best {
        Some((w, witness)) => Complexity { width: Extent::Finite(w), witness },
        None => Complexity {
            width: Extent::Unknown,
            witness: minimal.first().map(|&m| mask_edges(&cands, m)).unwrap_or_default(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Node, PortRef};
    use crate::posets::FinitePoset;
    use crate::primitives::DesignProblem;

    /// A ring of `n` identity nodes on `p`, plus exposed ports on node 0 via a chord-free layout.
    fn ring(n: usize, p: Poset) -> CoDesignGraph {
        let mut g = CoDesignGraph::new();
        for i in 0..n {
            g.add_node(Node::simple(&format!("n{i}"), DesignProblem::identity("id", p.clone())));
        }
        for i in 0..n {
            g.connect(PortRef::new(i, 0), PortRef::new((i + 1) % n, 0));
        }
        g
    }

    #[test]
    fn ring_needs_one_edge() {
        let g = ring(3, Poset::nat());
        assert_eq!(candidate_edges(&g), vec![0, 1, 2]);
        assert_eq!(find_afs(&g, AfsStrategy::Exhaustive).unwrap(), vec![0]);
        assert_eq!(find_afs(&g, AfsStrategy::Greedy).unwrap().len(), 1);
    }

    #[test]
    fn chain_has_empty_afs() {
        let mut g = ring(3, Poset::nat());
        g.edges.pop();
        assert!(candidate_edges(&g).is_empty());
        assert_eq!(find_afs(&g, AfsStrategy::Exhaustive).unwrap(), Vec::<usize>::new());
        assert_eq!(design_complexity(&g).unwrap().width, Extent::Finite(1));
    }

    #[test]
    fn self_loop_is_a_candidate() {
        let mut g = CoDesignGraph::new();
        let a = g.add_node(Node::simple("a", DesignProblem::identity("a", Poset::nat())));
        g.connect(PortRef::new(a, 0), PortRef::new(a, 0));
        assert_eq!(candidate_edges(&g), vec![0]);
        assert_eq!(find_afs(&g, AfsStrategy::Greedy).unwrap(), vec![0]);
    }

    #[test]
    fn greedy_breaks_shared_edge_first() {
        // Two 2-cycles a⇄b and a⇄c; a single AFS edge cannot break both, but two can.
        let mut g = CoDesignGraph::new();
        let nn = Poset::product(vec![Poset::nat(), Poset::nat()]);
        let split = DesignProblem::lift("s", nn.clone(), nn, crate::primitives::Expr::input()).unwrap();
        let a = g.add_node(Node::new("a", split, &["x", "y"], &["p", "q"]).unwrap());
        let b = g.add_node(Node::simple("b", DesignProblem::identity("b", Poset::nat())));
        let c = g.add_node(Node::simple("c", DesignProblem::identity("c", Poset::nat())));
        g.connect(PortRef::new(a, 0), PortRef::new(b, 0));
        g.connect(PortRef::new(b, 0), PortRef::new(a, 0));
        g.connect(PortRef::new(a, 1), PortRef::new(c, 0));
        g.connect(PortRef::new(c, 0), PortRef::new(a, 1));
        let ex = find_afs(&g, AfsStrategy::Exhaustive).unwrap();
        assert_eq!(ex, vec![0, 2]);
        let gr = find_afs(&g, AfsStrategy::Greedy).unwrap();
        assert_eq!(gr.len(), 2);
        assert!(is_acyclic_without(&g, &gr));
    }

    #[test]
    fn complexity_prefers_narrow_edge() {
        // Ring where one edge carries a width-3 antichain poset and another carries ℕ̄.
        let flat = Poset::finite(FinitePoset::from_relations(["a", "b", "c"], &[]).unwrap());
        let mut g = CoDesignGraph::new();
        let to_nat = DesignProblem::catalogue(
            "k",
            flat.clone(),
            Poset::nat(),
            Vec::new(),
        )
        .unwrap();
        let from_nat = DesignProblem::catalogue("m", Poset::nat(), flat.clone(), Vec::new()).unwrap();
        let x = g.add_node(Node::simple("x", to_nat));
        let y = g.add_node(Node::simple("y", from_nat));
        g.connect(PortRef::new(x, 0), PortRef::new(y, 0));
        g.connect(PortRef::new(y, 0), PortRef::new(x, 0));
        let c = design_complexity(&g).unwrap();
        assert_eq!(c.width, Extent::Finite(1));
        assert_eq!(c.witness, vec![0]);
        assert_eq!(afs_width(&g, &[1]), Extent::Finite(3));
    }

    #[test]
    fn too_many_candidates_is_refused() {
        let g = ring(EXHAUSTIVE_CANDIDATE_LIMIT + 1, Poset::nat());
        assert!(matches!(find_afs(&g, AfsStrategy::Exhaustive), Err(Error::BudgetExceeded(_))));
        assert_eq!(find_afs(&g, AfsStrategy::Greedy).unwrap().len(), 1);
    }
}
