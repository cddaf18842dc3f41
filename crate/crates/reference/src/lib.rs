//! Brute-force reference semantics for catalogue co-design graphs, and random instances.
//!
//! [`brute_force_h`] enumerates every joint choice of implementations, keeps the choices that
//! satisfy all edge constraints `requires(src) ⪯ provides(dst)` and the query `f ⪯ provides`
//! at the exposed functionality ports, and returns the minimal exposed resources. It uses only
//! the raw relations of the posets, never the antichain, decomposition or solver code.

use mcdp_core::graph::{CoDesignGraph, Node, PortRef};
use mcdp_core::posets::{bundle, FinitePoset, Poset, PosetKind, Value};
use mcdp_core::primitives::{Body, DesignProblem, Implementation};
use rand::seq::SliceRandom;
use rand::Rng;

/// Order test written against the poset definitions directly.
pub fn order(p: &Poset, a: &Value, b: &Value) -> bool {
    match (p.kind(), a, b) {
        (PosetKind::Nat | PosetKind::Real { .. }, _, Value::Top) => true,
        (PosetKind::Nat | PosetKind::Real { .. }, Value::Top, _) => false,
        (PosetKind::Nat, Value::Nat(x), Value::Nat(y)) => x <= y,
        (PosetKind::Real { .. }, Value::Real(x), Value::Real(y)) => x.get() <= y.get(),
        (PosetKind::Finite(fp), Value::Label(x), Value::Label(y)) => {
            let (i, j) = (fp.index_of(x).expect("member"), fp.index_of(y).expect("member"));
            fp.leq_index(i, j)
        }
        (PosetKind::Product(fs), Value::Tuple(xs), Value::Tuple(ys)) => {
            fs.len() == xs.len() && xs.len() == ys.len() && (0..fs.len()).all(|k| order(&fs[k], &xs[k], &ys[k]))
        }
        _ => panic!("value does not belong to poset"),
    }
}

/// Minimal elements, sorted and deduplicated.
pub fn minimal(p: &Poset, mut xs: Vec<Value>) -> Vec<Value> {
    xs.sort();
    xs.dedup();
    let keep: Vec<bool> = xs
        .iter()
        .map(|x| !xs.iter().any(|y| y != x && order(p, y, x)))
        .collect();
    xs.into_iter().zip(keep).filter_map(|(x, k)| k.then_some(x)).collect()
}

/// `A ⪯ B` for antichains: every element of B dominates some element of A.
pub fn antichain_leq(p: &Poset, a: &[Value], b: &[Value]) -> bool {
    b.iter().all(|y| a.iter().any(|x| order(p, x, y)))
}

/// Every element of a finite poset or a product of finite posets.
pub fn elements(p: &Poset) -> Option<Vec<Value>> {
    match p.kind() {
        PosetKind::Finite(fp) => Some((0..fp.len()).map(|i| fp.element(i)).collect()),
        PosetKind::Product(fs) => {
            let mut out = vec![Vec::new()];
            for f in fs {
                let es = elements(f)?;
                out = out
                    .into_iter()
                    .flat_map(|prefix| {
                        es.iter().map(move |e| {
                            let mut v = prefix.clone();
                            v.push(e.clone());
                            v
                        })
                    })
                    .collect();
            }
            Some(out.into_iter().map(Value::Tuple).collect())
        }
        _ => None,
    }
}

/// Component `k` of a port bundle value.
fn port_value(v: &Value, ports: usize, k: usize) -> &Value {
    if ports == 1 {
        v
    } else {
        &v.as_tuple().expect("bundle")[k]
    }
}

fn bundle_value(mut parts: Vec<Value>) -> Value {
    if parts.len() == 1 {
        parts.pop().expect("one part")
    } else {
        Value::Tuple(parts)
    }
}

/// h(f) of a graph of catalogue nodes by exhaustive enumeration.
///
/// Panics if a node is not a catalogue; the oracle has no other semantics.
pub fn brute_force_h(g: &CoDesignGraph, f: &Value) -> Vec<Value> {
    let impls: Vec<&[Implementation]> = g
        .nodes
        .iter()
        .map(|n| match n.dp.body() {
            Body::Catalogue(c) => c.entries(),
            _ => panic!("node {} is not a catalogue", n.name),
        })
        .collect();
    let fun_ports = g.exposed_fun.len();
    let fparts: Vec<&Value> = (0..fun_ports).map(|k| port_value(f, fun_ports, k)).collect();
    let provides = |choice: &[usize], p: PortRef| {
        let n = &g.nodes[p.node];
        port_value(&impls[p.node][choice[p.node]].provides, n.fun_ports.len(), p.port)
    };
    let requires = |choice: &[usize], p: PortRef| {
        let n = &g.nodes[p.node];
        port_value(&impls[p.node][choice[p.node]].requires, n.res_ports.len(), p.port)
    };
    let mut found = Vec::new();
    if impls.iter().any(|i| i.is_empty()) {
        return found;
    }
    let mut choice = vec![0usize; g.nodes.len()];
    'outer: loop {
        let ok_edges = g.edges.iter().all(|e| {
            let poset = &g.nodes[e.dst.node].fun_ports[e.dst.port].poset;
            order(poset, requires(&choice, e.src), provides(&choice, e.dst))
        });
        let ok_query = g.exposed_fun.iter().enumerate().all(|(k, (_, p))| {
            let poset = &g.nodes[p.node].fun_ports[p.port].poset;
            order(poset, fparts[k], provides(&choice, *p))
        });
        if ok_edges && ok_query {
            found.push(bundle_value(g.exposed_res.iter().map(|(_, p)| requires(&choice, *p).clone()).collect()));
        }
        for i in 0..choice.len() {
            choice[i] += 1;
            if choice[i] < impls[i].len() {
                continue 'outer;
            }
            choice[i] = 0;
        }
        break;
    }
    minimal(&g.res_poset(), found)
}

/// Bounds for [`random_graph`].
#[derive(Clone, Copy, Debug)]
pub struct GenConfig {
    pub max_nodes: usize,
    pub max_impls: usize,
    pub max_back_edges: usize,
    pub max_poset_size: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig { max_nodes: 4, max_impls: 6, max_back_edges: 2, max_poset_size: 8 }
    }
}

/// A random finite poset on `p0..p{n-1}`; relations only go from lower to higher index, so
/// the closure is always antisymmetric.
pub fn random_poset(rng: &mut impl Rng, n: usize, density: f64) -> FinitePoset {
    let names: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
    let mut rel = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(density) {
                rel.push((names[i].as_str(), names[j].as_str()));
            }
        }
    }
    FinitePoset::from_relations(names.iter().map(String::as_str), &rel).expect("acyclic relations")
}

/// A random element of a finite poset or product.
pub fn random_value(rng: &mut impl Rng, p: &Poset) -> Value {
    match p.kind() {
        PosetKind::Finite(fp) => fp.element(rng.gen_range(0..fp.len())),
        PosetKind::Product(fs) => Value::Tuple(fs.iter().map(|f| random_value(rng, f)).collect()),
        _ => panic!("generator only samples finite posets"),
    }
}

/// A random element `w` with `v ⪯ w`, chosen per component among the dominating elements.
pub fn random_above(rng: &mut impl Rng, p: &Poset, v: &Value) -> Value {
    match (p.kind(), v) {
        (PosetKind::Finite(_), _) => {
            let ups: Vec<Value> = elements(p).expect("finite").into_iter().filter(|w| order(p, v, w)).collect();
            ups.choose(rng).expect("v dominates itself").clone()
        }
        (PosetKind::Product(fs), Value::Tuple(vs)) => {
            Value::Tuple(fs.iter().zip(vs).map(|(f, x)| random_above(rng, f, x)).collect())
        }
        _ => panic!("generator only samples finite posets"),
    }
}

/// A random well-formed graph of catalogue nodes over finite posets. Every port is bound once;
/// edges whose destination is not after the source in node order are back edges, at most
/// `max_back_edges` of them.
pub fn random_graph(rng: &mut impl Rng, cfg: GenConfig) -> CoDesignGraph {
    let pool: Vec<Poset> = (0..rng.gen_range(1..=2))
        .map(|_| {
            let n = rng.gen_range(2..=cfg.max_poset_size.max(2));
            let density = rng.gen_range(0.2..0.8);
            Poset::finite(random_poset(rng, n, density))
        })
        .collect();
    let n_nodes = rng.gen_range(1..=cfg.max_nodes);
    let mut g = CoDesignGraph::new();
    let mut shapes = Vec::new();
    for i in 0..n_nodes {
        let fun: Vec<Poset> = (0..rng.gen_range(1..=2)).map(|_| pool.choose(rng).unwrap().clone()).collect();
        let res: Vec<Poset> = (0..rng.gen_range(1..=2)).map(|_| pool.choose(rng).unwrap().clone()).collect();
        let (fp, rp) = (bundle(fun.clone()), bundle(res.clone()));
        let entries = (0..rng.gen_range(1..=cfg.max_impls))
            .map(|k| Implementation {
                id: format!("i{k}"),
                provides: random_value(rng, &fp),
                requires: random_value(rng, &rp),
            })
            .collect();
        let dp = DesignProblem::catalogue(&format!("n{i}"), fp, rp, entries).expect("valid catalogue");
        let fnames: Vec<String> = (0..fun.len()).map(|k| format!("f{k}")).collect();
        let rnames: Vec<String> = (0..res.len()).map(|k| format!("r{k}")).collect();
        let fnames: Vec<&str> = fnames.iter().map(String::as_str).collect();
        let rnames: Vec<&str> = rnames.iter().map(String::as_str).collect();
        g.add_node(Node::new(&format!("n{i}"), dp, &fnames, &rnames).expect("ports match"));
        shapes.push((fun, res));
    }
    let mut fun_free: Vec<PortRef> = Vec::new();
    let mut res_all: Vec<PortRef> = Vec::new();
    for (i, (fun, res)) in shapes.iter().enumerate() {
        fun_free.extend((0..fun.len()).map(|k| PortRef::new(i, k)));
        res_all.extend((0..res.len()).map(|k| PortRef::new(i, k)));
    }
    res_all.shuffle(rng);
    let mut back = 0;
    let mut res_free = Vec::new();
    for src in res_all {
        let poset = &shapes[src.node].1[src.port];
        let options: Vec<usize> = (0..fun_free.len())
            .filter(|&j| {
                let dst = fun_free[j];
                &shapes[dst.node].0[dst.port] == poset && (dst.node > src.node || back < cfg.max_back_edges)
            })
            .collect();
        if options.is_empty() || !rng.gen_bool(0.6) {
            res_free.push(src);
            continue;
        }
        let j = *options.choose(rng).unwrap();
        let dst = fun_free.remove(j);
        if dst.node <= src.node {
            back += 1;
        }
        g.connect(src, dst);
    }
    res_free.sort();
    for (k, p) in fun_free.into_iter().enumerate() {
        g.expose_fun(&format!("F{k}"), p);
    }
    for (k, p) in res_free.into_iter().enumerate() {
        g.expose_res(&format!("R{k}"), p);
    }
    g
}

/// Query points for a graph: every functionality when there are at most `limit`, else a sample.
pub fn query_points(rng: &mut impl Rng, g: &CoDesignGraph, limit: usize) -> Vec<Value> {
    let p = g.fun_poset();
    match elements(&p) {
        Some(all) if all.len() <= limit => all,
        _ => (0..limit).map(|_| random_value(rng, &p)).collect(),
    }
}
