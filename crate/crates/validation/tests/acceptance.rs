//! Acceptance suite: one PASS/FAIL line per criterion. Exits nonzero if any criterion fails.

use std::path::{Path, PathBuf};
use std::time::Instant;

use mcdp_cli::export::{export, Artifact};
use mcdp_cli::quantity::Quantity;
use mcdp_cli::query::{bind, prepare, restrict, run, Prepared};
use mcdp_cli::sweep::{sweep, Axis, Row, SweepSpec};
use mcdp_core::compose::{EvalContext, TreeNode};
use mcdp_core::graph::{design_complexity, CoDesignGraph};
use mcdp_core::lang::{compile_file, parse, ErrorKind};
use mcdp_core::posets::{Antichain, Extent};
use mcdp_core::primitives::Body;
use mcdp_core::solver::{check_fixed_point, solve, TraceStatus};
use mcdp_core::{DesignProblem, DpTree, Expr, IterationBudget, Poset, SolveStatus, TaggedAntichain, Value};
use mcdp_reference::{antichain_leq, brute_force_h, query_points, random_above, random_graph, random_value, GenConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn models() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

fn model(name: &str) -> PathBuf {
    models().join(format!("{name}.mcdp"))
}

fn q(x: f64, unit: Option<&str>) -> Quantity {
    Quantity { value: Some(x), unit: unit.map(String::from) }
}

fn nn() -> Poset {
    Poset::product(vec![Poset::nat(), Poset::nat()])
}

fn pts(ps: &[(u64, u64)]) -> Antichain {
    let vs = ps.iter().map(|&(a, b)| Value::pair(Value::Nat(a), Value::Nat(b))).collect();
    Antichain::new(nn(), vs).unwrap()
}

fn show(a: &Antichain) -> String {
    let inner: Vec<String> = a
        .iter()
        .map(|v| match v.as_tuple() {
            Some([Value::Nat(x), Value::Nat(y)]) => format!("<{x},{y}>"),
            _ => format!("{v:?}"),
        })
        .collect();
    format!("{{{}}}", inner.join(","))
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

/// 1. Toy ℕ̄ model: exact h(c) for c = 0..4, under one second.
fn toy_exactness() -> Outcome {
    let expected: [&[(u64, u64)]; 5] = [
        &[(0, 0)],
        &[(0, 1), (1, 0)],
        &[(0, 4), (3, 3), (4, 0)],
        &[(0, 6), (3, 4), (4, 3), (6, 0)],
        &[(0, 7), (3, 6), (4, 4), (6, 3), (7, 0)],
    ];
    let start = Instant::now();
    let m = compile_file(&model("Toy")).unwrap();
    let tree = m.tree().unwrap();
    let mut bad = Vec::new();
    for (c, want) in expected.iter().enumerate() {
        let r = solve(&tree, &Value::Nat(c as u64), IterationBudget::default()).unwrap();
        let got = r.antichain.values();
        if got != pts(want) {
            bad.push(format!("h({c}) = {} but expected {}", show(&got), show(&pts(want))));
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let fast = elapsed < 1.0;
    let mut detail = format!("{} of 5 values exact, {elapsed:.3} s", 5 - bad.len());
    for b in &bad {
        detail.push_str("; ");
        detail.push_str(b);
    }
    outcome(bad.is_empty() && fast, detail)
}

/// The toy as a hand-built tree: loop(series(par(id, par(h2, h2)), series(h1, h3))) with loop
/// state ⟨x, y⟩, h1 the ternary sum, h2 = ⌈√·⌉ and h3 the ℕ̄ sum inverse.
fn toy_tree() -> DpTree {
    let n = Poset::nat;
    let h2 = || DpTree::leaf(DesignProblem::lift("h2", n(), n(), Expr::CeilSqrt(Box::new(Expr::input()))).unwrap());
    let id = DpTree::leaf(DesignProblem::identity("c", n()));
    let sum = Expr::Sum(vec![Expr::Input(vec![0]), Expr::Input(vec![1, 0]), Expr::Input(vec![1, 1])]);
    let h1 = DpTree::leaf(DesignProblem::lift("h1", Poset::product(vec![n(), nn()]), n(), sum).unwrap());
    let h3 = DpTree::leaf(DesignProblem::inv_plus_nat("h3"));
    let body = DpTree::series(DpTree::par(id, DpTree::par(h2(), h2())), DpTree::series(h1, h3).unwrap()).unwrap();
    DpTree::feedback(body).unwrap()
}

/// 2. Kleene step counts: c = 20 has R₅ = R₆ and R₄ ≠ R₅; c = 2 lists R₀…R₃.
fn kleene_steps() -> Outcome {
    let tree = toy_tree();
    let r20 = solve(&tree, &Value::Nat(20), IterationBudget::default()).unwrap();
    let s = &r20.traces[0].steps;
    let c20 = s.len() > 6 && s[5] == s[6] && s[4] != s[5];
    let first_equal = (0..s.len() - 1).find(|&k| s[k] == s[k + 1]);
    let r2 = solve(&tree, &Value::Nat(2), IterationBudget::default()).unwrap();
    let s2 = &r2.traces[0].steps;
    let listed = [pts(&[(0, 0)]), pts(&[(0, 2), (1, 1), (2, 0)]), pts(&[(0, 4), (2, 2), (4, 0)]), pts(&[(0, 4), (3, 3), (4, 0)])];
    let mismatched: Vec<String> = (0..4)
        .filter(|&k| s2.get(k) != Some(&listed[k]))
        .map(|k| format!("R{k} = {} but expected {}", s2.get(k).map_or("-".into(), show), show(&listed[k])))
        .collect();
    let detail = format!(
        "c=20: first R_k = R_(k+1) at k = {}, |R_k| = {}; c=2: {}",
        first_equal.map_or("none".into(), |k| k.to_string()),
        r20.antichain.len(),
        if mismatched.is_empty() { "R0..R3 as listed".into() } else { mismatched.join("; ") }
    );
    outcome(c20 && mismatched.is_empty(), detail)
}

struct RandomCase {
    graph: CoDesignGraph,
    tree: DpTree,
}

fn random_cases(n: usize, seed: u64) -> Vec<RandomCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let graph = random_graph(&mut rng, GenConfig::default());
            let tree = graph.to_tree_auto().unwrap();
            RandomCase { graph, tree }
        })
        .collect()
}

/// 3. Decompose and solve equals brute-force enumeration on ≥ 200 random graphs, < 60 s.
fn oracle_equivalence(cases: &[RandomCase]) -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut queries, mut mismatches, mut cyclic) = (0, 0, 0);
    for c in cases {
        cyclic += usize::from(c.tree.loop_count() > 0);
        for f in query_points(&mut rng, &c.graph, 16) {
            queries += 1;
            let got = solve(&c.tree, &f, IterationBudget::default()).unwrap();
            if got.antichain.values().elements() != &brute_force_h(&c.graph, &f)[..] {
                mismatches += 1;
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    outcome(
        cases.len() >= 200 && mismatches == 0 && elapsed < 60.0,
        format!("{} graphs ({cyclic} cyclic), {queries} queries, {mismatches} mismatches, {elapsed:.1} s", cases.len()),
    )
}

/// 4. h(f₁) ⪯ h(f₂) for ≥ 20 sampled pairs f₁ ⪯ f₂ on every random graph.
fn monotonicity(cases: &[RandomCase]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (mut pairs, mut violations) = (0, 0);
    for c in cases {
        let fp = c.graph.fun_poset();
        let rp = c.graph.res_poset();
        for _ in 0..20 {
            let f1 = random_value(&mut rng, &fp);
            let f2 = random_above(&mut rng, &fp, &f1);
            let h1 = solve(&c.tree, &f1, IterationBudget::default()).unwrap().antichain.values();
            let h2 = solve(&c.tree, &f2, IterationBudget::default()).unwrap().antichain.values();
            pairs += 1;
            if !antichain_leq(&rp, h1.elements(), h2.elements()) {
                violations += 1;
            }
        }
    }
    outcome(violations == 0, format!("{pairs} pairs over {} graphs, {violations} violations", cases.len()))
}

/// The root loop of a decomposed graph: the tree is `loop` or `series(loop, projection)`.
fn root_loop(t: &DpTree) -> Option<&DpTree> {
    match t.node() {
        TreeNode::Loop(_) => Some(t),
        TreeNode::Series(a, _) if matches!(a.node(), TreeNode::Loop(_)) => Some(a),
        _ => None,
    }
}

/// 5. Converged traces ascend and end on a fixed point; capped traces are lower bounds.
fn certificates(cases: &[RandomCase]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let (mut converged, mut capped, mut failures) = (0, 0, Vec::new());
    for (i, c) in cases.iter().enumerate() {
        let Some(lp) = root_loop(&c.tree) else { continue };
        for f in query_points(&mut rng, &c.graph, 8) {
            let r = solve(&c.tree, &f, IterationBudget::default()).unwrap();
            let trace = &r.traces[0];
            if let TraceStatus::Converged(_) = trace.status {
                converged += 1;
                let mut ctx = EvalContext::new(IterationBudget::default());
                let fixed = check_fixed_point(
                    |a| Ok(lp.loop_psi(&f, &TaggedAntichain::untagged(a.clone()), &mut ctx)?.values()),
                    trace.last(),
                )
                .unwrap();
                if !trace.is_ascending() || !fixed {
                    failures.push(format!("graph {i}: ascending {} fixed point {fixed}", trace.is_ascending()));
                }
            }
            for cap in 1..=2 {
                let short = solve(&c.tree, &f, IterationBudget::new(cap).unwrap()).unwrap();
                if short.status == SolveStatus::IterationCapReached {
                    capped += 1;
                    let truth = brute_force_h(&c.graph, &f);
                    if !short.traces[0].is_ascending()
                        || !antichain_leq(&c.graph.res_poset(), short.antichain.values().elements(), &truth)
                    {
                        failures.push(format!("graph {i}: capped result at budget {cap} is not a lower bound"));
                    }
                }
            }
        }
    }
    let mut detail = format!("{converged} converged traces certified, {capped} capped results checked against the oracle");
    if let Some(f) = failures.first() {
        detail.push_str(&format!("; {} failures, first: {f}", failures.len()));
    }
    outcome(failures.is_empty() && converged > 0 && capped > 0, detail)
}

fn battery_grid() -> SweepSpec {
    SweepSpec {
        x: Axis { name: "capacity".into(), min: 1e4, max: 1e7, steps: 20, log: true, unit: Some("J".into()) },
        y: Some(Axis { name: "missions".into(), min: 1.0, max: 1e3, steps: 20, log: true, unit: None }),
        fixed: Vec::new(),
    }
}

fn battery_sweep(objective: Option<&[String]>) -> (Prepared, Vec<Row>) {
    let m = restrict(compile_file(&model("Batteries")).unwrap(), objective, &[]).unwrap();
    let p = prepare(&m).unwrap();
    let rows = sweep(&p, &battery_grid(), IterationBudget::default()).unwrap();
    (p, rows)
}

fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs()
    }
}

/// 6. Mass-only objective: LiPo wins everywhere; NiMH spot check against the formulas.
fn battery_reproduction() -> Outcome {
    let (_, rows) = battery_sweep(Some(&["mass".to_string()]));
    let feasible: Vec<&Row> = rows.iter().filter(|r| r.status == SolveStatus::Converged && r.count() > 0).collect();
    let not_lipo: Vec<String> = feasible
        .iter()
        .filter(|r| r.winners() != ["LiPo"])
        .map(|r| format!("({}, {:?}) -> {:?}", r.x, r.y, r.winners()))
        .collect();

    let nimh = compile_file(&model("Battery_NiMH")).unwrap();
    let p = prepare(&nimh).unwrap();
    let f = bind(&p.provides, &[("capacity".into(), q(3.6e5, Some("J"))), ("missions".into(), q(500.0, None))]).unwrap();
    let r = run(&p, &f, IterationBudget::default()).unwrap();
    // Direct evaluation: mass = C/ρ, maintenance = ⌈n/c⌉, cost = ⌈n/c⌉·C/α with Wh = 3600 J.
    let (cap, n, rho, alpha, cycles) = (3.6e5_f64, 500.0_f64, 100.0 * 3600.0, 3.41 * 3600.0, 500.0_f64);
    let want = [cap / rho, (n / cycles).ceil() * cap / alpha, (n / cycles).ceil()];
    let got: Vec<f64> = match r.antichain.values().elements() {
        [v] => v.as_tuple().unwrap().iter().map(|x| x.as_f64().unwrap()).collect(),
        _ => Vec::new(),
    };
    let spot = got.len() == 3 && got.iter().zip(want).all(|(g, w)| rel_err(*g, w) <= 1e-9);
    let mut detail = format!(
        "{} of {} grid points feasible, LiPo wins at {}; NiMH at 100 Wh, 500 missions: mass {:?} cost {:?} maintenance {:?}",
        feasible.len(),
        rows.len(),
        feasible.len() - not_lipo.len(),
        got.first(),
        got.get(1),
        got.get(2)
    );
    if let Some(first) = not_lipo.first() {
        detail.push_str(&format!("; other winners, first: {first}"));
    }
    outcome(!feasible.is_empty() && not_lipo.is_empty() && spot, detail)
}

/// 7. Joint ⟨mass, cost, maintenance⟩ objective: some grid point has ≥ 3 minimal solutions.
fn joint_multiplicity() -> Outcome {
    let (_, rows) = battery_sweep(None);
    let max = rows.iter().map(Row::count).max().unwrap_or(0);
    let at_least_3 = rows.iter().filter(|r| r.count() >= 3).count();
    outcome(max >= 3, format!("{at_least_3} of {} points have >= 3 minimal solutions (max {max})", rows.len()))
}

/// 8. Drone sweep with payload 100 g and extra power 1 W. Feasible points converge within 200
///    iterations; infeasible points return the empty antichain.
fn drone_convergence() -> Outcome {
    let m = compile_file(&model("Drone")).unwrap();
    let p = prepare(&m).unwrap();
    let spec = SweepSpec {
        x: Axis { name: "endurance".into(), min: 60.0, max: 3600.0, steps: 20, log: false, unit: Some("s".into()) },
        y: Some(Axis { name: "missions".into(), min: 1.0, max: 1e3, steps: 10, log: true, unit: None }),
        fixed: vec![("payload".into(), q(100.0, Some("g"))), ("extra_power".into(), q(1.0, Some("W")))],
    };
    let rows = sweep(&p, &spec, IterationBudget::default()).unwrap();
    let feasible: Vec<&Row> = rows.iter().filter(|r| r.count() > 0).collect();
    let slow: Vec<&&Row> = feasible
        .iter()
        .filter(|r| r.status != SolveStatus::Converged || r.iterations.iter().any(|&k| k > 200))
        .collect();
    let infeasible: Vec<&Row> = rows.iter().filter(|r| r.count() == 0).collect();
    let bad_cert = infeasible.iter().filter(|r| r.status != SolveStatus::Infeasible).count();
    let worst = feasible.iter().flat_map(|r| r.iterations.iter().copied()).max().unwrap_or(0);
    outcome(
        !feasible.is_empty() && !infeasible.is_empty() && slow.is_empty() && bad_cert == 0,
        format!(
            "{} feasible points, max {worst} iterations, {} over 200; {} infeasible points, {bad_cert} without an empty-antichain certificate",
            feasible.len(),
            slow.len(),
            infeasible.len()
        ),
    )
}

/// 9. The drone tree has exactly one loop, at the root; design complexity is 1.
fn decomposition_structure() -> Outcome {
    let m = compile_file(&model("Drone")).unwrap();
    let tree = m.graph.to_tree(mcdp_core::graph::AfsStrategy::Exhaustive).unwrap();
    let text = export(&m, Artifact::Tree, None).unwrap();
    let root = root_loop(&tree).is_some();
    let only_projection_after = match tree.node() {
        TreeNode::Series(_, b) => matches!(b.node(), TreeNode::Leaf(dp) if matches!(dp.body(), Body::Lift(_))),
        TreeNode::Loop(_) => true,
        _ => false,
    };
    let loops = tree.loop_count();
    let c = design_complexity(&m.graph).unwrap();
    let real_edge = c.witness.len() == 1
        && m.graph.res_port_poset(m.graph.edges[c.witness[0]].src).is_some_and(|p| p.width_height().0 == Extent::Finite(1));
    outcome(
        loops == 1 && root && only_projection_after && text.starts_with("loop(") && c.width == Extent::Finite(1) && real_edge,
        format!("{loops} loop node(s), root loop {root}, design complexity {:?} with witness {:?}", c.width, c.witness),
    )
}

fn mcdp_files(dir: &Path, out: &mut Vec<PathBuf>) {
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    entries.sort();
    for p in entries {
        let name = p.file_name().unwrap().to_string_lossy().to_string();
        if p.is_dir() && !name.starts_with('.') && name != "target" {
            mcdp_files(&p, out);
        } else if p.extension().is_some_and(|e| e == "mcdp") {
            out.push(p);
        }
    }
}

/// 10. Every corpus model compiles cleanly; the rejected corpus fails to parse with locations.
fn parser_corpus() -> Outcome {
    let mut files = Vec::new();
    mcdp_files(&Path::new(env!("CARGO_MANIFEST_DIR")).join("../.."), &mut files);
    let (rejected, accepted): (Vec<PathBuf>, Vec<PathBuf>) =
        files.into_iter().partition(|p| p.components().any(|c| c.as_os_str() == "rejected"));
    let mut problems = Vec::new();
    for f in &accepted {
        match compile_file(f) {
            Ok(m) if m.graph.validate().is_empty() => {}
            Ok(m) => problems.push(format!("{}: {} diagnostics", f.display(), m.graph.validate().len())),
            Err(e) => problems.push(e.to_string()),
        }
    }
    for f in &rejected {
        let src = std::fs::read_to_string(f).unwrap();
        match parse(&src) {
            Err(e) if e.kind == ErrorKind::Syntax && e.span.line > 0 && e.span.col > 0 => {}
            other => problems.push(format!("{}: not rejected at parse time: {other:?}", f.display())),
        }
    }
    let mut detail = format!("{} models compiled, {} rejected with located syntax errors", accepted.len(), rejected.len());
    if let Some(p) = problems.first() {
        detail.push_str(&format!("; first problem: {p}"));
    }
    outcome(problems.is_empty() && !accepted.is_empty() && rejected.len() >= 2, detail)
}

fn main() {
    let cases = random_cases(200, 2025);
    type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;
    let criteria: Vec<(&str, Check)> = vec![
        ("toy exactness", Box::new(toy_exactness)),
        ("Kleene step counts", Box::new(kleene_steps)),
        ("oracle equivalence", Box::new(|| oracle_equivalence(&cases))),
        ("monotonicity", Box::new(|| monotonicity(&cases))),
        ("ascent and fixed-point certificates", Box::new(|| certificates(&cases))),
        ("battery reproduction", Box::new(battery_reproduction)),
        ("joint-objective multiplicity", Box::new(joint_multiplicity)),
        ("drone convergence", Box::new(drone_convergence)),
        ("decomposition structure", Box::new(decomposition_structure)),
        ("parser corpus", Box::new(parser_corpus)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        failed += usize::from(!o.pass);
        println!("{} {:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
