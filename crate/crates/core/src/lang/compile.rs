//! Lowering a model to a co-design graph.
//!
//! The model is first turned into a net of sources (values produced: provided functionalities,
//! instance resources, expression outputs) and sinks (values to be bounded from below:
//! required resources, instance functionalities). Each constraint `sink >= expr` adds a driver
//! to the sink. Resolution then inserts the plumbing that keeps every port bound exactly once:
//! a join (max) for a sink with several drivers, a bottom constant for an undriven sink, a fork
//! for a source with several readers and a ⊤ terminator for an unread one.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;

use super::ast::*;
use super::units::{Dim, Unit};
use super::{parse, ErrorKind, LangError, Library};
use crate::compose::DpTree;
use crate::graph::{CoDesignGraph, Node, PortRef};
use crate::posets::{bundle, Poset, Value};
use crate::primitives::{ceil_sqrt, DesignProblem, Expr as CExpr};

type LResult<T> = Result<T, LangError>;

/// An exposed port of a compiled model with its declared unit.
#[derive(Clone, Debug, PartialEq)]
pub struct PortInfo {
    pub name: String,
    pub unit: Unit,
    pub poset: Poset,
}

#[derive(Clone, Debug)]
pub struct CompiledModel {
    pub graph: CoDesignGraph,
    pub provides: Vec<PortInfo>,
    pub requires: Vec<PortInfo>,
}

impl CompiledModel {
    /// Composition tree; exhaustive AFS search when small enough, greedy otherwise.
    pub fn tree(&self) -> crate::Result<DpTree> {
        self.graph.to_tree_auto()
    }

    pub fn fun_poset(&self) -> Poset {
        bundle(self.provides.iter().map(|p| p.poset.clone()).collect())
    }

    pub fn res_poset(&self) -> Poset {
        bundle(self.requires.iter().map(|p| p.poset.clone()).collect())
    }
}

/// Compiles a parsed model; `` `Name `` references resolve in `lib`.
pub fn compile(ast: &ModelAst, lib: &Library) -> LResult<CompiledModel> {
    let mut cx = Compiler { lib, stack: Vec::new(), cache: HashMap::new() };
    cx.model(ast, "<input>")
}

/// Compiles library model `name`.
pub fn compile_named(name: &str, lib: &Library) -> LResult<CompiledModel> {
    let file = lib.file_name(name);
    let src = lib.get(name).ok_or_else(|| {
        LangError::new(ErrorKind::UnresolvedReference, Span::default(), format!("no model named {name}")).in_file(&file)
    })?;
    let ast = parse(src).map_err(|e| e.in_file(&file))?;
    let mut cx = Compiler { lib, stack: vec![name.to_string()], cache: HashMap::new() };
    cx.model(&ast, &file)
}

/// Compiles a `.mcdp` file; its directory is the library.
pub fn compile_file(path: &Path) -> LResult<CompiledModel> {
    let file = path.display().to_string();
    let io = |e: std::io::Error| LangError::new(ErrorKind::Io, Span::default(), e.to_string()).in_file(&file);
    let src = std::fs::read_to_string(path).map_err(io)?;
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let lib = Library::from_dir(dir).map_err(io)?;
    let ast = parse(&src).map_err(|e| e.in_file(&file))?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("").to_string();
    let mut cx = Compiler { lib: &lib, stack: vec![stem], cache: HashMap::new() };
    cx.model(&ast, &file)
}

/// A compiled sub-model as seen by an instance.
struct SubModel {
    tree: DpTree,
    provides: Vec<PortInfo>,
    requires: Vec<PortInfo>,
}

struct Compiler<'l> {
    lib: &'l Library,
    stack: Vec<String>,
    cache: HashMap<String, Arc<SubModel>>,
}

impl Compiler<'_> {
    fn model(&mut self, ast: &ModelAst, file: &str) -> LResult<CompiledModel> {
        Builder::new(self, file).build(ast).map_err(|e| e.in_file(file))
    }

    fn sub_model(&mut self, r: &ModelRef, file: &str) -> LResult<Arc<SubModel>> {
        match r {
            ModelRef::Inline(ast) => {
                let m = self.model(ast, file)?;
                Ok(Arc::new(to_sub(m).map_err(|e| e.in_file(file))?))
            }
            ModelRef::Named(name, span) => {
                if let Some(m) = self.cache.get(name) {
                    return Ok(m.clone());
                }
                if self.stack.contains(name) {
                    let mut chain = self.stack.clone();
                    chain.push(name.clone());
                    return Err(LangError::new(
                        ErrorKind::CyclicModelDefinition,
                        *span,
                        format!("model {name} refers to itself: {}", chain.join(" → ")),
                    ));
                }
                let src = self.lib.get(name).ok_or_else(|| {
                    LangError::new(ErrorKind::UnresolvedReference, *span, format!("no model named `{name}"))
                })?;
                let sub_file = self.lib.file_name(name);
                let ast = parse(src).map_err(|e| e.in_file(&sub_file))?;
                self.stack.push(name.clone());
                let m = self.model(&ast, &sub_file);
                self.stack.pop();
                let sub = Arc::new(to_sub(m?).map_err(|e| e.in_file(&sub_file))?);
                self.cache.insert(name.clone(), sub.clone());
                Ok(sub)
            }
        }
    }
}

fn to_sub(m: CompiledModel) -> LResult<SubModel> {
    let tree = m
        .tree()
        .map_err(|e| LangError::new(ErrorKind::InvalidGraph, Span::default(), e.to_string()))?;
    Ok(SubModel { tree, provides: m.provides, requires: m.requires })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Ty {
    Nat,
    Real(Dim),
}

impl Ty {
    fn of(u: &Unit) -> Ty {
        match u {
            Unit::Nat => Ty::Nat,
            Unit::Real { dim, .. } => Ty::Real(*dim),
        }
    }

    fn poset(self) -> Poset {
        match self {
            Ty::Nat => Poset::nat(),
            Ty::Real(d) => d.poset(),
        }
    }

    fn describe(self) -> String {
        match self {
            Ty::Nat => "ℕ̄".into(),
            Ty::Real(d) if d.is_none() => "dimensionless ℝ̄₊".into(),
            Ty::Real(d) => format!("ℝ̄₊ [{d}]"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum SourceKey {
    Fun(usize),
    Port(PortRef),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum SinkKey {
    Res(usize),
    Port(PortRef),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Reader {
    Port(PortRef),
    Res(usize),
    Terminate,
}

/// An expression after lowering: a constant, or a monotone map of leaf sources.
#[derive(Clone, Debug)]
enum Low {
    /// A number without unit; its type comes from context.
    Lit(f64),
    /// Canonical magnitude with dimension.
    Qty(f64, Dim),
    /// `expr` reads leaf i as `Input([i])`.
    Term(CExpr, Ty),
}

#[derive(Clone, Debug)]
enum Binding {
    Const(Low),
    Source(SourceKey),
}

struct Instance {
    node: usize,
    provides: Vec<PortInfo>,
    requires: Vec<PortInfo>,
}

struct Builder<'c, 'l> {
    cx: &'c mut Compiler<'l>,
    file: String,
    g: CoDesignGraph,
    provides: Vec<PortInfo>,
    requires: Vec<PortInfo>,
    instances: HashMap<String, Instance>,
    bindings: HashMap<String, Binding>,
    /// Identity node reading back required resource k.
    read_back: HashMap<usize, usize>,
    sinks: Vec<(SinkKey, Ty, String, Vec<SourceKey>)>,
    sink_index: HashMap<SinkKey, usize>,
    sources: Vec<(SourceKey, Ty, String, Vec<Reader>)>,
    source_index: HashMap<SourceKey, usize>,
    /// Leaves of the expression being lowered.
    leaves: Vec<SourceKey>,
    names: HashMap<String, usize>,
}

fn err(kind: ErrorKind, span: Span, msg: String) -> LangError {
    LangError::new(kind, span, msg)
}

fn graph_err(e: crate::Error) -> LangError {
    err(ErrorKind::InvalidGraph, Span::default(), e.to_string())
}

impl<'c, 'l> Builder<'c, 'l> {
    fn new(cx: &'c mut Compiler<'l>, file: &str) -> Self {
        Builder {
            cx,
            file: file.into(),
            g: CoDesignGraph::new(),
            provides: Vec::new(),
            requires: Vec::new(),
            instances: HashMap::new(),
            bindings: HashMap::new(),
            read_back: HashMap::new(),
            sinks: Vec::new(),
            sink_index: HashMap::new(),
            sources: Vec::new(),
            source_index: HashMap::new(),
            leaves: Vec::new(),
            names: HashMap::new(),
        }
    }

    fn fresh(&mut self, base: &str) -> String {
        let n = self.names.entry(base.to_string()).or_insert(0);
        *n += 1;
        if *n == 1 {
            base.to_string()
        } else {
            format!("{base}#{n}")
        }
    }

    fn add_node(&mut self, name: &str, dp: DesignProblem, fun: &[&str], res: &[&str]) -> LResult<usize> {
        let name = self.fresh(name);
        let node = Node::new(&name, dp, fun, res).map_err(graph_err)?;
        Ok(self.g.add_node(node))
    }

    fn add_source(&mut self, key: SourceKey, ty: Ty, label: String) {
        self.source_index.insert(key, self.sources.len());
        self.sources.push((key, ty, label, Vec::new()));
    }

    fn add_sink(&mut self, key: SinkKey, ty: Ty, label: String) {
        self.sink_index.insert(key, self.sinks.len());
        self.sinks.push((key, ty, label, Vec::new()));
    }

    fn read(&mut self, s: SourceKey, r: Reader) {
        let i = self.source_index[&s];
        self.sources[i].3.push(r);
    }

    fn source_ty(&self, s: SourceKey) -> Ty {
        self.sources[self.source_index[&s]].1
    }

    fn claim(&mut self, name: &str, span: Span) -> LResult<()> {
        let taken = self.provides.iter().any(|p| p.name == name)
            || self.requires.iter().any(|p| p.name == name)
            || self.instances.contains_key(name)
            || self.bindings.contains_key(name);
        if taken {
            return Err(err(ErrorKind::DuplicateName, span, format!("`{name}` is already defined")));
        }
        Ok(())
    }

    fn port_info(&self, d: &PortDecl) -> LResult<PortInfo> {
        let unit = match &d.unit {
            Some(u) => Unit::resolve(u)?,
            None => Unit::dimensionless(),
        };
        Ok(PortInfo { name: d.name.clone(), poset: unit.poset(), unit })
    }

    fn build(mut self, ast: &ModelAst) -> LResult<CompiledModel> {
        for d in &ast.provides {
            self.claim(&d.name, d.span)?;
            let info = self.port_info(d)?;
            let k = self.provides.len();
            self.add_source(SourceKey::Fun(k), Ty::of(&info.unit), d.name.clone());
            self.provides.push(info);
        }
        for d in &ast.requires {
            self.claim(&d.name, d.span)?;
            let info = self.port_info(d)?;
            let k = self.requires.len();
            self.add_sink(SinkKey::Res(k), Ty::of(&info.unit), d.name.clone());
            self.requires.push(info);
        }
        for st in &ast.statements {
            self.statement(st)?;
        }
        self.resolve()?;
        let diags = self.g.validate();
        if let Some(d) = diags.first() {
            return Err(err(ErrorKind::InvalidGraph, ast.span, d.to_string()));
        }
        Ok(CompiledModel { graph: self.g, provides: self.provides, requires: self.requires })
    }

    fn statement(&mut self, st: &Stmt) -> LResult<()> {
        match st {
            Stmt::Instance { name, of, span } => {
                self.claim(name, *span)?;
                self.instance(name, of, *span)
            }
            Stmt::Let { name, expr, span } => {
                self.claim(name, *span)?;
                self.leaves.clear();
                let low = self.lower(expr)?;
                let b = match low {
                    Low::Lit(_) | Low::Qty(..) => Binding::Const(low),
                    Low::Term(..) => {
                        let (s, _) = self.materialize(low, None, name, *span)?;
                        Binding::Source(s)
                    }
                };
                self.bindings.insert(name.clone(), b);
                Ok(())
            }
            Stmt::Ignore { port, instance, span } => {
                let s = self.instance_res(port, instance, *span)?;
                self.read(s, Reader::Terminate);
                Ok(())
            }
            Stmt::Constraint { greater, lesser, span } => self.constraint(greater, lesser, *span),
        }
    }

    fn instance(&mut self, name: &str, of: &InstanceOf, span: Span) -> LResult<()> {
        let file = self.file.clone();
        let (dp, provides, requires) = match of {
            InstanceOf::Model(r) => {
                let sub = self.cx.sub_model(r, &file)?;
                (DesignProblem::composite(name, sub.tree.clone()), sub.provides.clone(), sub.requires.clone())
            }
            InstanceOf::Choose(alts) => {
                let mut branches = Vec::new();
                let mut iface: Option<(Vec<PortInfo>, Vec<PortInfo>)> = None;
                for (tag, r) in alts {
                    if branches.iter().any(|(t, _): &(Arc<str>, DpTree)| &**t == tag.as_str()) {
                        return Err(err(ErrorKind::DuplicateName, span, format!("alternative {tag} appears twice")));
                    }
                    let sub = self.cx.sub_model(r, &file)?;
                    let same_ports = |a: &[PortInfo], b: &[PortInfo]| {
                        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.name == y.name && x.poset == y.poset)
                    };
                    match &iface {
                        None => iface = Some((sub.provides.clone(), sub.requires.clone())),
                        Some((p, q)) => {
                            if !same_ports(p, &sub.provides) || !same_ports(q, &sub.requires) {
                                return Err(err(
                                    ErrorKind::UnitMismatch,
                                    span,
                                    format!("alternative {tag} of {name} does not have the same ports as the first alternative"),
                                ));
                            }
                        }
                    }
                    let label = match r {
                        ModelRef::Named(n, _) => n.clone(),
                        ModelRef::Inline(_) => tag.clone(),
                    };
                    branches.push((Arc::from(tag.as_str()), DpTree::leaf(DesignProblem::composite(&label, sub.tree.clone()))));
                }
                let (p, q) = iface.expect("choose has at least one alternative");
                let tree = DpTree::coproduct(branches).map_err(graph_err)?;
                (DesignProblem::composite(name, tree), p, q)
            }
        };
        let fnames: Vec<&str> = provides.iter().map(|p| p.name.as_str()).collect();
        let rnames: Vec<&str> = requires.iter().map(|p| p.name.as_str()).collect();
        let node = Node::new(name, dp, &fnames, &rnames).map_err(graph_err)?;
        self.names.insert(name.to_string(), 1);
        let node = self.g.add_node(node);
        for (i, p) in provides.iter().enumerate() {
            self.add_sink(SinkKey::Port(PortRef::new(node, i)), Ty::of(&p.unit), format!("{} provided by {name}", p.name));
        }
        for (i, p) in requires.iter().enumerate() {
            self.add_source(SourceKey::Port(PortRef::new(node, i)), Ty::of(&p.unit), format!("{} required by {name}", p.name));
        }
        self.instances.insert(name.to_string(), Instance { node, provides, requires });
        Ok(())
    }

    fn instance_res(&self, port: &str, instance: &str, span: Span) -> LResult<SourceKey> {
        let inst = self
            .instances
            .get(instance)
            .ok_or_else(|| err(ErrorKind::UnresolvedReference, span, format!("no instance named {instance}")))?;
        let i = inst.requires.iter().position(|p| p.name == port).ok_or_else(|| {
            err(ErrorKind::UnresolvedReference, span, format!("{instance} has no resource named {port}"))
        })?;
        Ok(SourceKey::Port(PortRef::new(inst.node, i)))
    }

    fn instance_fun(&self, port: &str, instance: &str, span: Span) -> LResult<SinkKey> {
        let inst = self
            .instances
            .get(instance)
            .ok_or_else(|| err(ErrorKind::UnresolvedReference, span, format!("no instance named {instance}")))?;
        let i = inst.provides.iter().position(|p| p.name == port).ok_or_else(|| {
            err(ErrorKind::UnresolvedReference, span, format!("{instance} has no functionality named {port}"))
        })?;
        Ok(SinkKey::Port(PortRef::new(inst.node, i)))
    }

    /// Source reading back required resource k through an identity node.
    fn read_resource(&mut self, k: usize) -> LResult<SourceKey> {
        if let Some(&node) = self.read_back.get(&k) {
            return Ok(SourceKey::Port(PortRef::new(node, 0)));
        }
        let info = self.requires[k].clone();
        let name = format!("id:{}", info.name);
        let node = self.add_node(&name, DesignProblem::identity(&name, info.poset.clone()), &["in"], &["out"])?;
        self.read_back.insert(k, node);
        let s = SourceKey::Port(PortRef::new(node, 0));
        self.add_source(s, Ty::of(&info.unit), info.name.clone());
        self.read(s, Reader::Res(k));
        Ok(s)
    }

    fn leaf(&mut self, s: SourceKey) -> Low {
        let ty = self.source_ty(s);
        let i = match self.leaves.iter().position(|&l| l == s) {
            Some(i) => i,
            None => {
                self.leaves.push(s);
                self.leaves.len() - 1
            }
        };
        Low::Term(CExpr::proj(i), ty)
    }

    fn is_constant(&self, e: &Expr) -> bool {
        match &e.kind {
            ExprKind::Number { .. } => true,
            ExprKind::Name(n) => matches!(self.bindings.get(n), Some(Binding::Const(_))),
            ExprKind::Port { .. } => false,
            ExprKind::Sum(es) | ExprKind::Product(es) | ExprKind::Call(_, es) => es.iter().all(|e| self.is_constant(e)),
            ExprKind::Div(a, b) => self.is_constant(a) && self.is_constant(b),
            ExprKind::Pow(a, _) => self.is_constant(a),
        }
    }

    fn lower(&mut self, e: &Expr) -> LResult<Low> {
        let span = e.span;
        match &e.kind {
            ExprKind::Number { value, unit: None } => Ok(Low::Lit(*value)),
            ExprKind::Number { value, unit: Some(u) } => match Unit::resolve(u)? {
                Unit::Nat => Ok(Low::Lit(*value)),
                unit @ Unit::Real { dim, .. } => Ok(Low::Qty(unit.to_canonical(*value), dim)),
            },
            ExprKind::Name(n) => {
                if let Some(k) = self.provides.iter().position(|p| &p.name == n) {
                    return Ok(self.leaf(SourceKey::Fun(k)));
                }
                if let Some(k) = self.requires.iter().position(|p| &p.name == n) {
                    let s = self.read_resource(k)?;
                    return Ok(self.leaf(s));
                }
                match self.bindings.get(n).cloned() {
                    Some(Binding::Const(c)) => Ok(c),
                    Some(Binding::Source(s)) => Ok(self.leaf(s)),
                    None if self.instances.contains_key(n) => Err(err(
                        ErrorKind::TypeMismatch,
                        span,
                        format!("{n} is an instance; refer to its ports with `r required by {n}`"),
                    )),
                    None => Err(err(ErrorKind::UnresolvedReference, span, format!("unknown name {n}"))),
                }
            }
            ExprKind::Port { port, side: PortSide::Required, instance } => {
                let s = self.instance_res(port, instance, span)?;
                Ok(self.leaf(s))
            }
            ExprKind::Port { port, side: PortSide::Provided, instance } => Err(err(
                ErrorKind::UnsupportedInverse,
                span,
                format!("`{port} provided by {instance}` can only appear on the greater side of a constraint"),
            )),
            ExprKind::Sum(ts) => {
                let parts = ts.iter().map(|t| self.lower(t)).collect::<LResult<Vec<_>>>()?;
                self.combine_additive(parts, span, "sum", CExpr::Sum)
            }
            ExprKind::Call(f, args) if f == "max" => {
                let parts = args.iter().map(|t| self.lower(t)).collect::<LResult<Vec<_>>>()?;
                self.combine_additive(parts, span, "max", CExpr::Max)
            }
            ExprKind::Product(fs) => {
                let parts = fs.iter().map(|t| self.lower(t)).collect::<LResult<Vec<_>>>()?;
                self.combine_product(parts, span)
            }
            ExprKind::Div(a, b) => {
                if !self.is_constant(b) {
                    return Err(err(
                        ErrorKind::NonMonotone,
                        b.span,
                        "division by a variable is not monotone; divisors must be constants".into(),
                    ));
                }
                let (c, cdim) = match self.lower(b)? {
                    Low::Lit(c) => (c, Dim::NONE),
                    Low::Qty(c, d) => (c, d),
                    Low::Term(..) => unreachable!("constant divisor"),
                };
                if c <= 0.0 || !c.is_finite() {
                    return Err(err(ErrorKind::NonMonotone, b.span, "divisors must be strictly positive and finite".into()));
                }
                match self.lower(a)? {
                    Low::Lit(x) if cdim.is_none() => Ok(Low::Lit(x / c)),
                    Low::Lit(x) => Ok(Low::Qty(x / c, Dim::NONE / cdim)),
                    Low::Qty(x, d) => Ok(Low::Qty(x / c, d / cdim)),
                    Low::Term(te, Ty::Real(d)) => Ok(Low::Term(CExpr::Div(Box::new(te), c), Ty::Real(d / cdim))),
                    Low::Term(_, Ty::Nat) => Err(err(
                        ErrorKind::TypeMismatch,
                        span,
                        "division needs ℝ̄₊ operands; ℕ̄ values cannot be divided".into(),
                    )),
                }
            }
            ExprKind::Pow(a, p) => {
                let p = *p;
                let bad_dim = |d: Dim| err(ErrorKind::UnitMismatch, span, format!("[{d}]^{p} is not a unit"));
                match self.lower(a)? {
                    Low::Lit(x) => Ok(Low::Lit(x.powf(p))),
                    Low::Qty(x, d) => Ok(Low::Qty(x.powf(p), d.pow(p).ok_or_else(|| bad_dim(d))?)),
                    Low::Term(te, Ty::Real(d)) => {
                        let d2 = d.pow(p).ok_or_else(|| bad_dim(d))?;
                        Ok(Low::Term(CExpr::Pow(Box::new(te), p), Ty::Real(d2)))
                    }
                    Low::Term(te, Ty::Nat) if p.fract() == 0.0 => Ok(Low::Term(CExpr::Pow(Box::new(te), p), Ty::Nat)),
                    Low::Term(_, Ty::Nat) => Err(err(ErrorKind::TypeMismatch, span, "ℕ̄ powers must be integral".into())),
                }
            }
            ExprKind::Call(f, args) => {
                if args.len() != 1 {
                    return Err(err(ErrorKind::Syntax, span, format!("{f} takes one argument")));
                }
                let x = self.lower(&args[0])?;
                let type_err = |what: &str| err(ErrorKind::TypeMismatch, span, format!("{f} needs {what}"));
                match (f.as_str(), x) {
                    ("ceil", Low::Lit(v)) => Ok(Low::Lit(v.ceil())),
                    ("ceil", Low::Qty(v, d)) => Ok(Low::Qty(v.ceil(), d)),
                    ("ceil", Low::Term(te, Ty::Real(d))) => Ok(Low::Term(CExpr::Ceil(Box::new(te)), Ty::Real(d))),
                    ("ceil", t @ Low::Term(_, Ty::Nat)) => Ok(t),
                    ("sqrt", Low::Lit(v)) => Ok(Low::Lit(v.sqrt())),
                    ("sqrt", Low::Qty(v, d)) => {
                        let d2 = d.pow(0.5).ok_or_else(|| err(ErrorKind::UnitMismatch, span, format!("√[{d}] is not a unit")))?;
                        Ok(Low::Qty(v.sqrt(), d2))
                    }
                    ("sqrt", Low::Term(te, Ty::Real(d))) => {
                        let d2 = d.pow(0.5).ok_or_else(|| err(ErrorKind::UnitMismatch, span, format!("√[{d}] is not a unit")))?;
                        Ok(Low::Term(CExpr::Sqrt(Box::new(te)), Ty::Real(d2)))
                    }
                    ("sqrt", Low::Term(_, Ty::Nat)) => Err(type_err("an ℝ̄₊ operand; use ceilsqrt on ℕ̄")),
                    ("ceilsqrt", Low::Lit(v)) if v.fract() == 0.0 => Ok(Low::Lit(ceil_sqrt(v as u64) as f64)),
                    ("ceilsqrt", Low::Term(te, Ty::Nat)) => Ok(Low::Term(CExpr::CeilSqrt(Box::new(te)), Ty::Nat)),
                    ("ceilsqrt", _) => Err(type_err("an ℕ̄ operand; use ceil(sqrt(x)) on ℝ̄₊")),
                    _ => Err(err(ErrorKind::UnresolvedReference, span, format!("unknown function {f}"))),
                }
            }
        }
    }

    /// A constant as an expression of type `ty`.
    fn const_expr(&self, c: &Low, ty: Ty, span: Span) -> LResult<CExpr> {
        let mismatch = |what: String| err(ErrorKind::UnitMismatch, span, what);
        match (c, ty) {
            (Low::Lit(v), Ty::Nat) => {
                if v.fract() != 0.0 && v.is_finite() {
                    return Err(err(ErrorKind::TypeMismatch, span, format!("{v} is not a natural number")));
                }
                Ok(if v.is_finite() && *v < u64::MAX as f64 {
                    CExpr::nat(*v as u64)
                } else {
                    CExpr::Const(Value::Top, Poset::nat())
                })
            }
            (Low::Lit(v), Ty::Real(d)) if d.is_none() => CExpr::real(*v).map_err(graph_err),
            (Low::Lit(v), Ty::Real(d)) => Err(mismatch(format!("constant {v} has no unit but [{d}] is expected"))),
            (Low::Qty(v, d), Ty::Real(d2)) if *d == d2 => CExpr::real(*v).map_err(graph_err),
            (Low::Qty(_, d), t) => Err(mismatch(format!("constant in [{d}] where {} is expected", t.describe()))),
            (Low::Term(..), _) => unreachable!("not a constant"),
        }
    }

    fn combine_additive(&self, parts: Vec<Low>, span: Span, what: &str, op: fn(Vec<CExpr>) -> CExpr) -> LResult<Low> {
        let ty = parts.iter().find_map(|p| match p {
            Low::Term(_, t) => Some(*t),
            _ => None,
        });
        let Some(ty) = ty else {
            // All constant: fold.
            let mut dim: Option<Dim> = None;
            let mut vals = Vec::new();
            for p in &parts {
                let (v, d) = match p {
                    Low::Lit(v) => (*v, None),
                    Low::Qty(v, d) => (*v, Some(*d)),
                    Low::Term(..) => unreachable!(),
                };
                if let (Some(a), Some(b)) = (dim, d) {
                    if a != b {
                        return Err(err(ErrorKind::UnitMismatch, span, format!("{what} of [{a}] and [{b}]")));
                    }
                }
                dim = dim.or(d);
                vals.push(v);
            }
            let v = if what == "max" { vals.iter().copied().fold(0.0, f64::max) } else { vals.iter().sum() };
            return Ok(match dim {
                None => Low::Lit(v),
                Some(d) => {
                    if parts.iter().any(|p| matches!(p, Low::Lit(x) if *x != 0.0)) && !d.is_none() {
                        return Err(err(ErrorKind::UnitMismatch, span, format!("{what} mixes [{d}] with a unitless number")));
                    }
                    Low::Qty(v, d)
                }
            });
        };
        let mut es = Vec::new();
        for p in parts {
            match p {
                Low::Term(e, t) if t == ty => es.push(e),
                Low::Term(_, t) => {
                    return Err(err(
                        ErrorKind::UnitMismatch,
                        span,
                        format!("{what} of {} and {}", ty.describe(), t.describe()),
                    ))
                }
                c => es.push(self.const_expr(&c, ty, span)?),
            }
        }
        Ok(Low::Term(op(es), ty))
    }

    fn combine_product(&self, parts: Vec<Low>, span: Span) -> LResult<Low> {
        let nat = parts.iter().any(|p| matches!(p, Low::Term(_, Ty::Nat)));
        let any_term = parts.iter().any(|p| matches!(p, Low::Term(..)));
        if !any_term {
            let mut v = 1.0;
            let mut dim: Option<Dim> = None;
            for p in &parts {
                match p {
                    Low::Lit(x) => v *= x,
                    Low::Qty(x, d) => {
                        v *= x;
                        dim = Some(dim.unwrap_or(Dim::NONE) * *d);
                    }
                    Low::Term(..) => unreachable!(),
                }
            }
            return Ok(match dim {
                None => Low::Lit(v),
                Some(d) => Low::Qty(v, d),
            });
        }
        let mut es = Vec::new();
        if nat {
            for p in parts {
                match p {
                    Low::Term(e, Ty::Nat) => es.push(e),
                    Low::Term(_, t) => {
                        return Err(err(ErrorKind::TypeMismatch, span, format!("product of ℕ̄ and {}", t.describe())))
                    }
                    c => es.push(self.const_expr(&c, Ty::Nat, span)?),
                }
            }
            return Ok(Low::Term(CExpr::Product(es), Ty::Nat));
        }
        let mut dim = Dim::NONE;
        for p in parts {
            match p {
                Low::Term(e, Ty::Real(d)) => {
                    dim = dim * d;
                    es.push(e);
                }
                Low::Term(_, Ty::Nat) => unreachable!(),
                Low::Lit(x) => es.push(CExpr::real(x).map_err(graph_err)?),
                Low::Qty(x, d) => {
                    dim = dim * d;
                    es.push(CExpr::real(x).map_err(graph_err)?);
                }
            }
        }
        Ok(Low::Term(CExpr::Product(es), Ty::Real(dim)))
    }

    /// Turns a lowered expression into a source, adding a lift node unless it is a bare leaf.
    fn materialize(&mut self, low: Low, expected: Option<Ty>, label: &str, span: Span) -> LResult<(SourceKey, Ty)> {
        let leaves = std::mem::take(&mut self.leaves);
        let (expr, ty) = match low {
            Low::Term(CExpr::Input(path), ty) if path.len() == 1 => return Ok((leaves[path[0]], ty)),
            Low::Term(e, ty) => (e, ty),
            c => {
                let ty = match (expected, &c) {
                    (Some(t), _) => t,
                    (None, Low::Qty(_, d)) => Ty::Real(*d),
                    (None, _) => Ty::Real(Dim::NONE),
                };
                (self.const_expr(&c, ty, span)?, ty)
            }
        };
        let fun = bundle(leaves.iter().map(|&s| self.source_ty(s).poset()).collect());
        let expr = if leaves.len() == 1 { reroot(expr) } else { expr };
        let dp = DesignProblem::lift(label, fun, ty.poset(), expr).map_err(|e| err(ErrorKind::TypeMismatch, span, e.to_string()))?;
        let ports: Vec<String> = (0..leaves.len()).map(|i| format!("in{i}")).collect();
        let ports: Vec<&str> = ports.iter().map(String::as_str).collect();
        let node = self.add_node(label, dp, &ports, &["out"])?;
        for (i, &s) in leaves.iter().enumerate() {
            self.read(s, Reader::Port(PortRef::new(node, i)));
        }
        let out = SourceKey::Port(PortRef::new(node, 0));
        self.add_source(out, ty, label.to_string());
        Ok((out, ty))
    }

    fn lower_source(&mut self, e: &Expr, expected: Option<Ty>) -> LResult<(SourceKey, Ty)> {
        self.leaves.clear();
        let low = self.lower(e)?;
        let (s, ty) = self.materialize(low, expected, &e.to_string(), e.span)?;
        if let Some(t) = expected {
            if t != ty {
                return Err(err(
                    ErrorKind::UnitMismatch,
                    e.span,
                    format!("`{e}` is {} but {} is required", ty.describe(), t.describe()),
                ));
            }
        }
        Ok((s, ty))
    }

    /// Sinks a greater side stands for, one per summand.
    fn sinks_of(&mut self, e: &Expr) -> LResult<Vec<(SinkKey, Ty)>> {
        let span = e.span;
        let key = match &e.kind {
            ExprKind::Name(n) => match self.requires.iter().position(|p| &p.name == n) {
                Some(k) => SinkKey::Res(k),
                None if self.provides.iter().any(|p| &p.name == n) => {
                    return Err(err(
                        ErrorKind::UnsupportedInverse,
                        span,
                        format!("{n} is a provided functionality; it can only be read, not bounded"),
                    ))
                }
                None => {
                    return Err(err(
                        ErrorKind::UnsupportedInverse,
                        span,
                        format!("{n} cannot be bounded from below; the greater side must be a required resource or a functionality of an instance"),
                    ))
                }
            },
            ExprKind::Port { port, side: PortSide::Provided, instance } => self.instance_fun(port, instance, span)?,
            ExprKind::Port { port, side: PortSide::Required, instance } => {
                return Err(err(
                    ErrorKind::UnsupportedInverse,
                    span,
                    format!("`{port} required by {instance}` is produced by {instance}; put it on the smaller side"),
                ))
            }
            ExprKind::Sum(ts) => {
                let mut out = Vec::new();
                for t in ts {
                    out.extend(self.sinks_of(t)?);
                }
                if out.iter().any(|(_, t)| *t != Ty::Nat) {
                    return Err(err(
                        ErrorKind::UnsupportedInverse,
                        span,
                        "a sum on the greater side is only supported for ℕ̄ resources".into(),
                    ));
                }
                return Ok(out);
            }
            _ => {
                return Err(err(
                    ErrorKind::UnsupportedInverse,
                    span,
                    format!("`{e}` cannot be inverted; the greater side must be a resource, an instance functionality, a sum of ℕ̄ resources, or a constant"),
                ))
            }
        };
        let ty = self.sinks[self.sink_index[&key]].1;
        Ok(vec![(key, ty)])
    }

    fn drive(&mut self, k: SinkKey, s: SourceKey) {
        let i = self.sink_index[&k];
        self.sinks[i].3.push(s);
    }

    fn constraint(&mut self, greater: &Expr, lesser: &Expr, span: Span) -> LResult<()> {
        if self.is_constant(greater) {
            if self.is_constant(lesser) {
                return Err(err(ErrorKind::UnsupportedInverse, span, "constraint between two constants".into()));
            }
            self.leaves.clear();
            let bound = self.lower(greater)?;
            let (s, ty) = self.lower_source(lesser, None)?;
            let value = match self.const_expr(&bound, ty, greater.span)? {
                CExpr::Const(v, _) => v,
                _ => unreachable!("constants lower to Const"),
            };
            let label = format!("limit:{lesser}");
            let dp = DesignProblem::limit(&label, ty.poset(), value).map_err(graph_err)?;
            let node = self.add_node(&label, dp, &["in"], &[])?;
            self.read(s, Reader::Port(PortRef::new(node, 0)));
            return Ok(());
        }
        let sinks = self.sinks_of(greater)?;
        if sinks.len() == 1 {
            let (k, ty) = sinks[0];
            let (s, _) = self.lower_source(lesser, Some(ty))?;
            self.drive(k, s);
            return Ok(());
        }
        // a + b + … ≥ e  ⇒  a chain of ℕ̄ sum inverses.
        let (mut cur, _) = self.lower_source(lesser, Some(Ty::Nat))?;
        for (i, &(k, _)) in sinks.iter().enumerate().take(sinks.len() - 1) {
            let label = format!("inv+:{greater}");
            let node = self.add_node(&label, DesignProblem::inv_plus_nat(&label), &["sum"], &["a", "b"])?;
            self.read(cur, Reader::Port(PortRef::new(node, 0)));
            let a = SourceKey::Port(PortRef::new(node, 0));
            let b = SourceKey::Port(PortRef::new(node, 1));
            self.add_source(a, Ty::Nat, format!("{label}.a"));
            self.add_source(b, Ty::Nat, format!("{label}.b"));
            self.drive(k, a);
            if i + 2 == sinks.len() {
                self.drive(sinks[i + 1].0, b);
            } else {
                cur = b;
            }
        }
        Ok(())
    }

    fn resolve(&mut self) -> LResult<()> {
        // Sinks: join several drivers, feed undriven ones with ⊥.
        for i in 0..self.sinks.len() {
            let (key, ty, label, drivers) = self.sinks[i].clone();
            let p = ty.poset();
            let driver = match drivers.len() {
                0 => {
                    let name = format!("mux:bottom:{label}");
                    let v = p.bottom().expect("numeric posets have a bottom");
                    let dp = DesignProblem::lift(&name, Poset::one(), p.clone(), CExpr::Const(v, p.clone())).map_err(graph_err)?;
                    let node = self.add_node(&name, dp, &[], &["out"])?;
                    let s = SourceKey::Port(PortRef::new(node, 0));
                    self.add_source(s, ty, name);
                    s
                }
                1 => drivers[0],
                n => {
                    let name = format!("mux:join:{label}");
                    let fun = Poset::product(vec![p.clone(); n]);
                    let dp = DesignProblem::lift(&name, fun, p.clone(), CExpr::Max((0..n).map(CExpr::proj).collect()))
                        .map_err(graph_err)?;
                    let ports: Vec<String> = (0..n).map(|j| format!("in{j}")).collect();
                    let ports: Vec<&str> = ports.iter().map(String::as_str).collect();
                    let node = self.add_node(&name, dp, &ports, &["out"])?;
                    for (j, &d) in drivers.iter().enumerate() {
                        self.read(d, Reader::Port(PortRef::new(node, j)));
                    }
                    let s = SourceKey::Port(PortRef::new(node, 0));
                    self.add_source(s, ty, name);
                    s
                }
            };
            let reader = match key {
                SinkKey::Port(q) => Reader::Port(q),
                SinkKey::Res(k) => match self.read_back.get(&k) {
                    Some(&node) => Reader::Port(PortRef::new(node, 0)),
                    None => Reader::Res(k),
                },
            };
            self.read(driver, reader);
        }
        // Sources: fork several readers, terminate unread ones.
        let mut fun_at: Vec<Option<PortRef>> = vec![None; self.provides.len()];
        let mut res_at: Vec<Option<PortRef>> = vec![None; self.requires.len()];
        let mut i = 0;
        while i < self.sources.len() {
            let (key, ty, label, mut readers) = self.sources[i].clone();
            i += 1;
            let p = ty.poset();
            if readers.is_empty() {
                if let SourceKey::Port(r) = key {
                    if self
                        .instances
                        .values()
                        .any(|inst| inst.node == r.node)
                    {
                        return Err(err(
                            ErrorKind::UnusedResource,
                            Span::default(),
                            format!("{label} is never used; constrain it or add `ignore`"),
                        ));
                    }
                }
                readers.push(Reader::Terminate);
            }
            // A provided functionality cannot be exposed as a resource directly.
            if let SourceKey::Fun(_) = key {
                for r in readers.iter_mut() {
                    if let Reader::Res(k) = *r {
                        let name = format!("id:{label}");
                        let node = self.add_node(&name, DesignProblem::identity(&name, p.clone()), &["in"], &["out"])?;
                        res_at[k] = Some(PortRef::new(node, 0));
                        *r = Reader::Port(PortRef::new(node, 0));
                    }
                }
            }
            let targets: Vec<Reader> = if readers.len() == 1 {
                readers
            } else {
                let n = readers.len();
                let name = format!("mux:fork:{label}");
                let res = Poset::product(vec![p.clone(); n]);
                let dp = DesignProblem::lift(&name, p.clone(), res, CExpr::Tuple(vec![CExpr::input(); n])).map_err(graph_err)?;
                let outs: Vec<String> = (0..n).map(|j| format!("out{j}")).collect();
                let outs: Vec<&str> = outs.iter().map(String::as_str).collect();
                let node = self.add_node(&name, dp, &["in"], &outs)?;
                for (j, r) in readers.into_iter().enumerate() {
                    self.bind(SourceKey::Port(PortRef::new(node, j)), r, &label, ty, &mut fun_at, &mut res_at)?;
                }
                vec![Reader::Port(PortRef::new(node, 0))]
            };
            self.bind(key, targets[0], &label, ty, &mut fun_at, &mut res_at)?;
        }
        for (k, at) in fun_at.into_iter().enumerate() {
            let name = self.provides[k].name.clone();
            self.g.expose_fun(&name, at.expect("every functionality is bound"));
        }
        for (k, at) in res_at.into_iter().enumerate() {
            let name = self.requires[k].name.clone();
            self.g.expose_res(&name, at.expect("every resource is bound"));
        }
        Ok(())
    }

    fn bind(
        &mut self,
        s: SourceKey,
        r: Reader,
        label: &str,
        ty: Ty,
        fun_at: &mut [Option<PortRef>],
        res_at: &mut [Option<PortRef>],
    ) -> LResult<()> {
        let r = match r {
            Reader::Terminate => {
                let name = format!("mux:top:{label}");
                let node = self.add_node(&name, DesignProblem::top_terminator(&name, ty.poset()), &["in"], &[])?;
                Reader::Port(PortRef::new(node, 0))
            }
            r => r,
        };
        match (s, r) {
            (SourceKey::Port(p), Reader::Port(q)) => {
                self.g.connect(p, q);
            }
            (SourceKey::Port(p), Reader::Res(k)) => res_at[k] = Some(p),
            (SourceKey::Fun(j), Reader::Port(q)) => fun_at[j] = Some(q),
            (SourceKey::Fun(_), Reader::Res(_)) | (_, Reader::Terminate) => unreachable!("rewritten above"),
        }
        Ok(())
    }
}

/// `Input([0, rest..])` → `Input(rest)`, for lifts with a single leaf.
fn reroot(e: CExpr) -> CExpr {
    let r = |b: Box<CExpr>| Box::new(reroot(*b));
    match e {
        CExpr::Input(mut p) => {
            p.remove(0);
            CExpr::Input(p)
        }
        CExpr::Const(..) => e,
        CExpr::Tuple(es) => CExpr::Tuple(es.into_iter().map(reroot).collect()),
        CExpr::Sum(es) => CExpr::Sum(es.into_iter().map(reroot).collect()),
        CExpr::Product(es) => CExpr::Product(es.into_iter().map(reroot).collect()),
        CExpr::Max(es) => CExpr::Max(es.into_iter().map(reroot).collect()),
        CExpr::Div(a, c) => CExpr::Div(r(a), c),
        CExpr::Ceil(a) => CExpr::Ceil(r(a)),
        CExpr::Sqrt(a) => CExpr::Sqrt(r(a)),
        CExpr::CeilSqrt(a) => CExpr::CeilSqrt(r(a)),
        CExpr::Pow(a, p) => CExpr::Pow(r(a), p),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::AfsStrategy;
    use crate::posets::Antichain;
    use crate::solver::{solve, IterationBudget};

    fn build(src: &str) -> CompiledModel {
        compile(&parse(src).unwrap(), &Library::new()).unwrap()
    }

    fn build_err(src: &str, lib: &Library) -> LangError {
        compile(&parse(src).unwrap(), lib).unwrap_err()
    }

    fn real(x: f64) -> Value {
        Value::real(x).unwrap()
    }

    #[test]
    fn minimal_model_is_identity() {
        let m = build("mcdp { provides f [J] requires r [J] ; r >= f }");
        assert!(m.graph.validate().is_empty());
        assert_eq!(m.fun_poset(), Poset::real_with_unit("J"));
        let t = m.tree().unwrap();
        assert_eq!(t.eval(&real(5.0)).unwrap().values().elements(), &[real(5.0)]);
    }

    #[test]
    fn units_are_normalized_once() {
        let m = build("mcdp { provides c [Wh] requires m [g]\n m >= c / 250 [Wh/kg] }");
        let t = m.tree().unwrap();
        // 1 Wh = 3600 J; 250 Wh/kg → 1 Wh needs 4 g = 0.004 kg.
        let r = t.eval(&real(3600.0)).unwrap().values();
        assert_eq!(r.elements(), &[real(3600.0 / (250.0 * 3600.0))]);
        assert_eq!(m.requires[0].unit.from_canonical(0.004), 4.0);
    }

    #[test]
    fn join_of_two_lower_bounds() {
        let m = build("mcdp { provides a [kg] provides b [kg] requires r [kg]\n r >= a\n r >= b + 1 kg }");
        let t = m.tree().unwrap();
        let r = t.eval(&Value::pair(real(5.0), real(1.0))).unwrap().values();
        assert_eq!(r.elements(), &[real(5.0)]);
        let r = t.eval(&Value::pair(real(0.0), real(7.0))).unwrap().values();
        assert_eq!(r.elements(), &[real(8.0)]);
    }

    #[test]
    fn unconstrained_resource_is_zero_and_unused_functionality_terminates() {
        let m = build("mcdp { provides f [s] requires r [kg] }");
        let t = m.tree().unwrap();
        assert_eq!(t.eval(&real(1.0)).unwrap().values().elements(), &[real(0.0)]);
        assert_eq!(t.eval(&Value::Top).unwrap().values().elements(), &[real(0.0)]);
    }

    #[test]
    fn hard_limit_makes_large_inputs_infeasible() {
        let m = build("mcdp { provides f [kg] requires r [kg]\n r >= f\n f <= 3 kg }");
        let t = m.tree().unwrap();
        assert_eq!(t.eval(&real(2.0)).unwrap().len(), 1);
        assert!(t.eval(&real(4.0)).unwrap().is_empty());
    }

    #[test]
    fn toy_nat_loop() {
        let m = build(
            "mcdp { provides c [Nat] requires x [Nat] requires y [Nat]\n x + y >= ceilsqrt(x) + ceilsqrt(y) + c }",
        );
        assert!(m.graph.validate().is_empty());
        let t = m.tree().unwrap();
        assert_eq!(t.loop_count(), 1);
        let nn = Poset::product(vec![Poset::nat(), Poset::nat()]);
        let pt = |a, b| Value::pair(Value::Nat(a), Value::Nat(b));
        let r = solve(&t, &Value::Nat(2), IterationBudget::default()).unwrap();
        assert_eq!(r.antichain.values(), Antichain::new(nn, vec![pt(0, 4), pt(3, 3), pt(4, 0)]).unwrap());
    }

    #[test]
    fn constant_bindings_fold() {
        let m = build("mcdp { provides f [kg] requires r [kg]\n k = 2 * 3\n r >= k * f }");
        let t = m.tree().unwrap();
        assert_eq!(t.eval(&real(1.5)).unwrap().values().elements(), &[real(9.0)]);
    }

    #[test]
    fn instances_compose_hierarchically() {
        let lib = Library::new().with_source("Double", "mcdp { provides x [kg] requires y [kg]\n y >= 2 * x }");
        let src = "mcdp { provides f [kg] requires r [kg]\n d = instance `Double\n x provided by d >= f\n r >= y required by d }";
        let m = compile(&parse(src).unwrap(), &lib).unwrap();
        let t = m.tree().unwrap();
        assert_eq!(t.eval(&real(3.0)).unwrap().values().elements(), &[real(6.0)]);
    }

    #[test]
    fn choose_tags_alternatives() {
        let lib = Library::new()
            .with_source("A", "mcdp { provides x [kg] requires y [USD]\n y >= x * 2 [USD/kg] }")
            .with_source("B", "mcdp { provides x [kg] requires y [USD]\n y >= x * 3 [USD/kg] + 1 USD }");
        let src = "mcdp { provides f [kg] requires c [USD]\n p = instance choose(A: `A, B: `B)\n x provided by p >= f\n c >= y required by p }";
        let m = compile(&parse(src).unwrap(), &lib).unwrap();
        let r = m.tree().unwrap().eval(&real(0.0)).unwrap();
        assert_eq!(r.items().len(), 1);
        assert_eq!(r.items()[0].0, real(0.0));
        assert!(r.items()[0].1.contains("A"));
    }

    #[test]
    fn unused_instance_resource_is_an_error() {
        let lib = Library::new().with_source("P", "mcdp { provides x requires y requires z\n y >= x\n z >= x }");
        let src = "mcdp { provides f requires r\n p = instance `P\n x provided by p >= f\n r >= y required by p }";
        assert_eq!(build_err(src, &lib).kind, ErrorKind::UnusedResource);
        let ok = "mcdp { provides f requires r\n p = instance `P\n x provided by p >= f\n r >= y required by p\n ignore z required by p }";
        assert!(compile(&parse(ok).unwrap(), &lib).is_ok());
    }

    #[test]
    fn cyclic_definitions_are_detected() {
        let lib = Library::new()
            .with_source("A", "mcdp { b = instance `B }")
            .with_source("B", "mcdp { a = instance `A }");
        let e = compile_named("A", &lib).unwrap_err();
        assert_eq!(e.kind, ErrorKind::CyclicModelDefinition);
    }

    #[test]
    fn semantic_errors() {
        let lib = Library::new();
        let e = build_err("mcdp { provides f [kg] requires r [USD]\n r >= f }", &lib);
        assert_eq!(e.kind, ErrorKind::UnitMismatch);
        assert_eq!((e.span.line, e.span.col), (2, 7));
        let e = build_err("mcdp { provides f requires r\n r >= 1 / f }", &lib);
        assert_eq!(e.kind, ErrorKind::NonMonotone);
        let e = build_err("mcdp { provides f requires r requires q\n r + q >= f }", &lib);
        assert_eq!(e.kind, ErrorKind::UnsupportedInverse);
        let e = build_err("mcdp { provides f requires r\n r >= g }", &lib);
        assert_eq!(e.kind, ErrorKind::UnresolvedReference);
        let e = build_err("mcdp { provides f [furlong] }", &lib);
        assert_eq!(e.kind, ErrorKind::UnknownUnit);
        let e = build_err("mcdp { provides f requires f }", &lib);
        assert_eq!(e.kind, ErrorKind::DuplicateName);
        let e = build_err("mcdp { x = instance `Missing }", &lib);
        assert_eq!(e.kind, ErrorKind::UnresolvedReference);
    }

    #[test]
    fn compiling_twice_is_structurally_identical() {
        let src = "mcdp { provides c [Nat] requires x [Nat] requires y [Nat]\n x + y >= ceilsqrt(x) + ceilsqrt(y) + c }";
        let (a, b) = (build(src), build(src));
        assert_eq!(a.graph.to_dot(), b.graph.to_dot());
        let ta = a.graph.to_tree(AfsStrategy::Exhaustive).unwrap();
        let tb = b.graph.to_tree(AfsStrategy::Exhaustive).unwrap();
        assert_eq!(ta.to_text(), tb.to_text());
    }
}
