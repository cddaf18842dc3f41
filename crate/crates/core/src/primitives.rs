//! Primitive design problems.
//!
//! Each primitive evaluates `h(f)` directly. Lifts are built from monotone atoms only, so
//! monotonicity holds by construction; arithmetic absorbs TOP (with 0·⊤ = 0).

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use crate::compose::DpTree;
use crate::error::{Error, Result};
use crate::posets::{parse_value, Antichain, Poset, PosetKind, Value};

/// A monotone expression over the functionality value.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    /// Projection along a path of tuple indices; the empty path is the whole input.
    Input(Vec<usize>),
    /// A constant member of the given poset.
    Const(Value, Poset),
    Tuple(Vec<Expr>),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    /// Division by a strictly positive constant (ℝ̄₊ only).
    Div(Box<Expr>, f64),
    /// Ceiling (ℝ̄₊ only).
    Ceil(Box<Expr>),
    /// Square root (ℝ̄₊ only).
    Sqrt(Box<Expr>),
    /// ⌈√x⌉ (ℕ̄ only).
    CeilSqrt(Box<Expr>),
    /// x^p for p > 0; on ℕ̄ the exponent must be integral.
    Pow(Box<Expr>, f64),
    Max(Vec<Expr>),
}

#[derive(Clone, Copy, PartialEq)]
enum Num {
    Nat,
    Real,
}

fn number_kind(p: &Poset) -> Option<Num> {
    match p.kind() {
        PosetKind::Nat => Some(Num::Nat),
        PosetKind::Real { .. } => Some(Num::Real),
        _ => None,
    }
}

fn num_poset(k: Num) -> Poset {
    match k {
        Num::Nat => Poset::nat(),
        Num::Real => Poset::real(),
    }
}

impl Expr {
    pub fn input() -> Expr {
        Expr::Input(Vec::new())
    }

    pub fn proj(i: usize) -> Expr {
        Expr::Input(vec![i])
    }

    pub fn nat(n: u64) -> Expr {
        Expr::Const(Value::Nat(n), Poset::nat())
    }

    pub fn real(x: f64) -> Result<Expr> {
        Ok(Expr::Const(Value::real(x)?, Poset::real()))
    }

    /// Output poset shape for the given input poset (unit tags are not inferred).
    pub fn shape(&self, input: &Poset) -> Result<Poset> {
        let numeric = |es: &[Expr], what: &str| -> Result<Num> {
            let mut kind = None;
            for e in es {
                let k = number_kind(&e.shape(input)?).ok_or_else(|| {
                    Error::TypeMismatch(format!("{what} needs numeric operands"))
                })?;
                if kind.is_some_and(|prev| prev != k) {
                    return Err(Error::TypeMismatch(format!("{what} mixes ℕ̄ and ℝ̄₊")));
                }
                kind = Some(k);
            }
            kind.ok_or_else(|| Error::InvalidDesignProblem(format!("empty {what}")))
        };
        let real_only = |e: &Expr, what: &str| -> Result<Poset> {
            match number_kind(&e.shape(input)?) {
                Some(Num::Real) => Ok(Poset::real()),
                _ => Err(Error::TypeMismatch(format!("{what} needs an ℝ̄₊ operand"))),
            }
        };
        match self {
            Expr::Input(path) => {
                let mut p = input.clone();
                for &i in path {
                    let next = p
                        .factors()
                        .and_then(|fs| fs.get(i))
                        .cloned()
                        .ok_or_else(|| Error::TypeMismatch(format!("no component {i} in {p}")))?;
                    p = next;
                }
                Ok(p)
            }
            Expr::Const(v, p) => {
                p.check(v)?;
                Ok(p.clone())
            }
            Expr::Tuple(es) => {
                Ok(Poset::product(es.iter().map(|e| e.shape(input)).collect::<Result<_>>()?))
            }
            Expr::Sum(es) => numeric(es, "sum").map(num_poset),
            Expr::Product(es) => numeric(es, "product").map(num_poset),
            Expr::Max(es) => numeric(es, "max").map(num_poset),
            Expr::Div(e, c) => {
                if !(c.is_finite() && *c > 0.0) {
                    return Err(Error::InvalidDesignProblem(format!(
                        "division by {c}: divisor must be a strictly positive constant"
                    )));
                }
                real_only(e, "division")
            }
            Expr::Ceil(e) => real_only(e, "ceil"),
            Expr::Sqrt(e) => real_only(e, "sqrt"),
            Expr::CeilSqrt(e) => match number_kind(&e.shape(input)?) {
                Some(Num::Nat) => Ok(Poset::nat()),
                _ => Err(Error::TypeMismatch("ceilsqrt needs an ℕ̄ operand".into())),
            },
            Expr::Pow(e, p) => {
                if !(p.is_finite() && *p > 0.0) {
                    return Err(Error::InvalidDesignProblem(format!(
                        "exponent {p} must be strictly positive"
                    )));
                }
                match number_kind(&e.shape(input)?) {
                    Some(Num::Real) => Ok(Poset::real()),
                    Some(Num::Nat) if p.fract() == 0.0 => Ok(Poset::nat()),
                    _ => Err(Error::TypeMismatch("power needs a numeric operand".into())),
                }
            }
        }
    }

    pub fn eval(&self, x: &Value) -> Result<Value> {
        match self {
            Expr::Input(path) => x
                .at(path)
                .cloned()
                .ok_or_else(|| Error::TypeMismatch(format!("no component {path:?} in {x}"))),
            Expr::Const(v, _) => Ok(v.clone()),
            Expr::Tuple(es) => Ok(Value::Tuple(es.iter().map(|e| e.eval(x)).collect::<Result<_>>()?)),
            Expr::Sum(es) => fold(es, x, sum2),
            Expr::Product(es) => {
                let vs: Vec<Value> = es.iter().map(|e| e.eval(x)).collect::<Result<_>>()?;
                if vs.iter().any(is_zero) {
                    return zero_like(&vs[0]);
                }
                vs.into_iter().map(Ok).reduce(|a, b| mul2(&a?, &b?)).expect("nonempty")
            }
            Expr::Max(es) => fold(es, x, |a, b| Ok(if b > a { b.clone() } else { a.clone() })),
            Expr::Div(e, c) => match e.eval(x)? {
                Value::Top => Ok(Value::Top),
                Value::Real(r) => Value::real(r.get() / c),
                v => Err(Error::TypeMismatch(format!("division of {v}"))),
            },
            Expr::Ceil(e) => match e.eval(x)? {
                Value::Top => Ok(Value::Top),
                Value::Real(r) => Value::real(r.get().ceil()),
                v => Err(Error::TypeMismatch(format!("ceil of {v}"))),
            },
            Expr::Sqrt(e) => match e.eval(x)? {
                Value::Top => Ok(Value::Top),
                Value::Real(r) => Value::real(r.get().sqrt()),
                v => Err(Error::TypeMismatch(format!("sqrt of {v}"))),
            },
            Expr::CeilSqrt(e) => match e.eval(x)? {
                Value::Top => Ok(Value::Top),
                Value::Nat(n) => Ok(Value::Nat(ceil_sqrt(n))),
                v => Err(Error::TypeMismatch(format!("ceilsqrt of {v}"))),
            },
            Expr::Pow(e, p) => match e.eval(x)? {
                Value::Top => Ok(Value::Top),
                Value::Real(r) => {
                    let y = if p.fract() == 0.0 && *p <= i32::MAX as f64 {
                        r.get().powi(*p as i32)
                    } else {
                        r.get().powf(*p)
                    };
                    Value::real(y)
                }
                Value::Nat(n) => Ok(u32::try_from(*p as u64)
                    .ok()
                    .and_then(|k| n.checked_pow(k))
                    .map_or(Value::Top, Value::Nat)),
                v => Err(Error::TypeMismatch(format!("power of {v}"))),
            },
        }
    }

    fn is_projection_only(&self) -> bool {
        match self {
            Expr::Input(_) => true,
            Expr::Tuple(es) => es.iter().all(Expr::is_projection_only),
            _ => false,
        }
    }
}

fn fold(es: &[Expr], x: &Value, op: impl Fn(&Value, &Value) -> Result<Value>) -> Result<Value> {
    let mut it = es.iter();
    let first = it.next().ok_or_else(|| Error::InvalidDesignProblem("empty operator".into()))?;
    let mut acc = first.eval(x)?;
    for e in it {
        acc = op(&acc, &e.eval(x)?)?;
    }
    Ok(acc)
}

fn is_zero(v: &Value) -> bool {
    match v {
        Value::Nat(n) => *n == 0,
        Value::Real(r) => r.get() == 0.0,
        _ => false,
    }
}

fn zero_like(v: &Value) -> Result<Value> {
    match v {
        Value::Nat(_) => Ok(Value::Nat(0)),
        _ => Value::real(0.0),
    }
}

fn sum2(a: &Value, b: &Value) -> Result<Value> {
    match (a, b) {
        (Value::Top, _) | (_, Value::Top) => Ok(Value::Top),
        (Value::Nat(x), Value::Nat(y)) => Ok(x.checked_add(*y).map_or(Value::Top, Value::Nat)),
        (Value::Real(x), Value::Real(y)) => Value::real(x.get() + y.get()),
        _ => Err(Error::TypeMismatch(format!("{a} + {b}"))),
    }
}

fn mul2(a: &Value, b: &Value) -> Result<Value> {
    match (a, b) {
        (Value::Top, _) | (_, Value::Top) => Ok(Value::Top),
        (Value::Nat(x), Value::Nat(y)) => Ok(x.checked_mul(*y).map_or(Value::Top, Value::Nat)),
        (Value::Real(x), Value::Real(y)) => Value::real(x.get() * y.get()),
        _ => Err(Error::TypeMismatch(format!("{a} · {b}"))),
    }
}

/// Smallest k with k² ≥ n.
pub fn ceil_sqrt(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let r = (n - 1).isqrt() + 1;
    debug_assert!(r.checked_mul(r).is_none_or(|sq| sq >= n));
    r
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |f: &mut fmt::Formatter<'_>, es: &[Expr], sep: &str| -> fmt::Result {
            for (i, e) in es.iter().enumerate() {
                if i > 0 {
                    write!(f, "{sep}")?;
                }
                write!(f, "{e}")?;
            }
            Ok(())
        };
        match self {
            Expr::Input(path) if path.is_empty() => write!(f, "x"),
            Expr::Input(path) => {
                write!(f, "x")?;
                for i in path {
                    write!(f, ".{i}")?;
                }
                Ok(())
            }
            Expr::Const(v, _) => write!(f, "{v}"),
            Expr::Tuple(es) => {
                write!(f, "⟨")?;
                list(f, es, ", ")?;
                write!(f, "⟩")
            }
            Expr::Sum(es) => {
                write!(f, "(")?;
                list(f, es, " + ")?;
                write!(f, ")")
            }
            Expr::Product(es) => {
                write!(f, "(")?;
                list(f, es, " · ")?;
                write!(f, ")")
            }
            Expr::Max(es) => {
                write!(f, "max(")?;
                list(f, es, ", ")?;
                write!(f, ")")
            }
            Expr::Div(e, c) => write!(f, "({e} / {c})"),
            Expr::Ceil(e) => write!(f, "⌈{e}⌉"),
            Expr::Sqrt(e) => write!(f, "√{e}"),
            Expr::CeilSqrt(e) => write!(f, "⌈√{e}⌉"),
            Expr::Pow(e, p) => write!(f, "{e}^{p}"),
        }
    }
}

/// One implementation of a catalogue.
#[derive(Clone, Debug, PartialEq)]
pub struct Implementation {
    pub id: String,
    pub provides: Value,
    pub requires: Value,
}

/// A design problem given by an explicit, finite implementation space.
#[derive(Clone, Debug, PartialEq)]
pub struct Catalogue {
    entries: Vec<Implementation>,
}

impl Catalogue {
    pub fn new(fun: &Poset, res: &Poset, entries: Vec<Implementation>) -> Result<Catalogue> {
        let mut ids = HashSet::new();
        for e in &entries {
            if !ids.insert(e.id.as_str()) {
                return Err(Error::InvalidDesignProblem(format!("duplicate implementation id {}", e.id)));
            }
            fun.check(&e.provides)?;
            res.check(&e.requires)?;
        }
        Ok(Catalogue { entries })
    }

    /// Parses lines `id | provides | requires`; blank lines and `#` comments are skipped.
    pub fn parse(fun: &Poset, res: &Poset, text: &str) -> Result<Catalogue> {
        let mut entries = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('|').map(str::trim).collect();
            let [id, provides, requires] = cols[..] else {
                return Err(Error::Parse(format!(
                    "line {}: expected `id | provides | requires`",
                    lineno + 1
                )));
            };
            let at = |e: Error| Error::Parse(format!("line {}: {e}", lineno + 1));
            entries.push(Implementation {
                id: id.to_string(),
                provides: parse_value(fun, provides).map_err(at)?,
                requires: parse_value(res, requires).map_err(at)?,
            });
        }
        Catalogue::new(fun, res, entries)
    }

    pub fn entries(&self) -> &[Implementation] {
        &self.entries
    }

    /// Min{requires(i) : f ⪯ provides(i)}.
    pub fn eval(&self, fun: &Poset, res: &Poset, f: &Value) -> Result<Antichain> {
        fun.check(f)?;
        let feasible = self
            .entries
            .iter()
            .filter(|e| fun.leq_unchecked(f, &e.provides))
            .map(|e| e.requires.clone());
        Antichain::min_of(res.clone(), feasible)
    }
}

#[derive(Clone, Debug)]
pub enum Body {
    Catalogue(Catalogue),
    /// Triv(m): f ↦ {m(f)}.
    Lift(Expr),
    /// f ↦ {⟨a, b⟩ : a + b = f} over ℕ̄.
    InvPlusNat,
    /// f ↦ {⟨⟩} if f ⪯ bound, else {}.
    Limit(Value),
    /// f ↦ {⟨⟩}.
    TopTerminator,
    Composite(Arc<DpTree>),
}

/// A named design problem `h: F → 𝒜R`.
#[derive(Clone, Debug)]
pub struct DesignProblem {
    name: String,
    fun: Poset,
    res: Poset,
    body: Body,
}

impl DesignProblem {
    pub fn catalogue(name: &str, fun: Poset, res: Poset, entries: Vec<Implementation>) -> Result<Self> {
        let c = Catalogue::new(&fun, &res, entries)?;
        Ok(DesignProblem { name: name.into(), fun, res, body: Body::Catalogue(c) })
    }

    pub fn from_catalogue(name: &str, fun: Poset, res: Poset, c: Catalogue) -> Result<Self> {
        Self::catalogue(name, fun, res, c.entries)
    }

    /// A lifted monotone map. The expression shape must match `res` up to unit tags.
    pub fn lift(name: &str, fun: Poset, res: Poset, expr: Expr) -> Result<Self> {
        let shape = expr.shape(&fun)?;
        if !shape.same_shape(&res) {
            return Err(Error::TypeMismatch(format!(
                "lift {name}: expression yields {shape}, declared {res}"
            )));
        }
        Ok(DesignProblem { name: name.into(), fun, res, body: Body::Lift(expr) })
    }

    /// Identity on `p`.
    pub fn identity(name: &str, p: Poset) -> Self {
        DesignProblem { name: name.into(), fun: p.clone(), res: p, body: Body::Lift(Expr::input()) }
    }

    pub fn inv_plus_nat(name: &str) -> Self {
        DesignProblem {
            name: name.into(),
            fun: Poset::nat(),
            res: Poset::product(vec![Poset::nat(), Poset::nat()]),
            body: Body::InvPlusNat,
        }
    }

    pub fn limit(name: &str, fun: Poset, bound: Value) -> Result<Self> {
        fun.check(&bound)?;
        Ok(DesignProblem { name: name.into(), fun, res: Poset::one(), body: Body::Limit(bound) })
    }

    pub fn top_terminator(name: &str, fun: Poset) -> Self {
        DesignProblem { name: name.into(), fun, res: Poset::one(), body: Body::TopTerminator }
    }

    pub fn composite(name: &str, tree: DpTree) -> Self {
        DesignProblem {
            name: name.into(),
            fun: tree.fun().clone(),
            res: tree.res().clone(),
            body: Body::Composite(Arc::new(tree)),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn fun(&self) -> &Poset {
        &self.fun
    }

    pub fn res(&self) -> &Poset {
        &self.res
    }

    pub fn body(&self) -> &Body {
        &self.body
    }

    /// True for lifts that only project and regroup their input.
    pub fn is_plumbing(&self) -> bool {
        matches!(&self.body, Body::Lift(e) if e.is_projection_only())
    }

    /// Evaluates a primitive. Composites are evaluated through [`DpTree::eval`] with the
    /// default budget; their traces are discarded here.
    pub fn eval(&self, f: &Value) -> Result<Antichain> {
        self.fun.check(f)?;
        match &self.body {
            Body::Catalogue(c) => c.eval(&self.fun, &self.res, f),
            Body::Lift(e) => {
                let v = e.eval(f)?;
                Antichain::singleton(self.res.clone(), v)
            }
            Body::InvPlusNat => Ok(inv_plus_nat(&self.res, f)),
            Body::Limit(bound) => Ok(if self.fun.leq_unchecked(f, bound) {
                Antichain::singleton(Poset::one(), Value::unit())?
            } else {
                Antichain::empty(Poset::one())
            }),
            Body::TopTerminator => Antichain::singleton(Poset::one(), Value::unit()),
            Body::Composite(t) => Ok(t.eval(f)?.values()),
        }
    }
}

fn inv_plus_nat(res: &Poset, f: &Value) -> Antichain {
    let elements = match f {
        Value::Nat(n) => (0..=*n).map(|a| Value::pair(Value::Nat(a), Value::Nat(n - a))).collect(),
        _ => vec![Value::pair(Value::Nat(0), Value::Top), Value::pair(Value::Top, Value::Nat(0))],
    };
    Antichain::new(res.clone(), elements).expect("pairs summing to f are pairwise incomparable")
}
