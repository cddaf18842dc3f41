//! Syntax tree of the modeling language.

use std::fmt;

/// 1-based source position.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// A unit expression as written, e.g. `Wh/kg` or `W/N^2`.
#[derive(Clone, Debug, PartialEq)]
pub enum UnitAst {
    /// `[Nat]`: the extended naturals instead of ℝ̄₊.
    Nat,
    /// Atoms with integer exponents; an empty list is dimensionless.
    Atoms(Vec<(String, i32)>, Span),
}

impl fmt::Display for UnitAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UnitAst::Nat => f.write_str("Nat"),
            UnitAst::Atoms(atoms, _) => {
                let mut first = true;
                for (a, e) in atoms {
                    if !first {
                        f.write_str(if *e < 0 { "/" } else { "*" })?;
                    } else if *e < 0 {
                        f.write_str("1/")?;
                    }
                    first = false;
                    f.write_str(a)?;
                    if e.abs() != 1 {
                        write!(f, "^{}", e.abs())?;
                    }
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PortDecl {
    pub name: String,
    pub unit: Option<UnitAst>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ModelRef {
    /// `` `Name ``: a sibling `Name.mcdp`.
    Named(String, Span),
    Inline(Box<ModelAst>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum InstanceOf {
    Model(ModelRef),
    /// Alternatives tagged by name; compiles to a coproduct.
    Choose(Vec<(String, ModelRef)>),
}

#[derive(Clone, Debug, PartialEq, Eq, Copy)]
pub enum PortSide {
    /// `p provided by x`: a functionality of instance x.
    Provided,
    /// `r required by x`: a resource of instance x.
    Required,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Number { value: f64, unit: Option<UnitAst> },
    Name(String),
    Port { port: String, side: PortSide, instance: String },
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, f64),
    Call(String, Vec<Expr>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Sums are parenthesized wherever they appear under a tighter operator.
        let show = |f: &mut fmt::Formatter<'_>, e: &Expr, tight: bool| -> fmt::Result {
            if tight && matches!(e.kind, ExprKind::Sum(_) | ExprKind::Div(..)) {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        let join = |f: &mut fmt::Formatter<'_>, es: &[Expr], sep: &str, tight: bool| -> fmt::Result {
            for (i, e) in es.iter().enumerate() {
                if i > 0 {
                    f.write_str(sep)?;
                }
                show(f, e, tight)?;
            }
            Ok(())
        };
        match &self.kind {
            ExprKind::Number { value, unit: None } => write!(f, "{value}"),
            ExprKind::Number { value, unit: Some(u) } => write!(f, "{value} [{u}]"),
            ExprKind::Name(n) => f.write_str(n),
            ExprKind::Port { port, side: PortSide::Provided, instance } => write!(f, "{port} provided by {instance}"),
            ExprKind::Port { port, side: PortSide::Required, instance } => write!(f, "{port} required by {instance}"),
            ExprKind::Sum(es) => join(f, es, " + ", false),
            ExprKind::Product(es) => join(f, es, " * ", true),
            ExprKind::Div(a, b) => {
                show(f, a, true)?;
                f.write_str(" / ")?;
                show(f, b, !matches!(b.kind, ExprKind::Name(_) | ExprKind::Number { .. } | ExprKind::Call(..)))
            }
            ExprKind::Pow(a, p) => {
                if matches!(a.kind, ExprKind::Name(_) | ExprKind::Call(..) | ExprKind::Port { .. }) {
                    write!(f, "{a}^{p}")
                } else {
                    write!(f, "({a})^{p}")
                }
            }
            ExprKind::Call(name, args) => {
                write!(f, "{name}(")?;
                join(f, args, ", ", false)?;
                f.write_str(")")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Stmt {
    Instance { name: String, of: InstanceOf, span: Span },
    /// `name = expr`: a named intermediate or constant.
    Let { name: String, expr: Expr, span: Span },
    /// `greater >= lesser`, also written `lesser <= greater`.
    Constraint { greater: Expr, lesser: Expr, span: Span },
    /// `ignore r required by x`.
    Ignore { port: String, instance: String, span: Span },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelAst {
    pub provides: Vec<PortDecl>,
    pub requires: Vec<PortDecl>,
    pub statements: Vec<Stmt>,
    pub span: Span,
}
