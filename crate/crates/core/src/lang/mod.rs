//! A small modeling language compiled to co-design graphs.
//!
//! `parse` turns source into a [`ast::ModelAst`]; `compile` lowers it to a validated
//! [`CoDesignGraph`](crate::graph::CoDesignGraph) whose exposed ports are the declared
//! `provides` and `requires`. Quantities are stored in canonical units; declared units are kept
//! on the ports for display. The grammar is documented in `docs/grammar.md`.

pub mod ast;
mod compile;
mod lexer;
mod library;
mod parser;
pub mod units;

use std::fmt;

pub use compile::{compile, compile_file, compile_named, CompiledModel, PortInfo};
pub use library::Library;
pub use parser::{parse, parse_unit};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    Syntax,
    UnknownUnit,
    UnresolvedReference,
    UnitMismatch,
    TypeMismatch,
    /// A construction that would not be monotone, e.g. division by a variable.
    NonMonotone,
    /// The left side of `>=` cannot be inverted into design problems.
    UnsupportedInverse,
    CyclicModelDefinition,
    DuplicateName,
    /// An instance resource that is neither constrained nor ignored.
    UnusedResource,
    Io,
    /// The compiled graph failed validation.
    InvalidGraph,
}

impl ErrorKind {
    pub fn label(self) -> &'static str {
        match self {
            ErrorKind::Syntax => "syntax error",
            ErrorKind::UnknownUnit => "unknown unit",
            ErrorKind::UnresolvedReference => "unresolved reference",
            ErrorKind::UnitMismatch => "unit mismatch",
            ErrorKind::TypeMismatch => "type mismatch",
            ErrorKind::NonMonotone => "not monotone",
            ErrorKind::UnsupportedInverse => "unsupported constraint",
            ErrorKind::CyclicModelDefinition => "cyclic model definition",
            ErrorKind::DuplicateName => "duplicate name",
            ErrorKind::UnusedResource => "unused resource",
            ErrorKind::Io => "i/o error",
            ErrorKind::InvalidGraph => "invalid graph",
        }
    }
}

/// A located diagnostic, displayed as `file:line:col: kind: message`.
#[derive(Clone, Debug, PartialEq)]
pub struct LangError {
    pub kind: ErrorKind,
    pub file: Option<String>,
    pub span: ast::Span,
    pub message: String,
}

impl LangError {
    pub fn new(kind: ErrorKind, span: ast::Span, message: String) -> LangError {
        LangError { kind, file: None, span, message }
    }

    /// Sets the file unless an inner model already did.
    pub fn in_file(mut self, file: &str) -> LangError {
        if self.file.is_none() {
            self.file = Some(file.into());
        }
        self
    }
}

impl fmt::Display for LangError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}:{}: {}: {}",
            self.file.as_deref().unwrap_or("<input>"),
            self.span.line,
            self.span.col,
            self.kind.label(),
            self.message
        )
    }
}

impl std::error::Error for LangError {}

impl From<LangError> for crate::Error {
    fn from(e: LangError) -> Self {
        crate::Error::Parse(e.to_string())
    }
}
