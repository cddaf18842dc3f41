//! Monotone co-design problems.
//!
//! A design problem is a monotone map `h: F → 𝒜R` from a functionality poset to antichains of
//! resources. Problems compose in series, in parallel, with feedback and as coproducts; a
//! co-design graph is decomposed into such a tree and evaluated, with feedback solved by Kleene
//! ascent in antichain space. The [`lang`] module compiles a small modeling language to graphs.

pub mod compose;
pub mod error;
pub mod graph;
pub mod lang;
pub mod posets;
pub mod primitives;
pub mod solver;

pub use compose::DpTree;
pub use error::{Error, Result};
pub use graph::{CoDesignGraph, Diagnostic, Node, PortRef};
pub use posets::{Antichain, Extent, FinitePoset, Poset, Real, TagSet, TaggedAntichain, Value};
pub use primitives::{Body, Catalogue, DesignProblem, Expr};
pub use solver::{AscentTrace, IterationBudget, SolveResult, SolveStatus, TraceStatus};
