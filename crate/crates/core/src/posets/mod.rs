//! Values, posets and the antichain algebra.
//!
//! Every poset is a DCPO completed with TOP where needed. An antichain is a Pareto front;
//! the empty antichain is the top of 𝒜P and encodes infeasibility.

mod antichain;
mod poset;
mod text;
mod value;

pub use antichain::{Antichain, Tag, TagSet, TaggedAntichain};
pub use poset::{Extent, FinitePoset, Poset, PosetKind};
pub use text::parse_value;
pub use value::{Real, Value};

/// `leq` in function form.
pub fn leq(p: &Poset, a: &Value, b: &Value) -> crate::Result<bool> {
    p.leq(a, b)
}

/// `Min` in function form.
pub fn min_elements(p: &Poset, s: impl IntoIterator<Item = Value>) -> crate::Result<Antichain> {
    Antichain::min_of(p.clone(), s)
}

/// Port convention: no factors give One, one factor stands for itself, more give a product.
pub fn bundle(factors: Vec<Poset>) -> Poset {
    if factors.len() == 1 {
        factors.into_iter().next().expect("one factor")
    } else {
        Poset::product(factors)
    }
}
