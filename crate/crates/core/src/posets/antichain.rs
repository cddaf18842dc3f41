use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use super::poset::Poset;
use super::value::Value;
use crate::error::{Error, Result};

/// A finite set of pairwise incomparable elements, kept sorted in canonical order,
/// so structural equality is set equality. Empty means infeasible (the top of 𝒜P).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Antichain {
    poset: Poset,
    elements: Vec<Value>,
}

/// Minimal elements of members of `p`, sorted and deduplicated.
pub(crate) fn minimal(p: &Poset, mut s: Vec<Value>) -> Vec<Value> {
    s.sort();
    s.dedup();
    let keep: Vec<bool> = s
        .iter()
        .enumerate()
        .map(|(i, x)| {
            !s.iter()
                .enumerate()
                .any(|(j, y)| i != j && p.leq_unchecked(y, x))
        })
        .collect();
    s.into_iter().zip(keep).filter_map(|(x, k)| k.then_some(x)).collect()
}

impl Antichain {
    pub(crate) fn from_sorted_unchecked(poset: Poset, elements: Vec<Value>) -> Antichain {
        Antichain { poset, elements }
    }

    pub fn empty(poset: Poset) -> Antichain {
        Antichain { poset, elements: Vec::new() }
    }

    pub fn singleton(poset: Poset, v: Value) -> Result<Antichain> {
        poset.check(&v)?;
        Ok(Antichain { poset, elements: vec![v] })
    }

    /// Validates membership and pairwise incomparability.
    pub fn new(poset: Poset, elements: Vec<Value>) -> Result<Antichain> {
        for v in &elements {
            poset.check(v)?;
        }
        let mut elements = elements;
        elements.sort();
        elements.dedup();
        for (i, a) in elements.iter().enumerate() {
            for b in &elements[i + 1..] {
                if poset.leq_unchecked(a, b) || poset.leq_unchecked(b, a) {
                    return Err(Error::NotAnAntichain(a.to_string(), b.to_string()));
                }
            }
        }
        Ok(Antichain { poset, elements })
    }

    /// Min: the non-dominated elements of `s`.
    pub fn min_of(poset: Poset, s: impl IntoIterator<Item = Value>) -> Result<Antichain> {
        let s: Vec<Value> = s.into_iter().collect();
        for v in &s {
            poset.check(v)?;
        }
        let elements = minimal(&poset, s);
        Ok(Antichain { poset, elements })
    }

    pub fn poset(&self) -> &Poset {
        &self.poset
    }

    pub fn elements(&self) -> &[Value] {
        &self.elements
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Value> {
        self.elements.iter()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    fn same_poset(&self, other: &Antichain) -> Result<()> {
        if self.poset == other.poset {
            Ok(())
        } else {
            Err(Error::TypeMismatch(format!(
                "antichains over {} and {}",
                self.poset, other.poset
            )))
        }
    }

    /// x ∈ ↑A.
    pub fn up_contains(&self, x: &Value) -> Result<bool> {
        self.poset.check(x)?;
        Ok(self.elements.iter().any(|e| self.poset.leq_unchecked(e, x)))
    }

    /// A ⪯ B iff ↑A ⊇ ↑B.
    pub fn leq(&self, other: &Antichain) -> Result<bool> {
        self.same_poset(other)?;
        Ok(other
            .elements
            .iter()
            .all(|b| self.elements.iter().any(|a| self.poset.leq_unchecked(a, b))))
    }

    /// Min(A ∪ B).
    pub fn union_min(&self, other: &Antichain) -> Result<Antichain> {
        self.same_poset(other)?;
        let all: Vec<Value> = self.elements.iter().chain(&other.elements).cloned().collect();
        Ok(Antichain { poset: self.poset.clone(), elements: minimal(&self.poset, all) })
    }

    /// A ⊠ B over Product(P, Q). Already an antichain; no Min needed.
    pub fn product(&self, other: &Antichain) -> Antichain {
        let poset = Poset::product(vec![self.poset.clone(), other.poset.clone()]);
        let mut elements = Vec::with_capacity(self.len() * other.len());
        for a in &self.elements {
            for b in &other.elements {
                elements.push(Value::pair(a.clone(), b.clone()));
            }
        }
        elements.sort();
        Antichain { poset, elements }
    }

    /// {x ∈ A : r ⪯ x}.
    pub fn meet_up(&self, r: &Value) -> Result<Antichain> {
        self.poset.check(r)?;
        let elements =
            self.elements.iter().filter(|x| self.poset.leq_unchecked(r, x)).cloned().collect();
        Ok(Antichain { poset: self.poset.clone(), elements })
    }

    /// Min(↑A ∩ ↑r); equals [`Antichain::meet_up`] whenever a filtered element exists
    /// below every join, and is monotone in A.
    pub fn up_intersection(&self, r: &Value) -> Result<Antichain> {
        self.poset.check(r)?;
        let mut all = Vec::new();
        for x in &self.elements {
            all.extend(self.poset.minimal_upper_bounds(x, r));
        }
        Ok(Antichain { poset: self.poset.clone(), elements: minimal(&self.poset, all) })
    }
}

impl fmt::Display for Antichain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.elements.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

pub type Tag = Arc<str>;
pub type TagSet = BTreeSet<Tag>;

/// An antichain whose elements carry the set of coproduct branch names that achieve them.
/// Tags are metadata: they never take part in the order or in equality of values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaggedAntichain {
    poset: Poset,
    items: Vec<(Value, TagSet)>,
}

impl TaggedAntichain {
    pub fn empty(poset: Poset) -> TaggedAntichain {
        TaggedAntichain { poset, items: Vec::new() }
    }

    pub fn untagged(a: Antichain) -> TaggedAntichain {
        let Antichain { poset, elements } = a;
        TaggedAntichain { poset, items: elements.into_iter().map(|v| (v, TagSet::new())).collect() }
    }

    /// Min over tagged candidates; equal values merge their tags.
    pub fn min_of(
        poset: Poset,
        candidates: impl IntoIterator<Item = (Value, TagSet)>,
    ) -> Result<TaggedAntichain> {
        let mut items: Vec<(Value, TagSet)> = candidates.into_iter().collect();
        for (v, _) in &items {
            poset.check(v)?;
        }
        items.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(Value, TagSet)> = Vec::with_capacity(items.len());
        for (v, tags) in items {
            match merged.last_mut() {
                Some((last, last_tags)) if *last == v => last_tags.extend(tags),
                _ => merged.push((v, tags)),
            }
        }
        let keep: Vec<bool> = merged
            .iter()
            .enumerate()
            .map(|(i, (x, _))| {
                !merged
                    .iter()
                    .enumerate()
                    .any(|(j, (y, _))| i != j && poset.leq_unchecked(y, x))
            })
            .collect();
        let items = merged.into_iter().zip(keep).filter_map(|(x, k)| k.then_some(x)).collect();
        Ok(TaggedAntichain { poset, items })
    }

    pub fn poset(&self) -> &Poset {
        &self.poset
    }

    pub fn items(&self) -> &[(Value, TagSet)] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn values(&self) -> Antichain {
        Antichain {
            poset: self.poset.clone(),
            elements: self.items.iter().map(|(v, _)| v.clone()).collect(),
        }
    }

    /// Union of all tags present.
    pub fn all_tags(&self) -> TagSet {
        self.items.iter().flat_map(|(_, t)| t.iter().cloned()).collect()
    }

    pub fn with_tag(mut self, tag: &Tag) -> TaggedAntichain {
        for (_, t) in &mut self.items {
            t.insert(tag.clone());
        }
        self
    }
}

impl fmt::Display for TaggedAntichain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (v, tags)) in self.items.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
            if !tags.is_empty() {
                let names: Vec<&str> = tags.iter().map(|t| &**t).collect();
                write!(f, " [{}]", names.join(", "))?;
            }
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nat2() -> Poset {
        Poset::product(vec![Poset::nat(), Poset::nat()])
    }

    fn pair(a: u64, b: u64) -> Value {
        Value::pair(Value::Nat(a), Value::Nat(b))
    }

    fn ac(p: &Poset, vs: &[Value]) -> Antichain {
        Antichain::new(p.clone(), vs.to_vec()).unwrap()
    }

    fn nats(vs: &[u64]) -> Vec<Value> {
        vs.iter().map(|&n| Value::Nat(n)).collect()
    }

    #[test]
    fn min_drops_dominated() {
        let p = nat2();
        let m = Antichain::min_of(p.clone(), [pair(0, 2), pair(1, 1), pair(2, 0), pair(1, 2)]).unwrap();
        assert_eq!(m, ac(&p, &[pair(0, 2), pair(1, 1), pair(2, 0)]));
        assert!(Antichain::min_of(p, []).unwrap().is_empty());
        let m = Antichain::min_of(Poset::nat(), nats(&[5, 3, 3])).unwrap();
        assert_eq!(m.elements(), &nats(&[3])[..]);
    }

    #[test]
    fn new_rejects_comparable() {
        assert!(matches!(
            Antichain::new(Poset::nat(), nats(&[1, 2])),
            Err(Error::NotAnAntichain(_, _))
        ));
    }

    #[test]
    fn antichain_order() {
        let n = Poset::nat();
        assert!(ac(&n, &nats(&[0])).leq(&Antichain::empty(n.clone())).unwrap());
        let p = nat2();
        assert!(ac(&p, &[pair(0, 0)]).leq(&ac(&p, &[pair(0, 1), pair(1, 0)])).unwrap());
        assert!(!ac(&n, &nats(&[2])).leq(&ac(&n, &nats(&[1]))).unwrap());
    }

    #[test]
    fn up_contains_cases() {
        let n = Poset::nat();
        assert!(ac(&n, &nats(&[3])).up_contains(&Value::Nat(5)).unwrap());
        assert!(!Antichain::empty(n).up_contains(&Value::Nat(5)).unwrap());
        let p = nat2();
        assert!(ac(&p, &[pair(0, 4), pair(3, 3), pair(4, 0)]).up_contains(&pair(3, 4)).unwrap());
    }

    #[test]
    fn union_min_cases() {
        let n = Poset::nat();
        let u = ac(&n, &nats(&[1])).union_min(&ac(&n, &nats(&[2]))).unwrap();
        assert_eq!(u, ac(&n, &nats(&[1])));
        let p = nat2();
        let u = ac(&p, &[pair(0, 4)]).union_min(&ac(&p, &[pair(3, 3)])).unwrap();
        assert_eq!(u, ac(&p, &[pair(0, 4), pair(3, 3)]));
        let a = ac(&p, &[pair(0, 4), pair(3, 3)]);
        assert_eq!(a.union_min(&a).unwrap(), a);
    }

    #[test]
    fn product_cases() {
        let n = Poset::nat();
        let x = ac(&n, &nats(&[2])).product(&ac(&n, &nats(&[3])));
        assert_eq!(x.elements(), &[pair(2, 3)]);
        assert!(Antichain::empty(n.clone()).product(&ac(&n, &nats(&[3]))).is_empty());
        let a = ac(&nat2(), &[pair(1, 0), pair(0, 1)]);
        let x = a.product(&ac(&n, &nats(&[5])));
        assert_eq!(
            x.elements(),
            &[Value::pair(pair(0, 1), Value::Nat(5)), Value::pair(pair(1, 0), Value::Nat(5))]
        );
    }

    #[test]
    fn meet_up_filters() {
        let p = nat2();
        let a = ac(&p, &[pair(0, 2), pair(1, 1), pair(2, 0)]);
        assert_eq!(a.meet_up(&pair(1, 0)).unwrap(), ac(&p, &[pair(1, 1), pair(2, 0)]));
        assert_eq!(a.meet_up(&pair(0, 0)).unwrap(), a);
        let n = Poset::nat();
        assert!(ac(&n, &nats(&[0])).meet_up(&Value::Nat(1)).unwrap().is_empty());
    }

    #[test]
    fn meet_up_filter_is_not_monotone_but_up_intersection_is() {
        let n = Poset::nat();
        let a = ac(&n, &nats(&[0]));
        let b = ac(&n, &nats(&[1]));
        let r = Value::Nat(1);
        assert!(a.leq(&b).unwrap());
        assert!(!a.meet_up(&r).unwrap().leq(&b.meet_up(&r).unwrap()).unwrap());
        assert!(a.up_intersection(&r).unwrap().leq(&b.up_intersection(&r).unwrap()).unwrap());
        assert_eq!(a.up_intersection(&r).unwrap(), ac(&n, &nats(&[1])));
    }

    #[test]
    fn mismatched_posets_are_rejected() {
        let a = Antichain::empty(Poset::nat());
        let b = Antichain::empty(Poset::real());
        assert!(matches!(a.leq(&b), Err(Error::TypeMismatch(_))));
    }

    #[test]
    fn tagged_min_merges_ties() {
        let n = Poset::nat();
        let t = |s: &str| -> TagSet { [Tag::from(s)].into_iter().collect() };
        let m = TaggedAntichain::min_of(
            n,
            [(Value::Nat(2), t("a")), (Value::Nat(2), t("b")), (Value::Nat(3), t("c"))],
        )
        .unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.items()[0].1.len(), 2);
        assert_eq!(m.to_string(), "{2 [a, b]}");
    }

    #[test]
    fn renders_braces() {
        let p = nat2();
        assert_eq!(ac(&p, &[pair(4, 0), pair(0, 4), pair(3, 3)]).to_string(), "{⟨0, 4⟩, ⟨3, 3⟩, ⟨4, 0⟩}");
        assert_eq!(Antichain::empty(p).to_string(), "{}");
    }
}
