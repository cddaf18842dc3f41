use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use super::antichain::Antichain;
use super::value::{Real, Value};
use crate::error::{Error, Result};

/// Carrier size up to which products of finite posets are expanded for exact width.
const EXACT_PRODUCT_LIMIT: usize = 512;

/// A finite poset with an explicit, validated order relation.
/// Elements are stored sorted by name, so index order is the canonical order.
#[derive(Clone, Debug)]
pub struct FinitePoset {
    names: Vec<Arc<str>>,
    index: HashMap<Arc<str>, usize>,
    leq: Vec<bool>,
}

impl FinitePoset {
    /// Builds the reflexive-transitive closure of `relations` (pairs `a ⪯ b`).
    /// Fails if the closure is not antisymmetric.
    pub fn from_relations<'a>(
        elements: impl IntoIterator<Item = &'a str>,
        relations: &[(&str, &str)],
    ) -> Result<FinitePoset> {
        let mut names: Vec<Arc<str>> = elements.into_iter().map(Arc::from).collect();
        names.sort();
        let before = names.len();
        names.dedup();
        if names.len() != before {
            return Err(Error::InvalidPoset("duplicate element".into()));
        }
        let n = names.len();
        let index: HashMap<Arc<str>, usize> =
            names.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        let mut leq = vec![false; n * n];
        for i in 0..n {
            leq[i * n + i] = true;
        }
        for (a, b) in relations {
            let ia = *index
                .get(*a)
                .ok_or_else(|| Error::InvalidPoset(format!("unknown element {a}")))?;
            let ib = *index
                .get(*b)
                .ok_or_else(|| Error::InvalidPoset(format!("unknown element {b}")))?;
            leq[ia * n + ib] = true;
        }
        for k in 0..n {
            for i in 0..n {
                if leq[i * n + k] {
                    for j in 0..n {
                        if leq[k * n + j] {
                            leq[i * n + j] = true;
                        }
                    }
                }
            }
        }
        Self::validated(names, index, leq)
    }

    /// Takes an explicit relation matrix (`matrix[i][j]` iff `elements[i] ⪯ elements[j]`)
    /// and checks reflexivity, antisymmetry and transitivity without closing it.
    pub fn from_matrix(elements: &[&str], matrix: &[Vec<bool>]) -> Result<FinitePoset> {
        let n = elements.len();
        if matrix.len() != n || matrix.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidPoset("relation matrix has wrong shape".into()));
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| elements[a].cmp(elements[b]));
        let names: Vec<Arc<str>> = order.iter().map(|&i| Arc::from(elements[i])).collect();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidPoset("duplicate element".into()));
        }
        let index = names.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        let mut leq = vec![false; n * n];
        for (i, &oi) in order.iter().enumerate() {
            for (j, &oj) in order.iter().enumerate() {
                leq[i * n + j] = matrix[oi][oj];
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if leq[i * n + k] && leq[k * n + j] && !leq[i * n + j] {
                        return Err(Error::InvalidPoset(format!(
                            "relation is not transitive at {}, {}, {}",
                            names[i], names[k], names[j]
                        )));
                    }
                }
            }
        }
        Self::validated(names, index, leq)
    }

    fn validated(
        names: Vec<Arc<str>>,
        index: HashMap<Arc<str>, usize>,
        leq: Vec<bool>,
    ) -> Result<FinitePoset> {
        let n = names.len();
        if n == 0 {
            return Err(Error::InvalidPoset("empty carrier".into()));
        }
        for i in 0..n {
            if !leq[i * n + i] {
                return Err(Error::InvalidPoset(format!("{} ⪯ {} missing", names[i], names[i])));
            }
            for j in 0..n {
                if i != j && leq[i * n + j] && leq[j * n + i] {
                    return Err(Error::InvalidPoset(format!(
                        "relation is not antisymmetric: {} and {}",
                        names[i], names[j]
                    )));
                }
            }
        }
        Ok(FinitePoset { names, index, leq })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[Arc<str>] {
        &self.names
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn leq_index(&self, i: usize, j: usize) -> bool {
        self.leq[i * self.names.len() + j]
    }

    pub fn element(&self, i: usize) -> Value {
        Value::Label(self.names[i].clone())
    }

    /// Maximum antichain size, by Dilworth: n minus a maximum matching of the strict order.
    pub fn width(&self) -> u64 {
        let n = self.len();
        let mut match_right: Vec<Option<usize>> = vec![None; n];
        let mut matched = 0;
        for u in 0..n {
            let mut seen = vec![false; n];
            if self.augment(u, &mut seen, &mut match_right) {
                matched += 1;
            }
        }
        (n - matched) as u64
    }

    fn augment(&self, u: usize, seen: &mut [bool], match_right: &mut [Option<usize>]) -> bool {
        for v in 0..self.len() {
            if u != v && self.leq_index(u, v) && !seen[v] {
                seen[v] = true;
                if match_right[v].is_none_or(|w| self.augment(w, seen, match_right)) {
                    match_right[v] = Some(u);
                    return true;
                }
            }
        }
        false
    }

    /// Number of elements in a longest chain.
    pub fn height(&self) -> u64 {
        let n = self.len();
        // Sorting by number of predecessors is a linear extension.
        let mut order: Vec<usize> = (0..n).collect();
        let below = |i: usize| (0..n).filter(|&j| self.leq_index(j, i)).count();
        order.sort_by_key(|&i| below(i));
        let mut longest = vec![1u64; n];
        for (pos, &i) in order.iter().enumerate() {
            for &j in &order[..pos] {
                if j != i && self.leq_index(j, i) {
                    longest[i] = longest[i].max(longest[j] + 1);
                }
            }
        }
        longest.into_iter().max().unwrap_or(0)
    }
}

impl PartialEq for FinitePoset {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names && self.leq == other.leq
    }
}

impl Eq for FinitePoset {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PosetKind {
    /// ℕ̄: naturals completed with TOP.
    Nat,
    /// ℝ̄₊: nonnegative floats completed with TOP. The unit tag is a display/diagnostic label only.
    Real { unit: Option<Arc<str>> },
    Finite(FinitePoset),
    /// Componentwise order. The empty product is One.
    Product(Vec<Poset>),
}

/// Cheaply clonable handle to an immutable poset.
#[derive(Clone, Debug)]
pub struct Poset(Arc<PosetKind>);

impl PartialEq for Poset {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl Eq for Poset {}

/// An extended natural that may also be unknown.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Extent {
    Finite(u64),
    Infinite,
    Unknown,
}

impl fmt::Display for Extent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extent::Finite(n) => write!(f, "{n}"),
            Extent::Infinite => write!(f, "∞"),
            Extent::Unknown => write!(f, "UNKNOWN"),
        }
    }
}

impl Poset {
    pub fn nat() -> Poset {
        Poset(Arc::new(PosetKind::Nat))
    }

    pub fn real() -> Poset {
        Poset(Arc::new(PosetKind::Real { unit: None }))
    }

    pub fn real_with_unit(unit: &str) -> Poset {
        Poset(Arc::new(PosetKind::Real { unit: Some(Arc::from(unit)) }))
    }

    pub fn finite(p: FinitePoset) -> Poset {
        Poset(Arc::new(PosetKind::Finite(p)))
    }

    pub fn product(factors: Vec<Poset>) -> Poset {
        Poset(Arc::new(PosetKind::Product(factors)))
    }

    pub fn one() -> Poset {
        Poset::product(Vec::new())
    }

    pub fn kind(&self) -> &PosetKind {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        matches!(self.kind(), PosetKind::Product(fs) if fs.is_empty())
    }

    pub fn factors(&self) -> Option<&[Poset]> {
        match self.kind() {
            PosetKind::Product(fs) => Some(fs),
            _ => None,
        }
    }

    pub fn unit(&self) -> Option<&str> {
        match self.kind() {
            PosetKind::Real { unit } => unit.as_deref(),
            _ => None,
        }
    }

    /// Structural equality ignoring unit tags.
    pub fn same_shape(&self, other: &Poset) -> bool {
        match (self.kind(), other.kind()) {
            (PosetKind::Nat, PosetKind::Nat) => true,
            (PosetKind::Real { .. }, PosetKind::Real { .. }) => true,
            (PosetKind::Finite(a), PosetKind::Finite(b)) => a == b,
            (PosetKind::Product(a), PosetKind::Product(b)) => {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.same_shape(y))
            }
            _ => false,
        }
    }

    pub fn contains(&self, v: &Value) -> bool {
        match (self.kind(), v) {
            (PosetKind::Nat, Value::Nat(_) | Value::Top) => true,
            (PosetKind::Real { .. }, Value::Real(_) | Value::Top) => true,
            (PosetKind::Finite(p), Value::Label(s)) => p.index_of(s).is_some(),
            (PosetKind::Product(fs), Value::Tuple(vs)) => {
                fs.len() == vs.len() && fs.iter().zip(vs).all(|(p, x)| p.contains(x))
            }
            _ => false,
        }
    }

    pub fn check(&self, v: &Value) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(Error::TypeMismatch(format!("{v} is not an element of {self}")))
        }
    }

    pub fn leq(&self, a: &Value, b: &Value) -> Result<bool> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.leq_unchecked(a, b))
    }

    /// Order test for values already known to be members.
    pub fn leq_unchecked(&self, a: &Value, b: &Value) -> bool {
        match (self.kind(), a, b) {
            (PosetKind::Nat | PosetKind::Real { .. }, _, Value::Top) => true,
            (PosetKind::Nat | PosetKind::Real { .. }, Value::Top, _) => false,
            (PosetKind::Nat, Value::Nat(x), Value::Nat(y)) => x <= y,
            (PosetKind::Real { .. }, Value::Real(x), Value::Real(y)) => x.get() <= y.get(),
            (PosetKind::Finite(p), Value::Label(x), Value::Label(y)) => {
                match (p.index_of(x), p.index_of(y)) {
                    (Some(i), Some(j)) => p.leq_index(i, j),
                    _ => false,
                }
            }
            (PosetKind::Product(fs), Value::Tuple(xs), Value::Tuple(ys)) => fs
                .iter()
                .zip(xs.iter().zip(ys))
                .all(|(p, (x, y))| p.leq_unchecked(x, y)),
            _ => false,
        }
    }

    /// The least element, if there is one.
    pub fn bottom(&self) -> Option<Value> {
        match self.kind() {
            PosetKind::Nat => Some(Value::Nat(0)),
            PosetKind::Real { .. } => Some(Value::Real(Real::ZERO)),
            PosetKind::Finite(p) => {
                let n = p.len();
                (0..n).find(|&i| (0..n).all(|j| p.leq_index(i, j))).map(|i| p.element(i))
            }
            PosetKind::Product(fs) => fs
                .iter()
                .map(Poset::bottom)
                .collect::<Option<Vec<_>>>()
                .map(Value::Tuple),
        }
    }

    /// The greatest element, if there is one.
    pub fn top(&self) -> Option<Value> {
        match self.kind() {
            PosetKind::Nat | PosetKind::Real { .. } => Some(Value::Top),
            PosetKind::Finite(p) => {
                let n = p.len();
                (0..n).find(|&i| (0..n).all(|j| p.leq_index(j, i))).map(|i| p.element(i))
            }
            PosetKind::Product(fs) => fs
                .iter()
                .map(Poset::top)
                .collect::<Option<Vec<_>>>()
                .map(Value::Tuple),
        }
    }

    /// Min(P): the bottom of 𝒜P. A singleton when P has a least element.
    pub fn bottom_antichain(&self) -> Antichain {
        Antichain::from_sorted_unchecked(self.clone(), self.minimal_elements())
    }

    fn minimal_elements(&self) -> Vec<Value> {
        match self.kind() {
            PosetKind::Nat => vec![Value::Nat(0)],
            PosetKind::Real { .. } => vec![Value::Real(Real::ZERO)],
            PosetKind::Finite(p) => {
                let n = p.len();
                (0..n)
                    .filter(|&i| (0..n).all(|j| j == i || !p.leq_index(j, i)))
                    .map(|i| p.element(i))
                    .collect()
            }
            PosetKind::Product(fs) => {
                let parts: Vec<Vec<Value>> = fs.iter().map(Poset::minimal_elements).collect();
                let mut out = cartesian(&parts);
                out.sort();
                out
            }
        }
    }

    /// All elements, when the carrier is finite (finite posets and their products).
    pub fn elements(&self) -> Option<Vec<Value>> {
        match self.kind() {
            PosetKind::Nat | PosetKind::Real { .. } => None,
            PosetKind::Finite(p) => Some((0..p.len()).map(|i| p.element(i)).collect()),
            PosetKind::Product(fs) => {
                let parts = fs.iter().map(Poset::elements).collect::<Option<Vec<_>>>()?;
                Some(cartesian(&parts))
            }
        }
    }

    /// Carrier size when finite.
    pub fn cardinality(&self) -> Option<usize> {
        match self.kind() {
            PosetKind::Nat | PosetKind::Real { .. } => None,
            PosetKind::Finite(p) => Some(p.len()),
            PosetKind::Product(fs) => fs
                .iter()
                .try_fold(1usize, |acc, p| acc.checked_mul(p.cardinality()?)),
        }
    }

    /// Min(↑a ∩ ↑b): the minimal upper bounds of two members, sorted.
    pub fn minimal_upper_bounds(&self, a: &Value, b: &Value) -> Vec<Value> {
        match (self.kind(), a, b) {
            (PosetKind::Nat | PosetKind::Real { .. }, _, _) => {
                vec![if self.leq_unchecked(a, b) { b.clone() } else { a.clone() }]
            }
            (PosetKind::Finite(p), Value::Label(x), Value::Label(y)) => {
                let (Some(i), Some(j)) = (p.index_of(x), p.index_of(y)) else {
                    return Vec::new();
                };
                let n = p.len();
                let ub: Vec<usize> =
                    (0..n).filter(|&k| p.leq_index(i, k) && p.leq_index(j, k)).collect();
                ub.iter()
                    .filter(|&&k| ub.iter().all(|&m| m == k || !p.leq_index(m, k)))
                    .map(|&k| p.element(k))
                    .collect()
            }
            (PosetKind::Product(fs), Value::Tuple(xs), Value::Tuple(ys)) => {
                let parts: Vec<Vec<Value>> = fs
                    .iter()
                    .zip(xs.iter().zip(ys))
                    .map(|(p, (x, y))| p.minimal_upper_bounds(x, y))
                    .collect();
                let mut out = cartesian(&parts);
                out.sort();
                out
            }
            _ => Vec::new(),
        }
    }

    /// Width (largest antichain) and height (longest chain).
    pub fn width_height(&self) -> (Extent, Extent) {
        match self.kind() {
            PosetKind::Nat | PosetKind::Real { .. } => (Extent::Finite(1), Extent::Infinite),
            PosetKind::Finite(p) => (Extent::Finite(p.width()), Extent::Finite(p.height())),
            PosetKind::Product(fs) => {
                let nontrivial: Vec<&Poset> = fs.iter().filter(|p| !p.is_singleton()).collect();
                let height = product_height(&nontrivial);
                match nontrivial.as_slice() {
                    [] => (Extent::Finite(1), Extent::Finite(1)),
                    [only] => only.width_height(),
                    _ => match self.as_finite_expanded() {
                        Some(fp) => (Extent::Finite(fp.width()), height),
                        None => (Extent::Unknown, height),
                    },
                }
            }
        }
    }

    fn is_singleton(&self) -> bool {
        self.cardinality() == Some(1)
    }

    /// Expands a small product of finite posets into one finite poset.
    fn as_finite_expanded(&self) -> Option<FinitePoset> {
        if self.cardinality()? > EXACT_PRODUCT_LIMIT {
            return None;
        }
        let elems = self.elements()?;
        let names: Vec<String> = elems.iter().map(|v| v.to_string()).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let matrix: Vec<Vec<bool>> = elems
            .iter()
            .map(|a| elems.iter().map(|b| self.leq_unchecked(a, b)).collect())
            .collect();
        FinitePoset::from_matrix(&refs, &matrix).ok()
    }
}

fn product_height(factors: &[&Poset]) -> Extent {
    let mut total: u64 = 1;
    for p in factors {
        match p.width_height().1 {
            Extent::Finite(h) => total += h.saturating_sub(1),
            Extent::Infinite => return Extent::Infinite,
            Extent::Unknown => return Extent::Unknown,
        }
    }
    Extent::Finite(total)
}

fn cartesian(parts: &[Vec<Value>]) -> Vec<Value> {
    let mut acc: Vec<Vec<Value>> = vec![Vec::new()];
    for part in parts {
        let mut next = Vec::with_capacity(acc.len() * part.len());
        for prefix in &acc {
            for v in part {
                let mut t = prefix.clone();
                t.push(v.clone());
                next.push(t);
            }
        }
        acc = next;
    }
    acc.into_iter().map(Value::Tuple).collect()
}

impl fmt::Display for Poset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind() {
            PosetKind::Nat => write!(f, "ℕ̄"),
            PosetKind::Real { unit: None } => write!(f, "ℝ̄₊"),
            PosetKind::Real { unit: Some(u) } => write!(f, "ℝ̄₊[{u}]"),
            PosetKind::Finite(p) => {
                write!(f, "{{")?;
                for (i, n) in p.names().iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{n}")?;
                }
                write!(f, "}}")
            }
            PosetKind::Product(fs) if fs.is_empty() => write!(f, "𝟙"),
            PosetKind::Product(fs) => {
                write!(f, "(")?;
                for (i, p) in fs.iter().enumerate() {
                    if i > 0 {
                        write!(f, " × ")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, ")")
            }
        }
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

    fn diamond() -> FinitePoset {
        FinitePoset::from_relations(
            ["bot", "a", "b", "top"],
            &[("bot", "a"), ("bot", "b"), ("a", "top"), ("b", "top")],
        )
        .unwrap()
    }

    #[test]
    fn top_dominates_reals() {
        let r = Poset::real();
        assert!(r.leq(&Value::real(3.0).unwrap(), &Value::Top).unwrap());
        assert!(!r.leq(&Value::Top, &Value::real(3.0).unwrap()).unwrap());
    }

    #[test]
    fn product_incomparable_pair() {
        let p = nat2();
        assert!(!p.leq(&pair(0, 4), &pair(3, 3)).unwrap());
        assert!(!p.leq(&pair(3, 3), &pair(0, 4)).unwrap());
    }

    #[test]
    fn leq_rejects_non_members() {
        assert!(matches!(
            Poset::nat().leq(&Value::real(1.0).unwrap(), &Value::Nat(2)),
            Err(Error::TypeMismatch(_))
        ));
    }

    #[test]
    fn one_has_single_element() {
        let one = Poset::one();
        assert!(one.contains(&Value::unit()));
        assert_eq!(one.bottom(), Some(Value::unit()));
        assert_eq!(one.top(), Some(Value::unit()));
        assert_eq!(one.width_height(), (Extent::Finite(1), Extent::Finite(1)));
    }

    #[test]
    fn finite_rejects_cycles() {
        let r = FinitePoset::from_relations(["a", "b"], &[("a", "b"), ("b", "a")]);
        assert!(matches!(r, Err(Error::InvalidPoset(_))));
    }

    #[test]
    fn finite_matrix_rejects_intransitive() {
        let m = vec![
            vec![true, true, false],
            vec![false, true, true],
            vec![false, false, true],
        ];
        assert!(FinitePoset::from_matrix(&["a", "b", "c"], &m).is_err());
    }

    #[test]
    fn widths_and_heights() {
        assert_eq!(Poset::nat().width_height(), (Extent::Finite(1), Extent::Infinite));
        assert_eq!(
            Poset::finite(diamond()).width_height(),
            (Extent::Finite(2), Extent::Finite(3))
        );
        let (w, h) = Poset::product(vec![Poset::real(), Poset::nat()]).width_height();
        assert_eq!(w, Extent::Unknown);
        assert_eq!(h, Extent::Infinite);
        let (w, _) = Poset::product(vec![Poset::one(), Poset::real()]).width_height();
        assert_eq!(w, Extent::Finite(1));
    }

    #[test]
    fn product_of_small_finites_is_exact() {
        let chain2 = FinitePoset::from_relations(["x", "y"], &[("x", "y")]).unwrap();
        let p = Poset::product(vec![Poset::finite(chain2.clone()), Poset::finite(chain2)]);
        assert_eq!(p.width_height(), (Extent::Finite(2), Extent::Finite(3)));
    }

    #[test]
    fn minimal_upper_bounds_in_diamond() {
        let p = Poset::finite(diamond());
        assert_eq!(
            p.minimal_upper_bounds(&Value::label("a"), &Value::label("b")),
            vec![Value::label("top")]
        );
        let w = FinitePoset::from_relations(
            ["a", "b", "c", "d"],
            &[("a", "c"), ("a", "d"), ("b", "c"), ("b", "d")],
        )
        .unwrap();
        let p = Poset::finite(w);
        assert_eq!(
            p.minimal_upper_bounds(&Value::label("a"), &Value::label("b")),
            vec![Value::label("c"), Value::label("d")]
        );
    }

    #[test]
    fn bottom_antichain_of_finite_without_least() {
        let p = Poset::finite(FinitePoset::from_relations(["a", "b", "c"], &[("a", "c")]).unwrap());
        assert_eq!(p.bottom(), None);
        assert_eq!(
            p.bottom_antichain().elements(),
            &[Value::label("a"), Value::label("b")]
        );
    }
}
