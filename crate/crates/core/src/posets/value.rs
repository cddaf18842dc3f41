use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::error::{Error, Result};

/// A finite, nonnegative float. `-0.0` is stored as `0.0`.
#[derive(Clone, Copy, Debug)]
pub struct Real(f64);

impl Real {
    pub const ZERO: Real = Real(0.0);

    /// Rejects NaN, negatives and infinities; use [`Value::real`] to map `+inf` to TOP.
    pub fn new(x: f64) -> Result<Real> {
        if x.is_nan() {
            return Err(Error::InvalidValue("NaN is not a poset element".into()));
        }
        if x.is_infinite() {
            return Err(Error::InvalidValue("infinite real; use TOP".into()));
        }
        if x < 0.0 {
            return Err(Error::InvalidValue(format!("negative real {x}")));
        }
        Ok(Real(if x == 0.0 { 0.0 } else { x }))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl PartialEq for Real {
    fn eq(&self, other: &Self) -> bool {
        self.0.to_bits() == other.0.to_bits()
    }
}

impl Eq for Real {}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Real {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl Hash for Real {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.to_bits().hash(state);
    }
}

/// A point of some poset. The derived order is the canonical sort order:
/// variant tag first (TOP last), then numeric value, then lexicographic.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Nat(u64),
    Real(Real),
    Label(Arc<str>),
    Tuple(Vec<Value>),
    Top,
}

impl Value {
    /// The unique element of One.
    pub fn unit() -> Value {
        Value::Tuple(Vec::new())
    }

    /// `+inf` becomes TOP; NaN and negatives are rejected.
    pub fn real(x: f64) -> Result<Value> {
        if x == f64::INFINITY {
            Ok(Value::Top)
        } else {
            Real::new(x).map(Value::Real)
        }
    }

    pub fn label(s: &str) -> Value {
        Value::Label(Arc::from(s))
    }

    pub fn tuple(vs: impl IntoIterator<Item = Value>) -> Value {
        Value::Tuple(vs.into_iter().collect())
    }

    pub fn pair(a: Value, b: Value) -> Value {
        Value::Tuple(vec![a, b])
    }

    pub fn is_top(&self) -> bool {
        matches!(self, Value::Top)
    }

    pub fn as_tuple(&self) -> Option<&[Value]> {
        match self {
            Value::Tuple(vs) => Some(vs),
            _ => None,
        }
    }

    /// Numeric payload of a chain element; TOP maps to `+inf`.
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Nat(n) => Some(*n as f64),
            Value::Real(r) => Some(r.get()),
            Value::Top => Some(f64::INFINITY),
            _ => None,
        }
    }

    /// Follows a path of tuple indices.
    pub fn at(&self, path: &[usize]) -> Option<&Value> {
        let mut v = self;
        for &i in path {
            v = v.as_tuple()?.get(i)?;
        }
        Some(v)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Nat(n) => write!(f, "{n}"),
            Value::Real(r) => write!(f, "{}", r.get()),
            Value::Label(s) => write!(f, "{s}"),
            Value::Top => write!(f, "⊤"),
            Value::Tuple(vs) => {
                write!(f, "⟨")?;
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, "⟩")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_rejects_nan_and_negatives() {
        assert!(Real::new(f64::NAN).is_err());
        assert!(Real::new(-1.0).is_err());
        assert!(Value::real(-0.5).is_err());
        assert_eq!(Value::real(f64::INFINITY).unwrap(), Value::Top);
    }

    #[test]
    fn negative_zero_normalizes() {
        assert_eq!(Value::real(-0.0).unwrap(), Value::real(0.0).unwrap());
    }

    #[test]
    fn top_sorts_last() {
        let mut vs = vec![Value::Top, Value::Nat(3), Value::Nat(1)];
        vs.sort();
        assert_eq!(vs, vec![Value::Nat(1), Value::Nat(3), Value::Top]);
    }

    #[test]
    fn renders_canonically() {
        let v = Value::tuple([Value::Nat(0), Value::Top, Value::real(2.5).unwrap()]);
        assert_eq!(v.to_string(), "⟨0, ⊤, 2.5⟩");
        assert_eq!(Value::unit().to_string(), "⟨⟩");
    }
}
