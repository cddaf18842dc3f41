//! The closed unit table. Values are stored in canonical units (J, kg, USD, W, s, N, m and
//! products thereof); a unit is an exact rational factor to canonical plus a dimension vector.

use std::fmt;

use super::ast::{Span, UnitAst};
use super::{ErrorKind, LangError};
use crate::posets::Poset;

/// Exponents of kg, m, s, USD.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Dim(pub [i32; 4]);

impl Dim {
    pub const NONE: Dim = Dim([0; 4]);

    pub fn is_none(self) -> bool {
        self == Dim::NONE
    }

    /// `self^p`, if every exponent stays integral.
    pub fn pow(self, p: f64) -> Option<Dim> {
        let mut out = [0; 4];
        for (o, &e) in out.iter_mut().zip(&self.0) {
            let x = e as f64 * p;
            if x.fract() != 0.0 || x.abs() > 64.0 {
                return None;
            }
            *o = x as i32;
        }
        Some(Dim(out))
    }

    /// Canonical unit name used as the ℝ̄₊ tag; `None` when dimensionless.
    pub fn tag(self) -> Option<String> {
        if self.is_none() {
            return None;
        }
        for (name, d) in NAMED {
            if *d == self {
                return Some((*name).to_string());
            }
        }
        const BASE: [&str; 4] = ["kg", "m", "s", "USD"];
        let part = |sign: i32| -> Vec<String> {
            (0..4)
                .filter(|&i| self.0[i] * sign > 0)
                .map(|i| match self.0[i].abs() {
                    1 => BASE[i].to_string(),
                    e => format!("{}^{e}", BASE[i]),
                })
                .collect()
        };
        let (num, den) = (part(1), part(-1));
        let num = if num.is_empty() { "1".to_string() } else { num.join("*") };
        Some(if den.is_empty() { num } else { format!("{num}/{}", den.join("/")) })
    }

    pub fn poset(self) -> Poset {
        match self.tag() {
            None => Poset::real(),
            Some(t) => Poset::real_with_unit(&t),
        }
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tag().unwrap_or_else(|| "dimensionless".into()))
    }
}

const J: Dim = Dim([1, 2, -2, 0]);
const W: Dim = Dim([1, 2, -3, 0]);
const N: Dim = Dim([1, 1, -2, 0]);
const KG: Dim = Dim([1, 0, 0, 0]);
const M: Dim = Dim([0, 1, 0, 0]);
const S: Dim = Dim([0, 0, 1, 0]);
const USD: Dim = Dim([0, 0, 0, 1]);

/// Names used for tags, in lookup order.
const NAMED: &[(&str, Dim)] = &[
    ("J", J),
    ("W", W),
    ("N", N),
    ("kg", KG),
    ("m", M),
    ("s", S),
    ("USD", USD),
    ("m/s", Dim([0, 1, -1, 0])),
];

/// Unit atoms: name, factor numerator, factor denominator, dimension.
impl std::ops::Mul for Dim {
    type Output = Dim;

    fn mul(self, o: Dim) -> Dim {
        Dim(std::array::from_fn(|i| self.0[i] + o.0[i]))
    }
}

impl std::ops::Div for Dim {
    type Output = Dim;

    fn div(self, o: Dim) -> Dim {
        Dim(std::array::from_fn(|i| self.0[i] - o.0[i]))
    }
}

const ATOMS: &[(&str, u64, u64, Dim)] = &[
    ("J", 1, 1, J),
    ("Wh", 3600, 1, J),
    ("kg", 1, 1, KG),
    ("g", 1, 1000, KG),
    ("USD", 1, 1, USD),
    ("$", 1, 1, USD),
    ("W", 1, 1, W),
    ("s", 1, 1, S),
    ("N", 1, 1, N),
    ("m", 1, 1, M),
    ("count", 1, 1, Dim::NONE),
];

pub fn is_atom(name: &str) -> bool {
    ATOMS.iter().any(|(a, ..)| *a == name)
}

/// A unit resolved against the table.
#[derive(Clone, Debug, PartialEq)]
pub enum Unit {
    Nat,
    Real { dim: Dim, num: u128, den: u128, text: String },
}

impl Unit {
    pub fn dimensionless() -> Unit {
        Unit::Real { dim: Dim::NONE, num: 1, den: 1, text: String::new() }
    }

    pub fn resolve(u: &UnitAst) -> Result<Unit, LangError> {
        let (atoms, span) = match u {
            UnitAst::Nat => return Ok(Unit::Nat),
            UnitAst::Atoms(a, s) => (a, *s),
        };
        let (mut num, mut den, mut dim) = (1u128, 1u128, Dim::NONE);
        let overflow = |span: Span| LangError::new(ErrorKind::UnknownUnit, span, format!("unit [{u}] is too large"));
        for (name, e) in atoms {
            let Some(&(_, n, d, ad)) = ATOMS.iter().find(|(a, ..)| a == name) else {
                return Err(LangError::new(ErrorKind::UnknownUnit, span, format!("unknown unit `{name}`")));
            };
            let k = e.unsigned_abs();
            let (pn, pd) = (
                (n as u128).checked_pow(k).ok_or_else(|| overflow(span))?,
                (d as u128).checked_pow(k).ok_or_else(|| overflow(span))?,
            );
            let (an, ad2) = if *e >= 0 { (pn, pd) } else { (pd, pn) };
            num = num.checked_mul(an).ok_or_else(|| overflow(span))?;
            den = den.checked_mul(ad2).ok_or_else(|| overflow(span))?;
            dim = dim * ad.pow(*e as f64).expect("integral");
        }
        let g = gcd(num, den);
        Ok(Unit::Real { dim, num: num / g, den: den / g, text: u.to_string() })
    }

    /// Converts a magnitude in this unit to canonical units, applying the factor once.
    pub fn to_canonical(&self, x: f64) -> f64 {
        match self {
            Unit::Nat => x,
            Unit::Real { num, den, .. } => {
                if *den == 1 {
                    x * *num as f64
                } else if *num == 1 {
                    x / *den as f64
                } else {
                    x * *num as f64 / *den as f64
                }
            }
        }
    }

    /// Converts a canonical magnitude back to this unit.
    pub fn from_canonical(&self, x: f64) -> f64 {
        match self {
            Unit::Nat => x,
            Unit::Real { num, den, .. } => {
                if *num == 1 {
                    x * *den as f64
                } else if *den == 1 {
                    x / *num as f64
                } else {
                    x * *den as f64 / *num as f64
                }
            }
        }
    }

    pub fn poset(&self) -> Poset {
        match self {
            Unit::Nat => Poset::nat(),
            Unit::Real { dim, .. } => dim.poset(),
        }
    }

    pub fn dim(&self) -> Option<Dim> {
        match self {
            Unit::Nat => None,
            Unit::Real { dim, .. } => Some(*dim),
        }
    }

    /// The unit as written, empty when dimensionless.
    pub fn text(&self) -> &str {
        match self {
            Unit::Nat => "",
            Unit::Real { text, .. } => text,
        }
    }
}

fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a.max(1)
    } else {
        gcd(b, a % b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(atoms: &[(&str, i32)]) -> Unit {
        let ast = UnitAst::Atoms(atoms.iter().map(|(a, e)| (a.to_string(), *e)).collect(), Span::default());
        Unit::resolve(&ast).unwrap()
    }

    #[test]
    fn watt_hour_per_kilogram() {
        let u = unit(&[("Wh", 1), ("kg", -1)]);
        assert_eq!(u.dim(), Some(Dim([0, 2, -2, 0])));
        assert_eq!(u.to_canonical(250.0), 900_000.0);
        assert_eq!(u.text(), "Wh/kg");
    }

    #[test]
    fn grams_are_exact_thousandths() {
        let u = unit(&[("g", 1)]);
        assert_eq!(u.to_canonical(100.0), 0.1);
        assert_eq!(u.from_canonical(0.1), 100.0);
        assert_eq!(u.poset(), Poset::real_with_unit("kg"));
    }

    #[test]
    fn named_and_composite_tags() {
        assert_eq!(unit(&[("W", 1)]).poset(), Poset::real_with_unit("W"));
        assert_eq!(unit(&[("J", 1), ("s", -1)]).poset(), Poset::real_with_unit("W"));
        assert_eq!(unit(&[("W", 1), ("N", -2)]).dim().unwrap().tag().unwrap(), "s/kg");
        assert_eq!(unit(&[("count", 1)]).poset(), Poset::real());
    }

    #[test]
    fn unknown_atom() {
        let ast = UnitAst::Atoms(vec![("furlong".into(), 1)], Span::default());
        assert_eq!(Unit::resolve(&ast).unwrap_err().kind, ErrorKind::UnknownUnit);
    }
}
