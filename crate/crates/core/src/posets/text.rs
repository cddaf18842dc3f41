//! Parsing of the canonical text rendering back into values.

use super::poset::{Poset, PosetKind};
use super::value::Value;
use crate::error::{Error, Result};

/// Parses `text` as an element of `poset`. Accepts `⟨a, b⟩`, `<a, b>` or `(a, b)` for tuples
/// and `⊤` or `top` for TOP.
pub fn parse_value(poset: &Poset, text: &str) -> Result<Value> {
    let mut p = Parser { chars: text.trim().chars().collect(), pos: 0 };
    let v = p.value(poset)?;
    p.skip_ws();
    if p.pos != p.chars.len() {
        return Err(p.error("trailing input"));
    }
    Ok(v)
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn error(&self, msg: &str) -> Error {
        let rest: String = self.chars[self.pos.min(self.chars.len())..].iter().collect();
        Error::Parse(format!("{msg} at column {}: `{rest}`", self.pos + 1))
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn word(&mut self) -> String {
        self.skip_ws();
        let start = self.pos;
        while self.chars.get(self.pos).is_some_and(|c| {
            c.is_alphanumeric() || matches!(c, '_' | '.' | '-' | '+' | '⊤' | '⊥')
        }) {
            self.pos += 1;
        }
        self.chars[start..self.pos].iter().collect()
    }

    fn value(&mut self, poset: &Poset) -> Result<Value> {
        match poset.kind() {
            PosetKind::Product(factors) => {
                let close = match self.peek() {
                    Some('⟨') => '⟩',
                    Some('<') => '>',
                    Some('(') => ')',
                    _ => return Err(self.error("expected a tuple")),
                };
                self.pos += 1;
                let mut vs = Vec::with_capacity(factors.len());
                for (i, f) in factors.iter().enumerate() {
                    if i > 0 {
                        if self.peek() != Some(',') {
                            return Err(self.error("expected `,`"));
                        }
                        self.pos += 1;
                    }
                    vs.push(self.value(f)?);
                }
                if self.peek() != Some(close) {
                    return Err(self.error(&format!("expected `{close}`")));
                }
                self.pos += 1;
                Ok(Value::Tuple(vs))
            }
            PosetKind::Nat => {
                let w = self.word();
                if is_top(&w) {
                    return Ok(Value::Top);
                }
                w.parse::<u64>().map(Value::Nat).map_err(|_| self.error("expected a natural"))
            }
            PosetKind::Real { .. } => {
                let w = self.word();
                if is_top(&w) {
                    return Ok(Value::Top);
                }
                let x = w.parse::<f64>().map_err(|_| self.error("expected a real"))?;
                Value::real(x)
            }
            PosetKind::Finite(_) => {
                let w = self.word();
                let v = Value::label(&w);
                poset.check(&v)?;
                Ok(v)
            }
        }
    }
}

fn is_top(w: &str) -> bool {
    matches!(w, "⊤" | "top" | "TOP")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::posets::FinitePoset;

    #[test]
    fn round_trips_rendering() {
        let fin = Poset::finite(FinitePoset::from_relations(["lo", "hi"], &[("lo", "hi")]).unwrap());
        let p = Poset::product(vec![Poset::nat(), Poset::real(), fin]);
        let v = Value::tuple([Value::Top, Value::real(2.5).unwrap(), Value::label("hi")]);
        assert_eq!(parse_value(&p, &v.to_string()).unwrap(), v);
        assert_eq!(parse_value(&p, "<3, top, lo>").unwrap().to_string(), "⟨3, ⊤, lo⟩");
    }

    #[test]
    fn one_parses_as_empty_tuple() {
        assert_eq!(parse_value(&Poset::one(), "⟨⟩").unwrap(), Value::unit());
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_value(&Poset::nat(), "x").is_err());
        assert!(parse_value(&Poset::real(), "-1").is_err());
        assert!(parse_value(&Poset::nat(), "1 2").is_err());
    }
}
