//! Command-line quantities: `name=value[unit]` bindings and unit-aware rendering.

use mcdp_core::lang::units::Unit;
use mcdp_core::lang::{parse_unit, PortInfo};
use mcdp_core::Value;

use crate::CliError;

/// A number as typed, with its optional unit text.
#[derive(Clone, Debug, PartialEq)]
pub struct Quantity {
    /// `None` stands for ⊤.
    pub value: Option<f64>,
    pub unit: Option<String>,
}

impl Quantity {
    /// Parses `12.5`, `100[Wh]`, `100 Wh` or `top`.
    pub fn parse(text: &str) -> Result<Quantity, CliError> {
        let text = text.trim();
        let (num, unit) = match text.find('[') {
            Some(i) => {
                let rest = text[i + 1..]
                    .strip_suffix(']')
                    .ok_or_else(|| CliError::Usage(format!("unterminated unit in `{text}`")))?;
                (text[..i].trim(), Some(rest.trim().to_string()))
            }
            None => match text.split_once(char::is_whitespace) {
                Some((n, u)) => (n, Some(u.trim().to_string())),
                None => split_glued(text),
            },
        };
        let value = match num {
            "top" | "⊤" | "inf" => None,
            _ => {
                let v: f64 = num.parse().map_err(|_| CliError::Usage(format!("`{num}` is not a number")))?;
                if v.is_nan() || v < 0.0 || !v.is_finite() {
                    return Err(CliError::Usage(format!("`{num}` must be a nonnegative finite number or `top`")));
                }
                Some(v)
            }
        };
        Ok(Quantity { value, unit: unit.filter(|u| !u.is_empty()) })
    }

    /// The canonical value for a port, converting from the given unit or the port's own.
    pub fn to_value(&self, port: &PortInfo) -> Result<Value, CliError> {
        let Some(x) = self.value else { return Ok(Value::Top) };
        let unit = match &self.unit {
            None => port.unit.clone(),
            Some(text) => {
                let ast = parse_unit(text).map_err(|e| CliError::Usage(format!("unit of {}: {}", port.name, e.message)))?;
                Unit::resolve(&ast).map_err(|e| CliError::Usage(format!("unit of {}: {}", port.name, e.message)))?
            }
        };
        match (&port.unit, &unit) {
            (Unit::Nat, Unit::Nat) => {
                if x.fract() != 0.0 || x >= u64::MAX as f64 {
                    return Err(CliError::Usage(format!("{} is a natural number, got {x}", port.name)));
                }
                Ok(Value::Nat(x as u64))
            }
            (Unit::Real { dim: a, .. }, Unit::Real { dim: b, .. }) if a == b => {
                Value::real(unit.to_canonical(x)).map_err(CliError::Core)
            }
            _ => Err(CliError::Usage(format!(
                "{} has unit [{}], which cannot be given in [{}]",
                port.name,
                describe(&port.unit),
                describe(&unit)
            ))),
        }
    }
}

fn describe(u: &Unit) -> String {
    match u {
        Unit::Nat => "Nat".into(),
        u => u.text().to_string(),
    }
}

/// Splits `name=quantity`.
/// `100Wh` as `100` and `Wh`: the longest numeric prefix followed by a unit.
fn split_glued(text: &str) -> (&str, Option<String>) {
    let cut = (1..text.len())
        .rev()
        .filter(|&i| text.is_char_boundary(i))
        .find(|&i| text[..i].parse::<f64>().is_ok() && text[i..].starts_with(|c: char| c.is_alphabetic() || c == '$'));
    match cut {
        Some(i) if text.parse::<f64>().is_err() && !matches!(text, "top") => (&text[..i], Some(text[i..].to_string())),
        _ => (text, None),
    }
}

pub fn parse_binding(text: &str) -> Result<(String, Quantity), CliError> {
    let (name, q) = text
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("expected name=value, got `{text}`")))?;
    Ok((name.trim().to_string(), Quantity::parse(q)?))
}

/// A canonical value shown in the port's declared unit.
pub fn render(v: &Value, port: &PortInfo) -> String {
    match v {
        Value::Top => "⊤".into(),
        Value::Nat(n) => n.to_string(),
        Value::Real(r) => {
            let x = port.unit.from_canonical(r.get());
            match port.unit.text() {
                "" => format_number(x),
                u => format!("{} {u}", format_number(x)),
            }
        }
        other => format!("{other:?}"),
    }
}

/// The value alone, in the port's unit, for machine-readable output.
pub fn magnitude(v: &Value, port: &PortInfo) -> Option<f64> {
    match v {
        Value::Top => None,
        Value::Nat(n) => Some(*n as f64),
        Value::Real(r) => Some(port.unit.from_canonical(r.get())),
        _ => None,
    }
}

/// Shortest round-trip decimal.
pub fn format_number(x: f64) -> String {
    format!("{x}")
}

/// Components of a bundled value, one per port.
pub fn components(v: &Value, ports: usize) -> Vec<Value> {
    if ports == 1 {
        vec![v.clone()]
    } else {
        v.as_tuple().map(<[Value]>::to_vec).unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use mcdp_core::lang::units::Dim;

    fn port(unit: &str) -> PortInfo {
        let unit = if unit == "Nat" {
            Unit::Nat
        } else {
            Unit::resolve(&parse_unit(unit).unwrap()).unwrap()
        };
        PortInfo { name: "p".into(), poset: unit.poset(), unit }
    }

    #[test]
    fn bindings_convert_to_canonical() {
        let (name, q) = parse_binding("capacity=100[Wh]").unwrap();
        assert_eq!(name, "capacity");
        assert_eq!(q.to_value(&port("J")).unwrap(), Value::real(360000.0).unwrap());
        let (_, q) = parse_binding("m = 250 g").unwrap();
        assert_eq!(q.to_value(&port("kg")).unwrap(), Value::real(0.25).unwrap());
        let (_, q) = parse_binding("m=250").unwrap();
        assert_eq!(q.to_value(&port("g")).unwrap(), Value::real(0.25).unwrap());
        let (_, q) = parse_binding("e=1e2Wh").unwrap();
        assert_eq!(q.to_value(&port("J")).unwrap(), Value::real(360000.0).unwrap());
        assert_eq!(parse_binding("c=1e6").unwrap().1.unit, None);
        let (_, q) = parse_binding("m=.5kg").unwrap();
        assert_eq!(q.unit.as_deref(), Some("kg"));
        let (_, q) = parse_binding("c=top").unwrap();
        assert_eq!(q.to_value(&port("Nat")).unwrap(), Value::Top);
    }

    #[test]
    fn bad_bindings() {
        assert!(parse_binding("c").is_err());
        assert!(parse_binding("c=-1").is_err());
        assert!(parse_binding("c=1.5").unwrap().1.to_value(&port("Nat")).is_err());
        assert!(parse_binding("c=1[kg]").unwrap().1.to_value(&port("J")).is_err());
        assert!(parse_binding("c=1[kg").is_err());
    }

    #[test]
    fn rendering_uses_declared_unit() {
        let p = port("g");
        assert_eq!(render(&Value::real(0.25).unwrap(), &p), "250 g");
        assert_eq!(render(&Value::Top, &p), "⊤");
        let count = PortInfo { name: "n".into(), poset: Dim::NONE.poset(), unit: Unit::dimensionless() };
        assert_eq!(render(&Value::real(3.0).unwrap(), &count), "3");
    }
}
