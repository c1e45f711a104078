use serde_json::Value;
use std::fs;
use std::path::Path;

use crate::error::IoError;
use crate::model::{validate_scenario, Scenario};

/// A `path=value` assignment applied to a scenario document before validation.
#[derive(Debug, Clone, PartialEq)]
pub struct Override {
    pub path: String,
    pub value: Value,
}

impl Override {
    pub fn new(path: impl Into<String>, value: Value) -> Self {
        Override { path: path.into(), value }
    }

    /// Parses `a.b.0=value`. The value is read as JSON, falling back to a
    /// bare string.
    pub fn parse(text: &str) -> Result<Self, IoError> {
        let (path, raw) = text.split_once('=').ok_or_else(|| IoError::BadOverride(text.to_string()))?;
        let path = path.trim();
        if path.is_empty() {
            return Err(IoError::BadOverride(text.to_string()));
        }
        let raw = raw.trim();
        let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        Ok(Override::new(path, value))
    }
}

/// Replaces the value at a dotted path. Array elements are addressed by
/// index. The path must already exist.
pub fn set_path(doc: &mut Value, path: &str, value: Value) -> Result<(), IoError> {
    let unknown = || IoError::UnknownPath(path.to_string());
    let mut slot = doc;
    for seg in path.split('.') {
        slot = match slot {
            Value::Object(map) => map.get_mut(seg).ok_or_else(unknown)?,
            Value::Array(items) => {
                let i: usize = seg.parse().map_err(|_| unknown())?;
                items.get_mut(i).ok_or_else(unknown)?
            }
            _ => return Err(unknown()),
        };
    }
    *slot = value;
    Ok(())
}

fn parse_document(text: &str, origin: &str) -> Result<Value, IoError> {
    serde_json::from_str(text).map_err(|e| IoError::Parse {
        origin: origin.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// Deserializes without validating; schema errors carry the field path.
pub fn scenario_from_value(doc: Value, origin: &str) -> Result<Scenario, IoError> {
    serde_path_to_error::deserialize(doc).map_err(|e| IoError::Schema {
        origin: origin.to_string(),
        field: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

/// The scenario as a document with every default spelled out, so that any
/// schema path resolves.
pub fn normalized_document(s: &Scenario) -> Value {
    serde_json::to_value(s).expect("scenario serializes")
}

pub fn apply_overrides(s: Scenario, overrides: &[Override], origin: &str) -> Result<Scenario, IoError> {
    if overrides.is_empty() {
        return Ok(s);
    }
    let mut doc = normalized_document(&s);
    for o in overrides {
        set_path(&mut doc, &o.path, o.value.clone())?;
    }
    scenario_from_value(doc, origin)
}

pub fn check(s: Scenario, origin: &str) -> Result<Scenario, IoError> {
    let violations = validate_scenario(&s);
    if violations.is_empty() {
        Ok(s)
    } else {
        Err(IoError::Invalid { origin: origin.to_string(), violations })
    }
}

/// Parses, applies overrides and validates a scenario document.
pub fn parse_scenario(text: &str, origin: &str, overrides: &[Override]) -> Result<Scenario, IoError> {
    let raw = scenario_from_value(parse_document(text, origin)?, origin)?;
    check(apply_overrides(raw, overrides, origin)?, origin)
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, IoError> {
    load_scenario_with(path, &[])
}

pub fn load_scenario_with(path: impl AsRef<Path>, overrides: &[Override]) -> Result<Scenario, IoError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| IoError::Read { path: path.to_path_buf(), source })?;
    parse_scenario(&text, &path.display().to_string(), overrides)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FunctionDescriptor, Violation};
    use serde_json::json;

    const UNIFORM: &str = r#"{"endowment": {"family": "constant", "params": [1]},
        "power_cost": {"family": "quadratic", "params": [1]}}"#;

    #[test]
    fn defaults_are_filled() {
        let s = parse_scenario(UNIFORM, "t", &[]).unwrap();
        assert_eq!(s.grid_n, 1001);
        assert_eq!(s.tolerances.dy, 0.01);
        assert_eq!(s.tolerances.root_tol, 1e-9);
        assert_eq!(s.tolerances.kappa, None);
        assert_eq!(s.power_cost, Some(FunctionDescriptor::quadratic(1.0)));
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = parse_scenario("{\n  \"endowment\": ,\n}", "bad.json", &[]).unwrap_err();
        match err {
            IoError::Parse { line, column, .. } => assert_eq!((line, column), (2, 16)),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn schema_errors_carry_field_path() {
        let text = r#"{"endowment": {"family": "constant", "params": [1]}, "tolerances": {"dy": "small"}}"#;
        match parse_scenario(text, "t", &[]).unwrap_err() {
            IoError::Schema { field, .. } => assert_eq!(field, "tolerances.dy"),
            other => panic!("{other}"),
        }
        let typo = r#"{"endowment": {"family": "constant", "params": [1]}, "powr_cost": null}"#;
        assert!(matches!(parse_scenario(typo, "t", &[]), Err(IoError::Schema { .. })));
    }

    #[test]
    fn positive_cost_at_zero_rejected_for_path_analysis() {
        let text = r#"{"endowment": {"family": "constant", "params": [1]},
            "power_cost": {"family": "quadratic", "params": [1, 0, 0.5]}, "path_analysis": true}"#;
        match parse_scenario(text, "t", &[]).unwrap_err() {
            IoError::Invalid { violations, .. } => {
                assert!(violations.iter().any(|v| matches!(v, Violation::CostAtZero { .. })));
                assert!(violations.iter().any(|v| v.to_string().contains("c(0)≠0")));
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn overrides_reach_nested_and_defaulted_fields() {
        let o = [Override::parse("power_cost.params.0=0.25").unwrap(), Override::parse("tolerances.kappa=1").unwrap()];
        let s = parse_scenario(UNIFORM, "t", &o).unwrap();
        assert_eq!(s.power_cost, Some(FunctionDescriptor::quadratic(0.25)));
        assert_eq!(s.tolerances.kappa, Some(1.0));
        let err = parse_scenario(UNIFORM, "t", &[Override::parse("ai.strength=2").unwrap()]).unwrap_err();
        assert!(matches!(err, IoError::UnknownPath(p) if p == "ai.strength"));
    }

    #[test]
    fn override_values_fall_back_to_strings() {
        assert_eq!(Override::parse("name=plain words").unwrap().value, json!("plain words"));
        assert_eq!(Override::parse("grid_n=11").unwrap().value, json!(11));
        assert!(Override::parse("no-equals").is_err());
    }

    #[test]
    fn round_trip() {
        let s = parse_scenario(UNIFORM, "t", &[]).unwrap();
        let text = serde_json::to_string_pretty(&s).unwrap();
        assert_eq!(parse_scenario(&text, "t", &[]).unwrap(), s);
    }
}
