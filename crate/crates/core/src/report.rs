//! Canonical JSON report documents.
//!
//! Object keys are sorted, floats are written as `{:.16e}` (17 significant
//! digits) and integers verbatim, so parsing and re-serializing a report
//! reproduces it byte for byte.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::ToolConfig;
use crate::error::Result;

pub const SCHEMA: &str = "blaschke-lab/1";

/// Wraps a serializable body with the schema tag, command name and config echo.
/// Object bodies are flattened into the top level.
pub fn document<T: Serialize>(command: &str, cfg: &ToolConfig, body: &T) -> Result<Value> {
    let body = serde_json::to_value(body)?;
    let mut doc = match body {
        Value::Object(map) => map,
        other => {
            let mut map = Map::new();
            map.insert("result".into(), other);
            map
        }
    };
    doc.insert("schema".into(), Value::String(SCHEMA.into()));
    doc.insert("command".into(), Value::String(command.into()));
    doc.insert("config".into(), serde_json::to_value(cfg)?);
    Ok(Value::Object(doc))
}

pub fn to_canonical_string(value: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, value);
    out.push('\n');
    out
}

pub fn parse(text: &str) -> Result<Value> {
    Ok(serde_json::from_str(text)?)
}

fn write_value(out: &mut String, value: &Value) {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(u) = n.as_u64() {
                let _ = write!(out, "{u}");
            } else if let Some(i) = n.as_i64() {
                let _ = write!(out, "{i}");
            } else {
                let _ = write!(out, "{:.16e}", n.as_f64().unwrap_or(f64::NAN));
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            out.push('[');
            for (k, item) in items.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                write_value(out, item);
            }
            out.push(']');
        }
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (k, key) in keys.into_iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String(key.clone()).to_string());
                out.push(':');
                write_value(out, &map[key]);
            }
            out.push('}');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn round_trip_is_byte_identical() {
        let v = json!({"b": [1.0, -2.5e-17, 0.1], "a": {"z": 3, "y": -4, "x": "q\"s"}, "c": null});
        let text = to_canonical_string(&v);
        assert_eq!(to_canonical_string(&parse(&text).unwrap()), text);
        assert!(text.starts_with("{\"a\":{\"x\""));
        assert!(text.contains("1.0000000000000000e0"));
    }

    #[test]
    fn document_carries_schema_and_config() {
        let doc = document("dim", &ToolConfig::default(), &json!({"dim": 2})).unwrap();
        assert_eq!(doc["schema"], SCHEMA);
        assert_eq!(doc["dim"], 2);
        assert!(doc["config"]["rank_tol"].is_number());
    }
}
