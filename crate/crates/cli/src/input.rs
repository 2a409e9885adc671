//! Reading channel and state descriptions from files or inline JSON.

use std::fs;
use std::path::Path;

use qcontract::json::matrix_from_json;
use qcontract::{ChannelSpec, DensityMatrix, QuantumChannel};
use serde_json::Value;

use crate::error::CliError;

/// Accepts a path or, when the argument starts with `{` or `[`, the JSON text itself.
pub fn load_json(arg: &str) -> Result<Value, CliError> {
    let trimmed = arg.trim_start();
    let text = if trimmed.starts_with('{') || trimmed.starts_with('[') {
        arg.to_string()
    } else {
        fs::read_to_string(Path::new(arg)).map_err(|e| CliError::Input(format!("{arg}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{arg}: {e}")))
}

pub fn parse_channel(value: &Value) -> Result<(ChannelSpec, QuantumChannel), CliError> {
    let spec: ChannelSpec =
        serde_json::from_value(value.clone()).map_err(|e| CliError::Input(format!("channel spec: {e}")))?;
    let channel = spec.build()?;
    Ok((spec, channel))
}

/// States are a bare row-major matrix, `{"matrix": [...]}` or `{"diag": [...]}`.
pub fn parse_state(value: &Value) -> Result<DensityMatrix, CliError> {
    let entries = match value {
        Value::Array(_) => matrix_from_json(value)?,
        Value::Object(map) => match (map.get("matrix"), map.get("diag")) {
            (Some(m), None) => matrix_from_json(m)?,
            (None, Some(d)) => {
                let diag: Vec<f64> =
                    serde_json::from_value(d.clone()).map_err(|e| CliError::Input(format!("diag: {e}")))?;
                return Ok(DensityMatrix::from_real_diagonal(&diag)?);
            }
            _ => return Err(CliError::Input("state object needs exactly one of \"matrix\" or \"diag\"".into())),
        },
        _ => return Err(CliError::Input("state must be a matrix or an object".into())),
    };
    Ok(DensityMatrix::new(entries)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn state_formats_agree() {
        let a = parse_state(&json!([[0.6, 0], [0, 0.4]])).unwrap();
        let b = parse_state(&json!({"matrix": [[[0.6, 0], [0, 0]], [[0, 0], [0.4, 0]]]})).unwrap();
        let c = parse_state(&json!({"diag": [0.6, 0.4]})).unwrap();
        assert_eq!(a.matrix(), b.matrix());
        assert_eq!(a.matrix(), c.matrix());
    }

    #[test]
    fn malformed_states_are_input_errors() {
        assert!(matches!(parse_state(&json!({"diag": [0.5, 0.5], "matrix": []})), Err(CliError::Input(_))));
        assert!(matches!(parse_state(&json!(3)), Err(CliError::Input(_))));
        assert!(matches!(parse_state(&json!([[1, 0], [0, -1]])), Err(CliError::Core(_))));
    }

    #[test]
    fn inline_channel() {
        let (_, ch) = parse_channel(&load_json(r#"{"kind": "depolarizing", "p": 0.5}"#).unwrap()).unwrap();
        assert_eq!(ch.dim(), 2);
    }
}
