//! JSON output with every float written to 17 significant digits.

use serde::Serialize;
use serde_json::{Number, Value};

use crate::error::{Error, Result};

/// `{:.16e}`, or `null` for non-finite values.
pub fn format_float(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    serde_json::from_str::<Number>(&format!("{x:.16e}"))
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

fn reformat(v: Value) -> Value {
    match v {
        Value::Number(n) if n.as_u64().is_none() && n.as_i64().is_none() => match n.to_string().parse::<f64>() {
            Ok(x) => format_float(x),
            Err(_) => Value::Number(n),
        },
        Value::Array(items) => Value::Array(items.into_iter().map(reformat).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, reformat(v))).collect()),
        other => other,
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).map_err(json_err)?;
    let mut s = serde_json::to_string_pretty(&reformat(v)).map_err(json_err)?;
    s.push('\n');
    Ok(s)
}

pub(crate) fn json_err(e: serde_json::Error) -> Error {
    Error::InvalidArgument(format!("json: {e}"))
}
