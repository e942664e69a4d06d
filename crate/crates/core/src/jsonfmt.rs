//! Pretty JSON that keeps arrays of scalars on one line, so coupler lists
//! read as one entry per line.

use serde::Serialize;
use serde_json::Value;

use crate::error::Result;

pub(crate) fn to_string_rows<T: Serialize>(value: &T) -> Result<String> {
    let mut out = String::new();
    write(&serde_json::to_value(value)?, 0, &mut out);
    out.push('\n');
    Ok(out)
}

/// Scalar arrays stay inline, and so do records that mix scalars with
/// scalar arrays, like `[3, [17, 18]]`. Lists of lists become rows.
fn flat(v: &Value) -> bool {
    let scalar = |x: &Value| !x.is_array() && !x.is_object();
    match v {
        Value::Array(a) => {
            a.is_empty()
                || (a.iter().any(scalar)
                    && a.iter().all(|x| scalar(x) || x.as_array().is_some_and(|y| y.iter().all(scalar))))
        }
        Value::Object(_) => false,
        _ => true,
    }
}

fn write(v: &Value, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth + 1);
    match v {
        Value::Object(map) if !map.is_empty() => {
            out.push_str("{\n");
            for (i, (k, x)) in map.iter().enumerate() {
                out.push_str(&pad);
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write(x, depth + 1, out);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&"  ".repeat(depth));
            out.push('}');
        }
        Value::Array(items) if !flat(v) => {
            out.push_str("[\n");
            for (i, x) in items.iter().enumerate() {
                out.push_str(&pad);
                write(x, depth + 1, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&"  ".repeat(depth));
            out.push(']');
        }
        Value::Array(items) => {
            let parts: Vec<String> = items.iter().map(inline).collect();
            out.push('[');
            out.push_str(&parts.join(", "));
            out.push(']');
        }
        other => out.push_str(&other.to_string()),
    }
}

fn inline(v: &Value) -> String {
    match v {
        Value::Array(items) => {
            let parts: Vec<String> = items.iter().map(inline).collect();
            format!("[{}]", parts.join(", "))
        }
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_rows_stay_inline() {
        let v = serde_json::json!({"a": [[0, 1, -1.5], [1, 2, 0.0]], "b": "x", "c": []});
        let s = to_string_rows(&v).unwrap();
        assert!(s.contains("    [0, 1, -1.5],\n"));
        assert_eq!(serde_json::from_str::<Value>(&s).unwrap(), v);
        let v = serde_json::json!({"chains": [[0, [4, 5]], [1, [6]]]});
        let s = to_string_rows(&v).unwrap();
        assert!(s.contains("    [0, [4, 5]],\n"));
    }
}
