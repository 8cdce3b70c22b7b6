//! Deterministic text serialization.
//!
//! Every floating-point number is written with 17 significant digits
//! (scientific notation), which round-trips any `f64` exactly; JSON
//! objects are emitted with sorted keys.  Identical data therefore always
//! produces identical bytes, which the determinism and resume guarantees
//! rely on.

use serde_json::Value;

/// Format a float with 17 significant digits, exact under round-trip.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        // Not representable in JSON; outputs never contain these, but a
        // poisoned value must not produce an unparsable file.
        "null".into()
    }
}

fn escape_json(s: &str) -> String {
    // serde_json's string escaping is deterministic
    serde_json::to_string(s).expect("strings always serialize")
}

fn write_value(out: &mut String, value: &Value, indent: usize) {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                out.push_str(&i.to_string());
            } else if let Some(u) = n.as_u64() {
                out.push_str(&u.to_string());
            } else {
                out.push_str(&fmt_f64(n.as_f64().unwrap_or(f64::NAN)));
            }
        }
        Value::String(s) => out.push_str(&escape_json(s)),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            // Nested arrays of numbers stay on one line; arrays holding
            // objects or arrays get one element per line.
            let complex = items
                .iter()
                .any(|v| matches!(v, Value::Object(_) | Value::Array(_)));
            if complex {
                out.push_str("[\n");
                for (i, item) in items.iter().enumerate() {
                    push_indent(out, indent + 1);
                    write_value(out, item, indent + 1);
                    if i + 1 < items.len() {
                        out.push(',');
                    }
                    out.push('\n');
                }
                push_indent(out, indent);
                out.push(']');
            } else {
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, item, indent);
                }
                out.push(']');
            }
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            // serde_json's map is a BTreeMap: iteration is sorted by key
            let len = map.len();
            for (i, (key, item)) in map.iter().enumerate() {
                push_indent(out, indent + 1);
                out.push_str(&escape_json(key));
                out.push_str(": ");
                write_value(out, item, indent + 1);
                if i + 1 < len {
                    out.push(',');
                }
                out.push('\n');
            }
            push_indent(out, indent);
            out.push('}');
        }
    }
}

fn push_indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

/// Serialize a JSON value with sorted keys and 17-digit floats, trailing
/// newline included.
pub fn json_to_string(value: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, value, 0);
    out.push('\n');
    out
}

/// One CSV row; floats must already be formatted by the caller.
pub fn csv_row(fields: &[String]) -> String {
    let mut line = fields.join(",");
    line.push('\n');
    line
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn floats_round_trip_exactly() {
        for &x in &[
            0.25,
            std::f64::consts::PI,
            -1.0 / 3.0,
            1e-300,
            -2.2250738585072014e-308,
            6.02214e23,
            0.0,
        ] {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{x} -> {s}");
        }
    }

    #[test]
    fn json_output_is_parsable_and_sorted() {
        let v = json!({
            "zeta": [1.0, 2.5],
            "alpha": {"b": 1, "a": true},
            "list": [{"x": 0.1}],
        });
        let text = json_to_string(&v);
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["zeta"][1], json!(2.5));
        assert_eq!(back["alpha"]["a"], json!(true));
        let alpha_pos = text.find("\"alpha\"").unwrap();
        let zeta_pos = text.find("\"zeta\"").unwrap();
        assert!(alpha_pos < zeta_pos, "keys must be sorted:\n{text}");
    }

    #[test]
    fn identical_values_produce_identical_bytes() {
        let build = || {
            json!({"s": 0.1 + 0.2, "rows": [[1.0, -0.5], [0.25, 1e-17]], "name": "x"})
        };
        assert_eq!(json_to_string(&build()), json_to_string(&build()));
    }
}
