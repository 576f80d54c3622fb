//! Canonical JSON: sorted object keys, no whitespace, floats printed with 12
//! significant digits. Used for every file the CLI writes and for snapshot
//! digests.

use serde_json::Value;
use sha2::{Digest, Sha256};

/// Significant digits kept for floating point numbers.
pub const SIGNIFICANT_DIGITS: usize = 12;

fn write_number(out: &mut String, n: &serde_json::Number) {
    if let Some(i) = n.as_i64() {
        out.push_str(&i.to_string());
    } else if let Some(u) = n.as_u64() {
        out.push_str(&u.to_string());
    } else {
        let x = n.as_f64().unwrap_or(0.0);
        // -0 and 0 print identically
        let x = if x == 0.0 { 0.0 } else { x };
        out.push_str(&format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x));
    }
}

fn write_value(out: &mut String, v: &Value) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => write_number(out, n),
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("strings serialize")),
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
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
            for (i, key) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(key).expect("strings serialize"));
                out.push(':');
                write_value(out, &map[key]);
            }
            out.push('}');
        }
    }
}

pub fn to_string(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v);
    out
}

/// Hex SHA-256 of the canonical encoding.
pub fn digest(v: &Value) -> String {
    hex::encode(Sha256::digest(to_string(v).as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn keys_sorted_and_floats_fixed() {
        let v = json!({"b": 0.5, "a": [1, -2, 1.0], "c": {"z": null, "y": "s"}});
        assert_eq!(
            to_string(&v),
            r#"{"a":[1,-2,1.00000000000e0],"b":5.00000000000e-1,"c":{"y":"s","z":null}}"#
        );
    }

    #[test]
    fn negative_zero_is_zero() {
        assert_eq!(to_string(&json!(-0.0)), to_string(&json!(0.0)));
    }

    #[test]
    fn output_parses_back() {
        let v = json!({"x": std::f64::consts::FRAC_1_SQRT_2, "y": -1.5e-20});
        let back: Value = serde_json::from_str(&to_string(&v)).unwrap();
        assert!((back["x"].as_f64().unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert_eq!(back["y"].as_f64().unwrap(), -1.5e-20);
    }

    #[test]
    fn digest_is_stable() {
        let a = json!({"a": 1, "b": 2});
        let b = json!({"b": 2, "a": 1});
        assert_eq!(digest(&a), digest(&b));
        assert_eq!(digest(&a).len(), 64);
    }
}
