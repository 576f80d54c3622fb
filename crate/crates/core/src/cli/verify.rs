//! Re-execution of a saved output and comparison with the file.

use serde_json::Value;

use super::config::RunConfig;
use super::CliError;
use crate::canonical;

/// Numbers are compared with this absolute tolerance; the files keep 12
/// significant digits.
pub const VERIFY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Match,
    /// JSON path of the first difference and a description.
    Diverged { path: String, detail: String },
}

fn first_divergence(path: &str, saved: &Value, fresh: &Value) -> Option<(String, String)> {
    match (saved, fresh) {
        (Value::Number(a), Value::Number(b)) => {
            let (x, y) = (a.as_f64().unwrap_or(f64::NAN), b.as_f64().unwrap_or(f64::NAN));
            ((x - y).abs() > VERIFY_TOL || x.is_nan() != y.is_nan())
                .then(|| (path.to_string(), format!("saved {x}, recomputed {y}")))
        }
        (Value::Array(a), Value::Array(b)) => {
            if a.len() != b.len() {
                return Some((path.to_string(), format!("saved {} entries, recomputed {}", a.len(), b.len())));
            }
            a.iter().zip(b).enumerate().find_map(|(i, (x, y))| first_divergence(&format!("{path}[{i}]"), x, y))
        }
        (Value::Object(a), Value::Object(b)) => {
            let mut keys: Vec<&String> = a.keys().chain(b.keys()).collect();
            keys.sort();
            keys.dedup();
            keys.into_iter().find_map(|k| {
                let p = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                match (a.get(k), b.get(k)) {
                    (Some(x), Some(y)) => first_divergence(&p, x, y),
                    (Some(_), None) => Some((p, "not produced by re-execution".into())),
                    (None, Some(_)) => Some((p, "missing from the saved file".into())),
                    (None, None) => None,
                }
            })
        }
        (a, b) if a == b => None,
        (a, b) => Some((path.to_string(), format!("saved {a}, recomputed {b}"))),
    }
}

/// Names the protocol step a divergent path falls in, when it is inside a
/// pass record.
fn step_of(path: &str, saved: &Value) -> Option<String> {
    let start = path.find(".passes[")?;
    let end = start + path[start..].find(']')?;
    let prefix = &path[..start];
    let index: usize = path[start + ".passes[".len()..end].parse().ok()?;
    let mut node = saved;
    for part in prefix.split('.') {
        let (name, idx) = match part.find('[') {
            Some(b) => (&part[..b], part[b + 1..part.len() - 1].parse::<usize>().ok()),
            None => (part, None),
        };
        node = node.get(name)?;
        if let Some(i) = idx {
            node = node.get(i)?;
        }
    }
    let pass = node.get("passes")?.get(index)?;
    Some(format!("pass {} ({})", pass.get("index")?, pass.get("step")?.as_str()?))
}

/// Re-runs the config embedded in `saved` and compares.
pub fn verify(saved: &Value) -> Result<Verdict, CliError> {
    if saved.get("tool").and_then(Value::as_str) != Some("qnokey") {
        return Err(CliError::Usage("not a qnokey output file".into()));
    }
    let config: RunConfig = serde_json::from_value(saved.get("config").cloned().unwrap_or(Value::Null))
        .map_err(|e| CliError::Usage(format!("embedded config: {e}")))?;
    let fresh = config.execute()?.document;
    // compare against what would have been written, not the raw floats
    let fresh: Value = serde_json::from_str(&canonical::to_string(&fresh)).expect("canonical output parses");
    Ok(match first_divergence("", saved, &fresh) {
        None => Verdict::Match,
        Some((path, detail)) => {
            let detail = match step_of(&path, saved) {
                Some(step) => format!("{step}: {detail}"),
                None => detail,
            };
            Verdict::Diverged { path, detail }
        }
    })
}
