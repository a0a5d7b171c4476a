//! Text rendering of JSON reports: one row per scalar leaf, keyed by its
//! dotted path. Arrays of scalars (and nested arrays of them) stay inline.

use serde_json::Value;

pub fn render(report: &Value) -> String {
    let mut rows = Vec::new();
    collect(report, String::new(), &mut rows);
    let width = rows.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
    let mut out = String::new();
    for (key, value) in rows {
        let pad = width - key.chars().count();
        out.push_str(&key);
        out.push_str(&" ".repeat(pad + 2));
        out.push_str(&value);
        out.push('\n');
    }
    out
}

fn collect(v: &Value, path: String, rows: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) if !map.is_empty() => {
            for (k, val) in map {
                let key = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                collect(val, key, rows);
            }
        }
        Value::Array(items) if items.iter().any(|x| x.is_object()) => {
            for (i, item) in items.iter().enumerate() {
                collect(item, format!("{path}[{i}]"), rows);
            }
        }
        other => rows.push((path, inline(other))),
    }
}

fn inline(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        Value::Array(items) => format!("[{}]", items.iter().map(inline).collect::<Vec<_>>().join(", ")),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn nested_paths_and_inline_arrays() {
        let text = render(&json!({"a": {"b": "1/2"}, "xs": [["1", "0"]], "items": [{"k": true}], "none": null}));
        assert_eq!(text, "a.b         1/2\nxs          [[1, 0]]\nitems[0].k  true\nnone        -\n");
    }
}
