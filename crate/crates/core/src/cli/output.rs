//! Report rendering: JSON with every float at 17 significant digits, CSV
//! tables, and gnuplot scripts that read the CSV.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde_json::Value;

use super::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// `1.2345678901234567e-3` style; integers stay integers.
pub fn format_number(n: &serde_json::Number) -> String {
    if n.is_f64() {
        let x = n.as_f64().expect("f64 number");
        format!("{x:.16e}")
    } else {
        n.to_string()
    }
}

fn write_json(out: &mut String, v: &Value, indent: usize) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => out.push_str(&format_number(n)),
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            // short arrays of scalars stay on one line
            if items.len() <= 8 && items.iter().all(|x| !x.is_array() && !x.is_object()) {
                out.push('[');
                for (i, x) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_json(out, x, indent);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (i, x) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_json(out, x, indent + 1);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (i, (k, x)) in map.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_json(out, x, indent + 1);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
    }
}

/// Pretty JSON. Object keys come out sorted (serde_json's map is ordered).
pub fn to_json_string(v: &Value) -> String {
    let mut out = String::new();
    write_json(&mut out, v, 0);
    out.push('\n');
    out
}

/// Dotted-key view of nested objects and arrays; scalars only.
pub fn flatten(v: &Value) -> BTreeMap<String, Value> {
    fn go(prefix: &str, v: &Value, out: &mut BTreeMap<String, Value>) {
        let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
        match v {
            Value::Object(map) => map.iter().for_each(|(k, x)| go(&key(k), x, out)),
            Value::Array(items) => items.iter().enumerate().for_each(|(i, x)| go(&key(&i.to_string()), x, out)),
            scalar => {
                out.insert(prefix.to_string(), scalar.clone());
            }
        }
    }
    let mut out = BTreeMap::new();
    go("", v, &mut out);
    out
}

fn cell(v: Option<&Value>) -> String {
    match v {
        None | Some(Value::Null) => String::new(),
        Some(Value::Number(n)) => format_number(n),
        Some(Value::String(s)) => s.clone(),
        Some(Value::Bool(b)) => b.to_string(),
        Some(other) => other.to_string(),
    }
}

/// Writes `header` then one record per row.
pub fn write_csv(header: &[String], rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

/// Table from row objects: `leading` columns first, then every other
/// flattened key in sorted order.
pub fn table_from_rows(leading: &[&str], rows: &[Value]) -> (Vec<String>, Vec<Vec<String>>) {
    let flat: Vec<BTreeMap<String, Value>> = rows.iter().map(flatten).collect();
    let mut rest = BTreeSet::new();
    for f in &flat {
        rest.extend(f.keys().filter(|k| !leading.contains(&k.as_str())).cloned());
    }
    let header: Vec<String> = leading.iter().map(|s| s.to_string()).chain(rest).collect();
    let body = flat.iter().map(|f| header.iter().map(|h| cell(f.get(h))).collect()).collect();
    (header, body)
}

/// Two-column `key,value` table for reports that are not tabular.
pub fn key_value_table(v: &Value) -> (Vec<String>, Vec<Vec<String>>) {
    let rows = flatten(v).into_iter().map(|(k, x)| vec![k, cell(Some(&x))]).collect();
    (vec!["key".into(), "value".into()], rows)
}

/// Gnuplot script plotting every numeric column after the first against the
/// first. With `phase`, also the second column against the third (the first
/// two state coordinates of a path).
pub fn gnuplot_script(csv_path: &str, header: &[String], title: &str, phase: bool) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# gnuplot script; run with: gnuplot -p <this file>");
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set key autotitle columnhead");
    let _ = writeln!(s, "set title {}", Value::String(title.to_string()));
    let _ = writeln!(s, "set xlabel {}", Value::String(header.first().cloned().unwrap_or_default()));
    let _ = writeln!(s, "set grid");
    let cols: Vec<String> = (2..=header.len())
        .map(|i| format!("{} using 1:{i} with linespoints", Value::String(csv_path.to_string())))
        .collect();
    if !cols.is_empty() {
        let _ = writeln!(s, "plot {}", cols.join(", \\\n     "));
    }
    if phase && header.len() >= 3 {
        let _ = writeln!(s, "pause -1 'phase diagram next'");
        let _ = writeln!(s, "set title {}", Value::String(format!("{title}: phase diagram")));
        let _ = writeln!(s, "set xlabel {}", Value::String(header[1].clone()));
        let _ = writeln!(s, "set ylabel {}", Value::String(header[2].clone()));
        let _ = writeln!(s, "plot {} using 2:3 with linespoints notitle", Value::String(csv_path.to_string()));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn floats_have_seventeen_digits() {
        let s = to_json_string(&json!({"x": 0.1, "n": 3, "nan": f64::NAN}));
        assert!(s.contains("\"x\": 1.0000000000000001e-1"), "{s}");
        assert!(s.contains("\"n\": 3"));
        assert!(s.contains("\"nan\": null"));
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["x"].as_f64(), Some(0.1));
    }

    #[test]
    fn flatten_and_table() {
        let rows = vec![json!({"value": 1.0, "a": {"b": true}}), json!({"value": 2.0, "error": "boom"})];
        let (h, body) = table_from_rows(&["value"], &rows);
        assert_eq!(h, vec!["value", "a.b", "error"]);
        assert_eq!(body[1], vec!["2.0000000000000000e0", "", "boom"]);
        let csv = write_csv(&h, &body).unwrap();
        assert!(csv.starts_with("value,a.b,error\n"));
    }
}
