//! Machine-readable records printed by the CLI.
//!
//! JSON: one object per record, keys sorted, newline-terminated. CSV: a header row
//! and one row per record, with the nested maps flattened to `parameters.<key>` and
//! `results.<key>`. Reals are rounded to 12 significant digits and written with
//! the same token in both encodings.

use std::collections::BTreeMap;

use serde_json::{Map, Number, Value as Json};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Real(f64),
    Int(u64),
    Bool(bool),
    Text(String),
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Real(v)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as u64)
    }
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::Int(v)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_owned())
    }
}

/// Marker for quantities that do not exist for the given input (e.g. log-based
/// bounds at θ = 1).
pub const UNDEFINED: &str = "undefined";

impl From<Option<f64>> for Value {
    fn from(v: Option<f64>) -> Self {
        v.map_or_else(|| Value::from(UNDEFINED), Value::Real)
    }
}

/// Rounds to 12 significant digits.
pub fn round_sig12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

impl Value {
    fn to_json(&self) -> Json {
        match self {
            Value::Real(x) => Number::from_f64(round_sig12(*x))
                .map(Json::Number)
                // JSON has no NaN or infinity.
                .unwrap_or_else(|| Json::String(x.to_string())),
            Value::Int(i) => Json::Number((*i).into()),
            Value::Bool(b) => Json::Bool(*b),
            Value::Text(s) => Json::String(s.clone()),
        }
    }

    fn to_csv_field(&self) -> String {
        match self.to_json() {
            Json::String(s) => csv_escape(&s),
            other => other.to_string(),
        }
    }
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputRecord {
    pub command: String,
    pub parameters: BTreeMap<String, Value>,
    pub results: BTreeMap<String, Value>,
    pub schema_version: String,
}

impl OutputRecord {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_owned(),
            parameters: BTreeMap::new(),
            results: BTreeMap::new(),
            schema_version: SCHEMA_VERSION.to_owned(),
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.parameters.insert(key.to_owned(), value.into());
        self
    }

    pub fn result(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.results.insert(key.to_owned(), value.into());
        self
    }

    pub fn to_json_value(&self) -> Json {
        let section = |m: &BTreeMap<String, Value>| {
            Json::Object(
                m.iter()
                    .map(|(k, v)| (k.clone(), v.to_json()))
                    .collect::<Map<_, _>>(),
            )
        };
        let mut obj = Map::new();
        obj.insert("command".into(), Json::String(self.command.clone()));
        obj.insert("parameters".into(), section(&self.parameters));
        obj.insert("results".into(), section(&self.results));
        obj.insert(
            "schema_version".into(),
            Json::String(self.schema_version.clone()),
        );
        Json::Object(obj)
    }

    /// Compact JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = self.to_json_value().to_string();
        s.push('\n');
        s
    }

    /// Flattened `(column, field)` pairs in header order.
    pub fn csv_columns(&self) -> Vec<(String, String)> {
        let mut cols = vec![("command".to_owned(), csv_escape(&self.command))];
        cols.extend(
            self.parameters
                .iter()
                .map(|(k, v)| (format!("parameters.{k}"), v.to_csv_field())),
        );
        cols.extend(
            self.results
                .iter()
                .map(|(k, v)| (format!("results.{k}"), v.to_csv_field())),
        );
        cols.push((
            "schema_version".to_owned(),
            csv_escape(&self.schema_version),
        ));
        cols
    }
}

/// Header row from the first record, then one row per record.
pub fn to_csv(records: &[OutputRecord]) -> String {
    let mut out = String::new();
    let Some(first) = records.first() else {
        return out;
    };
    let header: Vec<String> = first
        .csv_columns()
        .into_iter()
        .map(|(k, _)| csv_escape(&k))
        .collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for r in records {
        let row: Vec<String> = r.csv_columns().into_iter().map(|(_, v)| v).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(round_sig12(22.0 / 7.0), 3.14285714286);
        assert_eq!(round_sig12(1.0), 1.0);
        assert_eq!(round_sig12(-1.0 / 3.0), -0.333333333333);
        assert_eq!(round_sig12(1.23456789012345e-20), 1.23456789012e-20);
    }

    #[test]
    fn json_keys_sorted_and_newline_terminated() {
        let rec = OutputRecord::new("expect")
            .param("theta", 0.5)
            .param("n", 3usize)
            .result("phase_sum", 2.0 + 4.0 / 3.0 + 8.0 / 7.0)
            .result("exact", 22.0 / 7.0);
        assert_eq!(
            rec.to_json(),
            "{\"command\":\"expect\",\"parameters\":{\"n\":3,\"theta\":0.5},\
             \"results\":{\"exact\":3.14285714286,\"phase_sum\":4.47619047619},\
             \"schema_version\":\"1\"}\n"
        );
    }

    #[test]
    fn csv_layout() {
        let rec = OutputRecord::new("bounds")
            .param("n", 3usize)
            .result("digamma_bound", None)
            .result("flag", true)
            .result("note", "a,b");
        assert_eq!(
            to_csv(&[rec]),
            "command,parameters.n,results.digamma_bound,results.flag,results.note,schema_version\n\
             bounds,3,undefined,true,\"a,b\",1\n"
        );
        assert_eq!(to_csv(&[]), "");
    }
}
