use std::collections::BTreeMap;
use std::path::Path;

use polygame_core::matroid::MatroidSpec;
use polygame_core::{check_schema_version, GroundSet, LoadVector, Matroid, SubmodularOracle};
use serde::Deserialize;
use serde_json::Value;

use crate::Failure;

/// Pretty JSON with keys in sorted order and a trailing newline.
pub fn render(doc: &Value) -> String {
    let mut s = serde_json::to_string_pretty(&sorted(doc)).expect("JSON values serialize");
    s.push('\n');
    s
}

fn sorted(v: &Value) -> Value {
    match v {
        Value::Object(map) => {
            let ordered: BTreeMap<&String, Value> = map.iter().map(|(k, v)| (k, sorted(v))).collect();
            Value::Object(ordered.into_iter().map(|(k, v)| (k.clone(), v)).collect())
        }
        Value::Array(items) => Value::Array(items.iter().map(sorted).collect()),
        other => other.clone(),
    }
}

pub fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::input("io", format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::input("json", format!("{}: {e}", path.display())))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::input("io", format!("cannot write {}: {e}", path.display())))
}

/// Either a matroid document (tagged by `"class"`) or an explicit table.
pub enum OracleSource {
    Matroid(Matroid),
    Table(SubmodularOracle),
}

impl OracleSource {
    pub fn oracle(&self) -> SubmodularOracle {
        match self {
            OracleSource::Matroid(m) => m.rank_oracle(),
            OracleSource::Table(o) => o.clone(),
        }
    }
}

pub fn read_oracle(path: &Path) -> Result<OracleSource, Failure> {
    let doc = read_json(path)?;
    if doc.get("class").is_some() {
        Ok(OracleSource::Matroid(MatroidSpec::from_json(&doc)?.build()?))
    } else {
        Ok(OracleSource::Table(SubmodularOracle::from_table_json(&doc)?))
    }
}

#[derive(Deserialize)]
struct LoadDoc {
    values: BTreeMap<String, f64>,
}

/// Parses `{"schema_version": 1, "values": {"e": 1.0, ...}}`; missing
/// elements are zero.
pub fn load_vector_from_json(ground: &GroundSet, doc: &Value) -> Result<LoadVector, Failure> {
    check_schema_version(doc)?;
    let parsed: LoadDoc =
        serde_json::from_value(doc.clone()).map_err(|e| Failure::input("json", format!("load vector: {e}")))?;
    let pairs: Vec<(&str, f64)> = parsed.values.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    Ok(LoadVector::from_pairs(ground, &pairs)?)
}

pub fn load_vector_to_json(x: &LoadVector) -> Value {
    let values: BTreeMap<String, f64> = x.named().into_iter().collect();
    serde_json::json!({"schema_version": polygame_core::SCHEMA_VERSION, "values": values})
}
