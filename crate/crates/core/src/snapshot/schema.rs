//! Path enumeration over an arbitrary JSON document.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::SnapshotDocument;

const MAX_SAMPLES: usize = 3;
const SAMPLE_CHARS: usize = 80;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemaPath {
    pub path: String,
    pub occurrence_count: u64,
    pub sample_values: Vec<String>,
}

/// Every leaf path of a document, sorted lexicographically.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemaReport {
    pub paths: Vec<SchemaPath>,
}

impl SchemaReport {
    pub fn get(&self, path: &str) -> Option<&SchemaPath> {
        self.paths.iter().find(|p| p.path == path)
    }

    pub fn render_text(&self) -> String {
        let width = self.paths.iter().map(|p| p.path.len()).max().unwrap_or(4).max(4);
        let mut out = format!("{:<width$}  {:>6}  samples\n", "path", "count");
        for p in &self.paths {
            out.push_str(&format!(
                "{:<width$}  {:>6}  {}\n",
                p.path,
                p.occurrence_count,
                p.sample_values.join(" | ")
            ));
        }
        out
    }
}

/// Enumerates every leaf (scalar) path of `doc` with its occurrence count
/// and up to three distinct sample values. Arrays contribute a `[]`
/// segment; empty containers contribute nothing.
pub fn explore_schema(doc: &SnapshotDocument) -> SchemaReport {
    let mut acc: BTreeMap<String, (u64, Vec<String>)> = BTreeMap::new();
    walk(doc.root(), String::new(), &mut acc);
    SchemaReport {
        paths: acc
            .into_iter()
            .map(|(path, (occurrence_count, sample_values))| SchemaPath {
                path,
                occurrence_count,
                sample_values,
            })
            .collect(),
    }
}

fn walk(v: &Value, path: String, acc: &mut BTreeMap<String, (u64, Vec<String>)>) {
    match v {
        Value::Object(map) => {
            for (k, child) in map {
                let p = if path.is_empty() {
                    k.clone()
                } else {
                    format!("{path}.{k}")
                };
                walk(child, p, acc);
            }
        }
        Value::Array(items) => {
            let p = format!("{path}[]");
            for child in items {
                walk(child, p.clone(), acc);
            }
        }
        scalar => {
            let key = if path.is_empty() { "$".to_string() } else { path };
            let entry = acc.entry(key).or_default();
            entry.0 += 1;
            let sample = truncate(&match scalar {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            });
            if entry.1.len() < MAX_SAMPLES && !entry.1.contains(&sample) {
                entry.1.push(sample);
            }
        }
    }
}

fn truncate(s: &str) -> String {
    s.chars().take(SAMPLE_CHARS).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(json: &str) -> SchemaReport {
        explore_schema(&SnapshotDocument::parse(json).unwrap())
    }

    #[test]
    fn two_leaf_document() {
        let r = report(r#"{"a":{"b":1},"c":[2,3]}"#);
        let got: Vec<_> = r.paths.iter().map(|p| (p.path.as_str(), p.occurrence_count)).collect();
        assert_eq!(got, vec![("a.b", 1), ("c[]", 2)]);
        assert_eq!(r.get("c[]").unwrap().sample_values, vec!["2", "3"]);
    }

    #[test]
    fn empty_object() {
        assert!(report("{}").paths.is_empty());
    }

    #[test]
    fn samples_capped_and_truncated() {
        let long = "x".repeat(200);
        let r = report(&format!(r#"{{"v":["{long}","a","b","c","a"]}}"#));
        let p = r.get("v[]").unwrap();
        assert_eq!(p.occurrence_count, 5);
        assert_eq!(p.sample_values.len(), 3);
        assert_eq!(p.sample_values[0].chars().count(), 80);
    }

    #[test]
    fn paths_sorted() {
        let r = report(r#"{"z":1,"a":[{"y":null,"b":true}]}"#);
        let paths: Vec<_> = r.paths.iter().map(|p| p.path.clone()).collect();
        let mut sorted = paths.clone();
        sorted.sort();
        assert_eq!(paths, sorted);
        assert_eq!(paths, vec!["a[].b", "a[].y", "z"]);
    }
}
