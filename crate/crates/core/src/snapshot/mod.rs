//! Snapshot ingestion: schema exploration, per-project risk extraction and
//! prevalence aggregation.

mod prevalence;
mod ruleset;
mod schema;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::model::{
    normalize_text, ProfileError, ProjectCategory, ProjectRiskProfile, Warning,
};

pub use prevalence::{aggregate_prevalence, PrevalenceRow, PrevalenceTable};
pub use ruleset::{ConditionKeys, DimensionRules, Flagged, RawRisk, Ruleset};
pub use schema::{explore_schema, SchemaPath, SchemaReport};

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("malformed snapshot document: {0}")]
    Malformed(#[from] serde_json::Error),
    #[error("no project collection at `{root}`: {reason}")]
    SchemaMismatch { root: String, reason: String },
    #[error("duplicate project id `{0}`")]
    DuplicateProjectId(String),
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

/// A parsed snapshot file.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotDocument(Value);

impl SnapshotDocument {
    pub fn parse(text: &str) -> Result<Self, SnapshotError> {
        Ok(Self(serde_json::from_str(text)?))
    }

    pub fn from_value(v: Value) -> Self {
        Self(v)
    }

    pub fn root(&self) -> &Value {
        &self.0
    }

    /// Resolves a dot-separated path of object keys. The empty path is the
    /// document root.
    pub fn at(&self, path: &str) -> Option<&Value> {
        path.split('.')
            .filter(|s| !s.is_empty())
            .try_fold(&self.0, |v, key| v.get(key))
    }
}

/// Source layout of the project collection.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SnapshotSchema {
    /// `projects[]` of `{id, name, category, risks[]: {name, value, sentiment, description}}`.
    #[default]
    Normalized,
    /// `projects{id: {name, category, risks{dimension: {value, sentiment, description}}}}`,
    /// the keyed layout of the public scaling summary.
    KeyedMap,
}

impl std::str::FromStr for SnapshotSchema {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "normalized" => Ok(Self::Normalized),
            "keyed-map" => Ok(Self::KeyedMap),
            _ => Err(format!("unknown snapshot schema `{s}` (expected normalized or keyed-map)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExtractOptions {
    pub root: String,
    pub schema: SnapshotSchema,
    pub ruleset: Ruleset,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        Self {
            root: "projects".into(),
            schema: SnapshotSchema::Normalized,
            ruleset: Ruleset::default(),
        }
    }
}

/// A project left out of the analysis and why.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExcludedProject {
    pub project_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Extraction {
    pub profiles: Vec<ProjectRiskProfile>,
    pub excluded: Vec<ExcludedProject>,
    /// Risk records whose name matched no dimension, per project.
    pub unrecognized: Vec<(String, RawRisk)>,
    pub warnings: Vec<Warning>,
}

/// A project record lifted out of either source layout.
struct SourceProject {
    id: Option<String>,
    name: String,
    category: Option<String>,
    risks: Vec<RawRisk>,
}

/// Lowercases and trims every key of an object.
fn normalized_keys(obj: &Map<String, Value>) -> Map<String, Value> {
    obj.iter().map(|(k, v)| (normalize_text(k), v.clone())).collect()
}

fn text(obj: &Map<String, Value>, key: &str) -> Option<String> {
    match obj.get(key)? {
        Value::String(s) => Some(s.clone()),
        Value::Null => None,
        other => Some(other.to_string()),
    }
}

/// Category may be a plain string or an object carrying a `name`/`value`.
fn category_text(obj: &Map<String, Value>) -> Option<String> {
    match obj.get("category")? {
        Value::String(s) => Some(s.clone()),
        Value::Object(inner) => {
            let inner = normalized_keys(inner);
            text(&inner, "name").or_else(|| text(&inner, "value"))
        }
        _ => None,
    }
}

fn raw_risk(name: &str, obj: &Map<String, Value>) -> RawRisk {
    let obj = normalized_keys(obj);
    RawRisk {
        name: name.to_string(),
        value: text(&obj, "value").unwrap_or_default(),
        sentiment: text(&obj, "sentiment"),
        description: text(&obj, "description").unwrap_or_default(),
    }
}

fn from_normalized(item: &Value) -> Option<SourceProject> {
    let obj = normalized_keys(item.as_object()?);
    let risks = obj
        .get("risks")
        .and_then(Value::as_array)
        .map(|arr| {
            arr.iter()
                .filter_map(Value::as_object)
                .map(|r| {
                    let name = text(&normalized_keys(r), "name").unwrap_or_default();
                    raw_risk(&name, r)
                })
                .collect()
        })
        .unwrap_or_default();
    Some(SourceProject {
        id: text(&obj, "id"),
        name: text(&obj, "name").unwrap_or_default(),
        category: category_text(&obj),
        risks,
    })
}

fn from_keyed(key: &str, item: &Value) -> Option<SourceProject> {
    let obj = normalized_keys(item.as_object()?);
    let risks = obj
        .get("risks")
        .and_then(Value::as_object)
        .map(|m| {
            m.iter()
                .filter_map(|(dim, r)| r.as_object().map(|r| raw_risk(dim, r)))
                .collect()
        })
        .unwrap_or_default();
    Some(SourceProject {
        id: Some(text(&obj, "id").unwrap_or_else(|| key.to_string())),
        name: text(&obj, "name").unwrap_or_else(|| key.to_string()),
        category: category_text(&obj),
        risks,
    })
}

/// Stable key: the source id if present, else a slug of the name.
fn project_key(p: &SourceProject) -> Option<String> {
    let base = p.id.as_deref().filter(|s| !s.trim().is_empty()).unwrap_or(&p.name);
    let slug: String = normalize_text(base)
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '-' })
        .collect();
    (!slug.is_empty()).then_some(slug)
}

/// Extracts one profile per project in an admitted category.
///
/// Projects with no category are skipped with a warning; projects in any
/// other category are listed in `excluded`. A repeated project id is a
/// hard error.
pub fn extract_projects(
    doc: &SnapshotDocument,
    opts: &ExtractOptions,
) -> Result<Extraction, SnapshotError> {
    let collection = doc.at(&opts.root).ok_or_else(|| SnapshotError::SchemaMismatch {
        root: opts.root.clone(),
        reason: "path not found".into(),
    })?;
    let sources: Vec<Option<SourceProject>> = match (opts.schema, collection) {
        (SnapshotSchema::Normalized, Value::Array(items)) => items.iter().map(from_normalized).collect(),
        (SnapshotSchema::KeyedMap, Value::Object(map)) => {
            map.iter().map(|(k, v)| from_keyed(k, v)).collect()
        }
        (schema, other) => {
            return Err(SnapshotError::SchemaMismatch {
                root: opts.root.clone(),
                reason: format!(
                    "{schema:?} layout expects {}, found {}",
                    if schema == SnapshotSchema::Normalized { "an array" } else { "an object" },
                    json_kind(other)
                ),
            })
        }
    };

    let mut out = Extraction::default();
    let mut seen = BTreeSet::new();
    for (index, source) in sources.into_iter().enumerate() {
        let Some(source) = source else {
            out.warnings.push(Warning::new("not-an-object", format!("project #{index} is not an object")));
            continue;
        };
        let Some(project_id) = project_key(&source) else {
            out.warnings.push(Warning::new("missing-id", format!("project #{index} has neither id nor name")));
            continue;
        };
        let Some(raw_category) = source.category.as_deref() else {
            out.warnings.push(Warning::new(
                "missing-category",
                format!("project `{project_id}` has no category; skipped"),
            ));
            continue;
        };
        let Ok(category) = ProjectCategory::from_source(raw_category) else {
            out.excluded.push(ExcludedProject {
                project_id,
                reason: format!("category `{}` not analyzed", raw_category.trim()),
            });
            continue;
        };
        if !seen.insert(project_id.clone()) {
            return Err(SnapshotError::DuplicateProjectId(project_id));
        }

        let mut entries = Vec::new();
        for raw in &source.risks {
            match opts.ruleset.flag_entry(raw) {
                Flagged::Entry(e) => {
                    if e.basis == crate::model::FlagBasis::SentimentFallback {
                        out.warnings.push(Warning::new(
                            "sentiment-fallback",
                            format!(
                                "project `{project_id}` {}: no rule key matched value `{}`; sentiment `{}` decided flagged={}",
                                e.dimension, e.value, e.sentiment, e.flagged
                            ),
                        ));
                    }
                    entries.push(e);
                }
                Flagged::UnknownDimension(raw) => {
                    out.warnings.push(Warning::new(
                        "unknown-dimension",
                        format!("project `{project_id}` risk `{}` matches no dimension; not flagged", raw.name.trim()),
                    ));
                    out.unrecognized.push((project_id.clone(), raw));
                }
            }
        }
        let display = normalize_display(&source.name, &project_id);
        out.profiles.push(ProjectRiskProfile::new(project_id, display, category, entries)?);
    }
    out.profiles.sort_by(|a, b| a.project_id.cmp(&b.project_id));
    Ok(out)
}

fn normalize_display(name: &str, fallback: &str) -> String {
    let n = name.trim();
    if n.is_empty() { fallback.to_string() } else { n.to_string() }
}

fn json_kind(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "a boolean",
        Value::Number(_) => "a number",
        Value::String(_) => "a string",
        Value::Array(_) => "an array",
        Value::Object(_) => "an object",
    }
}

/// Serializes profiles back into the normalized snapshot layout.
pub fn profiles_to_document(profiles: &[ProjectRiskProfile]) -> SnapshotDocument {
    let projects: Vec<Value> = profiles
        .iter()
        .map(|p| {
            serde_json::json!({
                "id": p.project_id,
                "name": p.display_name,
                "category": p.category.as_str(),
                "risks": p.risks.iter().map(|r| serde_json::json!({
                    "name": r.dimension.as_str(),
                    "value": r.value,
                    "sentiment": r.sentiment.as_str(),
                    "description": r.description,
                })).collect::<Vec<_>>(),
            })
        })
        .collect();
    SnapshotDocument(serde_json::json!({ "projects": projects }))
}
