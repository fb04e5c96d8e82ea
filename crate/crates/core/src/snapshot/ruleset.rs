//! Rule keys deciding whether a risk entry describes a hazardous condition.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::{normalize_text, FlagBasis, RiskDimension, RiskEntry, Sentiment};

/// Normalized keys for one side (hazard or safe) of a dimension.
///
/// A `values` key matches when it equals the normalized categorical value;
/// a `phrases` key matches when it occurs in the normalized value or
/// description.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionKeys {
    #[serde(default)]
    pub values: Vec<String>,
    #[serde(default)]
    pub phrases: Vec<String>,
}

impl ConditionKeys {
    fn matching(&self, value: &str, description: &str) -> Option<String> {
        self.values
            .iter()
            .map(|k| normalize_text(k))
            .find(|k| k == value)
            .map(|k| format!("value:{k}"))
            .or_else(|| {
                self.phrases
                    .iter()
                    .map(|k| normalize_text(k))
                    .find(|k| value.contains(k.as_str()) || description.contains(k.as_str()))
                    .map(|k| format!("phrase:{k}"))
            })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimensionRules {
    #[serde(default)]
    pub hazard: ConditionKeys,
    #[serde(default)]
    pub safe: ConditionKeys,
}

/// Flagging ruleset. Hazard keys are tried first, then safe keys; if
/// neither matches and `sentiment_fallback` is on, a `bad` sentiment flags
/// the entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ruleset {
    #[serde(default = "yes")]
    pub sentiment_fallback: bool,
    pub dimensions: BTreeMap<RiskDimension, DimensionRules>,
}

fn yes() -> bool {
    true
}

const DEFAULT_RULESET: &str = include_str!("../../fixtures/ruleset.json");

impl Default for Ruleset {
    fn default() -> Self {
        serde_json::from_str(DEFAULT_RULESET).expect("bundled ruleset is valid")
    }
}

/// A risk record as it appears in a source document, before normalization.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawRisk {
    pub name: String,
    #[serde(default)]
    pub value: String,
    #[serde(default)]
    pub sentiment: Option<String>,
    #[serde(default)]
    pub description: String,
}

impl RawRisk {
    pub fn new(name: &str, value: &str, sentiment: Option<&str>, description: &str) -> Self {
        Self {
            name: name.into(),
            value: value.into(),
            sentiment: sentiment.map(Into::into),
            description: description.into(),
        }
    }
}

/// Outcome of flagging one raw record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Flagged {
    Entry(RiskEntry),
    /// The name resolved to no dimension; kept as-is, never flagged.
    UnknownDimension(RawRisk),
}

impl Ruleset {
    pub fn rule_keys_only(mut self) -> Self {
        self.sentiment_fallback = false;
        self
    }

    pub fn flag_entry(&self, raw: &RawRisk) -> Flagged {
        let Some(dimension) = RiskDimension::from_source(&raw.name) else {
            return Flagged::UnknownDimension(raw.clone());
        };
        let value = normalize_text(&raw.value);
        let description = normalize_text(&raw.description);
        let sentiment = Sentiment::from_source(raw.sentiment.as_deref());
        let rules = self.dimensions.get(&dimension);

        let (flagged, basis) = if let Some(k) = rules.and_then(|r| r.hazard.matching(&value, &description)) {
            (true, FlagBasis::HazardKey(k))
        } else if let Some(k) = rules.and_then(|r| r.safe.matching(&value, &description)) {
            (false, FlagBasis::SafeKey(k))
        } else if self.sentiment_fallback {
            (sentiment == Sentiment::Bad, FlagBasis::SentimentFallback)
        } else {
            (false, FlagBasis::Unmatched)
        };

        Flagged::Entry(RiskEntry {
            dimension,
            value,
            sentiment,
            description,
            flagged,
            basis,
        })
    }
}
