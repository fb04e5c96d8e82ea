use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{normalize_text, text_enum, ParseEnumError};

text_enum! {
    /// Project categories admitted into the analysis.
    pub enum ProjectCategory: "project category" {
        ZkRollup => "zk-rollup",
        OptimisticRollup => "optimistic-rollup",
        Other => "other",
    }
}

impl ProjectCategory {
    /// Parses source spellings such as `ZK Rollup` or ` optimistic_rollup `.
    pub fn from_source(raw: &str) -> Result<Self, ParseEnumError> {
        let key: String = normalize_text(raw)
            .chars()
            .map(|c| if c == ' ' || c == '_' { '-' } else { c })
            .collect();
        key.parse().map_err(|_| ParseEnumError {
            kind: "project category",
            input: raw.to_string(),
        })
    }
}

text_enum! {
    /// The five architectural risk axes tracked per project.
    pub enum RiskDimension: "risk dimension" {
        StateValidation => "state-validation",
        ExitWindow => "exit-window",
        ProposerFailure => "proposer-failure",
        SequencerFailure => "sequencer-failure",
        DataAvailability => "data-availability",
    }
}

impl RiskDimension {
    /// Resolves a source risk name. Case, whitespace, separators and
    /// camelCase are all ignored: `" Sequencer Failure "`,
    /// `sequencer_failure` and `sequencerFailure` are the same dimension.
    pub fn from_source(raw: &str) -> Option<Self> {
        let squashed: String = raw
            .chars()
            .filter(char::is_ascii_alphanumeric)
            .map(|c| c.to_ascii_lowercase())
            .collect();
        Self::ALL.iter().copied().find(|d| {
            d.as_str().chars().filter(|c| *c != '-').eq(squashed.chars())
        })
    }

    /// Column label used by the tabular renderings.
    pub fn label(self) -> &'static str {
        match self {
            RiskDimension::StateValidation => "State validation",
            RiskDimension::ExitWindow => "Exit window",
            RiskDimension::ProposerFailure => "Proposer failure",
            RiskDimension::SequencerFailure => "Sequencer failure",
            RiskDimension::DataAvailability => "Data availability",
        }
    }
}

text_enum! {
    pub enum Sentiment: "sentiment" {
        Bad => "bad",
        Warning => "warning",
        Neutral => "neutral",
        Good => "good",
        Unknown => "unknown",
    }
}

impl Sentiment {
    /// Missing or unrecognized labels become `Unknown`.
    pub fn from_source(raw: Option<&str>) -> Self {
        raw.map(normalize_text)
            .and_then(|s| s.parse().ok())
            .unwrap_or(Sentiment::Unknown)
    }
}

/// Why an entry ended up flagged (or not).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "basis", content = "key", rename_all = "kebab-case")]
pub enum FlagBasis {
    /// A hazard condition key of the ruleset matched.
    HazardKey(String),
    /// A safe condition key matched.
    SafeKey(String),
    /// No key matched; the sentiment label decided.
    SentimentFallback,
    /// No key matched and the fallback is disabled.
    Unmatched,
    /// The risk name did not resolve to a known dimension.
    UnknownDimension,
}

/// One normalized risk row of a project.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RiskEntry {
    pub dimension: RiskDimension,
    pub value: String,
    pub sentiment: Sentiment,
    pub description: String,
    pub flagged: bool,
    pub basis: FlagBasis,
}

/// Errors raised when assembling a [`ProjectRiskProfile`].
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProfileError {
    #[error("project id must not be empty")]
    EmptyId,
    #[error("project `{project}` lists dimension {dimension} more than once")]
    DuplicateDimension {
        project: String,
        dimension: RiskDimension,
    },
}

/// One snapshot row per project.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectRiskProfile {
    pub project_id: String,
    pub display_name: String,
    pub category: ProjectCategory,
    pub risks: Vec<RiskEntry>,
}

impl ProjectRiskProfile {
    /// Builds a profile, ordering risks by dimension and rejecting
    /// duplicated dimensions.
    pub fn new(
        project_id: impl Into<String>,
        display_name: impl Into<String>,
        category: ProjectCategory,
        mut risks: Vec<RiskEntry>,
    ) -> Result<Self, ProfileError> {
        let project_id = project_id.into();
        if project_id.trim().is_empty() {
            return Err(ProfileError::EmptyId);
        }
        risks.sort_by_key(|r| r.dimension);
        let mut seen = BTreeSet::new();
        for r in &risks {
            if !seen.insert(r.dimension) {
                return Err(ProfileError::DuplicateDimension {
                    project: project_id,
                    dimension: r.dimension,
                });
            }
        }
        Ok(Self {
            project_id,
            display_name: display_name.into(),
            category,
            risks,
        })
    }

    pub fn risk(&self, dimension: RiskDimension) -> Option<&RiskEntry> {
        self.risks.iter().find(|r| r.dimension == dimension)
    }

    pub fn is_flagged(&self, dimension: RiskDimension) -> bool {
        self.risk(dimension).is_some_and(|r| r.flagged)
    }
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn category_accepts_source_spellings() {
        assert_eq!(
            ProjectCategory::from_source("ZK Rollup").unwrap(),
            ProjectCategory::ZkRollup
        );
        assert_eq!(
            ProjectCategory::from_source(" Optimistic_Rollup ").unwrap(),
            ProjectCategory::OptimisticRollup
        );
        assert_eq!(ProjectCategory::from_source("Other").unwrap(), ProjectCategory::Other);
        assert!(ProjectCategory::from_source("Validium-like").is_err());
        assert!(ProjectCategory::from_source("Validium").is_err());
    }

    #[test]
    fn dimension_ignores_case_and_separators() {
        for raw in [" Sequencer Failure ", "sequencer_failure", "sequencerFailure", "SEQUENCER-FAILURE"] {
            assert_eq!(RiskDimension::from_source(raw), Some(RiskDimension::SequencerFailure), "{raw}");
        }
        assert_eq!(RiskDimension::from_source("stage"), None);
    }

    #[test]
    fn duplicate_dimension_rejected() {
        let e = RiskEntry {
            dimension: RiskDimension::ExitWindow,
            value: "none".into(),
            sentiment: Sentiment::Bad,
            description: String::new(),
            flagged: true,
            basis: FlagBasis::SentimentFallback,
        };
        let err = ProjectRiskProfile::new("p", "P", ProjectCategory::Other, vec![e.clone(), e]).unwrap_err();
        assert!(matches!(err, ProfileError::DuplicateDimension { .. }));
    }
}
