use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::text_enum;

/// Incident label exactly as transcribed from the source, trimmed.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct IncidentDetailType(String);

impl IncidentDetailType {
    pub fn new(raw: &str) -> Option<Self> {
        let t = raw.trim();
        (!t.is_empty()).then(|| Self(t.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for IncidentDetailType {
    type Error = String;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Self::new(&value).ok_or_else(|| "incident type must not be empty".to_string())
    }
}

impl From<IncidentDetailType> for String {
    fn from(d: IncidentDetailType) -> String {
        d.0
    }
}

text_enum! {
    /// Glossary classes of rollup incidents.
    pub enum IncidentClass: "incident class" {
        WithdrawalFailure => "withdrawal-failure",
        SequencerOutage => "sequencer-outage",
        SequencerPerformanceDegradation => "sequencer-performance-degradation",
        SequencerHalt => "sequencer-halt",
        BridgeHalt => "bridge-halt",
        L2Downtime => "l2-downtime",
        ExploitUserRisk => "exploit-user-risk",
        WithdrawalDelays => "withdrawal-delays",
        CensorshipForcedInclusionFailure => "censorship-forced-inclusion-failure",
        BridgePauseRisk => "bridge-pause-risk",
    }
}

text_enum! {
    /// Coarse incident types used for the historical distribution.
    pub enum CompressedIncidentType: "compressed incident type" {
        SequencerDisruption => "sequencer-disruption",
        BridgeOrWithdrawal => "bridge-or-withdrawal",
        ExploitOrSecurity => "exploit-or-security",
        CensorshipOrForcedInclusion => "censorship-or-forced-inclusion",
    }
}

impl CompressedIncidentType {
    pub fn label(self) -> &'static str {
        match self {
            CompressedIncidentType::SequencerDisruption => "Sequencer disruption",
            CompressedIncidentType::BridgeOrWithdrawal => "Bridge or withdrawal",
            CompressedIncidentType::ExploitOrSecurity => "Exploit or security",
            CompressedIncidentType::CensorshipOrForcedInclusion => "Censorship or forced inclusion",
        }
    }
}

text_enum! {
    pub enum SourceKind: "source kind" {
        L2beat => "l2beat",
        External => "external",
    }
}

/// One curated incident.
///
/// `glossary_class` is `None` for labels the keyword table cannot place;
/// such records are kept but excluded from the distribution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IncidentRecord {
    pub project: String,
    pub date_utc: NaiveDate,
    pub description: String,
    pub detail: IncidentDetailType,
    pub glossary_class: Option<IncidentClass>,
    pub compressed: Option<CompressedIncidentType>,
    pub source_url: String,
    pub source_kind: SourceKind,
}
