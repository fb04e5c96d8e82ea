//! Curated incident records: parsing, deduplication, classification and
//! the historical distribution by coarse type.

use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    normalize_text, CompressedIncidentType, IncidentClass, IncidentDetailType, IncidentRecord,
    Share, SourceKind, Warning,
};

#[derive(Debug, Error)]
pub enum IncidentError {
    #[error("incident table is missing required column `{0}`")]
    MissingColumn(&'static str),
    #[error("unreadable incident table: {0}")]
    Csv(#[from] csv::Error),
}

/// Why a data row was rejected.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowRejection {
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IncidentParse {
    pub records: Vec<IncidentRecord>,
    pub rejected: Vec<RowRejection>,
    pub duplicates_removed: usize,
    pub warnings: Vec<Warning>,
}

/// Ordered keyword table; the first needle found in the normalized label
/// wins.
const KEYWORDS: &[(&str, IncidentClass)] = &[
    ("censor", IncidentClass::CensorshipForcedInclusionFailure),
    ("forced inclusion", IncidentClass::CensorshipForcedInclusionFailure),
    ("bridge halt", IncidentClass::BridgeHalt),
    ("bridge paus", IncidentClass::BridgePauseRisk),
    ("withdrawal delay", IncidentClass::WithdrawalDelays),
    ("withdrawal failure", IncidentClass::WithdrawalFailure),
    ("bridge issue", IncidentClass::WithdrawalFailure),
    ("exploit", IncidentClass::ExploitUserRisk),
    ("security", IncidentClass::ExploitUserRisk),
    ("l2 downtime", IncidentClass::L2Downtime),
    ("severe degradation", IncidentClass::L2Downtime),
    ("performance degradation", IncidentClass::SequencerPerformanceDegradation),
    ("halt", IncidentClass::SequencerHalt),
    ("outage", IncidentClass::SequencerOutage),
    ("downtime", IncidentClass::SequencerOutage),
];

/// Maps a detail label to its glossary class, or `None` when no keyword
/// applies.
pub fn classify_incident(detail: &IncidentDetailType) -> Option<IncidentClass> {
    let label = normalize_text(detail.as_str());
    KEYWORDS
        .iter()
        .find(|(needle, _)| label.contains(needle))
        .map(|(_, class)| *class)
}

pub fn compress(class: IncidentClass) -> CompressedIncidentType {
    use CompressedIncidentType as C;
    use IncidentClass as I;
    match class {
        I::SequencerOutage | I::SequencerHalt | I::SequencerPerformanceDegradation => C::SequencerDisruption,
        I::WithdrawalFailure | I::BridgeHalt | I::WithdrawalDelays | I::BridgePauseRisk | I::L2Downtime => {
            C::BridgeOrWithdrawal
        }
        I::ExploitUserRisk => C::ExploitOrSecurity,
        I::CensorshipForcedInclusionFailure => C::CensorshipOrForcedInclusion,
    }
}

fn source_kind(url: &url::Url) -> SourceKind {
    match url.host_str() {
        Some(h) if h == "l2beat.com" || h.ends_with(".l2beat.com") => SourceKind::L2beat,
        _ => SourceKind::External,
    }
}

/// Host plus path of a source link, the part of the URL that distinguishes
/// two reports of the same event.
fn url_identity(raw: &str) -> (String, Option<url::Url>) {
    match url::Url::parse(raw.trim()) {
        Ok(u) => (
            format!(
                "{}{}",
                u.host_str().unwrap_or_default().to_lowercase(),
                u.path().trim_end_matches('/')
            ),
            Some(u),
        ),
        Err(_) => (raw.trim().to_lowercase(), None),
    }
}

struct Columns {
    name: usize,
    date: usize,
    link: usize,
    kind: usize,
    description: Option<usize>,
}

fn columns(header: &csv::StringRecord) -> Result<Columns, IncidentError> {
    let find = |aliases: &[&str]| {
        header
            .iter()
            .position(|h| aliases.contains(&normalize_text(h).replace(' ', "_").as_str()))
    };
    Ok(Columns {
        name: find(&["name", "project", "name_of_(project)"]).ok_or(IncidentError::MissingColumn("name"))?,
        date: find(&["date", "date_utc", "start_date"]).ok_or(IncidentError::MissingColumn("date"))?,
        link: find(&["link", "url", "source_url"]).ok_or(IncidentError::MissingColumn("link"))?,
        kind: find(&["incident_type", "type", "incident type"]).ok_or(IncidentError::MissingColumn("incident_type"))?,
        description: find(&["description", "short_description"]),
    })
}

/// Parses CSV or TSV (detected from the header line) with columns
/// `name, date, link, incident_type` and an optional `description`.
///
/// Bad rows are rejected with their line number; exact re-reports (same
/// project, date, label and link host+path) collapse into one record. An
/// empty input yields no records and a warning.
pub fn parse_incidents(text: &str) -> Result<IncidentParse, IncidentError> {
    let mut out = IncidentParse::default();
    if text.trim().is_empty() {
        out.warnings.push(Warning::new("empty-input", "incident table is empty"));
        return Ok(out);
    }
    let first_line = text.lines().next().unwrap_or_default();
    let delimiter = if first_line.contains('\t') { b'\t' } else { b',' };
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let cols = columns(reader.headers()?)?;

    let mut seen = BTreeSet::new();
    for row in reader.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let get = |i: usize| row.get(i).unwrap_or_default().trim();
        if row.iter().all(|f| f.trim().is_empty()) {
            continue;
        }

        let project = get(cols.name);
        if project.is_empty() {
            out.rejected.push(RowRejection { line, reason: "empty-project".into() });
            continue;
        }
        let date_utc = match NaiveDate::parse_from_str(get(cols.date), "%Y-%m-%d") {
            Ok(d) => d,
            Err(_) => {
                out.rejected.push(RowRejection {
                    line,
                    reason: format!("bad-date `{}`", get(cols.date)),
                });
                continue;
            }
        };
        let Some(detail) = IncidentDetailType::new(get(cols.kind)) else {
            out.rejected.push(RowRejection { line, reason: "empty-incident-type".into() });
            continue;
        };

        let link = get(cols.link);
        let (link_id, parsed) = url_identity(link);
        let identity = (project.to_string(), date_utc, normalize_text(detail.as_str()), link_id);
        if !seen.insert(identity) {
            out.duplicates_removed += 1;
            continue;
        }

        let glossary_class = classify_incident(&detail);
        if glossary_class.is_none() {
            out.warnings.push(Warning::new(
                "unmapped-incident-type",
                format!("line {line}: `{}` matches no incident class", detail.as_str()),
            ));
        }
        if parsed.is_none() && !link.is_empty() {
            out.warnings.push(Warning::new("bad-link", format!("line {line}: `{link}` is not a URL")));
        }
        out.records.push(IncidentRecord {
            project: project.to_string(),
            date_utc,
            description: cols.description.map(|i| get(i).to_string()).unwrap_or_default(),
            glossary_class,
            compressed: glossary_class.map(compress),
            detail,
            source_url: link.to_string(),
            source_kind: parsed.as_ref().map_or(SourceKind::External, source_kind),
        });
    }
    for r in &out.rejected {
        out.warnings.push(Warning::new("row-rejected", format!("line {}: {}", r.line, r.reason)));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistributionRow {
    pub incident_type: CompressedIncidentType,
    pub count: u64,
    pub share: Option<Share>,
}

/// Incident counts per coarse type.
///
/// Shares are rounded half-up; they are reported against published figures
/// with a tolerance of one tenth of a point, counts exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IncidentDistribution {
    /// Classified records.
    pub total: u64,
    pub rows: Vec<DistributionRow>,
    /// Records whose label matched no class; excluded from `total`.
    pub unmapped: u64,
    /// Distinct projects, case-insensitively.
    pub distinct_projects: u64,
    pub first_date: Option<NaiveDate>,
    pub last_date: Option<NaiveDate>,
}

pub fn distribution(records: &[IncidentRecord]) -> IncidentDistribution {
    let mut counts: BTreeMap<CompressedIncidentType, u64> = BTreeMap::new();
    let mut unmapped = 0;
    for r in records {
        match r.compressed {
            Some(c) => *counts.entry(c).or_default() += 1,
            None => unmapped += 1,
        }
    }
    let total: u64 = counts.values().sum();
    let projects: BTreeSet<String> = records.iter().map(|r| normalize_text(&r.project)).collect();
    IncidentDistribution {
        total,
        rows: CompressedIncidentType::ALL
            .iter()
            .map(|t| {
                let count = counts.get(t).copied().unwrap_or(0);
                DistributionRow {
                    incident_type: *t,
                    count,
                    share: Share::round_half_up(count, total),
                }
            })
            .collect(),
        unmapped,
        distinct_projects: projects.len() as u64,
        first_date: records.iter().map(|r| r.date_utc).min(),
        last_date: records.iter().map(|r| r.date_utc).max(),
    }
}

impl IncidentDistribution {
    pub fn row(&self, t: CompressedIncidentType) -> &DistributionRow {
        self.rows
            .iter()
            .find(|r| r.incident_type == t)
            .expect("distribution has a row per type")
    }

    pub fn count(&self, t: CompressedIncidentType) -> u64 {
        self.row(t).count
    }

    /// Types holding the largest count, in table order. Empty when there
    /// are no classified incidents.
    pub fn dominant(&self) -> Vec<CompressedIncidentType> {
        let max = self.rows.iter().map(|r| r.count).max().unwrap_or(0);
        if max == 0 {
            return Vec::new();
        }
        self.rows.iter().filter(|r| r.count == max).map(|r| r.incident_type).collect()
    }

    pub fn render_text(&self) -> String {
        let w = self
            .rows
            .iter()
            .map(|r| r.incident_type.label().len())
            .max()
            .unwrap_or(13)
            .max("Incident type".len());
        let mut out = format!("{:<w$}  {:>9}  {:>6}\n", "Incident type", "Incidents", "Share");
        out.push_str(&format!("{}\n", "-".repeat(w + 19)));
        for r in &self.rows {
            out.push_str(&format!(
                "{:<w$}  {:>9}  {:>6}\n",
                r.incident_type.label(),
                r.count,
                r.share.map_or("n/a".into(), |s| format!("{s}%"))
            ));
        }
        out.push_str(&format!("{}\n", "-".repeat(w + 19)));
        out.push_str(&format!(
            "{:<w$}  {:>9}  {:>6}\n",
            "Total",
            self.total,
            if self.total > 0 { "100.0" } else { "n/a" }
        ));
        if self.unmapped > 0 {
            out.push_str(&format!("{:<w$}  {:>9}\n", "Unmapped (excluded)", self.unmapped));
        }
        if let (Some(a), Some(b)) = (self.first_date, self.last_date) {
            out.push_str(&format!("Span {a} to {b}, {} distinct projects\n", self.distinct_projects));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn class(label: &str) -> Option<IncidentClass> {
        classify_incident(&IncidentDetailType::new(label).unwrap())
    }

    #[test]
    fn classifies_labels() {
        assert_eq!(class("Sequencer outage (downtime)"), Some(IncidentClass::SequencerOutage));
        assert_eq!(class("Withdrawal delays"), Some(IncidentClass::WithdrawalDelays));
        assert_eq!(
            class("Pending transactions reverted (censored"),
            Some(IncidentClass::CensorshipForcedInclusionFailure)
        );
        assert_eq!(class("Bridge halt & L2 downtime"), Some(IncidentClass::BridgeHalt));
        assert_eq!(class("Sequencer halt (batch poster failure)"), Some(IncidentClass::SequencerHalt));
        assert_eq!(class("Sequencer halt (liveness failure)"), Some(IncidentClass::SequencerHalt));
        assert_eq!(class("Bridge pauses due to risk"), Some(IncidentClass::BridgePauseRisk));
        assert_eq!(class("L2 downtime or severe degradation"), Some(IncidentClass::L2Downtime));
        assert_eq!(class("Gas token depeg"), None);
    }

    #[test]
    fn compress_examples() {
        assert_eq!(compress(IncidentClass::SequencerHalt), CompressedIncidentType::SequencerDisruption);
        assert_eq!(compress(IncidentClass::WithdrawalFailure), CompressedIncidentType::BridgeOrWithdrawal);
        assert_eq!(compress(IncidentClass::ExploitUserRisk), CompressedIncidentType::ExploitOrSecurity);
        assert_eq!(
            compress(IncidentClass::CensorshipForcedInclusionFailure),
            CompressedIncidentType::CensorshipOrForcedInclusion
        );
    }

    const HEADER: &str = "name,date,link,incident_type\n";

    #[test]
    fn duplicate_row_collapses() {
        let row = "Base,2023-09-05,https://status.base.org/incidents/x,Sequencer outage (downtime)\n";
        let p = parse_incidents(&format!("{HEADER}{row}{row}")).unwrap();
        assert_eq!(p.records.len(), 1);
        assert_eq!(p.duplicates_removed, 1);
    }

    #[test]
    fn same_day_rows_with_different_links_kept() {
        let text = format!(
            "{HEADER}Base,2023-09-05,https://x.com/BuildOnBase/status/1,Sequencer outage (downtime)\n\
             Base,2023-09-05,https://status.base.org/incidents/n3q0,Sequencer outage (downtime)\n"
        );
        assert_eq!(parse_incidents(&text).unwrap().records.len(), 2);
    }

    #[test]
    fn bad_rows_rejected_with_line() {
        let text = format!(
            "{HEADER}Base,2023-13-05,https://a.io/x,Sequencer halt\n,2023-01-01,https://a.io/y,Sequencer halt\nOk,2024-01-01,https://a.io/z,Sequencer halt\n"
        );
        let p = parse_incidents(&text).unwrap();
        assert_eq!(p.records.len(), 1);
        assert_eq!(p.rejected[0].line, 2);
        assert!(p.rejected[0].reason.starts_with("bad-date"));
        assert_eq!(p.rejected[1], RowRejection { line: 3, reason: "empty-project".into() });
    }

    #[test]
    fn tsv_and_source_kind() {
        let text = "name\tdate\tlink\tincident_type\nFoo\t2024-01-01\thttps://l2beat.com/scaling/projects/foo\tSequencer halt\n";
        let p = parse_incidents(text).unwrap();
        assert_eq!(p.records[0].source_kind, SourceKind::L2beat);
    }

    #[test]
    fn missing_column() {
        assert!(matches!(
            parse_incidents("name,date,incident_type\nA,2024-01-01,Sequencer halt\n"),
            Err(IncidentError::MissingColumn("link"))
        ));
    }

    #[test]
    fn empty_input() {
        let p = parse_incidents("").unwrap();
        assert!(p.records.is_empty());
        let d = distribution(&p.records);
        assert_eq!(d.total, 0);
        assert!(d.rows.iter().all(|r| r.share.is_none()));
        assert!(d.dominant().is_empty());
    }

    #[test]
    fn unmapped_reported_separately() {
        let text = format!("{HEADER}A,2024-01-01,https://a.io/1,Gas token depeg\nB,2024-01-02,https://a.io/2,Sequencer halt\n");
        let p = parse_incidents(&text).unwrap();
        assert_eq!(p.records.len(), 2);
        assert!(p.warnings.iter().any(|w| w.code == "unmapped-incident-type"));
        let d = distribution(&p.records);
        assert_eq!(d.total, 1);
        assert_eq!(d.unmapped, 1);
        assert_eq!(d.row(CompressedIncidentType::SequencerDisruption).share, Some(Share::FULL));
    }

    #[test]
    fn single_record_is_full_share() {
        let p = parse_incidents(&format!("{HEADER}A,2024-01-01,https://a.io/1,Exploit or security issue with user risk\n")).unwrap();
        let d = distribution(&p.records);
        for r in &d.rows {
            if r.incident_type == CompressedIncidentType::ExploitOrSecurity {
                assert_eq!((r.count, r.share), (1, Some(Share::FULL)));
            } else {
                assert_eq!((r.count, r.share), (0, Some(Share::from_tenths(0))));
            }
        }
    }
}
