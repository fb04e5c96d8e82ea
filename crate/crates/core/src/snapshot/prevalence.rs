use serde::{Deserialize, Serialize};

use crate::model::{ProjectRiskProfile, RiskDimension, Share};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrevalenceRow {
    pub dimension: RiskDimension,
    pub potential_risk: String,
    pub flagged_count: u64,
    /// `None` when no projects were analyzed.
    pub share: Option<Share>,
}

/// Per-dimension count and share of projects flagged as hazardous.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrevalenceTable {
    pub total_projects: u64,
    pub rows: Vec<PrevalenceRow>,
}

fn potential_risk(d: RiskDimension) -> &'static str {
    match d {
        RiskDimension::StateValidation => "State roots are not validated on L1; invalid roots can finalize.",
        RiskDimension::ExitWindow => "Contracts upgrade instantly; users get no exit window before an unwanted upgrade.",
        RiskDimension::ProposerFailure => "Only whitelisted proposers publish state roots; their failure freezes withdrawals.",
        RiskDimension::SequencerFailure => "No way to get transactions included while the sequencer is down or censoring.",
        RiskDimension::DataAvailability => "Proofs and state derivation depend on data not published on L1.",
    }
}

/// Counts, per dimension, the projects carrying a flagged entry for it.
/// The fold is order-independent.
pub fn aggregate_prevalence(profiles: &[ProjectRiskProfile]) -> PrevalenceTable {
    let total = profiles.len() as u64;
    let mut counts = [0u64; 5];
    for p in profiles {
        for r in p.risks.iter().filter(|r| r.flagged) {
            counts[r.dimension as usize] += 1;
        }
    }
    PrevalenceTable {
        total_projects: total,
        rows: RiskDimension::ALL
            .iter()
            .map(|d| PrevalenceRow {
                dimension: *d,
                potential_risk: potential_risk(*d).to_string(),
                flagged_count: counts[*d as usize],
                share: Share::round_half_up(counts[*d as usize], total),
            })
            .collect(),
    }
}

impl PrevalenceTable {
    pub fn row(&self, d: RiskDimension) -> &PrevalenceRow {
        self.rows
            .iter()
            .find(|r| r.dimension == d)
            .expect("table has a row per dimension")
    }

    pub fn share(&self, d: RiskDimension) -> Option<Share> {
        self.row(d).share
    }

    /// Aligned columns: Type, Potential risk, Projects, Share.
    pub fn render_text(&self) -> String {
        let type_w = self
            .rows
            .iter()
            .map(|r| r.dimension.label().len())
            .max()
            .unwrap_or(4)
            .max("Type".len());
        let risk_w = self.rows.iter().map(|r| r.potential_risk.len()).max().unwrap_or(14).max(14);
        let total_label = "Total projects analyzed";
        let mut out = format!(
            "{:<type_w$}  {:<risk_w$}  {:>8}  {:>6}\n",
            "Type", "Potential risk", "Projects", "Share"
        );
        out.push_str(&format!("{}\n", "-".repeat(type_w + risk_w + 20)));
        for r in &self.rows {
            out.push_str(&format!(
                "{:<type_w$}  {:<risk_w$}  {:>8}  {:>6}\n",
                r.dimension.label(),
                r.potential_risk,
                r.flagged_count,
                r.share.map_or("n/a".to_string(), |s| format!("{s}%")),
            ));
        }
        out.push_str(&format!("{}\n", "-".repeat(type_w + risk_w + 20)));
        let full = if self.total_projects > 0 { "100.0" } else { "n/a" };
        out.push_str(&format!(
            "{:>w$}  {:>8}  {:>6}\n",
            total_label,
            self.total_projects,
            full,
            w = type_w + risk_w + 2
        ));
        out
    }
}
