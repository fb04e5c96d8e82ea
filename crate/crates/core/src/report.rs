//! Cross-checks between hazard prevalence and incident history, and the
//! assembled analysis report.

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::engine::{
    classify_roles, detect_problematic, prioritize, EngineOptions, Finding, Prioritization, PriorityOptions,
};
use crate::incidents::{distribution, IncidentDistribution};
use crate::model::{
    CompressedIncidentType, HarmMetrics, RiskDimension, RoleMatrix, RollupConfig, Share, Warning,
};
use crate::snapshot::{aggregate_prevalence, PrevalenceTable};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Figure {
    pub name: String,
    pub value: Share,
}

/// One comparison between the two signals, with the numbers behind it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossNote {
    pub id: u8,
    pub key: String,
    pub text: String,
    pub figures: Vec<Figure>,
}

fn prevalence_share(p: &PrevalenceTable, d: RiskDimension) -> Option<Share> {
    p.rows.iter().find(|r| r.dimension == d).and_then(|r| r.share)
}

fn incident_share(d: &IncidentDistribution, t: CompressedIncidentType) -> Option<Share> {
    d.rows.iter().find(|r| r.incident_type == t).and_then(|r| r.share)
}

fn figure(name: &str, value: Option<Share>) -> Option<Figure> {
    value.map(|value| Figure {
        name: name.to_string(),
        value,
    })
}

/// Compares prevalence with incident history.
///
/// Notes 1 and 2 need at least one classified incident. Note 3 needs a
/// non-zero exit-window prevalence, note 4 a non-zero state-validation or
/// data-availability prevalence.
pub fn cross_validate(prevalence: &PrevalenceTable, dist: Option<&IncidentDistribution>) -> Vec<CrossNote> {
    let mut notes = Vec::new();
    let nonzero = |s: Option<Share>| s.is_some_and(|s| s.tenths() > 0);
    let seq_prev = prevalence_share(prevalence, RiskDimension::SequencerFailure);
    let prop_prev = prevalence_share(prevalence, RiskDimension::ProposerFailure);
    let ew_prev = prevalence_share(prevalence, RiskDimension::ExitWindow);
    let sv_prev = prevalence_share(prevalence, RiskDimension::StateValidation);
    let da_prev = prevalence_share(prevalence, RiskDimension::DataAvailability);

    if let Some(d) = dist.filter(|d| d.total > 0) {
        let seq = incident_share(d, CompressedIncidentType::SequencerDisruption);
        notes.push(CrossNote {
            id: 1,
            key: "sequencer-liveness".into(),
            text: format!(
                "Sequencer disruptions make up {}% of recorded incidents, while only {}% of projects lack a forced transaction path. \
                 A listed forced path is not evidence that users can exercise it during an outage.",
                show(seq),
                show(seq_prev)
            ),
            figures: [figure("sequencer_disruption_share", seq), figure("sequencer_failure_prevalence", seq_prev)]
                .into_iter()
                .flatten()
                .collect(),
        });
        let bw = incident_share(d, CompressedIncidentType::BridgeOrWithdrawal);
        notes.push(CrossNote {
            id: 2,
            key: "proposer-withdrawal".into(),
            text: format!(
                "Bridge and withdrawal problems account for {}% of incidents; {}% of projects restrict state-root publication \
                 to whitelisted proposers, so a proposer failure stops every withdrawal.",
                show(bw),
                show(prop_prev)
            ),
            figures: [figure("bridge_or_withdrawal_share", bw), figure("proposer_failure_prevalence", prop_prev)]
                .into_iter()
                .flatten()
                .collect(),
        });
    }
    if nonzero(ew_prev) {
        let exploit = dist.and_then(|d| incident_share(d, CompressedIncidentType::ExploitOrSecurity));
        notes.push(CrossNote {
            id: 3,
            key: "exit-window".into(),
            text: format!(
                "{}% of projects can be upgraded without an exit window. Few recorded incidents stem from upgrades, but the hazard is \
                 latent: a single hostile or careless upgrade harms every user who cannot leave first. Severity stays high.",
                show(ew_prev)
            ),
            figures: [figure("exit_window_prevalence", ew_prev), figure("exploit_or_security_share", exploit)]
                .into_iter()
                .flatten()
                .collect(),
        });
    }
    if nonzero(sv_prev) || nonzero(da_prev) {
        notes.push(CrossNote {
            id: 4,
            key: "validation-and-da-observability".into(),
            text: format!(
                "{}% of projects do not enforce state validation on L1 and {}% rely on external data availability. Failures of \
                 either are hard to observe from outside, so a low incident count says little about their risk.",
                show(sv_prev),
                show(da_prev)
            ),
            figures: [figure("state_validation_prevalence", sv_prev), figure("data_availability_prevalence", da_prev)]
                .into_iter()
                .flatten()
                .collect(),
        });
    }
    notes
}

fn show(s: Option<Share>) -> String {
    s.map_or("n/a".into(), |s| s.to_string())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSummary {
    pub scenario: String,
    pub seed: u64,
    pub events: usize,
    pub trace_sha256: String,
    pub metrics: HarmMetrics,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    /// Excluded from `digest`.
    pub generated_at: String,
    pub strict_roles: bool,
    pub inputs: Vec<InputDigest>,
    /// SHA-256 of the report with `generated_at` and `digest` blanked.
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub metadata: Metadata,
    pub prevalence: Option<PrevalenceTable>,
    pub incidents: Option<IncidentDistribution>,
    pub cross_validation: Vec<CrossNote>,
    pub roles: RoleMatrix,
    pub findings: Vec<Finding>,
    pub prioritization: Prioritization,
    pub simulations: Vec<SimSummary>,
    pub warnings: Vec<Warning>,
}

/// Everything a report is built from.
#[derive(Debug, Clone, Default)]
pub struct ReportInput {
    pub prevalence: Option<PrevalenceTable>,
    pub incidents: Option<IncidentDistribution>,
    pub config: RollupConfig,
    pub engine: EngineOptions,
    pub priority: PriorityOptions,
    pub simulations: Vec<SimSummary>,
    pub inputs: Vec<InputDigest>,
    pub warnings: Vec<Warning>,
    pub version: String,
}

pub fn assemble(input: ReportInput, generated_at: DateTime<Utc>) -> Report {
    let roles = classify_roles(&input.config);
    let findings = detect_problematic(&input.config, &roles, &input.engine);
    let empty_prev = aggregate_prevalence(&[]);
    let empty_dist = distribution(&[]);
    let prioritization = prioritize(
        &findings,
        input.prevalence.as_ref().unwrap_or(&empty_prev),
        input.incidents.as_ref().unwrap_or(&empty_dist),
        &input.priority,
    );
    let cross_validation = input
        .prevalence
        .as_ref()
        .map(|p| cross_validate(p, input.incidents.as_ref()))
        .unwrap_or_default();
    let mut report = Report {
        metadata: Metadata {
            tool: "era".into(),
            version: input.version,
            generated_at: generated_at.to_rfc3339_opts(SecondsFormat::Secs, true),
            strict_roles: input.engine.threshold == crate::model::RoleFlag::Indirect,
            inputs: input.inputs,
            digest: String::new(),
        },
        prevalence: input.prevalence,
        incidents: input.incidents,
        cross_validation,
        roles,
        findings,
        prioritization,
        simulations: input.simulations,
        warnings: input.warnings,
    };
    report.metadata.digest = report.compute_digest();
    report
}

impl Report {
    pub fn compute_digest(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        v["metadata"]["generated_at"] = serde_json::Value::Null;
        v["metadata"]["digest"] = serde_json::Value::Null;
        sha256_hex(v.to_string().as_bytes())
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let m = &self.metadata;
        out.push_str(&format!("{} {} report, generated {}\n", m.tool, m.version, m.generated_at));
        out.push_str(&format!("digest {}\n", m.digest));
        for i in &m.inputs {
            out.push_str(&format!("  {} {} sha256:{}\n", i.role, i.path, i.sha256));
        }
        if let Some(p) = &self.prevalence {
            out.push_str("\n== Architectural risk prevalence ==\n");
            out.push_str(&p.render_text());
        }
        if let Some(d) = &self.incidents {
            out.push_str("\n== Incident distribution ==\n");
            out.push_str(&d.render_text());
        }
        if !self.cross_validation.is_empty() {
            out.push_str("\n== Prevalence vs incidents ==\n");
            for n in &self.cross_validation {
                out.push_str(&format!("{}. [{}] {}\n", n.id, n.key, n.text));
            }
        }
        out.push_str("\n== Roles ==\n");
        for (s, a) in self.roles.iter() {
            out.push_str(&format!(
                "  {:<50} risk={:<8} benefit={:<8} decision={}\n",
                s.label(),
                a.risk_exposed,
                a.beneficiary,
                a.decision_maker
            ));
        }
        out.push_str("\n== Findings ==\n");
        for f in &self.findings {
            let who: Vec<&str> = f.stakeholders.iter().map(|s| s.as_str()).collect();
            let tags: Vec<&str> = f.principle_tags.iter().map(|t| t.as_str()).collect();
            out.push_str(&format!(
                "  {} [{}{}] {}\n    {}\n",
                f.field,
                f.severity,
                if f.escalated { ", escalated" } else { "" },
                who.join(", "),
                f.narrative()
            ));
            if !tags.is_empty() {
                out.push_str(&format!("    principles: {}\n", tags.join(", ")));
            }
        }
        out.push_str("\n== Prioritization ==\nImmediate operational:\n");
        for m in &self.prioritization.immediate_operational {
            out.push_str(&format!("  - {m}: {}\n", m.title()));
        }
        out.push_str("Structural governance:\n");
        for m in &self.prioritization.structural_governance {
            out.push_str(&format!("  - {m}: {}\n", m.title()));
        }
        for r in &self.prioritization.rationale {
            out.push_str(&format!("  ({}) {}\n", r.mitigation, r.driver));
        }
        if !self.simulations.is_empty() {
            out.push_str("\n== Simulations ==\n");
            for s in &self.simulations {
                out.push_str(&format!("  {} (seed {}): {}\n", s.scenario, s.seed, metrics_line(&s.metrics)));
            }
        }
        if !self.warnings.is_empty() {
            out.push_str(&format!("\n{} warning(s)\n", self.warnings.len()));
            for w in &self.warnings {
                out.push_str(&format!("  {w}\n"));
            }
        }
        out
    }
}

/// Compact one-line metrics summary.
pub fn metrics_line(m: &HarmMetrics) -> String {
    format!(
        "withdrawals={} max_latency={}s frozen={}s censorship={}s exit_coverage={} conserved={} pending={}",
        m.withdrawal_latency.len(),
        m.max_withdrawal_latency().unwrap_or(0),
        m.frozen_funds_duration,
        m.censorship_window,
        m.exit_coverage_before_upgrade.map_or("n/a".into(), |c| format!("{c:.3}")),
        m.funds_conserved,
        m.pending_withdrawals
    )
}
