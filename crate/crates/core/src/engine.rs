//! Role classification, field assignment, problem detection and the
//! two-bucket mitigation ordering.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::incidents::IncidentDistribution;
use crate::model::{
    text_enum, CompressedIncidentType, EraField, FieldTable, ProofSystem, RiskDimension, RoleAssignment,
    RoleError, RoleFlag, RoleMatrix, RoleTriple, RollupConfig, SequencerTopology, Share, Stakeholder,
};
use crate::snapshot::PrevalenceTable;

use RoleFlag::{Indirect, Limited, No, Yes};

/// Role table for a fully centralized deployment, as (risk, benefit,
/// decision).
pub const BASELINE_ROLES: [(Stakeholder, RoleAssignment); 10] = [
    (Stakeholder::EndUser, RoleAssignment::new(Yes, Yes, No)),
    (Stakeholder::AppDeveloperAsUser, RoleAssignment::new(Yes, Yes, No)),
    (Stakeholder::IndependentValidatorWatcher, RoleAssignment::new(Yes, Limited, No)),
    (Stakeholder::RollupOperator, RoleAssignment::new(Indirect, Yes, Yes)),
    (Stakeholder::Sequencer, RoleAssignment::new(Indirect, Yes, Yes)),
    (Stakeholder::GovernanceGroup, RoleAssignment::new(Indirect, Yes, Yes)),
    (Stakeholder::RaasProvider, RoleAssignment::new(Indirect, Yes, Yes)),
    (Stakeholder::CoreDeveloper, RoleAssignment::new(Indirect, Indirect, Yes)),
    (Stakeholder::L1Developer, RoleAssignment::new(No, No, Indirect)),
    (Stakeholder::IndependentProver, RoleAssignment::new(Indirect, Yes, No)),
];

pub fn baseline_matrix() -> RoleMatrix {
    RoleMatrix::new(BASELINE_ROLES).expect("baseline covers every stakeholder once")
}

/// Builds the role matrix for `config`.
///
/// Only three adjustments are applied to the baseline:
/// * a permissionless sequencer set holds ordering power only indirectly;
/// * a timelocked upgrade gives end users no decision role, since there is
///   no veto, so it changes nothing;
/// * on zk deployments independent provers exist only when there is more
///   than one prover; otherwise their row is empty.
pub fn classify_roles(config: &RollupConfig) -> RoleMatrix {
    let mut m = baseline_matrix();
    if config.sequencer.topology == SequencerTopology::Permissionless {
        let s = m.get(Stakeholder::Sequencer);
        m.set(
            Stakeholder::Sequencer,
            RoleAssignment::new(s.risk_exposed, s.beneficiary, Indirect),
        );
    }
    if config.proof_system == ProofSystem::Zk && config.prover_set.count <= 1 {
        m.set(Stakeholder::IndependentProver, RoleAssignment::new(No, No, No));
    }
    m
}

/// Binarization threshold and field numbering used by detection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineOptions {
    pub threshold: RoleFlag,
    pub fields: FieldTable,
}

impl Default for EngineOptions {
    fn default() -> Self {
        Self {
            threshold: Yes,
            fields: FieldTable::default(),
        }
    }
}

impl EngineOptions {
    /// Counts `indirect` roles as held.
    pub fn strict() -> Self {
        Self {
            threshold: Indirect,
            ..Self::default()
        }
    }
}

pub fn assign_field(flags: (bool, bool, bool)) -> Result<EraField, RoleError> {
    FieldTable::default().assign(RoleTriple::new(flags.0, flags.1, flags.2))
}

text_enum! {
    pub enum Severity: "severity" {
        Structural => "structural",
        Operational => "operational",
        Informational => "informational",
    }
}

text_enum! {
    pub enum Principle: "principle" {
        Beneficence => "beneficence",
        NonMaleficence => "non-maleficence",
        Integrity => "integrity",
        JusticeFairness => "justice-fairness",
        Accountability => "accountability",
        Competence => "competence",
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Finding {
    pub field: EraField,
    pub stakeholders: BTreeSet<Stakeholder>,
    pub severity: Severity,
    pub principle_tags: BTreeSet<Principle>,
    pub narrative_key: String,
    /// Set on Field-4 findings when neither exit mechanism is available.
    #[serde(default)]
    pub escalated: bool,
}

impl Finding {
    pub fn is_informational(&self) -> bool {
        self.severity == Severity::Informational
    }

    pub fn narrative(&self) -> &'static str {
        narrative(&self.narrative_key).unwrap_or("")
    }
}

const NARRATIVES: &[(&str, &str)] = &[
    (
        "field-2-discretion",
        "These parties profit from the rollup and control its operation or upgrades, yet carry little of the loss when things go wrong.",
    ),
    (
        "field-7-exposure",
        "These parties can lose funds or access but have no say in how the system is run and limited upside from running it.",
    ),
    (
        "field-4-tail-risk",
        "Users benefit and bear risk without control. With no escape hatch and no working forced inclusion path, a halted or hostile operator can trap their funds.",
    ),
    (
        "field-4-mitigated",
        "Users benefit and bear risk without control, but an L1 exit path limits how long an operator failure can hold their funds.",
    ),
    ("field-1-benefit-only", "Benefits without exposure or control."),
    ("field-3-decision-only", "Holds decision power without exposure or benefit."),
    ("field-5-all-roles", "Exposed, benefiting and deciding."),
    ("field-6-exposed-decider", "Exposed and deciding without direct benefit."),
];

pub fn narrative(key: &str) -> Option<&'static str> {
    NARRATIVES.iter().find(|(k, _)| *k == key).map(|(_, t)| *t)
}

/// Groups stakeholders by field and emits one finding per occupied field.
/// Stakeholders whose binarized triple is empty sit outside the diagram and
/// produce nothing.
pub fn detect_problematic(config: &RollupConfig, matrix: &RoleMatrix, opts: &EngineOptions) -> Vec<Finding> {
    let mut by_field: BTreeMap<EraField, BTreeSet<Stakeholder>> = BTreeMap::new();
    for (s, a) in matrix.iter() {
        if let Ok(f) = opts.fields.assign(a.triple(opts.threshold)) {
            by_field.entry(f).or_default().insert(s);
        }
    }
    let has_exit = config.escape_hatch.enabled || config.forced_path_usable();

    by_field
        .into_iter()
        .map(|(field, stakeholders)| {
            use Principle::*;
            let (severity, tags, key, escalated): (_, &[Principle], _, _) = match field.number() {
                2 => (Severity::Structural, &[JusticeFairness, Accountability], "field-2-discretion", false),
                7 => (Severity::Operational, &[NonMaleficence], "field-7-exposure", false),
                4 if !has_exit => (Severity::Operational, &[NonMaleficence, Accountability], "field-4-tail-risk", true),
                4 => (Severity::Informational, &[Accountability], "field-4-mitigated", false),
                1 => (Severity::Informational, &[JusticeFairness], "field-1-benefit-only", false),
                3 => (Severity::Informational, &[], "field-3-decision-only", false),
                5 => (Severity::Informational, &[], "field-5-all-roles", false),
                _ => (Severity::Informational, &[], "field-6-exposed-decider", false),
            };
            Finding {
                field,
                stakeholders,
                severity,
                principle_tags: tags.iter().copied().collect(),
                narrative_key: key.to_string(),
                escalated,
            }
        })
        .collect()
}

text_enum! {
    /// Mitigation catalog identifiers.
    pub enum Mitigation: "mitigation" {
        StrengthenSequencerLiveness => "strengthen-sequencer-liveness",
        OpenProposerAndProofSubmission => "open-proposer-and-proof-submission",
        PublicTestedFallbacks => "public-tested-fallbacks",
        IndependentProversAndFormalVerification => "independent-provers-and-formal-verification",
        TimelockedUpgradesExitWindows => "timelocked-upgrades-exit-windows",
        MandatoryL1StateValidation => "mandatory-l1-state-validation",
        ReduceExternalDaReliance => "reduce-external-da-reliance",
        ScopedEmergencyPowers => "scoped-emergency-powers",
    }
}

impl Mitigation {
    pub fn title(self) -> &'static str {
        match self {
            Mitigation::StrengthenSequencerLiveness => {
                "Harden sequencer liveness and inclusion paths with documented, tested parameters"
            }
            Mitigation::OpenProposerAndProofSubmission => {
                "Let anyone propose state or submit proofs once the designated party lapses"
            }
            Mitigation::PublicTestedFallbacks => "Publish emergency procedures and exercise fallbacks",
            Mitigation::IndependentProversAndFormalVerification => {
                "Run independent proving implementations and formally verify critical code"
            }
            Mitigation::TimelockedUpgradesExitWindows => "Timelock upgrades behind an announced exit window",
            Mitigation::MandatoryL1StateValidation => "Make L1 state validation mandatory",
            Mitigation::ReduceExternalDaReliance => "Reduce reliance on external data availability",
            Mitigation::ScopedEmergencyPowers => "Restrict emergency powers to verifiable onchain faults",
        }
    }
}

fn incident_driven(t: CompressedIncidentType) -> (&'static [Mitigation], &'static [Mitigation]) {
    use Mitigation::*;
    match t {
        CompressedIncidentType::SequencerDisruption => (
            &[StrengthenSequencerLiveness, OpenProposerAndProofSubmission, PublicTestedFallbacks],
            &[],
        ),
        CompressedIncidentType::BridgeOrWithdrawal => (&[OpenProposerAndProofSubmission, PublicTestedFallbacks], &[]),
        CompressedIncidentType::CensorshipOrForcedInclusion => {
            (&[StrengthenSequencerLiveness, PublicTestedFallbacks], &[])
        }
        CompressedIncidentType::ExploitOrSecurity => {
            (&[IndependentProversAndFormalVerification], &[ScopedEmergencyPowers])
        }
    }
}

const PREVALENCE_DRIVEN: [(RiskDimension, Mitigation); 3] = [
    (RiskDimension::ExitWindow, Mitigation::TimelockedUpgradesExitWindows),
    (RiskDimension::StateValidation, Mitigation::MandatoryL1StateValidation),
    (RiskDimension::DataAvailability, Mitigation::ReduceExternalDaReliance),
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PriorityOptions {
    /// A hazard whose prevalence exceeds this share drives a structural item.
    pub prevalence_threshold: Share,
}

impl Default for PriorityOptions {
    fn default() -> Self {
        Self {
            prevalence_threshold: Share::from_tenths(200),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rationale {
    pub mitigation: Mitigation,
    pub driver: String,
    /// Fields of the input findings this item acts on.
    pub addresses: Vec<EraField>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prioritization {
    pub immediate_operational: Vec<Mitigation>,
    pub structural_governance: Vec<Mitigation>,
    pub rationale: Vec<Rationale>,
}

/// Orders mitigations into an incident-driven operational bucket and a
/// prevalence-driven structural bucket.
///
/// The operational bucket follows the most frequent incident type(s) only.
/// The structural bucket follows hazard prevalence regardless of how often
/// the hazard has surfaced as an incident. An item never appears in both;
/// the operational bucket keeps it.
pub fn prioritize(
    findings: &[Finding],
    prevalence: &PrevalenceTable,
    dist: &IncidentDistribution,
    opts: &PriorityOptions,
) -> Prioritization {
    let mut immediate: Vec<Mitigation> = Vec::new();
    let mut structural: Vec<Mitigation> = Vec::new();
    let mut drivers: BTreeMap<Mitigation, String> = BTreeMap::new();
    let push = |list: &mut Vec<Mitigation>, m: Mitigation| {
        if !list.contains(&m) {
            list.push(m);
        }
    };

    let mut incident_structural = Vec::new();
    for t in dist.dominant() {
        let row = dist.row(t);
        let why = format!(
            "{} is the most frequent incident type ({} of {}, {}%)",
            t.label(),
            row.count,
            dist.total,
            row.share.map_or("n/a".into(), |s| s.to_string())
        );
        let (ops, gov) = incident_driven(t);
        for &m in ops {
            push(&mut immediate, m);
            drivers.entry(m).or_insert_with(|| why.clone());
        }
        for &m in gov {
            incident_structural.push(m);
            drivers.entry(m).or_insert_with(|| why.clone());
        }
    }
    for (dim, m) in PREVALENCE_DRIVEN {
        if let Some(share) = prevalence.share(dim) {
            if share > opts.prevalence_threshold && !immediate.contains(&m) {
                push(&mut structural, m);
                drivers.entry(m).or_insert_with(|| {
                    format!("{} hazard present in {share}% of analyzed projects", dim.label())
                });
            }
        }
    }
    for m in incident_structural {
        if !immediate.contains(&m) {
            push(&mut structural, m);
        }
    }

    let fields: BTreeSet<EraField> = findings
        .iter()
        .filter(|f| !f.is_informational())
        .map(|f| f.field)
        .collect();
    let pick = |n: u8| fields.iter().copied().filter(|f| f.number() == n).collect::<Vec<_>>();
    let rationale = immediate
        .iter()
        .map(|m| (m, pick(7).into_iter().chain(pick(4)).collect::<Vec<_>>()))
        .chain(structural.iter().map(|m| (m, pick(2))))
        .map(|(m, addresses)| Rationale {
            mitigation: *m,
            driver: drivers.get(m).cloned().unwrap_or_default(),
            addresses,
        })
        .collect();

    Prioritization {
        immediate_operational: immediate,
        structural_governance: structural,
        rationale,
    }
}
