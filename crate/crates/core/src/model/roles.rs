//! Stakeholder roles and the three-circle field numbering.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::text_enum;

text_enum! {
    /// Stakeholders of a rollup deployment, in role-table order.
    pub enum Stakeholder: "stakeholder" {
        EndUser => "end-user",
        AppDeveloperAsUser => "app-developer-as-user",
        IndependentValidatorWatcher => "independent-validator-watcher",
        RollupOperator => "rollup-operator",
        Sequencer => "sequencer",
        GovernanceGroup => "governance-group",
        RaasProvider => "raas-provider",
        CoreDeveloper => "core-developer",
        L1Developer => "l1-developer",
        IndependentProver => "independent-prover",
    }
}

impl Stakeholder {
    pub fn label(self) -> &'static str {
        match self {
            Stakeholder::EndUser => "End users",
            Stakeholder::AppDeveloperAsUser => "Application developers as users",
            Stakeholder::IndependentValidatorWatcher => "Independent validators or watchers",
            Stakeholder::RollupOperator => "Rollup operators",
            Stakeholder::Sequencer => "Sequencers",
            Stakeholder::GovernanceGroup => "Governance groups (multisigs, security councils)",
            Stakeholder::RaasProvider => "Rollups as a Service providers (RaaS)",
            Stakeholder::CoreDeveloper => "Core developers",
            Stakeholder::L1Developer => "L1 developers",
            Stakeholder::IndependentProver => "Independent provers",
        }
    }
}

text_enum! {
    /// Ordinal role strength: `no < limited < indirect < yes`.
    ///
    /// Hedged table cells map onto their first term: `indirect/no` is
    /// `Indirect`, `limited/no` is `Limited`.
    pub enum RoleFlag: "role flag" {
        No => "no",
        Limited => "limited",
        Indirect => "indirect",
        Yes => "yes",
    }
}

impl RoleFlag {
    /// Parses a role-table cell such as `indirect/no`.
    pub fn from_cell(cell: &str) -> Result<Self, super::ParseEnumError> {
        let head = cell.split('/').next().unwrap_or_default().trim().to_lowercase();
        head.parse().map_err(|_| super::ParseEnumError {
            kind: "role flag",
            input: cell.to_string(),
        })
    }
}

/// `true` iff `flag` reaches `threshold` on the ordinal scale.
pub fn binarize(flag: RoleFlag, threshold: RoleFlag) -> bool {
    flag >= threshold
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RoleAssignment {
    pub risk_exposed: RoleFlag,
    pub beneficiary: RoleFlag,
    pub decision_maker: RoleFlag,
}

impl RoleAssignment {
    pub const fn new(risk_exposed: RoleFlag, beneficiary: RoleFlag, decision_maker: RoleFlag) -> Self {
        Self {
            risk_exposed,
            beneficiary,
            decision_maker,
        }
    }

    pub fn triple(&self, threshold: RoleFlag) -> RoleTriple {
        RoleTriple {
            risk_exposed: binarize(self.risk_exposed, threshold),
            beneficiary: binarize(self.beneficiary, threshold),
            decision_maker: binarize(self.decision_maker, threshold),
        }
    }
}

/// Binarized membership in the three role circles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RoleTriple {
    pub risk_exposed: bool,
    pub beneficiary: bool,
    pub decision_maker: bool,
}

impl RoleTriple {
    pub const fn new(risk_exposed: bool, beneficiary: bool, decision_maker: bool) -> Self {
        Self {
            risk_exposed,
            beneficiary,
            decision_maker,
        }
    }

    pub fn is_empty(&self) -> bool {
        !(self.risk_exposed || self.beneficiary || self.decision_maker)
    }

    /// The seven non-empty triples.
    pub fn non_empty() -> impl Iterator<Item = RoleTriple> {
        (1u8..8).map(|bits| RoleTriple::new(bits & 4 != 0, bits & 2 != 0, bits & 1 != 0))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RoleError {
    #[error("role matrix is missing stakeholder {0}")]
    MissingStakeholder(Stakeholder),
    #[error("role matrix lists stakeholder {0} twice")]
    DuplicateStakeholder(Stakeholder),
    #[error("field number {0} outside 1..=7")]
    FieldOutOfRange(u8),
    #[error("triple (risk={}, benefit={}, decision={}) lies outside every field", .0.risk_exposed, .0.beneficiary, .0.decision_maker)]
    OutsideDiagram(RoleTriple),
    #[error("field table is not a bijection over the seven non-empty triples: {0}")]
    NotBijective(String),
}

/// Stakeholder → role flags, total over every [`Stakeholder`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<Stakeholder, RoleAssignment>")]
pub struct RoleMatrix(BTreeMap<Stakeholder, RoleAssignment>);

impl RoleMatrix {
    pub fn new(
        rows: impl IntoIterator<Item = (Stakeholder, RoleAssignment)>,
    ) -> Result<Self, RoleError> {
        let mut map = BTreeMap::new();
        for (s, a) in rows {
            if map.insert(s, a).is_some() {
                return Err(RoleError::DuplicateStakeholder(s));
            }
        }
        Self::try_from(map)
    }

    pub fn get(&self, s: Stakeholder) -> RoleAssignment {
        self.0[&s]
    }

    pub fn set(&mut self, s: Stakeholder, a: RoleAssignment) {
        self.0.insert(s, a);
    }

    pub fn iter(&self) -> impl Iterator<Item = (Stakeholder, RoleAssignment)> + '_ {
        self.0.iter().map(|(s, a)| (*s, *a))
    }
}

impl TryFrom<BTreeMap<Stakeholder, RoleAssignment>> for RoleMatrix {
    type Error = RoleError;

    fn try_from(map: BTreeMap<Stakeholder, RoleAssignment>) -> Result<Self, Self::Error> {
        if let Some(missing) = Stakeholder::ALL.iter().find(|s| !map.contains_key(s)) {
            return Err(RoleError::MissingStakeholder(*missing));
        }
        Ok(Self(map))
    }
}

/// A region of the three-circle role diagram, numbered 1 through 7.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct EraField(u8);

impl EraField {
    pub fn new(n: u8) -> Result<Self, RoleError> {
        if (1..=7).contains(&n) {
            Ok(Self(n))
        } else {
            Err(RoleError::FieldOutOfRange(n))
        }
    }

    pub fn number(self) -> u8 {
        self.0
    }
}

impl TryFrom<u8> for EraField {
    type Error = RoleError;
    fn try_from(n: u8) -> Result<Self, RoleError> {
        Self::new(n)
    }
}

impl From<EraField> for u8 {
    fn from(f: EraField) -> u8 {
        f.0
    }
}

impl std::fmt::Display for EraField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Field {}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
struct FieldRow {
    risk_exposed: bool,
    beneficiary: bool,
    decision_maker: bool,
    field: EraField,
}

/// Triple → field numbering. Fields 1, 2, 4 and 7 are fixed by the method;
/// 3, 5 and 6 complete the numbering and can be overridden by loading a
/// different table.
const DEFAULT_FIELDS: [(RoleTriple, u8); 7] = [
    (RoleTriple::new(false, true, false), 1),
    (RoleTriple::new(false, true, true), 2),
    (RoleTriple::new(false, false, true), 3),
    (RoleTriple::new(true, true, false), 4),
    (RoleTriple::new(true, true, true), 5),
    (RoleTriple::new(true, false, true), 6),
    (RoleTriple::new(true, false, false), 7),
];

/// A validated bijection between the seven non-empty triples and fields.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<FieldRow>", into = "Vec<FieldRow>")]
pub struct FieldTable {
    rows: Vec<(RoleTriple, EraField)>,
}

impl Default for FieldTable {
    fn default() -> Self {
        Self {
            rows: DEFAULT_FIELDS
                .iter()
                .map(|(t, n)| (*t, EraField(*n)))
                .collect(),
        }
    }
}

impl FieldTable {
    pub fn new(rows: Vec<(RoleTriple, EraField)>) -> Result<Self, RoleError> {
        if rows.len() != 7 {
            return Err(RoleError::NotBijective(format!("{} rows", rows.len())));
        }
        for t in RoleTriple::non_empty() {
            if rows.iter().filter(|(r, _)| *r == t).count() != 1 {
                return Err(RoleError::NotBijective(format!("{t:?} not covered exactly once")));
            }
        }
        for n in 1..=7 {
            if rows.iter().filter(|(_, f)| f.0 == n).count() != 1 {
                return Err(RoleError::NotBijective(format!("field {n} not used exactly once")));
            }
        }
        let mut rows = rows;
        rows.sort_by_key(|(_, f)| *f);
        Ok(Self { rows })
    }

    pub fn assign(&self, triple: RoleTriple) -> Result<EraField, RoleError> {
        self.rows
            .iter()
            .find(|(t, _)| *t == triple)
            .map(|(_, f)| *f)
            .ok_or(RoleError::OutsideDiagram(triple))
    }

    pub fn triple_of(&self, field: EraField) -> RoleTriple {
        self.rows
            .iter()
            .find(|(_, f)| *f == field)
            .map(|(t, _)| *t)
            .expect("table covers every field")
    }
}

impl TryFrom<Vec<FieldRow>> for FieldTable {
    type Error = RoleError;
    fn try_from(rows: Vec<FieldRow>) -> Result<Self, RoleError> {
        Self::new(
            rows.into_iter()
                .map(|r| (RoleTriple::new(r.risk_exposed, r.beneficiary, r.decision_maker), r.field))
                .collect(),
        )
    }
}

impl From<FieldTable> for Vec<FieldRow> {
    fn from(t: FieldTable) -> Self {
        t.rows
            .into_iter()
            .map(|(tr, f)| FieldRow {
                risk_exposed: tr.risk_exposed,
                beneficiary: tr.beneficiary,
                decision_maker: tr.decision_maker,
                field: f,
            })
            .collect()
    }
}
