//! Injection plans and their class-specific parameters.

use std::collections::BTreeSet;

use serde::{Deserialize, Deserializer, Serialize};

use super::SimError;
use crate::model::secs::{self, Seconds};
use crate::model::{text_enum, DaMode, IncidentClass, RollupConfig};

text_enum! {
    /// Incident classes plus data withholding, which only external-DA
    /// rollups can suffer.
    pub enum InjectionKind: "injection kind" {
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
        DaWithholding => "da-withholding",
    }
}

impl From<IncidentClass> for InjectionKind {
    fn from(c: IncidentClass) -> Self {
        c.as_str().parse().expect("every incident class is an injection kind")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Injection {
    pub class: InjectionKind,
    #[serde(with = "secs")]
    pub start: Seconds,
    #[serde(with = "secs")]
    pub duration: Seconds,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub params: serde_json::Value,
}

impl Injection {
    pub fn new(class: impl Into<InjectionKind>, start: Seconds, duration: Seconds) -> Self {
        Self {
            class: class.into(),
            start,
            duration,
            params: serde_json::Value::Null,
        }
    }

    pub fn with_params(mut self, params: serde_json::Value) -> Self {
        self.params = params;
        self
    }

    pub fn end(&self) -> Seconds {
        self.start.saturating_add(self.duration)
    }
}

/// How many members of a set an injection takes down.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Down {
    All,
    Count(u32),
}

impl Down {
    pub fn of(self, total: u32) -> u32 {
        match self {
            Down::All => total,
            Down::Count(n) => n.min(total),
        }
    }
}

impl<'de> Deserialize<'de> for Down {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            N(u32),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::N(n) => Ok(Down::Count(n)),
            Raw::S(s) if s == "all" => Ok(Down::All),
            Raw::S(s) => Err(serde::de::Error::custom(format!("expected a count or \"all\", got `{s}`"))),
        }
    }
}

/// Validated effect of one injection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Perturbation {
    /// Sequencer admits nothing.
    Outage,
    /// Batch and root posting stop; admission continues.
    Halt,
    /// Admission latency is multiplied by `factor`.
    Degradation { factor: u64 },
    /// Canonical bridge paused: no deposits, no claims.
    BridgePause,
    /// Admission and posting both stop.
    Downtime,
    /// Root acceptance stalls until the injection ends.
    AcceptanceStall,
    WithdrawalFailure { proposers_down: Down, provers_down: Down },
    Censorship { targets: BTreeSet<String>, forced_path_broken: bool },
    InvalidRoot { amount: Option<u64>, challengers_down: Down },
    DataWithheld,
}

impl Perturbation {
    pub fn stops_admission(&self) -> bool {
        matches!(self, Perturbation::Outage | Perturbation::Downtime)
    }

    pub fn stops_posting(&self) -> bool {
        matches!(self, Perturbation::Halt | Perturbation::Downtime)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NoParams {}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DegradationParams {
    #[serde(default = "default_factor")]
    factor: u64,
}

fn default_factor() -> u64 {
    10
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FailureParams {
    proposers_down: Option<Down>,
    provers_down: Option<Down>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CensorshipParams {
    #[serde(default)]
    targets: BTreeSet<String>,
    #[serde(default)]
    forced_path_broken: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExploitParams {
    amount: Option<u64>,
    challengers_down: Option<Down>,
}

fn params<T: serde::de::DeserializeOwned>(inj: &Injection) -> Result<T, SimError> {
    let value = match &inj.params {
        serde_json::Value::Null => serde_json::json!({}),
        v => v.clone(),
    };
    serde_json::from_value(value).map_err(|e| SimError::InvalidPlan(format!("{} params: {e}", inj.class)))
}

pub(crate) fn perturbation(inj: &Injection, config: &RollupConfig) -> Result<Perturbation, SimError> {
    use InjectionKind as K;
    Ok(match inj.class {
        K::SequencerOutage => params::<NoParams>(inj).map(|_| Perturbation::Outage)?,
        K::SequencerHalt => params::<NoParams>(inj).map(|_| Perturbation::Halt)?,
        K::SequencerPerformanceDegradation => {
            let p: DegradationParams = params(inj)?;
            if p.factor == 0 {
                return Err(SimError::ClassParamMismatch {
                    class: inj.class,
                    reason: "factor must be at least 1".into(),
                });
            }
            Perturbation::Degradation { factor: p.factor }
        }
        K::BridgeHalt | K::BridgePauseRisk => params::<NoParams>(inj).map(|_| Perturbation::BridgePause)?,
        K::L2Downtime => params::<NoParams>(inj).map(|_| Perturbation::Downtime)?,
        K::WithdrawalDelays => params::<NoParams>(inj).map(|_| Perturbation::AcceptanceStall)?,
        K::WithdrawalFailure => {
            let p: FailureParams = params(inj)?;
            Perturbation::WithdrawalFailure {
                proposers_down: p.proposers_down.unwrap_or(Down::All),
                provers_down: p.provers_down.unwrap_or(Down::Count(0)),
            }
        }
        K::CensorshipForcedInclusionFailure => {
            let p: CensorshipParams = params(inj)?;
            Perturbation::Censorship {
                targets: p.targets,
                forced_path_broken: p.forced_path_broken,
            }
        }
        K::ExploitUserRisk => {
            let p: ExploitParams = params(inj)?;
            Perturbation::InvalidRoot {
                amount: p.amount,
                challengers_down: p.challengers_down.unwrap_or(Down::Count(0)),
            }
        }
        K::DaWithholding => {
            params::<NoParams>(inj)?;
            match config.da_mode {
                DaMode::External { withholding_possible: true, .. } => Perturbation::DataWithheld,
                _ => {
                    return Err(SimError::ClassParamMismatch {
                        class: inj.class,
                        reason: "data withholding needs external DA that permits it".into(),
                    })
                }
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn unknown_params_rejected() {
        let inj = Injection::new(IncidentClass::SequencerOutage, 0, 10).with_params(json!({"factor": 2}));
        assert!(matches!(
            perturbation(&inj, &RollupConfig::default()),
            Err(SimError::InvalidPlan(_))
        ));
    }

    #[test]
    fn defaults_and_keywords() {
        let c = RollupConfig::default();
        let inj = Injection::new(IncidentClass::WithdrawalFailure, 0, 10);
        assert_eq!(
            perturbation(&inj, &c).unwrap(),
            Perturbation::WithdrawalFailure { proposers_down: Down::All, provers_down: Down::Count(0) }
        );
        let inj = Injection::new(IncidentClass::ExploitUserRisk, 0, 10).with_params(json!({"challengers_down": "all"}));
        assert_eq!(
            perturbation(&inj, &c).unwrap(),
            Perturbation::InvalidRoot { amount: None, challengers_down: Down::All }
        );
    }

    #[test]
    fn withholding_needs_external_da() {
        let inj = Injection::new(InjectionKind::DaWithholding, 0, 10);
        assert!(matches!(
            perturbation(&inj, &RollupConfig::default()),
            Err(SimError::ClassParamMismatch { .. })
        ));
        let mut c = RollupConfig::default();
        c.da_mode = DaMode::External { attestation_quorum: 0.5, withholding_possible: true };
        assert_eq!(perturbation(&inj, &c).unwrap(), Perturbation::DataWithheld);
    }

    #[test]
    fn zero_factor_rejected() {
        let inj = Injection::new(IncidentClass::SequencerPerformanceDegradation, 0, 10).with_params(json!({"factor": 0}));
        assert!(perturbation(&inj, &RollupConfig::default()).is_err());
    }

    #[test]
    fn class_conversion_covers_all() {
        for c in IncidentClass::ALL {
            assert_eq!(InjectionKind::from(*c).as_str(), c.as_str());
        }
    }
}
