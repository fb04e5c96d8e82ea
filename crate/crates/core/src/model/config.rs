use serde::{Deserialize, Serialize};

use super::secs::{self, Seconds, DAY, HOUR};
use super::text_enum;

text_enum! {
    pub enum ProofSystem: "proof system" {
        Optimistic => "optimistic",
        Zk => "zk",
    }
}

text_enum! {
    pub enum SequencerTopology: "sequencer topology" {
        Centralized => "centralized",
        Shared => "shared",
        Permissionless => "permissionless",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequencerConfig {
    pub topology: SequencerTopology,
    /// Delay between the end of an outage and the resumption of ordinary
    /// admission. The L1 forced queue is drained without this delay.
    #[serde(with = "secs", default)]
    pub recovery_latency: Seconds,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcedInclusion {
    pub enabled: bool,
    #[serde(with = "secs")]
    pub timeout: Seconds,
    /// Whether ordinary users can actually exercise the path. A nominal but
    /// unusable mechanism has `enabled = true, usable = false`.
    pub usable: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EscapeHatch {
    pub enabled: bool,
    /// A non-disableable hatch keeps working through governance bridge pauses.
    pub non_disableable: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DaMode {
    Onchain,
    External {
        attestation_quorum: f64,
        withholding_possible: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum UpgradePolicy {
    Instant,
    Timelocked {
        #[serde(with = "secs")]
        window: Seconds,
    },
}

impl UpgradePolicy {
    /// Time between announcement and activation.
    pub fn exit_window(&self) -> Seconds {
        match self {
            UpgradePolicy::Instant => 0,
            UpgradePolicy::Timelocked { window } => *window,
        }
    }
}

/// ZK provers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProverSet {
    pub count: u32,
    pub permissionless: bool,
}

/// Fraud-proof challengers of an optimistic rollup. With
/// `permissionless = false` only `count` whitelisted parties may challenge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChallengerSet {
    pub count: u32,
    pub permissionless: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("timelocked upgrade window must be positive")]
    ZeroTimelock,
    #[error("optimistic rollups need a positive challenge window")]
    ZeroChallengeWindow,
    #[error("forced inclusion cannot be usable while disabled")]
    UsableButDisabled,
    #[error("enabled forced inclusion needs a positive timeout")]
    ZeroForcedTimeout,
    #[error("{0} must be a positive count")]
    ZeroCount(&'static str),
    #[error("attestation quorum {0} outside (0, 1]")]
    BadQuorum(String),
}

/// Operator and governance parameterization of one rollup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConfig")]
pub struct RollupConfig {
    pub proof_system: ProofSystem,
    pub sequencer: SequencerConfig,
    pub proposer_whitelist: bool,
    pub proposer_count: u32,
    pub forced_inclusion: ForcedInclusion,
    pub escape_hatch: EscapeHatch,
    pub da_mode: DaMode,
    pub upgrade_policy: UpgradePolicy,
    /// Ignored for ZK rollups.
    #[serde(with = "secs")]
    pub challenge_window: Seconds,
    /// Ignored for ZK rollups.
    pub challengers: ChallengerSet,
    /// Ignored for optimistic rollups.
    pub prover_set: ProverSet,
    pub state_validation_enforced: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    proof_system: ProofSystem,
    sequencer: SequencerConfig,
    proposer_whitelist: bool,
    proposer_count: u32,
    forced_inclusion: ForcedInclusion,
    escape_hatch: EscapeHatch,
    da_mode: DaMode,
    upgrade_policy: UpgradePolicy,
    #[serde(with = "secs", default = "default_challenge")]
    challenge_window: Seconds,
    #[serde(default = "single_challenger")]
    challengers: ChallengerSet,
    #[serde(default = "single_prover")]
    prover_set: ProverSet,
    state_validation_enforced: bool,
}

fn default_challenge() -> Seconds {
    7 * DAY
}

fn single_challenger() -> ChallengerSet {
    ChallengerSet {
        count: 1,
        permissionless: false,
    }
}

fn single_prover() -> ProverSet {
    ProverSet {
        count: 1,
        permissionless: false,
    }
}

impl TryFrom<RawConfig> for RollupConfig {
    type Error = ConfigError;

    fn try_from(r: RawConfig) -> Result<Self, ConfigError> {
        let c = RollupConfig {
            proof_system: r.proof_system,
            sequencer: r.sequencer,
            proposer_whitelist: r.proposer_whitelist,
            proposer_count: r.proposer_count,
            forced_inclusion: r.forced_inclusion,
            escape_hatch: r.escape_hatch,
            da_mode: r.da_mode,
            upgrade_policy: r.upgrade_policy,
            challenge_window: r.challenge_window,
            challengers: r.challengers,
            prover_set: r.prover_set,
            state_validation_enforced: r.state_validation_enforced,
        };
        c.validate()?;
        Ok(c)
    }
}

impl Default for RollupConfig {
    /// A fully centralized optimistic rollup: one sequencer, one
    /// whitelisted proposer and challenger, no forced inclusion, no escape
    /// hatch, instantly upgradable contracts.
    fn default() -> Self {
        Self {
            proof_system: ProofSystem::Optimistic,
            sequencer: SequencerConfig {
                topology: SequencerTopology::Centralized,
                recovery_latency: 0,
            },
            proposer_whitelist: true,
            proposer_count: 1,
            forced_inclusion: ForcedInclusion {
                enabled: false,
                timeout: 24 * HOUR,
                usable: false,
            },
            escape_hatch: EscapeHatch {
                enabled: false,
                non_disableable: false,
            },
            da_mode: DaMode::Onchain,
            upgrade_policy: UpgradePolicy::Instant,
            challenge_window: default_challenge(),
            challengers: single_challenger(),
            prover_set: single_prover(),
            state_validation_enforced: true,
        }
    }
}

impl RollupConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if let UpgradePolicy::Timelocked { window: 0 } = self.upgrade_policy {
            return Err(ConfigError::ZeroTimelock);
        }
        if self.proof_system == ProofSystem::Optimistic && self.challenge_window == 0 {
            return Err(ConfigError::ZeroChallengeWindow);
        }
        if self.forced_inclusion.usable && !self.forced_inclusion.enabled {
            return Err(ConfigError::UsableButDisabled);
        }
        if self.forced_inclusion.enabled && self.forced_inclusion.timeout == 0 {
            return Err(ConfigError::ZeroForcedTimeout);
        }
        if self.proposer_count == 0 {
            return Err(ConfigError::ZeroCount("proposer_count"));
        }
        if self.prover_set.count == 0 {
            return Err(ConfigError::ZeroCount("prover_set.count"));
        }
        if self.challengers.count == 0 {
            return Err(ConfigError::ZeroCount("challengers.count"));
        }
        if let DaMode::External {
            attestation_quorum, ..
        } = self.da_mode
        {
            if !(attestation_quorum > 0.0 && attestation_quorum <= 1.0) {
                return Err(ConfigError::BadQuorum(attestation_quorum.to_string()));
            }
        }
        Ok(())
    }

    /// Usable forced inclusion, i.e. a working path around the sequencer.
    pub fn forced_path_usable(&self) -> bool {
        self.forced_inclusion.enabled && self.forced_inclusion.usable
    }

    /// Whether data can be withheld from users at all.
    pub fn da_withholding_possible(&self) -> bool {
        matches!(
            self.da_mode,
            DaMode::External {
                withholding_possible: true,
                ..
            }
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid_and_round_trips() {
        let c = RollupConfig::default();
        c.validate().unwrap();
        let back: RollupConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn invariants_enforced() {
        let mut c = RollupConfig::default();
        c.forced_inclusion.usable = true;
        assert_eq!(c.validate(), Err(ConfigError::UsableButDisabled));

        let mut c = RollupConfig::default();
        c.upgrade_policy = UpgradePolicy::Timelocked { window: 0 };
        assert_eq!(c.validate(), Err(ConfigError::ZeroTimelock));

        let mut c = RollupConfig::default();
        c.challenge_window = 0;
        assert_eq!(c.validate(), Err(ConfigError::ZeroChallengeWindow));
        c.proof_system = ProofSystem::Zk;
        assert_eq!(c.validate(), Ok(()));
    }

    #[test]
    fn parses_human_durations() {
        let json = r#"{
            "proof_system": "optimistic",
            "sequencer": {"topology": "centralized"},
            "proposer_whitelist": true,
            "proposer_count": 1,
            "forced_inclusion": {"enabled": true, "timeout": "24h", "usable": true},
            "escape_hatch": {"enabled": false, "non_disableable": false},
            "da_mode": {"mode": "external", "attestation_quorum": 0.67, "withholding_possible": true},
            "upgrade_policy": {"kind": "timelocked", "window": "30d"},
            "challenge_window": "7d",
            "state_validation_enforced": true
        }"#;
        let c: RollupConfig = serde_json::from_str(json).unwrap();
        assert_eq!(c.upgrade_policy.exit_window(), 30 * DAY);
        assert_eq!(c.forced_inclusion.timeout, 24 * HOUR);
        assert!(c.da_withholding_possible());

        let bad = json.replace(r#""usable": true"#, r#""usable": true, "relayers": 3"#);
        assert!(serde_json::from_str::<RollupConfig>(&bad).is_err());
    }
}
