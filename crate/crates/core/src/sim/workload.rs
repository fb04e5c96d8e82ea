//! User action schedules, explicit or generated from a seed.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::plan::{Injection, InjectionKind};
use crate::model::secs::{self, Seconds, DAY, HOUR};
use crate::model::{DaMode, ForcedInclusion, IncidentClass, ProofSystem, RollupConfig};

/// A transaction executed on L2.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum L2Tx {
    Transfer { to: String, amount: u64 },
    Withdraw { amount: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Action {
    /// Lock on L1 and mint on L2.
    Deposit { amount: u64 },
    Transfer { to: String, amount: u64 },
    /// Start a withdrawal through the sequencer.
    Withdraw { amount: u64 },
    /// Submit a transaction through the L1 forced queue.
    ForceInclude { tx: L2Tx },
    /// Exit the whole balance through the escape hatch.
    Escape,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserAction {
    #[serde(with = "secs")]
    pub time: Seconds,
    pub user: String,
    #[serde(flatten)]
    pub action: Action,
}

impl UserAction {
    pub fn new(time: Seconds, user: impl Into<String>, action: Action) -> Self {
        Self {
            time,
            user: user.into(),
            action,
        }
    }
}

/// Shape of a generated workload.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomWorkload {
    pub users: u32,
    pub actions: u32,
    /// Actions fall in `[0, span)`.
    #[serde(with = "secs")]
    pub span: Seconds,
}

/// Every user deposits once early on, then random transfers, withdrawals,
/// forced transactions and occasional escapes follow.
pub fn random_workload(spec: &RandomWorkload, rng: &mut impl Rng) -> Vec<UserAction> {
    let users: Vec<String> = (0..spec.users.max(1)).map(|i| format!("u{i}")).collect();
    let span = spec.span.max(1);
    let mut out: Vec<UserAction> = users
        .iter()
        .map(|u| UserAction::new(rng.gen_range(0..span / 4 + 1), u.clone(), Action::Deposit { amount: rng.gen_range(1..=1_000) }))
        .collect();
    for _ in 0..spec.actions {
        let user = users.choose(rng).expect("at least one user").clone();
        let time = rng.gen_range(0..span);
        let amount = rng.gen_range(1..=400);
        let to = users.choose(rng).expect("at least one user").clone();
        let action = match rng.gen_range(0..100) {
            0..=24 => Action::Deposit { amount },
            25..=54 => Action::Transfer { to, amount },
            55..=84 => Action::Withdraw { amount },
            85..=94 => Action::ForceInclude {
                tx: if rng.gen_bool(0.5) {
                    L2Tx::Withdraw { amount }
                } else {
                    L2Tx::Transfer { to, amount }
                },
            },
            _ => Action::Escape,
        };
        out.push(UserAction::new(time, user, action));
    }
    out.sort_by_key(|a| a.time);
    out
}

/// Random configuration, non-exploit injections and workload for
/// property checks. Everything derives from `seed`.
pub fn random_case(seed: u64, horizon: Seconds) -> (RollupConfig, Vec<Injection>, Vec<UserAction>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut config = RollupConfig::default();
    if rng.gen_bool(0.5) {
        config.proof_system = ProofSystem::Zk;
        config.prover_set.count = rng.gen_range(1..=3);
    }
    if rng.gen_bool(0.5) {
        config.forced_inclusion = ForcedInclusion {
            enabled: true,
            timeout: rng.gen_range(1..=24) * HOUR,
            usable: rng.gen_bool(0.8),
        };
    }
    config.escape_hatch.enabled = rng.gen_bool(0.5);
    config.escape_hatch.non_disableable = rng.gen_bool(0.5);
    config.challenge_window = rng.gen_range(1..=7) * DAY;
    config.proposer_whitelist = rng.gen_bool(0.7);
    config.proposer_count = rng.gen_range(1..=3);
    config.sequencer.recovery_latency = rng.gen_range(0..=2) * HOUR;
    if rng.gen_bool(0.3) {
        config.da_mode = DaMode::External {
            attestation_quorum: 0.67,
            withholding_possible: true,
        };
    }

    let mut kinds: Vec<InjectionKind> = IncidentClass::ALL
        .iter()
        .filter(|c| **c != IncidentClass::ExploitUserRisk)
        .map(|c| InjectionKind::from(*c))
        .collect();
    if matches!(config.da_mode, DaMode::External { .. }) {
        kinds.push(InjectionKind::DaWithholding);
    }
    let plan = (0..rng.gen_range(0..=3))
        .map(|_| {
            let kind = *kinds.choose(&mut rng).expect("non-empty");
            let start = rng.gen_range(0..horizon);
            let duration = rng.gen_range(HOUR..=3 * DAY);
            let params = match kind {
                InjectionKind::CensorshipForcedInclusionFailure => serde_json::json!({
                    "targets": [format!("u{}", rng.gen_range(0..4))],
                    "forced_path_broken": rng.gen_bool(0.3),
                }),
                InjectionKind::SequencerPerformanceDegradation => serde_json::json!({"factor": rng.gen_range(1..=50)}),
                _ => serde_json::Value::Null,
            };
            Injection::new(kind, start, duration).with_params(params)
        })
        .collect();
    let shape = RandomWorkload {
        users: rng.gen_range(2..=8),
        actions: rng.gen_range(10..=60),
        span: horizon,
    };
    let workload = random_workload(&shape, &mut rng);
    (config, plan, workload)
}
