//! Deterministic discrete-event model of a single rollup.
//!
//! Users submit transactions to the sequencer or the L1 forced queue. The
//! batcher posts included transactions to L1, the proposer posts state
//! roots over posted batches, and roots are accepted after the challenge
//! window (optimistic) or once a validity proof is verified (zk). Accepted
//! roots finalize after the L1 finality depth, and the withdrawals they
//! cover are then claimed from the bridge.
//!
//! Time is integer seconds. Runs are a pure function of configuration,
//! injection plan, workload and seed.

mod plan;
mod state;
mod trace;
mod workload;

pub use plan::{Down, Injection, InjectionKind, Perturbation};
pub use state::Simulation;
pub use trace::{kind_counts, metrics, SimTrace, TraceEvent};
pub use workload::{random_case, random_workload, Action, L2Tx, RandomWorkload, UserAction};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::secs::{self, Seconds, HOUR, MINUTE};
use crate::model::{ConfigError, RollupConfig};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error("{class} cannot apply: {reason}")]
    ClassParamMismatch { class: InjectionKind, reason: String },
    #[error("escape hatch is disabled")]
    HatchDisabled,
    #[error("escape hatch needs the latest state data, which is being withheld")]
    DataUnavailable,
    #[error("escape hatch is blocked by a bridge pause")]
    BridgePaused,
    #[error("invalid rollup configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("invalid scenario: {0}")]
    Scenario(String),
}

/// Timing constants of the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimParams {
    #[serde(with = "secs")]
    pub block_interval: Seconds,
    /// L1 blocks until a block is treated as final.
    pub finalization_depth: u64,
    #[serde(with = "secs")]
    pub batch_interval: Seconds,
    #[serde(with = "secs")]
    pub proposal_interval: Seconds,
    /// Sequencer delay between receiving and including a transaction.
    #[serde(with = "secs")]
    pub admission_latency: Seconds,
    /// Time for one prover to produce a validity proof.
    #[serde(with = "secs")]
    pub prover_latency: Seconds,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            block_interval: 12,
            finalization_depth: 64,
            batch_interval: 10 * MINUTE,
            proposal_interval: HOUR,
            admission_latency: 2,
            prover_latency: HOUR,
        }
    }
}

impl SimParams {
    pub fn finality_delay(&self) -> Seconds {
        self.block_interval * self.finalization_depth
    }

    /// First L1 block boundary at or after `t`.
    pub fn next_block(&self, t: Seconds) -> Seconds {
        t.div_ceil(self.block_interval) * self.block_interval
    }
}

/// A complete, replayable simulation input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub config: RollupConfig,
    #[serde(default)]
    pub sim: SimParams,
    #[serde(default)]
    pub plan: Vec<Injection>,
    #[serde(default)]
    pub workload: Vec<UserAction>,
    /// Appended to `workload`, generated from `seed`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random_workload: Option<RandomWorkload>,
    /// Times at which an upgrade is triggered under the configured policy.
    #[serde(default, with = "secs_list")]
    pub upgrades: Vec<Seconds>,
    #[serde(default)]
    pub seed: u64,
    #[serde(with = "secs")]
    pub horizon: Seconds,
}

mod secs_list {
    use super::secs;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[u64], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u64>, D::Error> {
        #[derive(Deserialize)]
        struct W(#[serde(with = "secs")] u64);
        Ok(Vec::<W>::deserialize(d)?.into_iter().map(|w| w.0).collect())
    }
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, SimError> {
        serde_json::from_str(text).map_err(|e| SimError::Scenario(e.to_string()))
    }

    /// Explicit workload followed by the seeded random part, time-sorted.
    pub fn full_workload(&self) -> Vec<UserAction> {
        let mut w = self.workload.clone();
        if let Some(spec) = &self.random_workload {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            w.extend(random_workload(spec, &mut rng));
        }
        w.sort_by_key(|a| a.time);
        w
    }

    pub fn build(&self) -> Result<Simulation, SimError> {
        let mut sim = Simulation::new(self.config.clone(), self.sim, self.horizon)?;
        for inj in &self.plan {
            sim.inject(inj.clone())?;
        }
        for at in &self.upgrades {
            sim.trigger_upgrade(*at)?;
        }
        for a in self.full_workload() {
            sim.schedule(a);
        }
        Ok(sim)
    }

    pub fn run(&self) -> Result<SimTrace, SimError> {
        Ok(self.build()?.run())
    }
}

/// Runs one simulation from its parts.
pub fn run(
    config: RollupConfig,
    plan: Vec<Injection>,
    workload: Vec<UserAction>,
    seed: u64,
    horizon: Seconds,
) -> Result<SimTrace, SimError> {
    Scenario {
        name: String::new(),
        config,
        sim: SimParams::default(),
        plan,
        workload,
        random_workload: None,
        upgrades: Vec::new(),
        seed,
        horizon,
    }
    .run()
}
