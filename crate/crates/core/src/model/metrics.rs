use serde::{Deserialize, Serialize};

use super::secs::Seconds;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WithdrawalLatency {
    pub user: String,
    pub withdrawal: u64,
    pub latency: Seconds,
}

/// User-facing harm measured over one simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmMetrics {
    /// One entry per completed withdrawal, in completion order.
    pub withdrawal_latency: Vec<WithdrawalLatency>,
    /// Total time during which at least one pending withdrawal was blocked.
    pub frozen_funds_duration: Seconds,
    /// Longest delay between submission and inclusion for a transaction the
    /// sequencer would not admit.
    pub censorship_window: Seconds,
    /// Share of balance holders at upgrade announcement who had fully
    /// exited by activation. `None` when no upgrade ran or nobody held funds.
    pub exit_coverage_before_upgrade: Option<f64>,
    pub funds_conserved: bool,
    pub conservation_violations: u64,
    /// Withdrawals still pending at the horizon.
    pub pending_withdrawals: u64,
}

impl Default for HarmMetrics {
    fn default() -> Self {
        Self {
            withdrawal_latency: Vec::new(),
            frozen_funds_duration: 0,
            censorship_window: 0,
            exit_coverage_before_upgrade: None,
            funds_conserved: true,
            conservation_violations: 0,
            pending_withdrawals: 0,
        }
    }
}

impl HarmMetrics {
    pub fn max_withdrawal_latency(&self) -> Option<Seconds> {
        self.withdrawal_latency.iter().map(|w| w.latency).max()
    }
}
