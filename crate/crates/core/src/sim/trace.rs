//! Trace events and the metrics derived from them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::model::secs::Seconds;
use crate::model::{HarmMetrics, WithdrawalLatency};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub time: Seconds,
    pub entity: String,
    pub kind: String,
    pub payload: Value,
}

impl TraceEvent {
    fn u64(&self, key: &str) -> Option<u64> {
        self.payload.get(key).and_then(Value::as_u64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimTrace {
    pub events: Vec<TraceEvent>,
    pub metrics: HarmMetrics,
}

impl SimTrace {
    pub fn from_events(events: Vec<TraceEvent>) -> Self {
        let metrics = metrics(&events);
        Self { events, metrics }
    }

    /// One JSON object per line.
    pub fn to_ndjson(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&serde_json::to_string(e).expect("trace events serialize"));
            out.push('\n');
        }
        out
    }

    pub fn of_kind<'a>(&'a self, kind: &'a str) -> impl Iterator<Item = &'a TraceEvent> + 'a {
        self.events.iter().filter(move |e| e.kind == kind)
    }
}

/// Aggregates harm metrics from trace events alone.
pub fn metrics(events: &[TraceEvent]) -> HarmMetrics {
    let mut m = HarmMetrics::default();
    let mut freeze_since: Option<Seconds> = None;
    let mut end = None;
    for e in events {
        match e.kind.as_str() {
            "withdrawal-completed" => m.withdrawal_latency.push(WithdrawalLatency {
                user: e.entity.clone(),
                withdrawal: e.u64("withdrawal").unwrap_or_default(),
                latency: e.time - e.u64("initiated_at").unwrap_or(e.time),
            }),
            "tx-included" if e.payload.get("affected") == Some(&Value::Bool(true)) => {
                let delay = e.time - e.u64("submitted_at").unwrap_or(e.time);
                m.censorship_window = m.censorship_window.max(delay);
            }
            "freeze-start" => freeze_since = Some(e.time),
            "freeze-end" => {
                if let Some(s) = freeze_since.take() {
                    m.frozen_funds_duration += e.time - s;
                }
            }
            "upgrade-activated" => {
                let holders = e.u64("holders").unwrap_or_default();
                if holders > 0 {
                    let c = e.u64("exited").unwrap_or_default() as f64 / holders as f64;
                    m.exit_coverage_before_upgrade = Some(m.exit_coverage_before_upgrade.map_or(c, |p: f64| p.min(c)));
                }
            }
            "run-end" => {
                end = Some(e.time);
                m.funds_conserved = e.payload.get("funds_conserved") != Some(&Value::Bool(false));
                m.conservation_violations = e.u64("conservation_violations").unwrap_or_default();
                m.pending_withdrawals = e.u64("pending_withdrawals").unwrap_or_default();
            }
            _ => {}
        }
    }
    if let (Some(s), Some(t)) = (freeze_since, end) {
        m.frozen_funds_duration += t - s;
    }
    m
}

/// Counts events per kind, for summaries.
pub fn kind_counts(events: &[TraceEvent]) -> BTreeMap<&str, usize> {
    let mut out = BTreeMap::new();
    for e in events {
        *out.entry(e.kind.as_str()).or_default() += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn ev(time: Seconds, kind: &str, payload: Value) -> TraceEvent {
        TraceEvent {
            time,
            entity: "u".into(),
            kind: kind.into(),
            payload,
        }
    }

    #[test]
    fn empty_trace_zero_metrics() {
        assert_eq!(metrics(&[]), HarmMetrics::default());
    }

    #[test]
    fn freeze_intervals_sum_and_close_at_end() {
        let m = metrics(&[
            ev(10, "freeze-start", json!({})),
            ev(30, "freeze-end", json!({})),
            ev(50, "freeze-start", json!({})),
            ev(100, "run-end", json!({"funds_conserved": true, "conservation_violations": 0, "pending_withdrawals": 1})),
        ]);
        assert_eq!(m.frozen_funds_duration, 70);
        assert_eq!(m.pending_withdrawals, 1);
    }

    #[test]
    fn censorship_counts_affected_only() {
        let m = metrics(&[
            ev(500, "tx-included", json!({"submitted_at": 0, "affected": false})),
            ev(300, "tx-included", json!({"submitted_at": 100, "affected": true})),
        ]);
        assert_eq!(m.censorship_window, 200);
    }
}
