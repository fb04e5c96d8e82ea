use std::path::PathBuf;

use era_core::model::secs::{DAY, HOUR};
use era_core::model::{DaMode, IncidentClass, RollupConfig};
use era_core::sim::{self, Action, Injection, InjectionKind, Scenario, SimError, SimParams, SimTrace, Simulation, UserAction};

fn scenario_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/scenarios")
}

fn load(name: &str) -> Scenario {
    let text = std::fs::read_to_string(scenario_dir().join(format!("{name}.json"))).unwrap();
    Scenario::from_json(&text).unwrap()
}

fn run(name: &str) -> SimTrace {
    load(name).run().unwrap()
}

fn times(trace: &SimTrace, kind: &str) -> Vec<u64> {
    trace.of_kind(kind).map(|e| e.time).collect()
}

fn assert_conserved(trace: &SimTrace) {
    assert_eq!(trace.metrics.conservation_violations, 0);
    assert!(trace.metrics.funds_conserved);
}

#[test]
fn forced_inclusion_during_outage() {
    let t = run("sequencer-outage-forced-inclusion");
    // Forced at the outage start (1h); the outage ends at 5h, well before
    // the 24h deadline, and the recovering sequencer drains the queue.
    assert_eq!(times(&t, "tx-included"), vec![5 * HOUR]);
    assert_eq!(t.metrics.censorship_window, 4 * HOUR);
    // Batch at 5h10m, root at 6h, accepted 7d later, final after 64 blocks.
    assert_eq!(times(&t, "withdrawal-completed"), vec![6 * HOUR + 7 * DAY + 768]);
    assert_conserved(&t);
}

#[test]
fn instant_upgrade_gives_no_coverage() {
    let t = run("instant-upgrade");
    assert_eq!(t.metrics.exit_coverage_before_upgrade, Some(0.0));
}

#[test]
fn long_timelock_covers_everyone() {
    let t = run("timelocked-30d-upgrade");
    assert_eq!(t.metrics.exit_coverage_before_upgrade, Some(1.0));
    assert_eq!(t.metrics.withdrawal_latency.len(), 10);
    assert_conserved(&t);
}

#[test]
fn short_timelock_covers_nobody() {
    let t = run("timelocked-3d-upgrade");
    assert_eq!(t.metrics.exit_coverage_before_upgrade, Some(0.0));
    // The withdrawals still complete, just after activation.
    let activation = times(&t, "upgrade-activated")[0];
    assert!(times(&t, "withdrawal-completed").iter().all(|c| *c > activation));
}

#[test]
fn proposer_outage_freezes_withdrawals() {
    let t = run("proposer-outage-freeze");
    let (start, end) = (30 * 60, 30 * 60 + 2 * DAY);
    assert!(t.metrics.frozen_funds_duration >= 2 * DAY);
    assert!(times(&t, "withdrawal-completed").iter().all(|c| !(start..end).contains(c)));
    // First root after recovery is at the next hourly tick.
    assert_eq!(times(&t, "root-posted"), vec![49 * HOUR]);
    assert_conserved(&t);
}

#[test]
fn exploit_rejected_when_validated() {
    let t = run("exploit-validation-enforced");
    assert_eq!(t.of_kind("root-rejected").count(), 1);
    assert_eq!(t.of_kind("invalid-root-finalized").count(), 0);
    assert_conserved(&t);
}

#[test]
fn exploit_finalizes_without_validation() {
    let t = run("exploit-validation-disabled");
    assert_eq!(times(&t, "invalid-root-finalized"), vec![DAY + 7 * DAY + 768]);
    assert!(!t.metrics.funds_conserved);
    assert_eq!(t.metrics.conservation_violations, 0);
}

#[test]
fn exploit_finalizes_when_challengers_down() {
    let t = run("exploit-challengers-down");
    let drained = t.of_kind("invalid-root-finalized").next().unwrap();
    assert_eq!(drained.payload["drained"], 250);
    assert!(!t.metrics.funds_conserved);
}

#[test]
fn escape_hatch_during_outage() {
    let t = run("escape-hatch-outage");
    let done = t.of_kind("escape-completed").next().unwrap();
    assert_eq!(done.time, 2 * HOUR + 768);
    assert_eq!(done.payload["amount"], 100);
    assert_eq!(t.metrics.frozen_funds_duration, 0);
    assert_conserved(&t);
}

#[test]
fn broken_forced_path_waits_for_censorship_end() {
    let t = run("censorship-broken-path");
    let alice = t
        .of_kind("tx-included")
        .find(|e| e.entity == "alice")
        .unwrap();
    assert_eq!(alice.time, HOUR + DAY);
    assert_eq!(t.metrics.censorship_window, HOUR + DAY - 2 * HOUR);
    let bob = t.of_kind("tx-included").find(|e| e.entity == "bob").unwrap();
    assert_eq!(bob.time, 2 * HOUR + 2);
}

#[test]
fn zk_withdrawal_waits_for_proof() {
    let t = run("zk-prover-outage");
    let accepted = times(&t, "root-accepted");
    // Prover back at 24h30m, proof takes an hour, rounded to an L1 block.
    assert_eq!(accepted, vec![DAY + 90 * 60]);
    assert_eq!(times(&t, "withdrawal-completed"), vec![DAY + 90 * 60 + 768]);
    assert_eq!(t.metrics.frozen_funds_duration, DAY + 30 * 60 - HOUR);
}

#[test]
fn withholding_blocks_hatch_until_data_returns() {
    let t = run("da-withholding-escape");
    let rejected: Vec<_> = t.of_kind("escape-rejected").collect();
    assert_eq!(rejected.len(), 1);
    assert!(rejected[0].payload["reason"].as_str().unwrap().contains("withheld"));
    assert_eq!(times(&t, "escape-completed"), vec![2 * DAY + 768]);
}

#[test]
fn random_workload_scenario_conserves() {
    let t = run("random-workload");
    assert_conserved(&t);
    assert!(t.of_kind("deposit").count() >= 6);
}

#[test]
fn every_bundled_scenario_is_deterministic() {
    let mut n = 0;
    for entry in std::fs::read_dir(scenario_dir()).unwrap() {
        let text = std::fs::read_to_string(entry.unwrap().path()).unwrap();
        let s = Scenario::from_json(&text).unwrap();
        let (a, b) = (s.run().unwrap(), s.run().unwrap());
        assert_eq!(a.to_ndjson(), b.to_ndjson(), "{}", s.name);
        n += 1;
    }
    assert!(n >= 10);
}

#[test]
fn plain_withdrawal_takes_a_challenge_window() {
    let workload = vec![
        UserAction::new(0, "a", Action::Deposit { amount: 10 }),
        UserAction::new(0, "a", Action::Withdraw { amount: 10 }),
    ];
    let t = sim::run(RollupConfig::default(), vec![], workload, 0, 10 * DAY).unwrap();
    assert!(t.metrics.withdrawal_latency[0].latency >= 7 * DAY);
}

#[test]
fn zero_horizon_is_empty() {
    let t = sim::run(RollupConfig::default(), vec![], vec![UserAction::new(0, "a", Action::Deposit { amount: 1 })], 0, 0).unwrap();
    assert!(t.events.is_empty());
    assert_eq!(t.metrics, Default::default());
}

#[test]
fn hatch_errors() {
    let mut s = Simulation::new(RollupConfig::default(), SimParams::default(), DAY).unwrap();
    assert!(matches!(s.use_escape_hatch("a"), Err(SimError::HatchDisabled)));

    let mut c = RollupConfig::default();
    c.escape_hatch.enabled = true;
    c.da_mode = DaMode::External { attestation_quorum: 0.5, withholding_possible: true };
    let mut s = Simulation::new(c, SimParams::default(), DAY).unwrap();
    s.inject(Injection::new(InjectionKind::DaWithholding, HOUR, HOUR)).unwrap();
    s.advance_to(HOUR + 1);
    assert!(matches!(s.use_escape_hatch("a"), Err(SimError::DataUnavailable)));
}

#[test]
fn hatch_via_api_during_outage() {
    let mut c = RollupConfig::default();
    c.escape_hatch.enabled = true;
    let mut s = Simulation::new(c, SimParams::default(), 20 * DAY).unwrap();
    s.schedule(UserAction::new(0, "a", Action::Deposit { amount: 7 }));
    s.inject(Injection::new(IncidentClass::SequencerOutage, HOUR, 15 * DAY)).unwrap();
    s.advance_to(2 * HOUR);
    s.use_escape_hatch("a").unwrap();
    let t = s.run();
    assert_eq!(t.of_kind("escape-completed").next().unwrap().time, 2 * HOUR + 768);
}

#[test]
fn plan_errors() {
    let mut s = Simulation::new(RollupConfig::default(), SimParams::default(), DAY).unwrap();
    assert!(matches!(
        s.inject(Injection::new(IncidentClass::SequencerHalt, 2 * DAY, HOUR)),
        Err(SimError::InvalidPlan(_))
    ));
    let bad = r#"{"horizon": "1d", "plan": [{"class": "sequencer-halt", "start": 0, "duration": 5, "params": {"x": 1}}]}"#;
    assert!(matches!(Scenario::from_json(bad).unwrap().run(), Err(SimError::InvalidPlan(_))));
    assert!(matches!(Scenario::from_json(r#"{"horizon": "1d", "bogus": 1}"#), Err(SimError::Scenario(_))));
}
