//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::*;
use era_core::engine::{assign_field, classify_roles, detect_problematic, EngineOptions};
use era_core::incidents::{distribution, parse_incidents};
use era_core::model::secs::{DAY, HOUR};
use era_core::model::{
    CompressedIncidentType, ForcedInclusion, IncidentClass, ProofSystem, RoleFlag, RollupConfig, Stakeholder,
    UpgradePolicy,
};
use era_core::sim::{self, Action, Injection, L2Tx, Scenario, UserAction};
use era_core::snapshot::{aggregate_prevalence, extract_projects, ExtractOptions, SnapshotDocument};

/// Per-criterion runtime limits for the ingestion checks.
const INGEST_LIMIT: Duration = Duration::from_secs(1);
/// Whole-suite runtime limit.
const SUITE_LIMIT: Duration = Duration::from_secs(60);
/// Share tolerance, in tenths of a percentage point.
const SHARE_TOLERANCE_TENTHS: u16 = 1;
/// Slack on the forced-inclusion bound: one L1 block.
const FORCED_SLACK: u64 = 12;
const RANDOM_RUNS: u64 = 1000;

type Check = fn() -> Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn read(path: &str) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

fn criterion_1() -> Result<String, String> {
    let started = Instant::now();
    let parsed = parse_incidents(&read(&fixture("incidents-2022-2025.csv"))).map_err(|e| e.to_string())?;
    let dist = distribution(&parsed.records);
    let elapsed = started.elapsed();

    ensure(parsed.records.len() == 32, || format!("{} records", parsed.records.len()))?;
    let expected = [
        (CompressedIncidentType::SequencerDisruption, 19, 594),
        (CompressedIncidentType::BridgeOrWithdrawal, 6, 188),
        (CompressedIncidentType::ExploitOrSecurity, 4, 125),
        (CompressedIncidentType::CensorshipOrForcedInclusion, 3, 93),
    ];
    for (t, count, tenths) in expected {
        let row = dist.row(t);
        ensure(row.count == count, || format!("{t}: count {} != {count}", row.count))?;
        let share = row.share.ok_or("missing share")?.tenths();
        ensure(share.abs_diff(tenths) <= SHARE_TOLERANCE_TENTHS, || format!("{t}: share {share} vs {tenths}"))?;
    }
    let span = (dist.first_date.map(|d| d.to_string()), dist.last_date.map(|d| d.to_string()));
    ensure(
        span == (Some("2022-06-29".into()), Some("2025-08-09".into())),
        || format!("span {span:?}"),
    )?;
    ensure(elapsed < INGEST_LIMIT, || format!("took {elapsed:?}"))?;
    Ok(format!("32 records, 19/6/4/3, span ok, {elapsed:?}"))
}

fn criterion_2() -> Result<String, String> {
    let started = Instant::now();
    let doc = SnapshotDocument::parse(&read(&fixture("snapshot-fixture.json"))).map_err(|e| e.to_string())?;
    let ex = extract_projects(&doc, &ExtractOptions::default()).map_err(|e| e.to_string())?;
    let table = aggregate_prevalence(&ex.profiles);
    let elapsed = started.elapsed();

    ensure(table.total_projects == 129, || format!("{} projects", table.total_projects))?;
    // Row order: state validation, exit window, proposer failure,
    // sequencer failure, data availability.
    let expected = [(32, "24.8"), (111, "86.0"), (65, "50.4"), (17, "13.2"), (35, "27.1")];
    for (row, (count, share)) in table.rows.iter().zip(expected) {
        ensure(row.flagged_count == count, || format!("{}: {} != {count}", row.dimension, row.flagged_count))?;
        let got = row.share.map(|s| s.to_string()).unwrap_or_default();
        ensure(got == share, || format!("{}: share {got} != {share}", row.dimension))?;
    }
    ensure(elapsed < INGEST_LIMIT, || format!("took {elapsed:?}"))?;
    Ok(format!("111/65/17/35/32 with exact shares, {elapsed:?}"))
}

/// Maps a role-table cell to its flag by its first term.
fn cell(text: &str) -> RoleFlag {
    match text.split('/').next().unwrap() {
        "yes" => RoleFlag::Yes,
        "indirect" => RoleFlag::Indirect,
        "limited" => RoleFlag::Limited,
        "no" => RoleFlag::No,
        other => panic!("cell {other}"),
    }
}

fn criterion_3() -> Result<String, String> {
    for ((r, b, d), field) in [
        ((false, true, true), 2),
        ((true, false, false), 7),
        ((false, true, false), 1),
        ((true, true, false), 4),
    ] {
        let got = assign_field((r, b, d)).map_err(|e| e.to_string())?.number();
        ensure(got == field, || format!("({r},{b},{d}) -> {got}, expected {field}"))?;
    }

    let table = [
        (Stakeholder::EndUser, "yes", "yes", "no"),
        (Stakeholder::AppDeveloperAsUser, "yes", "yes", "no"),
        (Stakeholder::IndependentValidatorWatcher, "yes", "limited/no", "no"),
        (Stakeholder::RollupOperator, "indirect", "yes", "yes"),
        (Stakeholder::Sequencer, "indirect", "yes", "yes"),
        (Stakeholder::GovernanceGroup, "indirect/no", "yes", "yes"),
        (Stakeholder::RaasProvider, "indirect/no", "yes", "yes"),
        (Stakeholder::CoreDeveloper, "indirect/no", "indirect/no", "yes"),
        (Stakeholder::L1Developer, "no", "no", "indirect"),
        (Stakeholder::IndependentProver, "indirect/no", "yes", "no"),
    ];
    let config = RollupConfig::default();
    let matrix = classify_roles(&config);
    ensure(matrix.iter().count() == table.len(), || "stakeholder count".into())?;
    for (s, r, b, d) in table {
        let a = matrix.get(s);
        let want = (cell(r), cell(b), cell(d));
        let got = (a.risk_exposed, a.beneficiary, a.decision_maker);
        ensure(got == want, || format!("{s}: {got:?} != {want:?}"))?;
    }

    let findings = detect_problematic(&config, &matrix, &EngineOptions::default());
    let n = |f: u8| findings.iter().filter(|x| x.field.number() == f).count();
    ensure(n(2) >= 1 && n(7) >= 1, || format!("field 2: {}, field 7: {}", n(2), n(7)))?;
    Ok(format!("4 anchors, 30 cells, field 2 x{} and field 7 x{}", n(2), n(7)))
}

fn criterion_4a() -> Result<String, String> {
    let horizon = 10 * DAY;
    for seed in 0..RANDOM_RUNS {
        let (config, plan, workload) = sim::random_case(seed, horizon);
        ensure(!plan.iter().any(|i| i.class == IncidentClass::ExploitUserRisk.into()), || {
            format!("seed {seed} has an exploit")
        })?;
        let t = sim::run(config, plan, workload, seed, horizon).map_err(|e| format!("seed {seed}: {e}"))?;
        ensure(t.metrics.conservation_violations == 0 && t.metrics.funds_conserved, || {
            format!("seed {seed}: violations {}", t.metrics.conservation_violations)
        })?;
    }
    Ok(format!("{RANDOM_RUNS} seeded workloads, zero violations"))
}

fn criterion_4b() -> Result<String, String> {
    let mut worst = 0;
    let mut cases = 0;
    for outage in [HOUR, 12 * HOUR, 3 * DAY] {
        for timeout in [HOUR, DAY] {
            let mut config = RollupConfig::default();
            config.forced_inclusion = ForcedInclusion { enabled: true, timeout, usable: true };
            let start = 2 * HOUR;
            let workload = vec![
                UserAction::new(0, "a", Action::Deposit { amount: 100 }),
                UserAction::new(0, "b", Action::Deposit { amount: 100 }),
                UserAction::new(start + 5, "a", Action::Transfer { to: "c".into(), amount: 10 }),
                UserAction::new(
                    start + 7,
                    "b",
                    Action::ForceInclude { tx: L2Tx::Withdraw { amount: 10 } },
                ),
            ];
            let plan = vec![Injection::new(IncidentClass::SequencerOutage, start, outage)];
            let t = sim::run(config, plan, workload, 0, 10 * DAY).map_err(|e| e.to_string())?;
            let included: Vec<_> = t.of_kind("tx-included").collect();
            ensure(included.len() == 2, || format!("outage {outage} timeout {timeout}: {} included", included.len()))?;
            for e in included {
                let delay = e.time - e.payload["submitted_at"].as_u64().unwrap();
                ensure(delay <= timeout + FORCED_SLACK, || {
                    format!("outage {outage} timeout {timeout}: {} delayed {delay}s", e.entity)
                })?;
                worst = worst.max(delay as i64 - timeout as i64);
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} censored txs, worst delay timeout{worst:+}s"))
}

fn criterion_4c() -> Result<String, String> {
    let mut checked = 0;
    for days in [1, 2, 5] {
        let outage_start = 30 * 60;
        let outage = days * DAY;
        let mut config = RollupConfig::default();
        config.challenge_window = DAY;
        let mut workload = Vec::new();
        // Withdrawals initiated before the outage, during it and at its end.
        for (i, at) in [0, outage_start + HOUR, outage_start + outage - HOUR].into_iter().enumerate() {
            let u = format!("u{i}");
            workload.push(UserAction::new(at, u.clone(), Action::Deposit { amount: 10 }));
            workload.push(UserAction::new(at, u, Action::Withdraw { amount: 10 }));
        }
        let plan = vec![Injection::new(IncidentClass::WithdrawalFailure, outage_start, outage)];
        let t = sim::run(config, plan, workload, 0, 20 * DAY).map_err(|e| e.to_string())?;
        let window = outage_start..outage_start + outage;
        let inside: Vec<_> = t
            .events
            .iter()
            .filter(|e| window.contains(&e.time))
            .filter(|e| matches!(e.kind.as_str(), "withdrawal-completed" | "root-posted" | "root-finalized"))
            .collect();
        ensure(inside.is_empty(), || format!("{days}d: {} finalization events inside", inside.len()))?;
        let done = t.of_kind("withdrawal-completed").count();
        ensure(done == 3, || format!("{days}d: {done} completed after recovery"))?;
        checked += 1;
    }
    let t = load_scenario("proposer-outage-freeze").run().map_err(|e| e.to_string())?;
    let inside = t
        .of_kind("withdrawal-completed")
        .filter(|e| (30 * 60..30 * 60 + 2 * DAY).contains(&e.time))
        .count();
    ensure(inside == 0, || "bundled freeze scenario".into())?;
    Ok(format!("{} outage lengths, no finalization inside D", checked + 1))
}

fn load_scenario(name: &str) -> Scenario {
    Scenario::from_json(&read(&scenario(name))).unwrap()
}

fn criterion_4d() -> Result<String, String> {
    let mut got = Vec::new();
    for (name, want) in [("instant-upgrade", 0.0), ("timelocked-30d-upgrade", 1.0), ("timelocked-3d-upgrade", 0.0)] {
        let s = load_scenario(name);
        if name != "instant-upgrade" {
            ensure(s.config.challenge_window == 7 * DAY, || format!("{name}: challenge window"))?;
            ensure(matches!(s.config.upgrade_policy, UpgradePolicy::Timelocked { .. }), || format!("{name}: policy"))?;
        }
        let c = s.run().map_err(|e| e.to_string())?.metrics.exit_coverage_before_upgrade;
        ensure(c == Some(want), || format!("{name}: coverage {c:?} != {want}"))?;
        got.push(want);
    }
    Ok(format!("coverage {got:?}"))
}

fn criterion_4e() -> Result<String, String> {
    let mut cases = 0;
    for proof in [ProofSystem::Optimistic, ProofSystem::Zk] {
        for enforced in [true, false] {
            for permissionless in [true, false] {
                for all_down in [true, false] {
                    let mut config = RollupConfig::default();
                    config.proof_system = proof;
                    config.state_validation_enforced = enforced;
                    config.challengers.permissionless = permissionless;
                    config.challenge_window = 2 * DAY;
                    let down = if all_down { serde_json::json!("all") } else { serde_json::json!(0) };
                    let plan = vec![Injection::new(IncidentClass::ExploitUserRisk, DAY, 4 * DAY)
                        .with_params(serde_json::json!({"challengers_down": down, "amount": 50}))];
                    let workload = vec![UserAction::new(0, "a", Action::Deposit { amount: 100 })];
                    let t = sim::run(config, plan, workload, 0, 10 * DAY).map_err(|e| e.to_string())?;
                    let finalized = t.of_kind("invalid-root-finalized").count() > 0;
                    let expected =
                        !enforced || (proof == ProofSystem::Optimistic && !permissionless && all_down);
                    let label = format!("{proof} enforced={enforced} permissionless={permissionless} down={all_down}");
                    ensure(finalized == expected, || format!("{label}: finalized={finalized}"))?;
                    ensure(t.metrics.funds_conserved == !finalized, || format!("{label}: funds_conserved flag"))?;
                    cases += 1;
                }
            }
        }
    }
    Ok(format!("{cases} configurations"))
}

fn criterion_4f() -> Result<String, String> {
    let dir = fixtures().join("scenarios");
    let mut n = 0;
    let mut paths: Vec<_> = std::fs::read_dir(&dir).unwrap().map(|e| e.unwrap().path()).collect();
    paths.sort();
    for path in paths {
        let s = Scenario::from_json(&std::fs::read_to_string(&path).unwrap()).map_err(|e| e.to_string())?;
        let a = s.run().map_err(|e| e.to_string())?.to_ndjson();
        let b = s.run().map_err(|e| e.to_string())?.to_ndjson();
        ensure(a == b, || format!("{} differs", s.name))?;
        // Same check through the binary.
        let p = path.to_str().unwrap();
        let x = era(&["simulate", "--scenario", p]);
        let y = era(&["simulate", "--scenario", p]);
        ensure(x.status.success() && x.stdout == y.stdout, || format!("{} differs via cli", s.name))?;
        n += 1;
    }
    ensure(n >= 10, || format!("only {n} scenarios"))?;
    Ok(format!("{n} bundled scenarios byte-identical"))
}

fn criterion_5() -> Result<String, String> {
    let args = [
        "report",
        "--snapshot",
        &fixture("snapshot-fixture.json"),
        "--incidents",
        &fixture("incidents-2022-2025.csv"),
        "--format",
        "json",
    ];
    let first = json(&era(&args));
    validate("report", &first);
    let list = |bucket: &str| -> Vec<String> {
        first["prioritization"][bucket]
            .as_array()
            .unwrap()
            .iter()
            .map(|m| m.as_str().unwrap().to_string())
            .collect()
    };
    let immediate = list("immediate_operational");
    let structural = list("structural_governance");
    ensure(immediate.iter().any(|x| x == "strengthen-sequencer-liveness"), || {
        format!("sequencer liveness not immediate: {immediate:?}")
    })?;
    for m in ["timelocked-upgrades-exit-windows", "mandatory-l1-state-validation", "reduce-external-da-reliance"] {
        ensure(structural.iter().any(|x| x == m), || format!("{m} not structural: {structural:?}"))?;
    }

    std::thread::sleep(Duration::from_millis(1100));
    let second = json(&era(&args));
    let strip = |mut v: serde_json::Value| {
        v["metadata"]["generated_at"] = serde_json::Value::Null;
        v
    };
    ensure(first["metadata"]["digest"] == second["metadata"]["digest"], || "digest differs".into())?;
    ensure(strip(first.clone()) == strip(second), || "report differs beyond timestamp".into())?;
    Ok(format!("immediate {immediate:?}, structural {structural:?}, digest stable"))
}

fn report(name: &str, elapsed: Duration, result: Result<String, String>) -> u32 {
    let ms = elapsed.as_millis();
    match result {
        Ok(detail) => {
            println!("PASS  {name:<28} {ms:>6} ms  {detail}");
            0
        }
        Err(why) => {
            println!("FAIL  {name:<28} {ms:>6} ms  {why}");
            1
        }
    }
}

fn main() {
    let criteria: [(&str, Check); 10] = [
        ("1  incident distribution", criterion_1),
        ("2  prevalence", criterion_2),
        ("3  role anchors", criterion_3),
        ("4a conservation", criterion_4a),
        ("4b forced-inclusion bound", criterion_4b),
        ("4c proposer freeze", criterion_4c),
        ("4d exit coverage", criterion_4d),
        ("4e exploit adjudication", criterion_4e),
        ("4f determinism", criterion_4f),
        ("5  end-to-end report", criterion_5),
    ];
    let suite = Instant::now();
    let mut failed = 0;
    for (name, check) in criteria {
        let started = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        failed += report(name, started.elapsed(), result);
    }
    let total = suite.elapsed();
    let runtime = if total < SUITE_LIMIT {
        Ok(format!("under {SUITE_LIMIT:?}"))
    } else {
        Err(format!("exceeds {SUITE_LIMIT:?}"))
    };
    failed += report("4  suite runtime", total, runtime);
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
