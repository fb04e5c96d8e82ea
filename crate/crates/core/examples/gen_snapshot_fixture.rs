//! Regenerates the bundled synthetic snapshot fixtures.
//!
//! 129 admitted projects whose flagged marginals are
//! state-validation 32, exit-window 111, proposer-failure 65,
//! sequencer-failure 17 and data-availability 35, plus a handful of
//! projects in excluded categories. Two data-availability hazards are only
//! detectable through the sentiment fallback.
//!
//! ```text
//! cargo run -p era-core --example gen_snapshot_fixture -- crates/core/fixtures
//! ```

use std::path::PathBuf;

use serde_json::{json, Map, Value};

const TOTAL: usize = 129;

/// (dimension, source name, flagged count, stride, offset); strides are
/// coprime with 129 so `(i * stride + offset) % 129 < count` picks exactly
/// `count` projects.
const MARGINALS: [(&str, &str, usize, usize, usize); 5] = [
    ("stateValidation", "State validation", 32, 1, 7),
    ("exitWindow", "Exit window", 111, 2, 3),
    ("proposerFailure", "Proposer failure", 65, 4, 11),
    ("sequencerFailure", "Sequencer failure", 17, 5, 29),
    ("dataAvailability", "Data availability", 35, 7, 50),
];

fn risk(dim: usize, flagged: bool, i: usize) -> (String, &'static str, &'static str) {
    let (value, sentiment, description) = match (dim, flagged) {
        (0, true) => ("None", "bad", "Currently the system permits invalid state roots. More details in project overview."),
        (0, false) if i % 17 == 0 => ("Optimistic (pending)", "warning", "Fraud proof system under development."),
        (0, false) if i % 2 == 0 => ("Fraud proofs (INT)", "good", "Fraud proofs allow actors watching the chain to prove that the state is incorrect."),
        (0, false) => ("ZK proofs (ST, SN)", "good", "ZK proofs ensure that state transitions are correct."),
        (1, true) => ("None", "bad", "There is no window for users to exit in case of an unwanted regular upgrade since contracts are instantly upgradable."),
        (1, false) if i % 2 == 0 => ("30d", "good", "Users have 30d to exit funds in case of an unwanted regular upgrade."),
        (1, false) => ("7d", "warning", "Users have 7d to exit funds in case of an unwanted regular upgrade."),
        (2, true) => ("Cannot withdraw", "bad", "Only the whitelisted proposers can publish state roots on L1, so in the event of failure the withdrawals are frozen."),
        (2, false) => ("Self propose", "good", "Anyone can become a proposer after 7d of inactivity from the currently whitelisted proposers."),
        (3, true) => ("No mechanism", "bad", "There is no mechanism to have transactions be included if the sequencer is down or censoring."),
        (3, false) => ("Self sequence", "good", "In the event of a sequencer failure, users can force transactions to be included in the project's chain by sending them to L1."),
        (4, true) => ("External", "bad", "Proof construction and state derivation rely fully on data that is NOT published onchain."),
        (4, false) => ("Onchain", "good", "All of the data needed for proof construction is published onchain."),
        _ => unreachable!(),
    };
    (value.to_string(), sentiment, description)
}

fn main() {
    let out_dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "crates/core/fixtures".into()));
    let categories = ["Optimistic Rollup", "ZK Rollup", "Other", "optimistic rollup", " ZK Rollup "];

    let mut normalized = Vec::new();
    let mut keyed = Map::new();
    let mut fallback_flags = 0;
    for i in 0..TOTAL {
        let id = format!("project-{i:03}");
        let name = format!("Project {i:03}");
        let category = categories[i % categories.len()];
        let mut list = Vec::new();
        let mut map = Map::new();
        for (d, (key, label, count, stride, offset)) in MARGINALS.iter().enumerate() {
            let flagged = (i * stride + offset) % TOTAL < *count;
            // Non-flagged data-availability entries are sometimes absent.
            if d == 4 && !flagged && i % 10 == 0 {
                continue;
            }
            let (value, sentiment, description) = if d == 4 && flagged && fallback_flags < 2 {
                // first two data-availability hazards carry no rule key
                fallback_flags += 1;
                ("Committee (4/7)".to_string(), "bad", "A data availability committee attests to data retention.")
            } else {
                risk(d, flagged, i)
            };
            let source_name = if d == 3 && i == 5 { " Sequencer Failure ".to_string() } else { label.to_string() };
            list.push(json!({"name": source_name, "value": value, "sentiment": sentiment, "description": description}));
            map.insert(key.to_string(), json!({"value": value, "sentiment": sentiment, "description": description}));
        }
        if i % 40 == 1 {
            list.push(json!({"name": "Stage", "value": "Stage 0", "sentiment": "bad", "description": "Not a risk axis."}));
        }
        normalized.push(json!({"id": id, "name": name, "category": category, "risks": list}));
        keyed.insert(id, json!({"name": name, "type": "layer2", "category": category, "risks": map}));
    }

    for (id, category) in [
        ("validium-a", Some("Validium")),
        ("validium-b", Some("Validium")),
        ("optimium-a", Some("Optimium")),
        ("optimium-b", Some("Optimium")),
        ("uncategorized", None),
    ] {
        let risks = vec![json!({"name": "Exit window", "value": "None", "sentiment": "bad", "description": "There is no window for users to exit."})];
        let mut p = json!({"id": id, "name": id, "risks": risks});
        let mut k = json!({"name": id, "type": "layer2", "risks": {"exitWindow": {"value": "None", "sentiment": "bad", "description": "There is no window for users to exit."}}});
        if let Some(c) = category {
            p["category"] = Value::from(c);
            k["category"] = Value::from(c);
        }
        normalized.push(p);
        keyed.insert(id.to_string(), k);
    }

    let doc = json!({"snapshot": "synthetic", "generated_by": "gen_snapshot_fixture", "projects": normalized});
    let kdoc = json!({"snapshot": "synthetic", "projects": keyed});
    std::fs::write(out_dir.join("snapshot-fixture.json"), serde_json::to_string_pretty(&doc).unwrap() + "\n").unwrap();
    std::fs::write(out_dir.join("snapshot-fixture-keyed.json"), serde_json::to_string_pretty(&kdoc).unwrap() + "\n").unwrap();
    eprintln!("wrote fixtures to {} ({fallback_flags} fallback-only hazards)", out_dir.display());
}
