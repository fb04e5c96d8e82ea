use std::collections::{BTreeMap, BTreeSet};

use serde_json::{json, Value};

use super::plan::{perturbation, Injection, Perturbation};
use super::trace::{SimTrace, TraceEvent};
use super::workload::{Action, L2Tx, UserAction};
use super::{SimError, SimParams};
use crate::model::secs::Seconds;
use crate::model::{DaMode, ProofSystem, RollupConfig, UpgradePolicy};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum WithdrawalStatus {
    Pending,
    Claimed,
    Exited,
}

#[derive(Debug, Clone)]
struct Withdrawal {
    user: String,
    amount: u64,
    initiated_at: Seconds,
    /// L2 height of the including transaction.
    height: u64,
    status: WithdrawalStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RootState {
    AwaitingProof,
    Pending,
    Accepted,
    Finalized,
    Rejected,
}

#[derive(Debug, Clone)]
struct Root {
    covers: u64,
    valid: bool,
    /// Value an invalid root would release.
    claim: Option<u64>,
    state: RootState,
}

#[derive(Debug, Clone)]
struct Tx {
    id: u64,
    user: String,
    body: L2Tx,
    submitted_at: Seconds,
    affected: bool,
}

#[derive(Debug, Clone)]
enum Event {
    InjectionEnd(usize),
    InjectionStart(usize),
    BatchTick,
    ProposalTick,
    Admit(Tx),
    ForcedDeadline(u64),
    SequencerUp,
    RootAccept(usize),
    RootFinalize(usize),
    Challenge(usize),
    HatchComplete { user: String, requested_at: Seconds },
    User(UserAction),
    UpgradeAnnounce(usize),
    UpgradeActivate(usize),
}

impl Event {
    /// Tie-break at equal times: injections end before others start, then
    /// the pipeline runs, then users act, then upgrades take effect.
    fn priority(&self) -> u8 {
        match self {
            Event::InjectionEnd(_) => 0,
            Event::InjectionStart(_) => 1,
            Event::User(_) => 3,
            Event::UpgradeAnnounce(_) | Event::UpgradeActivate(_) => 4,
            _ => 2,
        }
    }
}

struct Upgrade {
    at: Seconds,
    holders: BTreeSet<String>,
}

/// One simulation run in progress.
///
/// Build with [`Simulation::new`], add injections, upgrades and user
/// actions, then [`run`](Simulation::run). [`advance_to`](Simulation::advance_to)
/// allows interleaving direct calls such as
/// [`use_escape_hatch`](Simulation::use_escape_hatch).
pub struct Simulation {
    config: RollupConfig,
    params: SimParams,
    horizon: Seconds,
    now: Seconds,
    queue: BTreeMap<(Seconds, u8, u64), Event>,
    seq: u64,
    events: Vec<TraceEvent>,

    injections: Vec<(Injection, Perturbation)>,
    active: BTreeSet<usize>,
    seq_resume_at: Seconds,

    locked: u64,
    drained: u64,
    l2: BTreeMap<String, u64>,
    withdrawals: Vec<Withdrawal>,
    pending: BTreeSet<usize>,
    roots: Vec<Root>,

    next_tx: u64,
    height: u64,
    backlog: Vec<Tx>,
    forced: BTreeMap<u64, Tx>,
    batch_cover: u64,
    root_cover: u64,
    upgrades: Vec<Upgrade>,

    frozen: bool,
    violations: u64,
}

impl Simulation {
    pub fn new(config: RollupConfig, params: SimParams, horizon: Seconds) -> Result<Self, SimError> {
        config.validate()?;
        if params.block_interval == 0 || params.batch_interval == 0 || params.proposal_interval == 0 {
            return Err(SimError::InvalidPlan("block, batch and proposal intervals must be positive".into()));
        }
        let mut sim = Self {
            config,
            params,
            horizon,
            now: 0,
            queue: BTreeMap::new(),
            seq: 0,
            events: Vec::new(),
            injections: Vec::new(),
            active: BTreeSet::new(),
            seq_resume_at: 0,
            locked: 0,
            drained: 0,
            l2: BTreeMap::new(),
            withdrawals: Vec::new(),
            pending: BTreeSet::new(),
            roots: Vec::new(),
            next_tx: 0,
            height: 0,
            backlog: Vec::new(),
            forced: BTreeMap::new(),
            batch_cover: 0,
            root_cover: 0,
            upgrades: Vec::new(),
            frozen: false,
            violations: 0,
        };
        sim.push(params.batch_interval, Event::BatchTick);
        sim.push(params.proposal_interval, Event::ProposalTick);
        Ok(sim)
    }

    pub fn now(&self) -> Seconds {
        self.now
    }

    pub fn trace(&self) -> &[TraceEvent] {
        &self.events
    }

    fn push(&mut self, time: Seconds, event: Event) {
        self.seq += 1;
        self.queue.insert((time, event.priority(), self.seq), event);
    }

    fn emit(&mut self, entity: &str, kind: &str, payload: Value) {
        self.events.push(TraceEvent {
            time: self.now,
            entity: entity.to_string(),
            kind: kind.to_string(),
            payload,
        });
    }

    /// Adds a perturbation. Zero-length injections have no effect.
    pub fn inject(&mut self, inj: Injection) -> Result<(), SimError> {
        let effect = perturbation(&inj, &self.config)?;
        if inj.start < self.now || inj.start >= self.horizon {
            return Err(SimError::InvalidPlan(format!(
                "{} starts at {} outside [{}, {})",
                inj.class, inj.start, self.now, self.horizon
            )));
        }
        if inj.duration == 0 {
            return Ok(());
        }
        let i = self.injections.len();
        let (start, end) = (inj.start, inj.end());
        self.injections.push((inj, effect));
        self.push(start, Event::InjectionStart(i));
        self.push(end, Event::InjectionEnd(i));
        Ok(())
    }

    /// Announces an upgrade at `at`. It activates immediately under an
    /// instant policy, otherwise after the configured window.
    pub fn trigger_upgrade(&mut self, at: Seconds) -> Result<(), SimError> {
        if at < self.now || at >= self.horizon {
            return Err(SimError::InvalidPlan(format!("upgrade at {at} outside [{}, {})", self.now, self.horizon)));
        }
        self.upgrades.push(Upgrade { at, holders: BTreeSet::new() });
        self.push(at, Event::UpgradeAnnounce(self.upgrades.len() - 1));
        Ok(())
    }

    pub fn schedule(&mut self, action: UserAction) {
        let t = action.time.max(self.now);
        self.push(t, Event::User(action));
    }

    /// Requests an exit of `user`'s whole position through the escape
    /// hatch at the current time.
    pub fn use_escape_hatch(&mut self, user: &str) -> Result<(), SimError> {
        if !self.config.escape_hatch.enabled {
            return Err(SimError::HatchDisabled);
        }
        if self.da_withheld() {
            return Err(SimError::DataUnavailable);
        }
        if self.bridge_paused() && !self.config.escape_hatch.non_disableable {
            return Err(SimError::BridgePaused);
        }
        self.emit(user, "escape-requested", json!({}));
        let done = self.params.next_block(self.now) + self.params.finality_delay();
        self.push(
            done,
            Event::HatchComplete {
                user: user.to_string(),
                requested_at: self.now,
            },
        );
        Ok(())
    }

    /// Processes every event strictly before `t` (capped at the horizon).
    pub fn advance_to(&mut self, t: Seconds) {
        let limit = t.min(self.horizon);
        while let Some(entry) = self.queue.first_entry() {
            if entry.key().0 >= limit {
                break;
            }
            let ((time, _, _), event) = entry.remove_entry();
            self.now = time;
            self.handle(event);
            self.after_event();
        }
        self.now = self.now.max(limit);
    }

    pub fn run(mut self) -> SimTrace {
        self.advance_to(self.horizon);
        if self.horizon > 0 {
            self.now = self.horizon;
            let (l2_total, in_flight) = self.totals();
            let payload = json!({
                "funds_conserved": self.drained == 0 && self.violations == 0,
                "conservation_violations": self.violations,
                "pending_withdrawals": self.pending.len(),
                "locked": self.locked,
                "l2_total": l2_total,
                "in_flight": in_flight,
                "drained": self.drained,
            });
            self.emit("bridge", "run-end", payload);
        }
        SimTrace::from_events(self.events)
    }

    // Availability derived from active injections.

    fn effects(&self) -> impl Iterator<Item = (&Injection, &Perturbation)> + '_ {
        self.active.iter().map(|i| {
            let (inj, p) = &self.injections[*i];
            (inj, p)
        })
    }

    fn admission_stopped(&self) -> bool {
        self.effects().any(|(_, p)| p.stops_admission())
    }

    fn censored(&self, user: &str) -> bool {
        self.effects().any(|(_, p)| {
            matches!(p, Perturbation::Censorship { targets, .. } if targets.is_empty() || targets.contains(user))
        })
    }

    fn seq_accepts(&self, user: &str) -> bool {
        !self.admission_stopped() && self.now >= self.seq_resume_at && !self.censored(user)
    }

    fn forced_broken_until(&self) -> Option<Seconds> {
        self.effects()
            .filter(|(_, p)| matches!(p, Perturbation::Censorship { forced_path_broken: true, .. }))
            .map(|(i, _)| i.end())
            .max()
    }

    fn posting_halted(&self) -> bool {
        self.effects().any(|(_, p)| p.stops_posting())
    }

    fn admission_delay(&self) -> Seconds {
        let factor = self
            .effects()
            .filter_map(|(_, p)| match p {
                Perturbation::Degradation { factor } => Some(*factor),
                _ => None,
            })
            .max()
            .unwrap_or(1);
        self.params.admission_latency.saturating_mul(factor)
    }

    fn bridge_paused(&self) -> bool {
        self.effects().any(|(_, p)| matches!(p, Perturbation::BridgePause))
    }

    fn stall_until(&self) -> Option<Seconds> {
        self.effects()
            .filter(|(_, p)| matches!(p, Perturbation::AcceptanceStall))
            .map(|(i, _)| i.end())
            .max()
    }

    fn da_withheld(&self) -> bool {
        matches!(self.config.da_mode, DaMode::External { .. })
            && self.effects().any(|(_, p)| matches!(p, Perturbation::DataWithheld))
    }

    fn proposers_available(&self) -> bool {
        if !self.config.proposer_whitelist {
            return true;
        }
        let total = self.config.proposer_count;
        let down: u32 = self
            .effects()
            .filter_map(|(_, p)| match p {
                Perturbation::WithdrawalFailure { proposers_down, .. } => Some(proposers_down.of(total)),
                _ => None,
            })
            .sum();
        down < total
    }

    fn provers_available(&self) -> bool {
        let set = self.config.prover_set;
        if set.permissionless {
            return true;
        }
        let down: u32 = self
            .effects()
            .filter_map(|(_, p)| match p {
                Perturbation::WithdrawalFailure { provers_down, .. } => Some(provers_down.of(set.count)),
                _ => None,
            })
            .sum();
        down < set.count
    }

    fn challengers_available(&self) -> bool {
        if self.da_withheld() {
            return false;
        }
        let set = self.config.challengers;
        if set.permissionless {
            return true;
        }
        let down: u32 = self
            .effects()
            .filter_map(|(_, p)| match p {
                Perturbation::InvalidRoot { challengers_down, .. } => Some(challengers_down.of(set.count)),
                _ => None,
            })
            .sum();
        down < set.count
    }

    fn zk(&self) -> bool {
        self.config.proof_system == ProofSystem::Zk
    }

    // Event handling.

    fn handle(&mut self, event: Event) {
        match event {
            Event::InjectionStart(i) => {
                self.active.insert(i);
                let (inj, effect) = self.injections[i].clone();
                self.emit(
                    "injector",
                    "injection-start",
                    json!({"class": inj.class, "end": inj.end(), "params": inj.params}),
                );
                if let Perturbation::InvalidRoot { amount, .. } = effect {
                    self.post_root(false, amount);
                }
            }
            Event::InjectionEnd(i) => {
                let was_stopped = self.admission_stopped();
                self.active.remove(&i);
                let class = self.injections[i].0.class;
                self.emit("injector", "injection-end", json!({"class": class}));
                if was_stopped && !self.admission_stopped() {
                    self.seq_resume_at = self.now + self.config.sequencer.recovery_latency;
                    if self.seq_resume_at > self.now {
                        self.push(self.seq_resume_at, Event::SequencerUp);
                    }
                }
                self.reconcile();
            }
            Event::SequencerUp => {
                if self.seq_accepts_anyone() {
                    self.emit("sequencer", "sequencer-recovered", json!({}));
                }
                self.reconcile();
            }
            Event::BatchTick => {
                if !self.posting_halted() && self.height > self.batch_cover {
                    let txs = self.height - self.batch_cover;
                    self.batch_cover = self.height;
                    self.emit("batcher", "batch-posted", json!({"covers": self.height, "txs": txs}));
                }
                self.push(self.now + self.params.batch_interval, Event::BatchTick);
            }
            Event::ProposalTick => {
                if !self.posting_halted() && self.proposers_available() && self.batch_cover > self.root_cover {
                    self.root_cover = self.batch_cover;
                    self.post_root(true, None);
                }
                self.push(self.now + self.params.proposal_interval, Event::ProposalTick);
            }
            Event::Admit(tx) => self.include(tx, "sequencer"),
            Event::ForcedDeadline(id) => {
                if !self.forced.contains_key(&id) {
                    return;
                }
                if let Some(until) = self.forced_broken_until() {
                    self.push(until, Event::ForcedDeadline(id));
                    return;
                }
                let tx = self.forced.remove(&id).expect("checked above");
                self.include(tx, "forced-queue");
            }
            Event::RootAccept(r) => {
                if self.roots[r].state != RootState::Pending {
                    return;
                }
                if let Some(until) = self.stall_until() {
                    self.push(until, Event::RootAccept(r));
                    return;
                }
                self.roots[r].state = RootState::Accepted;
                self.emit("l1", "root-accepted", json!({"root": r}));
                self.push(self.now + self.params.finality_delay(), Event::RootFinalize(r));
            }
            Event::RootFinalize(r) => {
                self.roots[r].state = RootState::Finalized;
                self.emit("l1", "root-finalized", json!({"root": r, "valid": self.roots[r].valid}));
                if self.roots[r].valid {
                    self.try_claims();
                } else {
                    let take = self.roots[r].claim.unwrap_or(self.locked).min(self.locked);
                    self.locked -= take;
                    self.drained += take;
                    self.emit("bridge", "invalid-root-finalized", json!({"root": r, "drained": take}));
                }
            }
            Event::Challenge(r) => {
                if self.roots[r].state == RootState::Pending {
                    self.roots[r].state = RootState::Rejected;
                    self.emit("challenger", "root-rejected", json!({"root": r, "reason": "fraud proof"}));
                }
            }
            Event::HatchComplete { user, requested_at } => self.complete_escape(&user, requested_at),
            Event::User(a) => self.user_action(a),
            Event::UpgradeAnnounce(i) => self.announce_upgrade(i),
            Event::UpgradeActivate(i) => self.activate_upgrade(i),
        }
    }

    fn seq_accepts_anyone(&self) -> bool {
        !self.admission_stopped() && self.now >= self.seq_resume_at
    }

    /// Re-applies whatever became possible after an injection ended.
    fn reconcile(&mut self) {
        let drain: Vec<u64> = self
            .forced
            .values()
            .filter(|tx| self.seq_accepts(&tx.user))
            .map(|tx| tx.id)
            .collect();
        for id in drain {
            let tx = self.forced.remove(&id).expect("listed above");
            self.include(tx, "sequencer");
        }
        let backlog = std::mem::take(&mut self.backlog);
        for tx in backlog {
            if self.seq_accepts(&tx.user) {
                self.push(self.now + self.admission_delay(), Event::Admit(tx));
            } else {
                self.backlog.push(tx);
            }
        }
        self.try_claims();
        if self.zk() && self.provers_available() {
            for r in 0..self.roots.len() {
                if self.roots[r].state == RootState::AwaitingProof {
                    self.roots[r].state = RootState::Pending;
                    let t = self.params.next_block(self.now + self.params.prover_latency);
                    self.push(t, Event::RootAccept(r));
                }
            }
        }
        if !self.zk() && self.config.state_validation_enforced && self.challengers_available() {
            for r in 0..self.roots.len() {
                if !self.roots[r].valid && self.roots[r].state == RootState::Pending {
                    self.push(self.params.next_block(self.now), Event::Challenge(r));
                }
            }
        }
    }

    fn post_root(&mut self, valid: bool, claim: Option<u64>) {
        let r = self.roots.len();
        let covers = if valid { self.root_cover } else { 0 };
        self.roots.push(Root {
            covers,
            valid,
            claim,
            state: RootState::Pending,
        });
        self.emit("proposer", "root-posted", json!({"root": r, "covers": covers, "valid": valid}));
        let enforced = self.config.state_validation_enforced;
        if self.zk() {
            if !valid && enforced {
                self.roots[r].state = RootState::Rejected;
                self.emit("l1", "root-rejected", json!({"root": r, "reason": "validity proof"}));
            } else if !valid || self.provers_available() {
                let t = self.params.next_block(self.now + self.params.prover_latency);
                self.push(t, Event::RootAccept(r));
            } else {
                self.roots[r].state = RootState::AwaitingProof;
            }
        } else {
            self.push(self.now + self.config.challenge_window, Event::RootAccept(r));
            if !valid && enforced && self.challengers_available() {
                self.push(self.params.next_block(self.now), Event::Challenge(r));
            }
        }
    }

    fn try_claims(&mut self) {
        if self.bridge_paused() {
            return;
        }
        let finalized: Vec<(usize, u64)> = self
            .roots
            .iter()
            .enumerate()
            .filter(|(_, r)| r.valid && r.state == RootState::Finalized)
            .map(|(i, r)| (i, r.covers))
            .collect();
        let Some(max_cover) = finalized.iter().map(|(_, c)| *c).max() else {
            return;
        };
        let ready: Vec<usize> = self
            .pending
            .iter()
            .copied()
            .filter(|w| self.withdrawals[*w].height <= max_cover)
            .collect();
        for w in ready {
            let h = self.withdrawals[w].height;
            let root = finalized.iter().find(|(_, c)| *c >= h).map(|(i, _)| *i);
            self.pending.remove(&w);
            let wd = &mut self.withdrawals[w];
            wd.status = WithdrawalStatus::Claimed;
            let (user, amount, initiated_at) = (wd.user.clone(), wd.amount, wd.initiated_at);
            let paid = self.pay_out(amount);
            let payload = json!({"withdrawal": w, "amount": amount, "paid": paid, "initiated_at": initiated_at,
                                 "root": root, "via": "bridge"});
            self.emit(&user, "withdrawal-completed", payload);
        }
    }

    /// Releases `amount` from the bridge. After a drain the bridge may hold
    /// less than it owes; the unpaid part is written off against the drain.
    fn pay_out(&mut self, amount: u64) -> u64 {
        let paid = amount.min(self.locked);
        self.locked -= paid;
        self.drained -= amount - paid;
        paid
    }

    fn include(&mut self, tx: Tx, via: &str) {
        self.height += 1;
        let balance = self.l2.get(&tx.user).copied().unwrap_or(0);
        let (kind, amount) = match &tx.body {
            L2Tx::Transfer { amount, .. } => ("transfer", *amount),
            L2Tx::Withdraw { amount } => ("withdraw", *amount),
        };
        let ok = balance >= amount;
        self.emit(
            &tx.user,
            "tx-included",
            json!({"tx": tx.id, "kind": kind, "amount": amount, "submitted_at": tx.submitted_at,
                   "affected": tx.affected, "via": via, "ok": ok}),
        );
        if !ok {
            return;
        }
        *self.l2.entry(tx.user.clone()).or_default() -= amount;
        match tx.body {
            L2Tx::Transfer { to, .. } => *self.l2.entry(to).or_default() += amount,
            L2Tx::Withdraw { .. } => {
                let w = self.withdrawals.len();
                self.withdrawals.push(Withdrawal {
                    user: tx.user.clone(),
                    amount,
                    initiated_at: tx.submitted_at,
                    height: self.height,
                    status: WithdrawalStatus::Pending,
                });
                self.pending.insert(w);
                self.emit(&tx.user, "withdrawal-initiated", json!({"withdrawal": w, "amount": amount}));
            }
        }
    }

    fn submit(&mut self, user: &str, body: L2Tx, force: bool) {
        self.next_tx += 1;
        let mut tx = Tx {
            id: self.next_tx,
            user: user.to_string(),
            body,
            submitted_at: self.now,
            affected: false,
        };
        let route = if force { "forced-queue" } else { "sequencer" };
        self.emit(user, "tx-submitted", json!({"tx": tx.id, "route": route}));
        let usable = self.config.forced_path_usable();
        if force && !usable {
            let reason = if self.config.forced_inclusion.enabled {
                "forced inclusion not usable"
            } else {
                "forced inclusion disabled"
            };
            self.emit(user, "force-rejected", json!({"tx": tx.id, "reason": reason}));
            return;
        }
        if self.seq_accepts(user) {
            self.push(self.now + self.admission_delay(), Event::Admit(tx));
            return;
        }
        tx.affected = true;
        if !force {
            let reason = if self.censored(user) { "censored" } else { "sequencer unavailable" };
            self.emit("sequencer", "tx-refused", json!({"tx": tx.id, "user": user, "reason": reason}));
        }
        if usable {
            let deadline = self.params.next_block(self.now + self.config.forced_inclusion.timeout);
            self.push(deadline, Event::ForcedDeadline(tx.id));
            self.forced.insert(tx.id, tx);
        } else {
            self.backlog.push(tx);
        }
    }

    fn user_action(&mut self, a: UserAction) {
        let user = a.user.as_str();
        match a.action {
            Action::Deposit { amount } => {
                if self.bridge_paused() {
                    self.emit(user, "deposit-rejected", json!({"amount": amount, "reason": "bridge paused"}));
                } else {
                    self.locked += amount;
                    *self.l2.entry(a.user.clone()).or_default() += amount;
                    self.emit(user, "deposit", json!({"amount": amount}));
                }
            }
            Action::Transfer { to, amount } => self.submit(user, L2Tx::Transfer { to, amount }, false),
            Action::Withdraw { amount } => self.submit(user, L2Tx::Withdraw { amount }, false),
            Action::ForceInclude { tx } => self.submit(user, tx, true),
            Action::Escape => {
                if let Err(e) = self.use_escape_hatch(user) {
                    self.emit(user, "escape-rejected", json!({"reason": e.to_string()}));
                }
            }
        }
    }

    fn complete_escape(&mut self, user: &str, requested_at: Seconds) {
        let mut amount = self.l2.remove(user).unwrap_or(0);
        let mine: Vec<usize> = self
            .pending
            .iter()
            .copied()
            .filter(|w| self.withdrawals[*w].user == user)
            .collect();
        for w in mine {
            self.pending.remove(&w);
            let wd = &mut self.withdrawals[w];
            wd.status = WithdrawalStatus::Exited;
            amount += wd.amount;
            let payload = json!({"withdrawal": w, "amount": wd.amount, "initiated_at": wd.initiated_at,
                                 "root": Value::Null, "via": "escape-hatch"});
            self.emit(user, "withdrawal-completed", payload);
        }
        let paid = self.pay_out(amount);
        self.emit(
            user,
            "escape-completed",
            json!({"amount": amount, "paid": paid, "requested_at": requested_at}),
        );
    }

    fn holds_funds(&self, user: &str) -> bool {
        self.l2.get(user).copied().unwrap_or(0) > 0 || self.pending.iter().any(|w| self.withdrawals[*w].user == user)
    }

    fn announce_upgrade(&mut self, i: usize) {
        let holders: BTreeSet<String> = self.l2.keys().filter(|u| self.holds_funds(u)).cloned().collect();
        let window = self.config.upgrade_policy.exit_window();
        let policy = match self.config.upgrade_policy {
            UpgradePolicy::Instant => "instant",
            UpgradePolicy::Timelocked { .. } => "timelocked",
        };
        self.emit(
            "governance",
            "upgrade-announced",
            json!({"upgrade": i, "policy": policy, "activates_at": self.now + window, "holders": holders.len()}),
        );
        self.upgrades[i].holders = holders;
        if window == 0 {
            self.activate_upgrade(i);
        } else {
            self.push(self.now + window, Event::UpgradeActivate(i));
        }
    }

    fn activate_upgrade(&mut self, i: usize) {
        let up = &self.upgrades[i];
        let exited = up.holders.iter().filter(|u| !self.holds_funds(u)).count();
        let payload = json!({"upgrade": i, "announced_at": up.at, "holders": up.holders.len(), "exited": exited});
        self.emit("governance", "upgrade-activated", payload);
    }

    fn totals(&self) -> (u64, u64) {
        let l2: u64 = self.l2.values().sum();
        let in_flight: u64 = self.pending.iter().map(|w| self.withdrawals[*w].amount).sum();
        (l2, in_flight)
    }

    /// Why the first pending withdrawal that cannot move is stuck.
    fn blocked(&self) -> Option<&'static str> {
        for w in &self.pending {
            let h = self.withdrawals[*w].height;
            // Valid roots are posted with increasing coverage.
            let root = self
                .roots
                .iter()
                .find(|r| r.valid && r.covers >= h && r.state != RootState::Rejected);
            let reason = match root.map(|r| r.state) {
                None if self.posting_halted() => Some("posting halted"),
                None if !self.proposers_available() => Some("no proposer available"),
                Some(RootState::AwaitingProof) if !self.provers_available() => Some("no prover available"),
                Some(RootState::Pending) if self.stall_until().is_some() => Some("acceptance stalled"),
                Some(RootState::Finalized) if self.bridge_paused() => Some("bridge paused"),
                _ => None,
            };
            if reason.is_some() {
                return reason;
            }
        }
        None
    }

    fn after_event(&mut self) {
        let (l2, in_flight) = self.totals();
        if self.locked + self.drained != l2 + in_flight {
            self.violations += 1;
            self.emit(
                "bridge",
                "conservation-violation",
                json!({"locked": self.locked, "drained": self.drained, "l2_total": l2, "in_flight": in_flight}),
            );
        }
        let blocked = self.blocked();
        if blocked.is_some() != self.frozen {
            self.frozen = blocked.is_some();
            match blocked {
                Some(reason) => self.emit("bridge", "freeze-start", json!({"reason": reason})),
                None => self.emit("bridge", "freeze-end", json!({})),
            }
        }
    }
}
