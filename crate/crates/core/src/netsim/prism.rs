use std::collections::{HashMap, HashSet};
use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use sha2::{Digest as _, Sha256};

use super::{hash_powers, stream_rng, EventQueue, LinkQueues, Observer, SimError, Topology};
use crate::adversary::{Adversary, Disposition};
use crate::block::{Block, BlockType};
use crate::chain::{ChainConfig, ChainSnapshot, ChainState, StateChange};
use crate::config::{ExperimentConfig, Protocol, Scenario, Workload};
use crate::crypto::{Keypair, PublicKey};
use crate::digest::Digest;
use crate::ledger::UtxoSet;
use crate::metrics::{
    AttackReport, BlockCounts, Forking, LatencyStats, MetricsReport, SimOutput, SpamReport, Throughput, TimePoint,
    TopologyReport,
};
use crate::mining::finish_mining;
use crate::sortition::{sortition, SortitionParams};
use crate::workload::{conflict_set, genesis_utxos, node_key, spammer_key, Wallet};

#[derive(Debug, Clone)]
enum Event {
    Mine { node: usize },
    Deliver { to: usize, from: usize, block: Arc<Block> },
    Fetch { holder: usize, requester: usize, want: Digest },
    TxArrival { node: usize },
    SpamTick { k: u32 },
    AttackStart,
    AttackRelease,
    Checkpoint,
}

impl Event {
    fn tag(&self) -> (u8, u64) {
        match self {
            Event::Mine { node } => (0, *node as u64),
            Event::Deliver { to, .. } => (1, *to as u64),
            Event::Fetch { requester, .. } => (2, *requester as u64),
            Event::TxArrival { node } => (3, *node as u64),
            Event::SpamTick { k } => (4, *k as u64),
            Event::AttackStart => (5, 0),
            Event::AttackRelease => (6, 0),
            Event::Checkpoint => (7, 0),
        }
    }
}

struct Spam {
    key: Keypair,
    victims: Vec<usize>,
    ids: HashSet<Digest>,
    sets: u64,
    copies: u64,
    rate: f64,
    start: f64,
    stop: f64,
}

/// Upper bound on transactions one wallet may need, with generous slack.
pub(crate) fn coins_needed(cfg: &ExperimentConfig, generators: usize, tx_slot_rate: f64, capacity: usize) -> u32 {
    let horizon = cfg.duration + cfg.drain;
    let per_node = match cfg.workload {
        Workload::None => 0.0,
        Workload::Poisson { tps } => tps * horizon / generators as f64,
        Workload::Saturated => tx_slot_rate * horizon * capacity as f64 / generators as f64 + capacity as f64,
    };
    (per_node * 1.3 + 6.0 * per_node.sqrt() + 16.0).ceil() as u32
}

/// A network of Prism nodes, optionally with an adversary and a spammer.
pub struct PrismSim {
    cfg: ExperimentConfig,
    seed: u64,
    params: SortitionParams,
    topo: Topology,
    links: LinkQueues,
    queue: EventQueue<Event>,
    views: Vec<ChainState>,
    view_of: Vec<usize>,
    shared: Option<usize>,
    adversarial: Vec<bool>,
    members: Vec<usize>,
    powers: Vec<f64>,
    mine_rng: Vec<ChaCha8Rng>,
    tx_rng: Vec<ChaCha8Rng>,
    jitter_rng: Vec<ChaCha8Rng>,
    wallets: Vec<Option<Wallet>>,
    recipients: Vec<PublicKey>,
    orphan_from: Vec<HashMap<Digest, usize>>,
    adversary: Adversary,
    observer: Observer,
    mined_at: HashMap<Digest, f64>,
    counts: BlockCounts,
    bytes_mined: u64,
    delay_sum: f64,
    delay_count: u64,
    spam: Option<Spam>,
    generated: u64,
    timeseries: Vec<TimePoint>,
    hasher: Sha256,
    events: u64,
}

const OBSERVER: usize = 0;

impl PrismSim {
    pub fn new(cfg: &ExperimentConfig, seed: u64) -> Result<Self, SimError> {
        cfg.validate()?;
        let n = cfg.network.nodes;
        let topo = Topology::build(cfg.network.topology, n, &mut stream_rng(seed, u64::MAX, "topology"))?;
        let params = cfg.prism.sortition();
        let chain_cfg = ChainConfig {
            sortition: params,
            tx_capacity: cfg.prism.tx_block_capacity,
            vote_mode: cfg.prism.vote_mode,
            validate_blocks: cfg.prism.validate_blocks,
        };
        let adv_nodes = cfg.adversary.nodes;
        let honest = n - adv_nodes;
        let adversary = Adversary::new(&cfg.adversary.scenario);
        let shares_view = adversary.is_active() && adv_nodes > 0;
        let mut views: Vec<ChainState> = (0..if shares_view { honest + 1 } else { n })
            .map(|_| ChainState::new(chain_cfg))
            .collect();
        views.shrink_to_fit();
        let view_of: Vec<usize> = (0..n).map(|i| if shares_view && i >= honest { honest } else { i }).collect();
        let generators: Vec<bool> = (0..n).map(|i| i < honest || !adversary.censors()).collect();
        let generator_count = generators.iter().filter(|g| **g).count();
        let coins = coins_needed(cfg, generator_count, params.tx_rate, cfg.prism.tx_block_capacity);
        let spam_coins = match cfg.adversary.scenario {
            Scenario::Spam { rate, start, stop, .. } => ((stop - start) * rate).ceil() as u32 + 1,
            _ => 0,
        };
        let scheme = cfg.signature;
        let initial: UtxoSet = genesis_utxos(scheme, n, coins, spam_coins);
        let window = (cfg.warmup_fraction * cfg.duration, cfg.duration);
        let observer = Observer::new(cfg.confirmation, initial, window, cfg.trace);
        let spam = match cfg.adversary.scenario {
            Scenario::Spam { rate, victims, start, stop } => Some(Spam {
                key: spammer_key(scheme),
                victims: (0..victims).collect(),
                ids: HashSet::new(),
                sets: 0,
                copies: 0,
                rate,
                start,
                stop,
            }),
            _ => None,
        };
        let mut sim = PrismSim {
            seed,
            params,
            links: LinkQueues::new(cfg.network.bandwidth, cfg.network.link_delay),
            queue: EventQueue::new(),
            views,
            view_of,
            shared: shares_view.then_some(honest),
            adversarial: (0..n).map(|i| i >= honest).collect(),
            members: (honest..n).collect(),
            powers: hash_powers(n, adv_nodes, cfg.adversary.power),
            mine_rng: (0..n).map(|i| stream_rng(seed, i as u64, "mine")).collect(),
            tx_rng: (0..n).map(|i| stream_rng(seed, i as u64, "tx")).collect(),
            jitter_rng: (0..n).map(|i| stream_rng(seed, i as u64, "jitter")).collect(),
            wallets: (0..n).map(|i| generators[i].then(|| Wallet::new(scheme, i, coins))).collect(),
            recipients: (0..n).map(|i| node_key(scheme, i).public()).collect(),
            orphan_from: vec![HashMap::new(); n],
            adversary,
            observer,
            mined_at: HashMap::new(),
            counts: BlockCounts::default(),
            bytes_mined: 0,
            delay_sum: 0.0,
            delay_count: 0,
            spam,
            generated: 0,
            timeseries: Vec::new(),
            hasher: Sha256::new(),
            events: 0,
            topo,
            cfg: cfg.clone(),
        };
        sim.schedule_initial();
        Ok(sim)
    }

    fn schedule_initial(&mut self) {
        let total = self.params.total_rate();
        for node in 0..self.cfg.network.nodes {
            self.schedule_mine(node, 0.0, total);
            if let Workload::Poisson { tps } = self.cfg.workload {
                if self.wallets[node].is_some() {
                    self.schedule_tx(node, 0.0, tps);
                }
            }
        }
        if let Some(s) = &self.spam {
            let start = s.start;
            self.queue.push(start, Event::SpamTick { k: 0 });
        }
        match self.cfg.adversary.scenario {
            Scenario::PrivateDoubleSpend { attack_start, release_timeout, .. } if self.shared.is_some() => {
                self.queue.push(attack_start, Event::AttackStart);
                let release = release_timeout.unwrap_or(self.cfg.duration).max(attack_start);
                self.queue.push(release, Event::AttackRelease);
            }
            _ => {}
        }
        self.queue.push(self.cfg.checkpoint_interval, Event::Checkpoint);
    }

    fn schedule_mine(&mut self, node: usize, now: f64, total: f64) {
        let rate = self.powers[node] * total;
        if rate > 0.0 {
            let dt = Exp::new(rate).expect("positive").sample(&mut self.mine_rng[node]);
            self.queue.push(now + dt, Event::Mine { node });
        }
    }

    fn schedule_tx(&mut self, node: usize, now: f64, tps: f64) {
        let generators = self.wallets.iter().filter(|w| w.is_some()).count();
        let rate = tps / generators as f64;
        if rate > 0.0 {
            let dt = Exp::new(rate).expect("positive").sample(&mut self.tx_rng[node]);
            self.queue.push(now + dt, Event::TxArrival { node });
        }
    }

    fn end_time(&self) -> f64 {
        self.cfg.duration + self.cfg.drain
    }

    /// Runs to completion and returns the report, time series and trace.
    pub fn run(mut self) -> SimOutput {
        self.run_in_place()
    }

    /// Runs to completion, keeping the simulator for inspection.
    pub fn run_in_place(&mut self) -> SimOutput {
        let started = Instant::now();
        let end = self.end_time();
        while let Some(t) = self.queue.peek_time() {
            if t > end {
                break;
            }
            let (t, ev) = self.queue.pop().expect("peeked");
            self.events += 1;
            let (tag, who) = ev.tag();
            self.hasher.update(t.to_bits().to_le_bytes());
            self.hasher.update([tag]);
            self.hasher.update(who.to_le_bytes());
            self.handle(t, ev);
        }
        self.finish(started.elapsed().as_secs_f64())
    }

    fn handle(&mut self, t: f64, ev: Event) {
        match ev {
            Event::Mine { node } => self.mine(node, t),
            Event::Deliver { to, from, block } => {
                self.hasher.update(block.digest().0);
                self.store_and_relay(to, Some(from), block, t);
            }
            Event::Fetch { holder, requester, want } => {
                if let Some(b) = self.views[self.view_of[holder]].block(&want).cloned() {
                    self.send(holder, requester, b, t);
                }
            }
            Event::TxArrival { node } => {
                if let Workload::Poisson { tps } = self.cfg.workload {
                    self.generate_tx(node, t, true);
                    self.schedule_tx(node, t, tps);
                }
            }
            Event::SpamTick { k } => self.spam_tick(k, t),
            Event::AttackStart => {
                let v = self.shared.expect("attack needs adversary");
                self.adversary.start_attack(&self.views[v]);
            }
            Event::AttackRelease => self.release(t),
            Event::Checkpoint => {
                let ok = self.observer.checkpoint();
                self.push_timepoint(t, ok);
                let next = t + self.cfg.checkpoint_interval;
                if next <= self.end_time() {
                    self.queue.push(next, Event::Checkpoint);
                }
            }
        }
    }

    fn push_timepoint(&mut self, t: f64, ok: bool) {
        let view = &self.views[self.view_of[OBSERVER]];
        self.timeseries.push(TimePoint {
            time: t,
            confirmed_levels: self.observer.leaders().len() as u64,
            confirmed_transactions: self.observer.sanitized_total(),
            max_level: view.max_level(),
            voter_forking: view.voter_forking_rate(),
            pending_transactions: view.mempool().len() as u64,
            conservation_ok: ok,
        });
    }

    fn generate_tx(&mut self, node: usize, t: f64, jitter: bool) -> bool {
        let n = self.recipients.len();
        let to = if n > 1 {
            let r = self.tx_rng[node].gen_range(0..n - 1);
            if r >= node { r + 1 } else { r }
        } else {
            node
        };
        let Some(tx) = self.wallets[node].as_mut().and_then(|w| w.pay(self.recipients[to])) else { return false };
        self.generated += 1;
        let release = if jitter { t + self.cfg.jitter.draw(&mut self.jitter_rng[node]) } else { t };
        let _ = self.views[self.view_of[node]].receive_transaction(tx, release);
        true
    }

    fn spam_tick(&mut self, k: u32, t: f64) {
        let Some(spam) = &mut self.spam else { return };
        let keys: Vec<PublicKey> = spam.victims.iter().map(|v| self.recipients[*v]).collect();
        let set = conflict_set(&spam.key, k, &keys);
        spam.sets += 1;
        let victims = spam.victims.clone();
        for (tx, v) in set.into_iter().zip(victims) {
            spam.ids.insert(tx.id());
            let release = t + self.cfg.jitter.draw(&mut self.jitter_rng[v]);
            let _ = self.views[self.view_of[v]].receive_transaction(tx, release);
        }
        let next = spam.start + (k + 1) as f64 / spam.rate;
        if next < spam.stop {
            self.queue.push(next, Event::SpamTick { k: k + 1 });
        }
    }

    fn mine(&mut self, node: usize, t: f64) {
        let total = self.params.total_rate();
        let power = self.powers[node];
        let u: f64 = self.mine_rng[node].gen();
        let nonce: u64 = self.mine_rng[node].gen();
        let kind = sortition(u, &self.params);
        let v = self.view_of[node];
        if kind == BlockType::Transaction && self.cfg.workload == Workload::Saturated && self.wallets[node].is_some() {
            let cap = self.cfg.prism.tx_block_capacity;
            while self.views[v].mempool().eligible_count(t, cap) < cap {
                if !self.generate_tx(node, t, false) {
                    break;
                }
            }
        }
        let (ctx, disposition) = if self.adversarial[node] && self.adversary.is_active() {
            self.adversary.context(kind, &self.views[v], t, power)
        } else {
            (self.views[v].miner_context(t, power), Disposition::Publish)
        };
        let block = Arc::new(finish_mining(&ctx, &self.params, u, nonce, node as u32));
        self.record_mined(&block, node, t);
        match disposition {
            Disposition::Withhold => {
                self.adversary.withhold(block);
                self.maybe_release(t);
            }
            Disposition::Publish => self.store_and_relay(node, None, block, t),
        }
        self.schedule_mine(node, t, total);
    }

    fn record_mined(&mut self, block: &Block, node: usize, t: f64) {
        self.mined_at.insert(block.digest(), t);
        self.bytes_mined += block.wire_bytes() as u64;
        match block.kind() {
            BlockType::Transaction => self.counts.transaction += 1,
            BlockType::Proposer => self.counts.proposer += 1,
            BlockType::Voter(_) => self.counts.voter += 1,
        }
        if self.adversarial[node] {
            self.counts.adversarial += 1;
        }
        if let Some(spam) = &mut self.spam {
            spam.copies += block.transactions().iter().filter(|tx| spam.ids.contains(&tx.id())).count() as u64;
        }
    }

    fn send(&mut self, from: usize, to: usize, block: Arc<Block>, t: f64) {
        let arrival = self.links.send(from, to, block.wire_bytes(), t);
        self.queue.push(arrival, Event::Deliver { to, from, block });
    }

    fn relay(&mut self, node: usize, exclude: Option<usize>, block: &Arc<Block>, t: f64) {
        let shared = self.shared.is_some() && self.adversarial[node];
        let relayers: Vec<usize> = if shared { self.members.clone() } else { vec![node] };
        for r in relayers {
            let neighbors: Vec<usize> = self.topo.neighbors(r).to_vec();
            for nb in neighbors {
                if (r == node && Some(nb) == exclude) || (shared && self.adversarial[nb]) {
                    continue;
                }
                self.send(r, nb, block.clone(), t);
            }
        }
    }

    fn store_and_relay(&mut self, node: usize, from: Option<usize>, block: Arc<Block>, t: f64) {
        let v = self.view_of[node];
        let Ok(changes) = self.views[v].receive_block(block.clone()) else { return };
        let shared = self.shared == Some(v);
        let mut observer_dirty = false;
        let mut voter_stored = false;
        for change in changes {
            let d = match change {
                StateChange::TxBlockStored { block } => block,
                StateChange::ProposerStored { block, .. } => {
                    observer_dirty = true;
                    block
                }
                StateChange::VoterStored { block, .. } => {
                    observer_dirty = true;
                    voter_stored = true;
                    block
                }
                StateChange::Orphaned { block: d, missing } => {
                    if let Some(f) = from {
                        self.orphan_from[node].insert(d, f);
                        for want in missing {
                            let at = t + self.links.propagation();
                            self.queue.push(at, Event::Fetch { holder: f, requester: node, want });
                        }
                    }
                    continue;
                }
                StateChange::Duplicate(_) | StateChange::Dropped { .. } => continue,
            };
            let b = self.views[v].block(&d).expect("stored").clone();
            let exclude = if d == block.digest() { from } else { self.orphan_from[node].remove(&d) };
            if !self.adversarial[node] {
                if let Some(m) = self.mined_at.get(&d) {
                    self.delay_sum += t - m;
                    self.delay_count += 1;
                }
            }
            if shared {
                self.adversary.observe_public(&b);
            }
            self.relay(node, exclude, &b, t);
        }
        if observer_dirty && v == self.view_of[OBSERVER] {
            self.observer.update(t, &self.views[v], &self.mined_at);
        }
        if shared && voter_stored {
            self.maybe_release(t);
        }
    }

    fn maybe_release(&mut self, t: f64) {
        if let Some(v) = self.shared {
            if self.adversary.should_release(&self.views[v]) {
                self.release(t);
            }
        }
    }

    fn release(&mut self, t: f64) {
        if !self.adversary.is_withholding() {
            return;
        }
        let Some(v) = self.shared else { return };
        let node = self.members[0];
        for b in self.adversary.release(t) {
            if let Ok(changes) = self.views[v].receive_block(b.clone()) {
                if changes.iter().any(StateChange::is_stored) {
                    self.relay(node, None, &b, t);
                }
            }
        }
    }

    /// Snapshot of `node`'s view.
    pub fn snapshot(&self, node: usize) -> ChainSnapshot {
        self.views[self.view_of[node]].snapshot()
    }

    /// `node`'s view.
    pub fn view(&self, node: usize) -> &ChainState {
        &self.views[self.view_of[node]]
    }

    pub fn topology(&self) -> &Topology {
        &self.topo
    }

    fn finish(&mut self, wall: f64) -> SimOutput {
        let ok = self.observer.checkpoint();
        let end = self.end_time();
        self.push_timepoint(end, ok);
        let cfg = &self.cfg;
        let obs_view = &self.views[self.view_of[OBSERVER]];
        let (w0, w1) = (cfg.warmup_fraction * cfg.duration, cfg.duration);
        let span = (w1 - w0).max(f64::MIN_POSITIVE);
        let attack = match cfg.adversary.scenario {
            Scenario::None | Scenario::Spam { .. } => None,
            _ => {
                let target = self.adversary.target_level();
                let success = match (target, self.adversary.withheld_block()) {
                    (Some(l), Some(a)) => obs_view.leader_by_votes(l) == Some(a),
                    _ => false,
                };
                Some(AttackReport {
                    scenario: scenario_name(&cfg.adversary.scenario).to_string(),
                    target_level: target,
                    released: self.adversary.released_at().is_some(),
                    release_time: self.adversary.released_at(),
                    success,
                })
            }
        };
        let spam = self.spam.as_ref().map(|s| SpamReport {
            sets: s.sets,
            victims: s.victims.len() as u64,
            copies_mined: s.copies,
            normalized_by_victims: if s.sets == 0 { 0.0 } else { s.copies as f64 / (s.sets * s.victims.len() as u64) as f64 },
        });
        let mined = self.counts.transaction + self.counts.proposer + self.counts.voter;
        let mean_bytes = if mined == 0 { 0.0 } else { self.bytes_mined as f64 / mined as f64 };
        let hops = self.topo.mean_hops();
        let report = MetricsReport {
            protocol: Protocol::Prism,
            seed: self.seed,
            config_digest: cfg.digest(),
            duration: cfg.duration,
            window: (w0, w1),
            throughput: Throughput {
                confirmed_raw_tps: self.observer.raw_in_window() as f64 / span,
                ordered_sanitized_tps: self.observer.ordered_in_window() as f64 / span,
                confirmed_sanitized_tps: self.observer.confirmed_in_window() as f64 / span,
                confirmed_transactions: self.observer.sanitized_total(),
                generated_transactions: self.generated,
            },
            latency: LatencyStats::from_samples(self.observer.latencies()),
            forking: Forking {
                proposer: obs_view.proposer_forking_rate(),
                voter: obs_view.voter_forking_rate(),
                longest_chain: 0.0,
            },
            blocks: self.counts.clone(),
            confirmed_levels: self.observer.leaders().len() as u64,
            confirmation_depth: None,
            spam,
            attack,
            post_confirmation_reversals: self.observer.reversals(obs_view),
            topology: TopologyReport {
                nodes: self.topo.len() as u64,
                edges: self.topo.edge_count() as u64,
                diameter: self.topo.diameter() as u64,
                mean_hops: hops,
                mean_block_delay: if self.delay_count == 0 { 0.0 } else { self.delay_sum / self.delay_count as f64 },
                mean_block_bytes: mean_bytes,
                model_block_delay: super::delay_model(hops, mean_bytes, cfg.network.bandwidth, cfg.network.link_delay),
            },
            conservation_ok: self.observer.conservation_ok(),
            events_processed: self.events,
            event_trace_digest: hex::encode(self.hasher.clone().finalize()),
            wall_clock_seconds: wall,
        };
        SimOutput { report, timeseries: std::mem::take(&mut self.timeseries), trace: self.observer.take_trace() }
    }
}

pub(crate) fn scenario_name(s: &Scenario) -> &'static str {
    match s {
        Scenario::None => "none",
        Scenario::PrivateDoubleSpend { .. } => "private_double_spend",
        Scenario::Censorship => "censorship",
        Scenario::Balancing { .. } => "balancing",
        Scenario::Spam { .. } => "spam",
    }
}
