use std::collections::{HashMap, HashSet};
use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use sha2::{Digest as _, Sha256};

use super::auto_depth;
use crate::block::BLOCK_OVERHEAD_BYTES;
use crate::config::{ExperimentConfig, Protocol, Scenario, Workload};
use crate::crypto::PublicKey;
use crate::digest::Digest;
use crate::ledger::{conservation_check, execute, Transaction, UtxoOverlay, UtxoSet, TX_WIRE_BYTES};
use crate::metrics::{
    BlockCounts, Forking, LatencyStats, MetricsReport, SimOutput, Throughput, TimePoint, TopologyReport,
};
use crate::mining::Mempool;
use crate::netsim::{delay_model, hash_powers, stream_rng, EventQueue, LinkQueues, SimError, Topology};
use crate::workload::{genesis_utxos, node_key, Wallet};

/// A longest-chain block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LcBlock {
    pub digest: Digest,
    pub parent: Digest,
    pub height: u64,
    pub transactions: Vec<Transaction>,
    pub miner: u32,
}

impl LcBlock {
    pub fn new(parent: Digest, height: u64, transactions: Vec<Transaction>, miner: u32, nonce: u64) -> Self {
        let mut parts: Vec<u8> = Vec::with_capacity(48 + 32 * transactions.len());
        parts.extend_from_slice(&parent.0);
        parts.extend_from_slice(&nonce.to_le_bytes());
        parts.extend_from_slice(&miner.to_le_bytes());
        for tx in &transactions {
            parts.extend_from_slice(&tx.id().0);
        }
        LcBlock { digest: Digest::hash(&parts), parent, height, transactions, miner }
    }

    pub fn wire_bytes(&self) -> usize {
        BLOCK_OVERHEAD_BYTES + self.transactions.len() * TX_WIRE_BYTES
    }

    pub fn genesis_digest() -> Digest {
        Digest::hash(b"longest-chain-genesis")
    }
}

/// One node's block tree, main chain, tip ledger and mempool.
#[derive(Debug, Clone)]
struct LcNode {
    blocks: HashMap<Digest, Arc<LcBlock>>,
    waiting: HashMap<Digest, Vec<(Arc<LcBlock>, Option<usize>)>>,
    main: Vec<Digest>,
    utxo: UtxoSet,
    mempool: Mempool,
}

/// Result of a node adopting a block.
struct Adopted {
    stored: Vec<(Arc<LcBlock>, Option<usize>)>,
    tip_changed: bool,
    fork_height: Option<u64>,
}

impl LcNode {
    fn new(initial: UtxoSet) -> Self {
        LcNode {
            blocks: HashMap::new(),
            waiting: HashMap::new(),
            main: vec![LcBlock::genesis_digest()],
            utxo: initial,
            mempool: Mempool::new(),
        }
    }

    fn knows(&self, d: &Digest) -> bool {
        *d == LcBlock::genesis_digest() || self.blocks.contains_key(d)
    }

    fn tip(&self) -> Digest {
        *self.main.last().expect("genesis")
    }

    fn height(&self) -> u64 {
        self.main.len() as u64 - 1
    }

    fn receive(&mut self, b: Arc<LcBlock>, from: Option<usize>, initial: &UtxoSet, now: f64) -> Adopted {
        let mut out = Adopted { stored: Vec::new(), tip_changed: false, fork_height: None };
        if self.knows(&b.digest) || self.waiting.values().flatten().any(|(w, _)| w.digest == b.digest) {
            return out;
        }
        if !self.knows(&b.parent) {
            self.waiting.entry(b.parent).or_default().push((b, from));
            return out;
        }
        let mut ready = vec![(b, from)];
        while let Some((blk, src)) = ready.pop() {
            self.blocks.insert(blk.digest, blk.clone());
            if blk.height > self.height() {
                let fork = self.adopt(&blk, initial, now);
                out.tip_changed = true;
                out.fork_height = Some(out.fork_height.map_or(fork, |f: u64| f.min(fork)));
            }
            if let Some(children) = self.waiting.remove(&blk.digest) {
                ready.extend(children);
            }
            out.stored.push((blk, src));
        }
        out
    }

    /// Makes `b` the tip; returns the height of the fork point.
    fn adopt(&mut self, b: &Arc<LcBlock>, initial: &UtxoSet, now: f64) -> u64 {
        if b.parent == self.tip() {
            self.main.push(b.digest);
            for tx in &b.transactions {
                let _ = execute(tx, &mut self.utxo);
                self.mempool.remove_conflicting(tx);
            }
            return b.height - 1;
        }
        let mut branch = vec![b.digest];
        let mut cur = b.parent;
        while cur != LcBlock::genesis_digest() && self.main.get(self.blocks[&cur].height as usize) != Some(&cur) {
            branch.push(cur);
            cur = self.blocks[&cur].parent;
        }
        let fork = if cur == LcBlock::genesis_digest() { 0 } else { self.blocks[&cur].height };
        let abandoned: Vec<Digest> = self.main.split_off(fork as usize + 1);
        branch.reverse();
        self.main.extend(branch.iter().copied());
        self.utxo = initial.clone();
        for d in self.main[1..].to_vec() {
            for tx in &self.blocks[&d].transactions {
                let _ = execute(tx, &mut self.utxo);
            }
        }
        for d in &branch {
            for tx in &self.blocks[d].transactions {
                self.mempool.remove_conflicting(tx);
            }
        }
        for d in abandoned {
            for tx in &self.blocks[&d].transactions.clone() {
                if self.utxo.check(tx).is_ok() {
                    let _ = self.mempool.insert(tx.clone(), now);
                }
            }
        }
        fork
    }

    fn block_template(&self, now: f64, cap: usize, validate: bool) -> Vec<Transaction> {
        if !validate {
            return self.mempool.eligible(now, cap);
        }
        let mut overlay = UtxoOverlay::new(&self.utxo);
        let mut txs = Vec::with_capacity(cap);
        for tx in self.mempool.eligible(now, usize::MAX) {
            if txs.len() == cap {
                break;
            }
            if overlay.execute(&tx).is_ok() {
                txs.push(tx);
            }
        }
        txs
    }
}

#[derive(Debug, Clone)]
enum Event {
    Mine { node: usize },
    Deliver { to: usize, from: usize, block: Arc<LcBlock> },
    Fetch { holder: usize, requester: usize, want: Digest },
    TxArrival { node: usize },
    Checkpoint,
}

/// Confirmation tracking at the observing node: a block is confirmed once
/// `k` blocks are mined on top of it.
struct LcObserver {
    k: u32,
    confirmed: Vec<Digest>,
    initial: UtxoSet,
    utxo: UtxoSet,
    checkpoint_utxo: UtxoSet,
    since_checkpoint: Vec<Transaction>,
    conservation_ok: bool,
    window: (f64, f64),
    latencies: Vec<f64>,
    raw_in_window: u64,
    sanitized_in_window: u64,
    sanitized_total: u64,
    reversals: u64,
    seen: HashSet<Digest>,
}

impl LcObserver {
    fn new(k: u32, initial: UtxoSet, window: (f64, f64)) -> Self {
        LcObserver {
            k,
            confirmed: Vec::new(),
            utxo: initial.clone(),
            checkpoint_utxo: initial.clone(),
            initial,
            since_checkpoint: Vec::new(),
            conservation_ok: true,
            window,
            latencies: Vec::new(),
            raw_in_window: 0,
            sanitized_in_window: 0,
            sanitized_total: 0,
            reversals: 0,
            seen: HashSet::new(),
        }
    }

    fn update(&mut self, node: &LcNode, now: f64, mined_at: &HashMap<Digest, f64>) {
        let diverged = self.confirmed.iter().enumerate().find(|(i, d)| node.main.get(i + 1) != Some(d)).map(|(i, _)| i);
        if let Some(i) = diverged {
            self.reversals += (self.confirmed.len() - i) as u64;
            self.confirmed.truncate(i);
            self.checkpoint();
            self.utxo = self.initial.clone();
            for d in &self.confirmed {
                for tx in &node.blocks[d].transactions {
                    let _ = execute(tx, &mut self.utxo);
                }
            }
            self.checkpoint_utxo = self.utxo.clone();
        }
        let tip = node.height();
        while (self.confirmed.len() as u64 + 1) + self.k as u64 <= tip {
            let d = node.main[self.confirmed.len() + 1];
            self.confirmed.push(d);
            let b = &node.blocks[&d];
            let mined = mined_at.get(&d).copied().unwrap_or(now);
            let in_window = now >= self.window.0 && now <= self.window.1;
            for tx in &b.transactions {
                if in_window {
                    self.raw_in_window += 1;
                }
                if execute(tx, &mut self.utxo).is_ok() {
                    self.since_checkpoint.push(tx.clone());
                    self.sanitized_total += 1;
                    if in_window {
                        self.sanitized_in_window += 1;
                    }
                    if self.seen.insert(tx.id()) && mined >= self.window.0 && mined <= self.window.1 {
                        self.latencies.push(now - mined);
                    }
                }
            }
        }
    }

    fn checkpoint(&mut self) -> bool {
        let ok = conservation_check(&self.checkpoint_utxo, &self.since_checkpoint, &self.utxo);
        self.conservation_ok &= ok;
        self.checkpoint_utxo = self.utxo.clone();
        self.since_checkpoint.clear();
        ok
    }
}

/// A network of longest-chain miners with first-arrival tie breaking and
/// `k`-deep confirmation, on the same network model as [`crate::netsim::PrismSim`].
pub struct LongestChainSim {
    cfg: ExperimentConfig,
    seed: u64,
    k: u32,
    topo: Topology,
    links: LinkQueues,
    queue: EventQueue<Event>,
    nodes: Vec<LcNode>,
    initial: UtxoSet,
    powers: Vec<f64>,
    mine_rng: Vec<ChaCha8Rng>,
    tx_rng: Vec<ChaCha8Rng>,
    jitter_rng: Vec<ChaCha8Rng>,
    wallets: Vec<Wallet>,
    recipients: Vec<PublicKey>,
    observer: LcObserver,
    mined_at: HashMap<Digest, f64>,
    mined: u64,
    bytes_mined: u64,
    delay_sum: f64,
    delay_count: u64,
    generated: u64,
    timeseries: Vec<TimePoint>,
    hasher: Sha256,
    events: u64,
}

impl LongestChainSim {
    pub fn new(cfg: &ExperimentConfig, seed: u64) -> Result<Self, SimError> {
        cfg.validate()?;
        if !matches!(cfg.adversary.scenario, Scenario::None) {
            return Err(SimError::Unsupported(crate::netsim::scenario_name(&cfg.adversary.scenario)));
        }
        let n = cfg.network.nodes;
        let lc = &cfg.longest_chain;
        let k = match lc.depth {
            Some(k) => k,
            None => auto_depth(cfg.confirmation.beta, cfg.confirmation.epsilon)
                .map_err(|_| SimError::Parameter { name: "epsilon", value: cfg.confirmation.epsilon })?,
        };
        let topo = Topology::build(cfg.network.topology, n, &mut stream_rng(seed, u64::MAX, "topology"))?;
        let coins = crate::netsim::coins_needed(cfg, n, lc.block_rate, lc.block_capacity);
        let initial = genesis_utxos(cfg.signature, n, coins, 0);
        let window = (cfg.warmup_fraction * cfg.duration, cfg.duration);
        let observer = LcObserver::new(k, initial.clone(), window);
        let mut sim = LongestChainSim {
            seed,
            k,
            links: LinkQueues::new(cfg.network.bandwidth, cfg.network.link_delay),
            queue: EventQueue::new(),
            nodes: vec![LcNode::new(initial.clone()); n],
            powers: hash_powers(n, cfg.adversary.nodes, cfg.adversary.power),
            mine_rng: (0..n).map(|i| stream_rng(seed, i as u64, "mine")).collect(),
            tx_rng: (0..n).map(|i| stream_rng(seed, i as u64, "tx")).collect(),
            jitter_rng: (0..n).map(|i| stream_rng(seed, i as u64, "jitter")).collect(),
            wallets: (0..n).map(|i| Wallet::new(cfg.signature, i, coins)).collect(),
            recipients: (0..n).map(|i| node_key(cfg.signature, i).public()).collect(),
            initial,
            observer,
            mined_at: HashMap::new(),
            mined: 0,
            bytes_mined: 0,
            delay_sum: 0.0,
            delay_count: 0,
            generated: 0,
            timeseries: Vec::new(),
            hasher: Sha256::new(),
            events: 0,
            topo,
            cfg: cfg.clone(),
        };
        for node in 0..n {
            sim.schedule_mine(node, 0.0);
            if let Workload::Poisson { tps } = sim.cfg.workload {
                sim.schedule_tx(node, 0.0, tps);
            }
        }
        sim.queue.push(sim.cfg.checkpoint_interval, Event::Checkpoint);
        Ok(sim)
    }

    /// The confirmation depth in use.
    pub fn depth(&self) -> u32 {
        self.k
    }

    fn end_time(&self) -> f64 {
        self.cfg.duration + self.cfg.drain
    }

    fn schedule_mine(&mut self, node: usize, now: f64) {
        let rate = self.powers[node] * self.cfg.longest_chain.block_rate;
        if rate > 0.0 {
            let dt = Exp::new(rate).expect("positive").sample(&mut self.mine_rng[node]);
            self.queue.push(now + dt, Event::Mine { node });
        }
    }

    fn schedule_tx(&mut self, node: usize, now: f64, tps: f64) {
        let rate = tps / self.nodes.len() as f64;
        if rate > 0.0 {
            let dt = Exp::new(rate).expect("positive").sample(&mut self.tx_rng[node]);
            self.queue.push(now + dt, Event::TxArrival { node });
        }
    }

    fn generate_tx(&mut self, node: usize, t: f64, jitter: bool) -> bool {
        let n = self.recipients.len();
        let to = if n > 1 {
            let r = self.tx_rng[node].gen_range(0..n - 1);
            if r >= node { r + 1 } else { r }
        } else {
            node
        };
        let Some(tx) = self.wallets[node].pay(self.recipients[to]) else { return false };
        self.generated += 1;
        let release = if jitter { t + self.cfg.jitter.draw(&mut self.jitter_rng[node]) } else { t };
        let _ = self.nodes[node].mempool.insert(tx, release);
        true
    }

    pub fn run(mut self) -> SimOutput {
        let started = Instant::now();
        let end = self.end_time();
        while let Some(t) = self.queue.peek_time() {
            if t > end {
                break;
            }
            let (t, ev) = self.queue.pop().expect("peeked");
            self.events += 1;
            self.hasher.update(t.to_bits().to_le_bytes());
            self.handle(t, ev);
        }
        self.finish(started.elapsed().as_secs_f64())
    }

    fn handle(&mut self, t: f64, ev: Event) {
        match ev {
            Event::Mine { node } => {
                let cap = self.cfg.longest_chain.block_capacity;
                if self.cfg.workload == Workload::Saturated {
                    while self.nodes[node].mempool.eligible_count(t, cap) < cap {
                        if !self.generate_tx(node, t, false) {
                            break;
                        }
                    }
                }
                let nonce: u64 = self.mine_rng[node].gen();
                let n = &self.nodes[node];
                let txs = n.block_template(t, cap, self.cfg.longest_chain.validate_before_mining);
                let block = Arc::new(LcBlock::new(n.tip(), n.height() + 1, txs, node as u32, nonce));
                self.mined_at.insert(block.digest, t);
                self.mined += 1;
                self.bytes_mined += block.wire_bytes() as u64;
                self.hasher.update(block.digest.0);
                self.store_and_relay(node, None, block, t);
                self.schedule_mine(node, t);
            }
            Event::Deliver { to, from, block } => self.store_and_relay(to, Some(from), block, t),
            Event::Fetch { holder, requester, want } => {
                if let Some(b) = self.nodes[holder].blocks.get(&want).cloned() {
                    self.send(holder, requester, b, t);
                }
            }
            Event::TxArrival { node } => {
                if let Workload::Poisson { tps } = self.cfg.workload {
                    self.generate_tx(node, t, true);
                    self.schedule_tx(node, t, tps);
                }
            }
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
        let n = &self.nodes[0];
        self.timeseries.push(TimePoint {
            time: t,
            confirmed_levels: self.observer.confirmed.len() as u64,
            confirmed_transactions: self.observer.sanitized_total,
            max_level: n.height(),
            voter_forking: 0.0,
            pending_transactions: n.mempool.len() as u64,
            conservation_ok: ok,
        });
    }

    fn send(&mut self, from: usize, to: usize, block: Arc<LcBlock>, t: f64) {
        let arrival = self.links.send(from, to, block.wire_bytes(), t);
        self.queue.push(arrival, Event::Deliver { to, from, block });
    }

    fn store_and_relay(&mut self, node: usize, from: Option<usize>, block: Arc<LcBlock>, t: f64) {
        let parent = block.parent;
        let adopted = self.nodes[node].receive(block, from, &self.initial, t);
        if adopted.stored.is_empty() {
            if let Some(f) = from {
                if !self.nodes[node].knows(&parent) {
                    let at = t + self.links.propagation();
                    self.queue.push(at, Event::Fetch { holder: f, requester: node, want: parent });
                }
            }
            return;
        }
        for (b, src) in adopted.stored {
            if let Some(m) = self.mined_at.get(&b.digest) {
                self.delay_sum += t - m;
                self.delay_count += 1;
            }
            for nb in self.topo.neighbors(node).to_vec() {
                if Some(nb) != src {
                    self.send(node, nb, b.clone(), t);
                }
            }
        }
        if node == 0 && adopted.tip_changed {
            self.observer.update(&self.nodes[0], t, &self.mined_at);
        }
    }

    fn finish(&mut self, wall: f64) -> SimOutput {
        let ok = self.observer.checkpoint();
        self.push_timepoint(self.end_time(), ok);
        let cfg = &self.cfg;
        let (w0, w1) = (cfg.warmup_fraction * cfg.duration, cfg.duration);
        let span = (w1 - w0).max(f64::MIN_POSITIVE);
        let obs = &self.nodes[0];
        let total_blocks = obs.blocks.len() as f64;
        let forking = if total_blocks == 0.0 { 0.0 } else { (total_blocks - obs.height() as f64) / total_blocks };
        let mean_bytes = if self.mined == 0 { 0.0 } else { self.bytes_mined as f64 / self.mined as f64 };
        let hops = self.topo.mean_hops();
        let report = MetricsReport {
            protocol: Protocol::LongestChain,
            seed: self.seed,
            config_digest: cfg.digest(),
            duration: cfg.duration,
            window: (w0, w1),
            throughput: Throughput {
                confirmed_raw_tps: self.observer.raw_in_window as f64 / span,
                ordered_sanitized_tps: self.observer.sanitized_in_window as f64 / span,
                confirmed_sanitized_tps: self.observer.sanitized_in_window as f64 / span,
                confirmed_transactions: self.observer.sanitized_total,
                generated_transactions: self.generated,
            },
            latency: LatencyStats::from_samples(&self.observer.latencies),
            forking: Forking { proposer: 0.0, voter: 0.0, longest_chain: forking },
            blocks: BlockCounts { longest_chain: self.mined, ..BlockCounts::default() },
            confirmed_levels: self.observer.confirmed.len() as u64,
            confirmation_depth: Some(self.k),
            spam: None,
            attack: None,
            post_confirmation_reversals: self.observer.reversals,
            topology: TopologyReport {
                nodes: self.topo.len() as u64,
                edges: self.topo.edge_count() as u64,
                diameter: self.topo.diameter() as u64,
                mean_hops: hops,
                mean_block_delay: if self.delay_count == 0 { 0.0 } else { self.delay_sum / self.delay_count as f64 },
                mean_block_bytes: mean_bytes,
                model_block_delay: delay_model(hops, mean_bytes, cfg.network.bandwidth, cfg.network.link_delay),
            },
            conservation_ok: self.observer.conservation_ok,
            events_processed: self.events,
            event_trace_digest: hex::encode(self.hasher.clone().finalize()),
            wall_clock_seconds: wall,
        };
        SimOutput { report, timeseries: std::mem::take(&mut self.timeseries), trace: Vec::new() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::{Keypair, SignatureScheme};
    use crate::ledger::{OutPoint, TxOutput, Utxo};

    fn key() -> Keypair {
        Keypair::from_seed(SignatureScheme::Mock, [7; 32])
    }

    fn coin(i: u32) -> OutPoint {
        OutPoint::new(Digest::hash(b"lc-test"), i)
    }

    fn initial() -> UtxoSet {
        UtxoSet::from_list((0..4).map(|i| Utxo { id: coin(i), value: 5, owner: key().public() }))
    }

    fn spend(i: u32, value: u64) -> Transaction {
        Transaction::signed(vec![coin(i)], vec![TxOutput { value, owner: key().public() }], &[&key()])
    }

    fn child(parent: &LcBlock, txs: Vec<Transaction>, nonce: u64) -> Arc<LcBlock> {
        Arc::new(LcBlock::new(parent.digest, parent.height + 1, txs, 0, nonce))
    }

    fn genesis() -> LcBlock {
        LcBlock { digest: LcBlock::genesis_digest(), parent: LcBlock::genesis_digest(), height: 0, transactions: vec![], miner: 0 }
    }

    #[test]
    fn digest_covers_parent_nonce_and_contents() {
        let g = LcBlock::genesis_digest();
        let a = LcBlock::new(g, 1, vec![], 0, 1);
        assert_ne!(a.digest, LcBlock::new(g, 1, vec![], 0, 2).digest);
        assert_ne!(a.digest, LcBlock::new(g, 1, vec![spend(0, 5)], 0, 1).digest);
        assert_eq!(a.wire_bytes(), BLOCK_OVERHEAD_BYTES);
        assert_eq!(LcBlock::new(g, 1, vec![spend(0, 5); 3], 0, 1).wire_bytes(), BLOCK_OVERHEAD_BYTES + 3 * TX_WIRE_BYTES);
    }

    #[test]
    fn orphan_is_stored_when_parent_arrives() {
        let mut n = LcNode::new(initial());
        let a = child(&genesis(), vec![], 1);
        let b = child(&a, vec![], 2);
        let r = n.receive(b.clone(), Some(3), &initial(), 0.0);
        assert!(r.stored.is_empty() && !r.tip_changed);
        let r = n.receive(a.clone(), None, &initial(), 0.0);
        assert_eq!(r.stored.len(), 2);
        assert_eq!(r.fork_height, Some(0));
        assert_eq!(n.tip(), b.digest);
        assert_eq!(n.height(), 2);
        assert!(n.receive(a, None, &initial(), 0.0).stored.is_empty());
    }

    #[test]
    fn equal_height_fork_keeps_the_first_tip() {
        let mut n = LcNode::new(initial());
        let a = child(&genesis(), vec![], 1);
        let b = child(&genesis(), vec![], 2);
        n.receive(a.clone(), None, &initial(), 0.0);
        let r = n.receive(b, None, &initial(), 0.0);
        assert_eq!(r.stored.len(), 1);
        assert!(!r.tip_changed);
        assert_eq!(n.tip(), a.digest);
    }

    #[test]
    fn reorg_rebuilds_ledger_and_returns_abandoned_transactions() {
        let mut n = LcNode::new(initial());
        let a = child(&genesis(), vec![spend(0, 5)], 1);
        n.receive(a.clone(), None, &initial(), 0.0);
        assert!(n.utxo.get(&coin(0)).is_none());
        let b1 = child(&genesis(), vec![spend(1, 5)], 2);
        let b2 = child(&b1, vec![], 3);
        n.receive(b1, None, &initial(), 1.0);
        let r = n.receive(b2.clone(), None, &initial(), 1.0);
        assert_eq!(r.fork_height, Some(0));
        assert_eq!(n.tip(), b2.digest);
        assert!(n.utxo.get(&coin(0)).is_some());
        assert!(n.utxo.get(&coin(1)).is_none());
        assert!(n.mempool.contains(&spend(0, 5).id()));
        assert_eq!(n.block_template(2.0, 10, true), vec![spend(0, 5)]);
    }

    #[test]
    fn template_skips_invalid_transactions_when_validating() {
        let mut n = LcNode::new(initial());
        n.mempool.insert(spend(2, 50), 0.0).unwrap();
        n.mempool.insert(spend(3, 5), 0.0).unwrap();
        assert_eq!(n.block_template(1.0, 10, true), vec![spend(3, 5)]);
        assert_eq!(n.block_template(1.0, 10, false).len(), 2);
    }

    #[test]
    fn observer_counts_reversed_confirmations() {
        let mut obs = LcObserver::new(1, initial(), (0.0, 100.0));
        let mut n = LcNode::new(initial());
        let a1 = child(&genesis(), vec![spend(0, 5)], 1);
        let a2 = child(&a1, vec![], 2);
        n.receive(a1.clone(), None, &initial(), 0.0);
        n.receive(a2, None, &initial(), 0.0);
        obs.update(&n, 10.0, &HashMap::from([(a1.digest, 4.0)]));
        assert_eq!(obs.confirmed, vec![a1.digest]);
        assert_eq!(obs.latencies, vec![6.0]);
        assert!(obs.checkpoint());
        let mut prev = genesis();
        for nonce in 10..13 {
            let b = child(&prev, vec![], nonce);
            n.receive(b.clone(), None, &initial(), 11.0);
            prev = (*b).clone();
        }
        obs.update(&n, 12.0, &HashMap::new());
        assert_eq!(obs.reversals, 1);
        assert_eq!(obs.confirmed.len(), 2);
        assert!(obs.utxo.get(&coin(0)).is_some());
        assert!(obs.conservation_ok);
    }
}
