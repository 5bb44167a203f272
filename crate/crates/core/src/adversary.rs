//! Adversarial mining strategies.
//!
//! All adversarial nodes share one view of the DAG and relay to each other
//! instantly. A strategy decides, once the sortition outcome of a mining
//! success is known, what the superblock commits to and whether the
//! resulting block is published or withheld. Every block it produces is a
//! valid block.
//!
//! * Private double spend: from a chosen level on, withhold a competing
//!   proposer block `A` and fork every voter chain privately to vote for
//!   it; publish everything once the private forks are longer on a majority
//!   of chains, or at the release deadline.
//! * Censorship: mine empty transaction blocks and proposer blocks that
//!   reference nothing.
//! * Balancing: mine a competing proposer block at every new level and
//!   always vote for the runner-up, keeping the vote split.

use std::sync::Arc;

use crate::block::{Block, BlockType};
use crate::chain::ChainState;
use crate::config::Scenario;
use crate::digest::Digest;
use crate::mining::MinerContext;

/// What to do with a freshly mined adversarial block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Disposition {
    Publish,
    Withhold,
}

#[derive(Debug, Clone)]
struct PrivateAttack {
    target: u64,
    margin: u32,
    private: ChainState,
    withheld_a: Option<Digest>,
    tips: Vec<Option<Digest>>,
    withheld: Vec<Arc<Block>>,
}

#[derive(Debug, Clone)]
enum Mode {
    Honest,
    AwaitingAttack { margin: u32 },
    Private(Box<PrivateAttack>),
    Censorship,
    Balancing { compete: bool },
}

/// The adversary's strategy state machine.
#[derive(Debug, Clone)]
pub struct Adversary {
    mode: Mode,
    target: Option<u64>,
    withheld_block: Option<Digest>,
    released_at: Option<f64>,
}

impl Adversary {
    pub fn new(scenario: &Scenario) -> Self {
        let mode = match *scenario {
            Scenario::PrivateDoubleSpend { release_margin, .. } => Mode::AwaitingAttack { margin: release_margin },
            Scenario::Censorship => Mode::Censorship,
            Scenario::Balancing { compete_every_level } => Mode::Balancing { compete: compete_every_level },
            Scenario::None | Scenario::Spam { .. } => Mode::Honest,
        };
        Adversary { mode, target: None, withheld_block: None, released_at: None }
    }

    /// Whether the strategy changes adversarial behaviour at all.
    pub fn is_active(&self) -> bool {
        !matches!(self.mode, Mode::Honest)
    }

    /// Whether adversarial transaction blocks are left empty.
    pub fn censors(&self) -> bool {
        matches!(self.mode, Mode::Censorship)
    }

    pub fn target_level(&self) -> Option<u64> {
        self.target
    }

    /// The withheld competing proposer block, once mined.
    pub fn withheld_block(&self) -> Option<Digest> {
        self.withheld_block
    }

    pub fn released_at(&self) -> Option<f64> {
        self.released_at
    }

    pub fn is_withholding(&self) -> bool {
        matches!(self.mode, Mode::Private(_))
    }

    /// Starts the private attack against the next level of `public`.
    pub fn start_attack(&mut self, public: &ChainState) {
        if let Mode::AwaitingAttack { margin } = self.mode {
            let target = public.max_level() + 1;
            self.target = Some(target);
            self.mode = Mode::Private(Box::new(PrivateAttack {
                target,
                margin,
                private: public.clone(),
                withheld_a: None,
                tips: vec![None; public.voter_chains() as usize],
                withheld: Vec::new(),
            }));
        }
    }

    /// The context to mine with, given the sortition outcome `kind`.
    pub fn context(&self, kind: BlockType, public: &ChainState, now: f64, power: f64) -> (MinerContext, Disposition) {
        let mut ctx = match &self.mode {
            Mode::Private(att) if kind.is_voter() && att.withheld_a.is_some() => att.private.miner_context(now, power),
            _ => public.miner_context(now, power),
        };
        match (&self.mode, kind) {
            (Mode::Honest | Mode::AwaitingAttack { .. }, _) => (ctx, Disposition::Publish),
            (Mode::Censorship, BlockType::Transaction) => {
                ctx.tx_pool.clear();
                (ctx, Disposition::Publish)
            }
            (Mode::Censorship, BlockType::Proposer) => {
                ctx.unref_tx_pool.clear();
                ctx.unref_prp_pool.clear();
                (ctx, Disposition::Publish)
            }
            (Mode::Censorship, _) => (ctx, Disposition::Publish),
            (Mode::Balancing { compete }, BlockType::Proposer) => {
                let h = public.max_level();
                let at = public.proposers_at(h);
                if *compete && h >= 1 && at.len() == 1 {
                    let parent = public.block(&at[0]).and_then(|b| b.parent()).expect("non-genesis proposer");
                    ctx.prp_parent = parent;
                    ctx.prp_parent_level = h - 1;
                    ctx.unref_prp_pool.clear();
                }
                (ctx, Disposition::Publish)
            }
            (Mode::Balancing { .. }, BlockType::Voter(chain)) => {
                let tree = public.voter_tree(chain);
                ctx.votes_on_prp[chain as usize] =
                    (tree.tip_last_voted() + 1..=public.max_level()).map(|l| runner_up(public, l)).collect();
                (ctx, Disposition::Publish)
            }
            (Mode::Balancing { .. }, _) => (ctx, Disposition::Publish),
            (Mode::Private(att), BlockType::Proposer) => {
                if att.withheld_a.is_some() || public.max_level() + 1 < att.target {
                    return (ctx, Disposition::Publish);
                }
                let parent = public.proposers_at(att.target - 1)[0];
                ctx.prp_parent = parent;
                ctx.prp_parent_level = att.target - 1;
                ctx.unref_prp_pool.clear();
                ctx.unref_tx_pool.clear();
                (ctx, Disposition::Withhold)
            }
            (Mode::Private(att), BlockType::Voter(chain)) => match att.withheld_a {
                None => (ctx, Disposition::Publish),
                Some(a) => {
                    let c = chain as usize;
                    let private = &att.private;
                    let parent = att.tips[c].unwrap_or_else(|| fork_point(public, chain, att.target));
                    let last = private.voter_tree(chain).last_voted(&parent).expect("fork point stored");
                    ctx.vt_parent[c] = parent;
                    ctx.votes_on_prp[c] = (last + 1..=private.max_level())
                        .map(|l| if l == att.target { a } else { private.vote_choice(l).expect("contiguous") })
                        .collect();
                    (ctx, Disposition::Withhold)
                }
            },
            (Mode::Private(_), BlockType::Transaction) => (ctx, Disposition::Publish),
        }
    }

    /// Records a withheld block.
    pub fn withhold(&mut self, block: Arc<Block>) {
        let Mode::Private(att) = &mut self.mode else { return };
        att.private.receive_block(block.clone()).expect("adversarial blocks are valid");
        match block.kind() {
            BlockType::Proposer => {
                att.withheld_a = Some(block.digest());
                self.withheld_block = Some(block.digest());
            }
            BlockType::Voter(chain) => att.tips[chain as usize] = Some(block.digest()),
            BlockType::Transaction => {}
        }
        att.withheld.push(block);
    }

    /// Mirrors a public block into the private view.
    pub fn observe_public(&mut self, block: &Arc<Block>) {
        if let Mode::Private(att) = &mut self.mode {
            let _ = att.private.receive_block(block.clone());
        }
    }

    /// Whether the private forks are now longer than the public chains on
    /// enough voter chains.
    pub fn should_release(&self, public: &ChainState) -> bool {
        let Mode::Private(att) = &self.mode else { return false };
        if att.withheld_a.is_none() {
            return false;
        }
        let m = public.voter_chains();
        let winning = (0..m)
            .filter(|&c| {
                att.tips[c as usize].is_some_and(|tip| {
                    att.private.voter_tree(c).chainlen(&tip).unwrap_or(0) > public.voter_tree(c).height()
                })
            })
            .count() as u32;
        winning >= m / 2 + 1 + att.margin
    }

    /// Ends the attack and returns the withheld blocks in mining order.
    pub fn release(&mut self, now: f64) -> Vec<Arc<Block>> {
        match std::mem::replace(&mut self.mode, Mode::Honest) {
            Mode::Private(att) => {
                self.released_at = Some(now);
                att.withheld
            }
            other => {
                self.mode = other;
                Vec::new()
            }
        }
    }
}

/// The deepest block on `chain`'s public main chain that has not voted at
/// `target` yet.
fn fork_point(public: &ChainState, chain: u32, target: u64) -> Digest {
    let tree = public.voter_tree(chain);
    *tree
        .main_chain()
        .iter()
        .rev()
        .find(|d| tree.last_voted(d).is_some_and(|lv| lv < target))
        .expect("genesis has voted on nothing")
}

/// The candidate with the second most votes at `level` (the only candidate
/// when there is just one).
fn runner_up(state: &ChainState, level: u64) -> Digest {
    let mut counts = state.vote_counts(level);
    counts.sort_by(|a, b| b.1.cmp(&a.1));
    counts.get(1).or(counts.first()).map(|c| c.0).expect("levels are contiguous")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn honest_scenarios_are_inactive() {
        assert!(!Adversary::new(&Scenario::None).is_active());
        assert!(!Adversary::new(&Scenario::Spam { rate: 1.0, victims: 1, start: 0.0, stop: 1.0 }).is_active());
        assert!(Adversary::new(&Scenario::Censorship).is_active());
    }
}
