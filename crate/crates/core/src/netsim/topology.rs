use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::SimError;
use crate::config::TopologyKind;

/// An undirected graph over nodes `0..n`, adjacency lists sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topology {
    adj: Vec<Vec<usize>>,
}

impl Topology {
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a != b && !adj[a].contains(&b) {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        for l in &mut adj {
            l.sort_unstable();
        }
        Topology { adj }
    }

    pub fn ring(n: usize) -> Self {
        let edges: Vec<_> = if n < 2 { vec![] } else { (0..n).map(|i| (i, (i + 1) % n)).collect() };
        Self::from_edges(n, &edges)
    }

    pub fn complete(n: usize) -> Self {
        let edges: Vec<_> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        Self::from_edges(n, &edges)
    }

    /// A uniformly paired random `degree`-regular simple connected graph,
    /// by rejection sampling over the configuration model.
    pub fn random_regular<R: Rng + ?Sized>(n: usize, degree: usize, rng: &mut R) -> Result<Self, SimError> {
        if n <= 1 {
            return Ok(Self::from_edges(n, &[]));
        }
        if degree == 0 || degree >= n || (n * degree) % 2 == 1 {
            return Err(SimError::Topology(format!("no {degree}-regular graph on {n} nodes")));
        }
        'attempt: for _ in 0..10_000 {
            let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat(v).take(degree)).collect();
            stubs.shuffle(rng);
            let mut edges = Vec::with_capacity(stubs.len() / 2);
            for pair in stubs.chunks(2) {
                let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
                if a == b || edges.contains(&(a, b)) {
                    continue 'attempt;
                }
                edges.push((a, b));
            }
            let t = Self::from_edges(n, &edges);
            if t.is_connected() {
                return Ok(t);
            }
        }
        Err(SimError::Topology(format!("failed to sample a connected {degree}-regular graph on {n} nodes")))
    }

    pub fn build<R: Rng + ?Sized>(kind: TopologyKind, n: usize, rng: &mut R) -> Result<Self, SimError> {
        match kind {
            TopologyKind::RandomRegular { degree } => Self::random_regular(n, degree, rng),
            TopologyKind::Ring => Ok(Self::ring(n)),
            TopologyKind::Complete => Ok(Self::complete(n)),
        }
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Hop distances from `src`; `usize::MAX` for unreachable nodes.
    pub fn hops_from(&self, src: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.adj.len()];
        let mut q = VecDeque::from([src]);
        dist[src] = 0;
        while let Some(v) = q.pop_front() {
            for &w in &self.adj[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    q.push_back(w);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.adj.is_empty() || self.hops_from(0).iter().all(|&d| d != usize::MAX)
    }

    /// Longest shortest path.
    pub fn diameter(&self) -> usize {
        (0..self.adj.len()).flat_map(|s| self.hops_from(s)).filter(|&d| d != usize::MAX).max().unwrap_or(0)
    }

    /// Mean hop count over ordered pairs of distinct nodes.
    pub fn mean_hops(&self) -> f64 {
        let n = self.adj.len();
        if n < 2 {
            return 0.0;
        }
        let total: usize = (0..n).flat_map(|s| self.hops_from(s)).filter(|&d| d != usize::MAX).sum();
        total as f64 / (n * (n - 1)) as f64
    }
}
