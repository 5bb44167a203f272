use std::collections::HashMap;

/// Per directed link FIFO transmission queues.
///
/// A message of `bytes` sent at `now` on link `(from, to)` starts
/// transmitting once the link is free, occupies it for `bytes / bandwidth`
/// seconds and arrives `propagation` seconds after transmission ends.
#[derive(Debug, Clone)]
pub struct LinkQueues {
    bandwidth: f64,
    propagation: f64,
    free_at: HashMap<(usize, usize), f64>,
}

impl LinkQueues {
    pub fn new(bandwidth: f64, propagation: f64) -> Self {
        LinkQueues { bandwidth, propagation, free_at: HashMap::new() }
    }

    /// Enqueues a message and returns its arrival time.
    pub fn send(&mut self, from: usize, to: usize, bytes: usize, now: f64) -> f64 {
        let free = self.free_at.entry((from, to)).or_insert(0.0);
        let done = free.max(now) + bytes as f64 / self.bandwidth;
        *free = done;
        done + self.propagation
    }

    pub fn propagation(&self) -> f64 {
        self.propagation
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }
}
