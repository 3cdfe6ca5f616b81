use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};

/// Per-thread access record, filled only in audit mode.
#[derive(Clone, Debug, Default)]
pub(crate) struct ShardAudit {
    /// Indexed by record position in the shard's edge store.
    pub edge_hits: Vec<bool>,
    /// Indexed by the rank's owned-neuron index; deposits into targets.
    pub deposit_hits: Vec<bool>,
    /// Owned-neuron indices stepped by this thread.
    pub update_hits: Vec<bool>,
}

impl ShardAudit {
    pub fn new(n_records: usize, n_owned: usize) -> Self {
        Self {
            edge_hits: vec![false; n_records],
            deposit_hits: vec![false; n_owned],
            update_hits: vec![false; n_owned],
        }
    }
}

/// Which threads touched each edge and each post-neuron of a rank.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AccessAudit {
    pub rank: usize,
    /// Global edge id → threads that delivered through it.
    pub edges: BTreeMap<u32, BTreeSet<usize>>,
    /// Global post-neuron id → threads that wrote to it.
    pub posts: BTreeMap<u32, BTreeSet<usize>>,
    /// Edges delivered by a thread that does not own their target.
    pub offending_edges: Vec<u32>,
}

impl AccessAudit {
    pub fn is_empty(&self) -> bool {
        self.edges.is_empty() && self.posts.is_empty()
    }

    /// Largest thread set over edges and post-neurons (0 for an empty report).
    pub fn max_threads_per_item(&self) -> usize {
        self.edges
            .values()
            .chain(self.posts.values())
            .map(BTreeSet::len)
            .max()
            .unwrap_or(0)
    }

    pub fn shared_posts(&self) -> Vec<u32> {
        self.posts
            .iter()
            .filter(|(_, t)| t.len() > 1)
            .map(|(&p, _)| p)
            .collect()
    }

    /// Fails naming the offending edges and post-neurons if anything was
    /// touched by more than one thread.
    pub fn check(&self) -> Result<()> {
        let shared_edges: Vec<u32> = self
            .edges
            .iter()
            .filter(|(_, t)| t.len() > 1)
            .map(|(&e, _)| e)
            .collect();
        let shared_posts = self.shared_posts();
        if shared_edges.is_empty() && shared_posts.is_empty() && self.offending_edges.is_empty() {
            return Ok(());
        }
        let mut edges = shared_edges;
        edges.extend(&self.offending_edges);
        edges.sort_unstable();
        edges.dedup();
        Err(Error::RaceDetected(format!(
            "rank {}: edges {:?} and post-neurons {:?} accessed by more than one thread",
            self.rank, edges, shared_posts
        )))
    }

    pub(crate) fn merge_into(&mut self, thread: usize, edges: &[u32], posts: &[u32]) {
        for &e in edges {
            self.edges.entry(e).or_default().insert(thread);
        }
        for &p in posts {
            self.posts.entry(p).or_default().insert(thread);
        }
    }
}
