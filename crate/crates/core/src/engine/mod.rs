//! Per-rank simulation core.
//!
//! Each rank owns a cell of neurons and every synapse that ends in it. Inside
//! a rank the owned neurons are split into contiguous ranges, one per compute
//! thread, and each thread stores the incoming synapses of its range grouped
//! by pre-neuron and sorted by delay. A step delivers all buffered spikes whose
//! age matches a stored delay, then updates the neurons. Because a target's
//! synapses all live on one thread and are visited in (pre id, delay, edge id)
//! order, the floating-point accumulation is the same for any thread or rank
//! count.

mod audit;
mod buffer;
mod rank;
mod shard;
mod store;

pub use audit::AccessAudit;
pub use buffer::{ActiveSpike, SpikeBuffer};
pub use rank::{
    build_rank_state, MemoryCounters, NoExchange, RankOptions, RankState, RunOptions, RunReport,
    SpikeExchange, StepTiming,
};
pub use shard::DepositEvent;
pub use store::{EdgeStore, SynapseRecord, NOT_PLASTIC};

/// Spike events `(step, neuron id)` sorted by step, then id.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SpikeLog {
    /// ms per step.
    pub dt: f64,
    pub events: Vec<(u64, u32)>,
}

impl SpikeLog {
    pub fn new(dt: f64) -> Self {
        Self {
            dt,
            events: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Merges per-rank logs into one sorted log.
    pub fn merge<'a>(dt: f64, logs: impl IntoIterator<Item = &'a SpikeLog>) -> Self {
        let mut events: Vec<(u64, u32)> = logs.into_iter().flat_map(|l| l.events.iter().copied()).collect();
        events.sort_unstable();
        Self { dt, events }
    }

    pub fn is_sorted(&self) -> bool {
        self.events.windows(2).all(|w| w[0] < w[1])
    }

    /// First event where the two logs differ, taken from whichever log has
    /// the earlier event at that position.
    pub fn first_divergence(&self, other: &SpikeLog) -> Option<(u64, u32)> {
        let n = self.events.len().min(other.events.len());
        for i in 0..n {
            let (a, b) = (self.events[i], other.events[i]);
            if a != b {
                return Some(a.min(b));
            }
        }
        match self.events.len().cmp(&other.events.len()) {
            std::cmp::Ordering::Less => Some(other.events[n]),
            std::cmp::Ordering::Greater => Some(self.events[n]),
            std::cmp::Ordering::Equal => None,
        }
    }

    /// Events of the neurons with `id` in `range`.
    pub fn restrict(&self, range: std::ops::Range<u32>) -> SpikeLog {
        SpikeLog {
            dt: self.dt,
            events: self.events.iter().copied().filter(|(_, id)| range.contains(id)).collect(),
        }
    }

    /// Mean rate in Hz of `n_neurons` over `n_steps`.
    pub fn mean_rate_hz(&self, n_neurons: usize, n_steps: u64) -> f64 {
        if n_neurons == 0 || n_steps == 0 {
            return 0.0;
        }
        self.events.len() as f64 / (n_neurons as f64 * n_steps as f64 * self.dt * 1e-3)
    }
}
