use crate::dynamics::Polarity;

pub const NOT_PLASTIC: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SynapseRecord {
    /// Index into the rank's pre-neuron table.
    pub pre: u32,
    /// Index into the rank's sorted owned neurons.
    pub target: u32,
    /// pA; for plastic synapses the live weight is in the plastic slot.
    pub weight: f64,
    /// Global edge id, the insertion index in the parent graph.
    pub edge: u32,
    pub delay_steps: u16,
    pub polarity: Polarity,
    /// Index into the owning shard's plastic slots, or [`NOT_PLASTIC`].
    pub plastic: u32,
}

/// One thread's synapses, grouped per pre-neuron and sorted by increasing
/// delay, with dense offsets so that the run for `(pre, delay)` is an O(1)
/// slice lookup. Inside a run records follow the global edge id.
#[derive(Clone, Debug, Default)]
pub struct EdgeStore {
    n_pre: usize,
    d_min: u16,
    n_delays: usize,
    records: Vec<SynapseRecord>,
    offsets: Vec<u32>,
}

impl EdgeStore {
    pub fn build(mut records: Vec<SynapseRecord>, n_pre: usize, d_min: u16, d_max: u16) -> Self {
        records.sort_unstable_by_key(|r| (r.pre, r.delay_steps, r.edge));
        let n_delays = (d_max - d_min) as usize + 1;
        let mut offsets = vec![0u32; n_pre * n_delays + 1];
        for r in &records {
            offsets[r.pre as usize * n_delays + (r.delay_steps - d_min) as usize + 1] += 1;
        }
        for i in 1..offsets.len() {
            offsets[i] += offsets[i - 1];
        }
        Self {
            n_pre,
            d_min,
            n_delays,
            records,
            offsets,
        }
    }

    /// Records of pre-neuron `pre` with delay `delay`.
    #[inline]
    pub fn run(&self, pre: u32, delay: u16) -> &[SynapseRecord] {
        &self.records[self.run_range(pre, delay)]
    }

    /// Positions of [`EdgeStore::run`] inside [`EdgeStore::records`].
    #[inline]
    pub fn run_range(&self, pre: u32, delay: u16) -> std::ops::Range<usize> {
        let i = pre as usize * self.n_delays + (delay - self.d_min) as usize;
        self.offsets[i] as usize..self.offsets[i + 1] as usize
    }

    pub fn records(&self) -> &[SynapseRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn n_pre(&self) -> usize {
        self.n_pre
    }

    pub(crate) fn records_mut(&mut self) -> &mut [SynapseRecord] {
        &mut self.records
    }

    pub(crate) fn into_records(self) -> Vec<SynapseRecord> {
        self.records
    }

    /// Checks sort keys and offsets.
    pub fn check_invariants(&self) -> bool {
        let sorted = self
            .records
            .windows(2)
            .all(|w| (w[0].pre, w[0].delay_steps, w[0].edge) < (w[1].pre, w[1].delay_steps, w[1].edge));
        let runs_ok = (0..self.n_pre).all(|p| {
            (0..self.n_delays).all(|d| {
                let delay = self.d_min + d as u16;
                self.run(p as u32, delay)
                    .iter()
                    .all(|r| r.pre == p as u32 && r.delay_steps == delay)
            })
        });
        sorted && runs_ok && *self.offsets.last().unwrap() as usize == self.records.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(pre: u32, delay: u16, edge: u32) -> SynapseRecord {
        SynapseRecord {
            pre,
            target: 0,
            weight: 1.0,
            edge,
            delay_steps: delay,
            polarity: Polarity::Excitatory,
            plastic: NOT_PLASTIC,
        }
    }

    #[test]
    fn delay_order_and_runs() {
        let store = EdgeStore::build(vec![rec(0, 5, 0), rec(0, 1, 1), rec(0, 3, 2)], 1, 1, 5);
        let delays: Vec<u16> = store.records().iter().map(|r| r.delay_steps).collect();
        assert_eq!(delays, vec![1, 3, 5]);
        assert_eq!(store.run(0, 3).len(), 1);
        assert!(store.run(0, 2).is_empty());
        assert!(store.check_invariants());
    }

    #[test]
    fn empty_store() {
        let store = EdgeStore::build(Vec::new(), 3, 1, 4);
        assert!(store.is_empty());
        assert!(store.run(2, 4).is_empty());
        assert!(store.check_invariants());
    }
}
