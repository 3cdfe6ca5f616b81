use crate::error::{Error, Result};

/// A buffered spike that is due for delivery at the current step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ActiveSpike {
    /// Pre-table index.
    pub pre: u32,
    /// Steps since emission; equals the delay of the edges it activates.
    pub age: u16,
}

#[derive(Clone, Debug, Default)]
struct Slot {
    emission: Option<u64>,
    pre: Vec<u32>,
}

/// Ring of `d_max` slots; slot `e mod d_max` holds the pre-table indices that
/// spiked at emission step `e` until step `e + d_max`, when every delay has
/// been served.
#[derive(Clone, Debug)]
pub struct SpikeBuffer {
    slots: Vec<Slot>,
    d_min: u16,
    d_max: u16,
    complete_through: Option<u64>,
}

impl SpikeBuffer {
    pub fn new(d_min: u16, d_max: u16) -> Self {
        assert!(d_min >= 1 && d_min <= d_max, "need 1 <= d_min <= d_max");
        Self {
            slots: vec![Slot::default(); d_max as usize],
            d_min,
            d_max,
            complete_through: None,
        }
    }

    pub fn capacity(&self) -> usize {
        self.slots.len()
    }

    /// Last emission step whose global spike set is fully buffered.
    pub fn complete_through(&self) -> Option<u64> {
        self.complete_through
    }

    /// Merges sorted pre indices into the slot of `emission`.
    pub fn enqueue(&mut self, emission: u64, pre_sorted: &[u32]) -> Result<()> {
        let cap = self.slots.len() as u64;
        let slot = &mut self.slots[(emission % cap) as usize];
        match slot.emission {
            Some(e) if e == emission => {}
            Some(e) => {
                return Err(Error::Precondition(format!(
                    "spike buffer slot for step {emission} still holds unretired step {e}"
                )))
            }
            None => slot.emission = Some(emission),
        }
        if pre_sorted.is_empty() {
            return Ok(());
        }
        let merged = crate::graph::sorted::union(&slot.pre, pre_sorted);
        if merged.len() != slot.pre.len() + pre_sorted.len()
            || pre_sorted.windows(2).any(|w| w[0] >= w[1])
        {
            let dup = pre_sorted
                .windows(2)
                .find(|w| w[0] >= w[1])
                .map(|w| w[1])
                .or_else(|| pre_sorted.iter().copied().find(|p| slot.pre.binary_search(p).is_ok()))
                .unwrap_or(0);
            return Err(Error::DuplicateSpike {
                pre: dup,
                step: emission,
            });
        }
        slot.pre = merged;
        Ok(())
    }

    pub fn mark_complete(&mut self, emission: u64) {
        self.complete_through = Some(self.complete_through.map_or(emission, |c| c.max(emission)));
    }

    /// Spikes due at `step`, sorted by `(pre, age)`. Fails if the buffer is
    /// not yet complete for the youngest age that `step` needs.
    pub fn active(&self, step: u64) -> Result<Vec<ActiveSpike>> {
        if step >= self.d_min as u64 {
            let needed = step - self.d_min as u64;
            if self.complete_through.is_none_or(|c| c < needed) {
                return Err(Error::OverlapViolation {
                    step,
                    complete: self.complete_through,
                    needed,
                });
            }
        }
        let cap = self.slots.len() as u64;
        let mut out = Vec::new();
        for age in self.d_min..=self.d_max {
            let Some(e) = step.checked_sub(age as u64) else {
                break;
            };
            let slot = &self.slots[(e % cap) as usize];
            if slot.emission == Some(e) {
                out.extend(slot.pre.iter().map(|&pre| ActiveSpike { pre, age }));
            }
        }
        out.sort_unstable();
        Ok(out)
    }

    /// Drops the spikes of emission `step - d_max`, whose last delay was just
    /// served.
    pub fn retire(&mut self, step: u64) {
        if let Some(e) = step.checked_sub(self.d_max as u64) {
            let cap = self.slots.len() as u64;
            let slot = &mut self.slots[(e % cap) as usize];
            if slot.emission == Some(e) {
                slot.emission = None;
                slot.pre.clear();
            }
        }
    }

    /// Emission steps currently held.
    pub fn held(&self) -> Vec<u64> {
        let mut v: Vec<u64> = self.slots.iter().filter_map(|s| s.emission).collect();
        v.sort_unstable();
        v
    }
}
