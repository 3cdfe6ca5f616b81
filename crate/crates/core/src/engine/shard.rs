use std::sync::Arc;

use crate::dynamics::{step_neuron, NeuronParams, NeuronState, Propagators};
use crate::error::{Error, Result};
use crate::network::ExternalInput;
use crate::plasticity::{on_post_spike, on_pre_spike, PlasticSynapseState, SpikeTrace, StdpParams};

use super::audit::ShardAudit;
use super::buffer::ActiveSpike;
use super::store::{EdgeStore, NOT_PLASTIC};

/// Models shared by every thread of a rank.
#[derive(Debug)]
pub(crate) struct ModelTable {
    pub params: Vec<NeuronParams>,
    pub props: Vec<Propagators>,
    pub stdp: StdpParams,
    pub dt: f64,
}

/// Everything one compute thread owns: a contiguous range of the rank's
/// post-neurons, their incoming synapses and the plasticity state of those
/// synapses.
#[derive(Debug)]
pub(crate) struct ThreadShard {
    /// First owned-neuron index of the range.
    pub base: usize,
    /// Global ids of the range.
    pub ids: Vec<u32>,
    pub states: Vec<NeuronState>,
    pub inputs: Vec<ExternalInput>,
    pub model_of: Vec<u16>,
    pub store: EdgeStore,
    pub plastic: Vec<PlasticSynapseState>,
    /// Pre-synaptic trace per plastic synapse.
    pub pre_traces: Vec<SpikeTrace>,
    /// Post-synaptic trace per neuron of the range.
    pub post_traces: Vec<SpikeTrace>,
    /// CSR of plastic slots per neuron of the range.
    pub plastic_in_offsets: Vec<u32>,
    pub plastic_in: Vec<u32>,
    pub models: Arc<ModelTable>,
    pub audit: Option<ShardAudit>,
    pub deposits: Option<Vec<DepositEvent>>,
}

/// One synaptic deposit, recorded when deposit tracing is on.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DepositEvent {
    pub step: u64,
    pub edge: u32,
    /// Global id of the target neuron.
    pub target: u32,
    pub weight: f64,
}

impl ThreadShard {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    /// Assigns plastic slots in store order and builds the per-neuron index.
    /// Records must carry `plastic = 0` for plastic and [`NOT_PLASTIC`]
    /// otherwise.
    pub fn index_plastic(&mut self) {
        let n = self.len();
        let mut per_target = vec![Vec::new(); n];
        self.plastic.clear();
        let base = self.base;
        for r in self.store.records_mut() {
            if r.plastic != NOT_PLASTIC {
                r.plastic = self.plastic.len() as u32;
                self.plastic.push(PlasticSynapseState::new(r.weight));
                if let Some(slots) = per_target.get_mut((r.target as usize).wrapping_sub(base)) {
                    slots.push(r.plastic);
                }
            }
        }
        self.pre_traces = vec![SpikeTrace::default(); self.plastic.len()];
        self.plastic_in_offsets = Vec::with_capacity(n + 1);
        self.plastic_in_offsets.push(0);
        self.plastic_in.clear();
        for slots in per_target {
            self.plastic_in.extend(slots);
            self.plastic_in_offsets.push(self.plastic_in.len() as u32);
        }
    }

    /// Delivery followed by the neuron update for `step`. Returns the owned
    /// indices (rank level) that spiked, ascending.
    pub fn process(&mut self, step: u64, active: &[ActiveSpike]) -> Result<Vec<u32>> {
        self.deliver(step, active)?;
        self.update(step)
    }

    pub fn deliver(&mut self, step: u64, active: &[ActiveSpike]) -> Result<()> {
        let models = &*self.models;
        let t = step as f64 * models.dt;
        let n = self.states.len();
        for a in active {
            let range = self.store.run_range(a.pre, a.age);
            for pos in range {
                let r = self.store.records()[pos];
                let local = (r.target as usize).wrapping_sub(self.base);
                if let Some(audit) = &mut self.audit {
                    audit.edge_hits[pos] = true;
                    audit.deposit_hits[r.target as usize] = true;
                }
                if local >= n {
                    return Err(Error::RaceDetected(format!(
                        "edge {} (stored by the thread owning {}..{}) targets owned index {} of another thread",
                        r.edge,
                        self.base,
                        self.base + n,
                        r.target
                    )));
                }
                let w = if r.plastic == NOT_PLASTIC {
                    r.weight
                } else {
                    let s = r.plastic as usize;
                    let next = on_pre_spike(&self.plastic[s], &self.post_traces[local], &models.stdp, t)?;
                    self.plastic[s] = next;
                    self.pre_traces[s].bump(t, models.stdp.tau_plus)?;
                    next.w
                };
                self.states[local].deposit(w, r.polarity);
                if let Some(log) = &mut self.deposits {
                    log.push(DepositEvent {
                        step,
                        edge: r.edge,
                        target: self.ids[local],
                        weight: w,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn update(&mut self, step: u64) -> Result<Vec<u32>> {
        let models = &*self.models;
        let t = step as f64 * models.dt;
        let mut spiked = Vec::new();
        for i in 0..self.states.len() {
            let state = &mut self.states[i];
            self.inputs[i].apply(state);
            let m = self.model_of[i] as usize;
            if let Some(audit) = &mut self.audit {
                audit.update_hits[self.base + i] = true;
            }
            if !step_neuron(state, &models.params[m], &models.props[m]) {
                continue;
            }
            spiked.push((self.base + i) as u32);
            let slots = self.plastic_in_offsets[i] as usize..self.plastic_in_offsets[i + 1] as usize;
            for &s in &self.plastic_in[slots] {
                let s = s as usize;
                self.plastic[s] = on_post_spike(&self.plastic[s], &self.pre_traces[s], &models.stdp, t)?;
            }
            self.post_traces[i].bump(t, models.stdp.tau_minus)?;
        }
        Ok(spiked)
    }
}
