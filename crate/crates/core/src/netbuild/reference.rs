//! Straightforward global simulator used as ground truth: one flat edge
//! list, one event queue, no decomposition.

use crate::dynamics::{make_propagators, step_neuron, NeuronState, Propagators};
use crate::engine::SpikeLog;
use crate::error::Result;
use crate::network::{ExternalInput, Network};
use crate::plasticity::{on_post_spike, on_pre_spike, PlasticSynapseState, SpikeTrace};

pub struct ReferenceSim<'a> {
    net: &'a Network,
    props: Vec<Propagators>,
    states: Vec<NeuronState>,
    inputs: Vec<ExternalInput>,
    /// Out-edges per neuron, by edge id.
    out_edges: Vec<Vec<u32>>,
    /// Incoming plastic edges per neuron.
    in_plastic: Vec<Vec<u32>>,
    /// Indexed by edge id; only plastic entries are used.
    weights: Vec<PlasticSynapseState>,
    pre_traces: Vec<SpikeTrace>,
    post_traces: Vec<SpikeTrace>,
    /// `queue[t mod len]` holds `(pre, delay, edge)` due at step `t`.
    queue: Vec<Vec<(u32, u16, u32)>>,
    step: u64,
}

impl<'a> ReferenceSim<'a> {
    pub fn new(net: &'a Network) -> Result<Self> {
        let n = net.n_neurons();
        let props = net
            .models
            .iter()
            .map(|p| make_propagators(p, net.dt))
            .collect::<Result<_>>()?;
        let (states, inputs) = (0..n as u32).map(|v| net.neuron_init(v)).unzip();
        let mut out_edges = vec![Vec::new(); n];
        let mut in_plastic = vec![Vec::new(); n];
        for (e, &(s, t)) in net.graph.edges().iter().enumerate() {
            out_edges[s as usize].push(e as u32);
            if net.plastic[e] {
                in_plastic[t as usize].push(e as u32);
            }
        }
        Ok(Self {
            net,
            props,
            states,
            inputs,
            out_edges,
            in_plastic,
            weights: net.weights.iter().map(|&w| PlasticSynapseState::new(w)).collect(),
            pre_traces: vec![SpikeTrace::default(); net.n_edges()],
            post_traces: vec![SpikeTrace::default(); n],
            queue: vec![Vec::new(); net.d_max_steps as usize + 1],
            step: 0,
        })
    }

    /// Simulates one step and returns the neurons that spiked, ascending.
    pub fn step(&mut self) -> Result<Vec<u32>> {
        let net = self.net;
        let t = self.step;
        let time = t as f64 * net.dt;
        let slot = (t % self.queue.len() as u64) as usize;
        let mut due = std::mem::take(&mut self.queue[slot]);
        due.sort_unstable();
        for &(_, _, e) in &due {
            let e = e as usize;
            let target = net.graph.edge(e).1 as usize;
            let w = if net.plastic[e] {
                self.weights[e] = on_pre_spike(&self.weights[e], &self.post_traces[target], &net.stdp, time)?;
                self.pre_traces[e].bump(time, net.stdp.tau_plus)?;
                self.weights[e].w
            } else {
                net.weights[e]
            };
            self.states[target].deposit(w, net.polarity[e]);
        }
        due.clear();
        self.queue[slot] = due;

        let mut spiked = Vec::new();
        for v in 0..self.states.len() {
            self.inputs[v].apply(&mut self.states[v]);
            let m = net.population(v as u32).model;
            if !step_neuron(&mut self.states[v], &net.models[m], &self.props[m]) {
                continue;
            }
            spiked.push(v as u32);
            for &e in &self.in_plastic[v] {
                let e = e as usize;
                self.weights[e] = on_post_spike(&self.weights[e], &self.pre_traces[e], &net.stdp, time)?;
            }
            self.post_traces[v].bump(time, net.stdp.tau_minus)?;
            for &e in &self.out_edges[v] {
                let d = net.delays[e as usize];
                let at = ((t + d as u64) % self.queue.len() as u64) as usize;
                self.queue[at].push((v as u32, d, e));
            }
        }
        self.step += 1;
        Ok(spiked)
    }

    pub fn state(&self, v: u32) -> &NeuronState {
        &self.states[v as usize]
    }

    /// Current weights of plastic edges as `(edge, w)`, by edge id.
    pub fn plastic_weights(&self) -> Vec<(u32, f64)> {
        (0..self.net.n_edges())
            .filter(|&e| self.net.plastic[e])
            .map(|e| (e as u32, self.weights[e].w))
            .collect()
    }
}

/// Ground-truth spike log of `n_steps` steps.
pub fn run_reference(net: &Network, n_steps: u64) -> Result<SpikeLog> {
    let mut sim = ReferenceSim::new(net)?;
    let mut log = SpikeLog::new(net.dt);
    for t in 0..n_steps {
        log.events.extend(sim.step()?.into_iter().map(|v| (t, v)));
    }
    Ok(log)
}
