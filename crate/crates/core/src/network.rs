//! The materialized network: graph plus per-edge and per-neuron payload.

use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::decomposition::{AreaSpec, Point};
use crate::dynamics::{NeuronParams, NeuronState, Polarity};
use crate::graph::DirectedGraph;
use crate::plasticity::StdpParams;

/// External input of a population.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Drive {
    /// Constant current (pA).
    pub i_ext: f64,
    /// Total rate of Poisson input events per neuron (Hz).
    pub poisson_rate_hz: f64,
    /// Weight of each Poisson event (pA; sign selects the kernel).
    pub poisson_weight: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Population {
    pub name: String,
    pub area: usize,
    pub vertices: Range<u32>,
    /// Index into [`Network::models`].
    pub model: usize,
    pub drive: Drive,
    /// Initial membrane potential drawn uniformly from this range, or `u_rest`.
    pub u_init: Option<(f64, f64)>,
    /// Stream key of the per-neuron RNGs; stable under re-indexing of
    /// other populations.
    pub stream_key: u64,
}

#[derive(Clone, Debug)]
pub struct Network {
    pub seed: u64,
    /// ms
    pub dt: f64,
    pub d_min_steps: u16,
    pub d_max_steps: u16,
    pub graph: DirectedGraph,
    /// pA (current mode) or nS (conductance mode).
    pub weights: Vec<f64>,
    pub delays: Vec<u16>,
    pub polarity: Vec<Polarity>,
    pub plastic: Vec<bool>,
    pub positions: Vec<Point>,
    pub areas: Vec<AreaSpec>,
    pub populations: Vec<Population>,
    pub population_of: Vec<u16>,
    pub models: Vec<NeuronParams>,
    pub stdp: StdpParams,
}

impl Network {
    pub fn n_neurons(&self) -> usize {
        self.graph.n_vertices() as usize
    }

    pub fn n_edges(&self) -> usize {
        self.graph.n_edges()
    }

    pub fn population(&self, v: u32) -> &Population {
        &self.populations[self.population_of[v as usize] as usize]
    }

    pub fn params(&self, v: u32) -> &NeuronParams {
        &self.models[self.population(v).model]
    }

    pub fn area_of(&self, v: u32) -> usize {
        self.population(v).area
    }

    /// Initial state and external-input generator of neuron `v`. Depends only
    /// on the seed, the population stream key and the index within the
    /// population.
    pub fn neuron_init(&self, v: u32) -> (NeuronState, ExternalInput) {
        let pop = self.population(v);
        let p = &self.models[pop.model];
        let local = (v - pop.vertices.start) as u64;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(pop.stream_key.wrapping_add(local));
        let mut state = NeuronState::at_rest(p);
        if let Some((lo, hi)) = pop.u_init {
            state.u = if hi > lo { rng.random_range(lo..hi) } else { lo };
        }
        state.i_ext = pop.drive.i_ext;
        let lambda = pop.drive.poisson_rate_hz * self.dt * 1e-3;
        let poisson = if lambda > 0.0 && pop.drive.poisson_weight != 0.0 {
            Poisson::new(lambda).ok()
        } else {
            None
        };
        let polarity = if pop.drive.poisson_weight < 0.0 {
            Polarity::Inhibitory
        } else {
            Polarity::Excitatory
        };
        let input = ExternalInput {
            rng,
            poisson,
            weight: pop.drive.poisson_weight,
            polarity,
        };
        (state, input)
    }
}

/// Per-neuron Poisson input with its own RNG stream.
#[derive(Clone, Debug)]
pub struct ExternalInput {
    rng: ChaCha8Rng,
    poisson: Option<Poisson<f64>>,
    weight: f64,
    polarity: Polarity,
}

impl ExternalInput {
    /// Draws this step's input events and deposits them.
    #[inline]
    pub fn apply(&mut self, state: &mut NeuronState) {
        if let Some(dist) = &self.poisson {
            let n = dist.sample(&mut self.rng);
            if n > 0.0 {
                state.deposit(n * self.weight, self.polarity);
            }
        }
    }
}
