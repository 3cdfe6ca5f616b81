//! The two benchmark networks: a balanced random network with plastic E→E
//! synapses, and a multi-area network of layered microcircuits wired by an
//! area-level connectome.

use std::path::Path;

use serde::Deserialize;

use crate::dynamics::NeuronParams;
use crate::error::{Error, Result};
use crate::plasticity::StdpParams;

use super::config::{
    AreaConfig, DecompositionConfig, DelayDist, DriveConfig, NetworkConfig, OutputConfig, PopulationConfig,
    ProjectionConfig, Rule, WeightDist,
};
use super::connectome::ConnectomeMatrix;

#[derive(Clone, Debug, PartialEq)]
pub struct BalancedNetParams {
    /// Multiplies the population sizes; indegrees stay fixed.
    pub scale: f64,
    pub n_exc: u32,
    pub n_inh: u32,
    pub k_exc: u32,
    pub k_inh: u32,
    /// pA
    pub w_exc: f64,
    /// Inhibitory weight is `-g·w_exc`.
    pub g: f64,
    /// ms
    pub delay: f64,
    /// Total Poisson input rate per neuron (Hz), each event of `w_exc`.
    pub ext_rate: f64,
    pub neuron: NeuronParams,
    pub stdp: StdpParams,
    pub plastic: bool,
    pub seed: u64,
    pub dt: f64,
    /// ms
    pub t_sim: f64,
}

impl Default for BalancedNetParams {
    fn default() -> Self {
        Self {
            scale: 1.0,
            n_exc: 8000,
            n_inh: 2000,
            k_exc: 800,
            k_inh: 200,
            w_exc: 87.8,
            g: 5.0,
            delay: 1.5,
            ext_rate: 7000.0,
            neuron: NeuronParams::default(),
            stdp: StdpParams::default(),
            plastic: true,
            seed: 1,
            dt: 0.1,
            t_sim: 1000.0,
        }
    }
}

/// 80/20 excitatory/inhibitory network with fixed indegree, Poisson drive
/// and plastic E→E synapses, at `scale` times 10 000 neurons.
pub fn make_balanced_random_net(scale: f64, stdp: StdpParams) -> Result<NetworkConfig> {
    make_balanced_random_net_with(&BalancedNetParams {
        scale,
        stdp,
        ..BalancedNetParams::default()
    })
}

pub fn make_balanced_random_net_with(p: &BalancedNetParams) -> Result<NetworkConfig> {
    if !(p.scale > 0.0 && p.scale.is_finite()) {
        return Err(Error::config("scale", format!("must be positive, got {}", p.scale)));
    }
    let count = |n: u32| ((n as f64 * p.scale).round() as u32).max(1);
    let pop = |name: &str, n: u32| PopulationConfig {
        name: name.into(),
        count: count(n),
        neuron: p.neuron,
        drive: DriveConfig {
            i_ext: 0.0,
            poisson_rate: p.ext_rate,
            poisson_weight: p.w_exc,
        },
        u_init: Some([p.neuron.u_reset, p.neuron.theta]),
    };
    let proj = |src: &str, tgt: &str, k: u32, w: f64, plastic: bool| ProjectionConfig {
        source: format!("net/{src}"),
        target: format!("net/{tgt}"),
        rule: Rule::FixedIndegree(k),
        weight: WeightDist::Constant(w),
        delay: DelayDist::Constant(p.delay),
        plastic,
        receptor: None,
    };
    let w_inh = -p.g * p.w_exc;
    let cfg = NetworkConfig {
        seed: p.seed,
        dt: p.dt,
        d_min: None,
        d_max: None,
        t_sim: p.t_sim,
        stdp: p.stdp,
        decomposition: DecompositionConfig::default(),
        output: OutputConfig::default(),
        areas: vec![AreaConfig {
            name: "net".into(),
            origin: [0.0; 3],
            extent: [1.0, 1.0, 1.0],
            populations: vec![pop("E", p.n_exc), pop("I", p.n_inh)],
        }],
        projections: vec![
            proj("E", "E", p.k_exc, p.w_exc, p.plastic),
            proj("E", "I", p.k_exc, p.w_exc, false),
            proj("I", "E", p.k_inh, w_inh, false),
            proj("I", "I", p.k_inh, w_inh, false),
        ],
        connectome: None,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Per-area layered microcircuit description (external data).
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MicrocircuitTable {
    pub populations: Vec<String>,
    pub counts: Vec<u32>,
    pub k_ext: Vec<u32>,
    pub background_rate: f64,
    pub weight: f64,
    pub weight_sd_rel: f64,
    pub g: f64,
    pub l4e_to_l23e: f64,
    pub delay_exc: f64,
    pub delay_exc_sd: f64,
    pub delay_inh: f64,
    pub delay_inh_sd: f64,
    /// Row = target, column = source.
    pub probabilities: Vec<Vec<f64>>,
    pub neuron: NeuronParams,
}

const BUILTIN_MICROCIRCUIT: &str = include_str!("../../data/microcircuit.toml");

impl MicrocircuitTable {
    /// The table shipped with the crate.
    pub fn builtin() -> Self {
        Self::parse(BUILTIN_MICROCIRCUIT).expect("shipped microcircuit table is valid")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let t: Self = toml::from_str(text).map_err(|e| Error::ConfigSyntax(e.to_string()))?;
        let n = t.populations.len();
        let square = t.probabilities.len() == n && t.probabilities.iter().all(|r| r.len() == n);
        if t.counts.len() != n || t.k_ext.len() != n || !square {
            return Err(Error::config("microcircuit", "table dimensions disagree"));
        }
        if t.probabilities.iter().flatten().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::config("microcircuit", "probability out of range"));
        }
        t.neuron.validate()?;
        Ok(t)
    }

    fn is_inhibitory(&self, pop: usize) -> bool {
        self.populations[pop].ends_with('I')
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LayeredCortexParams {
    pub table: MicrocircuitTable,
    /// Fraction of the full-scale neuron counts.
    pub scale: f64,
    /// Connection probability = connectome density × normalization.
    pub normalization: f64,
    /// mm/ms
    pub velocity: f64,
    /// ms
    pub delay_offset: f64,
    /// Used when the connectome has no distances.
    pub inter_delay: DelayDist,
    pub inter_weight: WeightDist,
    pub source_population: String,
    pub target_populations: Vec<String>,
    /// Areas are laid out along x with this spacing (mm).
    pub spacing: f64,
    pub seed: u64,
    pub dt: f64,
    pub t_sim: f64,
}

impl Default for LayeredCortexParams {
    fn default() -> Self {
        let table = MicrocircuitTable::builtin();
        let w = table.weight;
        Self {
            table,
            scale: 0.01,
            normalization: 1.0,
            velocity: 3.5,
            delay_offset: 0.5,
            inter_delay: DelayDist::Constant(2.0),
            inter_weight: WeightDist::Constant(w),
            source_population: "L23E".into(),
            target_populations: vec!["L4E".into(), "L4I".into()],
            spacing: 5.0,
            seed: 1,
            dt: 0.1,
            t_sim: 100.0,
        }
    }
}

/// One layered microcircuit per connectome area, plus inter-area
/// projections from `source_population` onto `target_populations` with
/// probabilities taken from the connectome.
pub fn make_layered_cortex_net(conn: &ConnectomeMatrix, p: &LayeredCortexParams) -> Result<NetworkConfig> {
    let t = &p.table;
    if !(p.scale > 0.0 && p.scale.is_finite()) {
        return Err(Error::config("scale", format!("must be positive, got {}", p.scale)));
    }
    for name in std::iter::once(&p.source_population).chain(&p.target_populations) {
        if !t.populations.contains(name) {
            return Err(Error::config("populations", format!("`{name}` is not in the microcircuit table")));
        }
    }
    let mut areas = Vec::with_capacity(conn.n_areas());
    for (a, label) in conn.labels.iter().enumerate() {
        let mut pops = Vec::with_capacity(t.populations.len());
        for (i, name) in t.populations.iter().enumerate() {
            let count = (t.counts[i] as f64 * p.scale).round() as u32;
            if count == 0 {
                return Err(Error::config(
                    format!("{label}/{name}"),
                    "population count is 0 at this scale",
                ));
            }
            pops.push(PopulationConfig {
                name: name.clone(),
                count,
                neuron: t.neuron,
                drive: DriveConfig {
                    i_ext: 0.0,
                    poisson_rate: t.k_ext[i] as f64 * t.background_rate,
                    poisson_weight: t.weight,
                },
                u_init: Some([t.neuron.u_reset, t.neuron.theta]),
            });
        }
        areas.push(AreaConfig {
            name: label.clone(),
            origin: [a as f64 * p.spacing, 0.0, 0.0],
            extent: [1.0, 1.0, 0.0],
            populations: pops,
        });
    }

    let mut projections = Vec::new();
    for label in &conn.labels {
        for (tgt, row) in t.probabilities.iter().enumerate() {
            for (src, &prob) in row.iter().enumerate() {
                if prob == 0.0 {
                    continue;
                }
                let inh = t.is_inhibitory(src);
                let mut mean = if inh { t.g * t.weight } else { t.weight };
                if t.populations[src] == "L4E" && t.populations[tgt] == "L23E" {
                    mean *= t.l4e_to_l23e;
                }
                let (d, sd) = if inh {
                    (t.delay_inh, t.delay_inh_sd)
                } else {
                    (t.delay_exc, t.delay_exc_sd)
                };
                projections.push(ProjectionConfig {
                    source: format!("{label}/{}", t.populations[src]),
                    target: format!("{label}/{}", t.populations[tgt]),
                    rule: Rule::PairwiseBernoulli(prob),
                    weight: WeightDist::Normal {
                        mean,
                        sd: mean.abs() * t.weight_sd_rel,
                    },
                    delay: DelayDist::Normal { mean: d, sd },
                    plastic: false,
                    receptor: None,
                });
            }
        }
    }
    for (i, src) in conn.labels.iter().enumerate() {
        for (j, dst) in conn.labels.iter().enumerate() {
            let prob = conn.values[i][j] * p.normalization;
            if i == j || prob == 0.0 {
                continue;
            }
            if prob > 1.0 {
                return Err(Error::config(
                    "normalization",
                    format!("probability out of range: {prob} for {src}->{dst}"),
                ));
            }
            let delay = match &conn.distances {
                Some(d) => DelayDist::Constant(d[i][j] / p.velocity + p.delay_offset),
                None => p.inter_delay,
            };
            for tp in &p.target_populations {
                projections.push(ProjectionConfig {
                    source: format!("{src}/{}", p.source_population),
                    target: format!("{dst}/{tp}"),
                    rule: Rule::PairwiseBernoulli(prob),
                    weight: p.inter_weight,
                    delay,
                    plastic: false,
                    receptor: None,
                });
            }
        }
    }

    let cfg = NetworkConfig {
        seed: p.seed,
        dt: p.dt,
        d_min: None,
        d_max: None,
        t_sim: p.t_sim,
        stdp: StdpParams::default(),
        decomposition: DecompositionConfig::default(),
        output: OutputConfig::default(),
        areas,
        projections,
        connectome: None,
    };
    cfg.validate()?;
    Ok(cfg)
}
