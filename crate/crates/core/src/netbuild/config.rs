//! TOML network description.
//!
//! Units: ms for times, mV for voltages, pA for current-based weights (nS in
//! conductance mode), MΩ for resistance, mm for coordinates and distances,
//! mm/ms for conduction velocity, Hz for rates.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamics::{NeuronParams, Polarity};
use crate::error::{Error, Result};
use crate::plasticity::StdpParams;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Integration step (ms).
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// Smallest admissible delay (ms); delays below are raised to it.
    /// Derived from the drawn delays when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_min: Option<f64>,
    /// Largest admissible delay (ms); delays above are lowered to it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_max: Option<f64>,
    /// Simulated time (ms).
    #[serde(default = "default_t_sim")]
    pub t_sim: f64,
    #[serde(default)]
    pub stdp: StdpParams,
    #[serde(default)]
    pub decomposition: DecompositionConfig,
    #[serde(default)]
    pub output: OutputConfig,
    pub areas: Vec<AreaConfig>,
    #[serde(default)]
    pub projections: Vec<ProjectionConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub connectome: Option<ConnectomeConfig>,
}

fn default_seed() -> u64 {
    1
}

fn default_dt() -> f64 {
    0.1
}

fn default_t_sim() -> f64 {
    100.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecompositionConfig {
    /// Fraction of neuron positions sampled for multisection.
    pub sample_rate: f64,
    pub ranks: usize,
    pub threads: usize,
    /// Deal neurons randomly instead of mapping areas to rank blocks.
    pub random_mapping: bool,
}

impl Default for DecompositionConfig {
    fn default() -> Self {
        Self {
            sample_rate: 0.05,
            ranks: 1,
            threads: 1,
            random_mapping: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: "out".into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AreaConfig {
    pub name: String,
    /// Lower corner of the area's box (mm).
    #[serde(default)]
    pub origin: [f64; 3],
    /// Box side lengths (mm).
    #[serde(default = "default_extent")]
    pub extent: [f64; 3],
    pub populations: Vec<PopulationConfig>,
}

fn default_extent() -> [f64; 3] {
    [1.0, 1.0, 0.0]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationConfig {
    pub name: String,
    pub count: u32,
    #[serde(default)]
    pub neuron: NeuronParams,
    #[serde(default)]
    pub drive: DriveConfig,
    /// Initial membrane potential drawn uniformly from `[low, high)` (mV).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u_init: Option<[f64; 2]>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DriveConfig {
    /// Constant current (pA).
    pub i_ext: f64,
    /// Total Poisson input rate per neuron (Hz).
    pub poisson_rate: f64,
    /// Weight of one Poisson input event (pA).
    pub poisson_weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectionConfig {
    /// `area/population`.
    pub source: String,
    pub target: String,
    pub rule: Rule,
    pub weight: WeightDist,
    pub delay: DelayDist,
    #[serde(default)]
    pub plastic: bool,
    /// Kernel receiving the input; the weight's sign when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub receptor: Option<Polarity>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Rule {
    /// Every target draws exactly K sources, with replacement.
    FixedIndegree(u32),
    /// Every (source, target) pair is connected with probability p.
    PairwiseBernoulli(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightDist {
    Constant(f64),
    /// Samples are clipped at zero so they keep the sign of the mean.
    Normal { mean: f64, sd: f64 },
    Uniform { low: f64, high: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DelayDist {
    /// ms
    Constant(f64),
    /// ms, `[low, high)`.
    Uniform { low: f64, high: f64 },
    /// Whole steps, inclusive.
    UniformSteps { low: u16, high: u16 },
    /// ms; samples below one step are raised to one step.
    Normal { mean: f64, sd: f64 },
}

/// Inter-area wiring from an area×area density matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConnectomeConfig {
    /// CSV with area labels as header row and first column; cell (i, j) is
    /// the density from area i to area j. Relative to the config file.
    pub matrix: PathBuf,
    /// Optional symmetric interareal distance matrix (mm).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distances: Option<PathBuf>,
    /// Connection probability = density × normalization.
    pub normalization: f64,
    /// Conduction velocity (mm/ms).
    #[serde(default = "default_velocity")]
    pub velocity: f64,
    /// Added to distance/velocity (ms).
    #[serde(default)]
    pub delay_offset: f64,
    /// Delay rule when no distance matrix is given.
    pub delay: DelayDist,
    pub weight: WeightDist,
    /// Sending population name inside each area.
    pub source_population: String,
    /// Receiving population names inside each area.
    pub target_populations: Vec<String>,
    #[serde(default)]
    pub plastic: bool,
}

fn default_velocity() -> f64 {
    3.5
}

/// Parses and validates a config.
pub fn parse_config(text: &str) -> Result<NetworkConfig> {
    let cfg: NetworkConfig = toml::from_str(text).map_err(|e| Error::ConfigSyntax(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Reads a config file; connectome paths are resolved against its directory.
pub fn load_config(path: &Path) -> Result<NetworkConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut cfg = parse_config(&text)?;
    if let Some(c) = &mut cfg.connectome {
        let dir = path.parent().unwrap_or(Path::new("."));
        c.matrix = dir.join(&c.matrix);
        if let Some(d) = &mut c.distances {
            *d = dir.join(&*d);
        }
    }
    Ok(cfg)
}

impl NetworkConfig {
    /// Resolved config with every default spelled out.
    pub fn dump(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    pub fn n_neurons(&self) -> u64 {
        self.areas
            .iter()
            .flat_map(|a| &a.populations)
            .map(|p| p.count as u64)
            .sum()
    }

    pub fn n_steps(&self) -> u64 {
        (self.t_sim / self.dt).round() as u64
    }

    /// `(area index, population index)` of an `area/population` label.
    pub fn find_population(&self, label: &str) -> Option<(usize, usize)> {
        let (area, pop) = label.split_once('/')?;
        let a = self.areas.iter().position(|x| x.name == area)?;
        let p = self.areas[a].populations.iter().position(|x| x.name == pop)?;
        Some((a, p))
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |x: f64| x > 0.0 && x.is_finite();
        if !pos(self.dt) {
            return Err(Error::config("dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.t_sim >= 0.0 && self.t_sim.is_finite()) {
            return Err(Error::config("t_sim", "must be non-negative"));
        }
        if let Some(d) = self.d_min {
            if !pos(d) {
                return Err(Error::config("d_min", "must be positive"));
            }
        }
        if let (Some(lo), Some(hi)) = (self.d_min, self.d_max) {
            if lo > hi {
                return Err(Error::config("d_min", format!("d_min {lo} exceeds d_max {hi}")));
            }
        }
        self.stdp.validate()?;
        let d = &self.decomposition;
        if !(d.sample_rate > 0.0 && d.sample_rate <= 1.0) {
            return Err(Error::config("decomposition.sample_rate", "must lie in (0, 1]"));
        }
        if d.ranks == 0 || d.threads == 0 {
            return Err(Error::config("decomposition", "ranks and threads must be at least 1"));
        }
        if self.areas.is_empty() {
            return Err(Error::config("areas", "at least one area is required"));
        }
        let mut names = BTreeSet::new();
        for (i, a) in self.areas.iter().enumerate() {
            let field = format!("areas[{i}]");
            if a.name.contains('/') || !names.insert(a.name.as_str()) {
                return Err(Error::config(field, format!("area name `{}` is invalid or repeated", a.name)));
            }
            if a.populations.is_empty() {
                return Err(Error::config(field, format!("area `{}` has no populations", a.name)));
            }
            if a.extent.iter().any(|x| !(*x >= 0.0 && x.is_finite())) {
                return Err(Error::config(field, "extent must be non-negative"));
            }
            let mut pops = BTreeSet::new();
            for p in &a.populations {
                let field = format!("areas[{i}].populations.{}", p.name);
                if !pops.insert(p.name.as_str()) {
                    return Err(Error::config(field, "repeated population name"));
                }
                if p.count == 0 {
                    return Err(Error::config(field, "count must be positive"));
                }
                p.neuron.validate().map_err(|e| Error::config(&field, e.to_string()))?;
                if p.drive.poisson_rate < 0.0 {
                    return Err(Error::config(field, "poisson_rate must be non-negative"));
                }
                if let Some([lo, hi]) = p.u_init {
                    if lo > hi {
                        return Err(Error::config(field, "u_init low exceeds high"));
                    }
                }
            }
        }
        for (i, pr) in self.projections.iter().enumerate() {
            let field = format!("projections[{i}]");
            for label in [&pr.source, &pr.target] {
                if self.find_population(label).is_none() {
                    return Err(Error::config(&field, format!("unknown population `{label}`")));
                }
            }
            validate_rule(&field, &pr.rule)?;
            validate_weight(&field, &pr.weight)?;
            validate_delay(&field, &pr.delay)?;
        }
        if let Some(c) = &self.connectome {
            if !(c.normalization >= 0.0 && c.normalization.is_finite()) {
                return Err(Error::config("connectome.normalization", "must be non-negative"));
            }
            if !pos(c.velocity) {
                return Err(Error::config("connectome.velocity", "must be positive"));
            }
            validate_weight("connectome", &c.weight)?;
            validate_delay("connectome", &c.delay)?;
            for a in &self.areas {
                for p in std::iter::once(&c.source_population).chain(&c.target_populations) {
                    if !a.populations.iter().any(|x| &x.name == p) {
                        return Err(Error::config(
                            "connectome",
                            format!("area `{}` has no population `{p}`", a.name),
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

fn validate_rule(field: &str, r: &Rule) -> Result<()> {
    if let Rule::PairwiseBernoulli(p) = r {
        if !(0.0..=1.0).contains(p) {
            return Err(Error::config(field, format!("probability out of range: {p}")));
        }
    }
    Ok(())
}

fn validate_weight(field: &str, w: &WeightDist) -> Result<()> {
    let ok = match *w {
        WeightDist::Constant(x) => x.is_finite(),
        WeightDist::Normal { mean, sd } => mean.is_finite() && sd >= 0.0 && sd.is_finite(),
        WeightDist::Uniform { low, high } => low.is_finite() && high.is_finite() && low <= high,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::config(field, format!("invalid weight distribution {w:?}")))
    }
}

fn validate_delay(field: &str, d: &DelayDist) -> Result<()> {
    let ok = match *d {
        DelayDist::Constant(x) => x > 0.0 && x.is_finite(),
        DelayDist::Uniform { low, high } => low > 0.0 && low <= high && high.is_finite(),
        DelayDist::UniformSteps { low, high } => low >= 1 && low <= high,
        DelayDist::Normal { mean, sd } => mean > 0.0 && sd >= 0.0 && mean.is_finite() && sd.is_finite(),
    };
    if ok {
        Ok(())
    } else {
        Err(Error::config(field, format!("invalid delay distribution {d:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[[areas]]
name = "A"
[[areas.populations]]
name = "E"
count = 10
"#;

    #[test]
    fn minimal_config_gets_defaults_and_round_trips() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.dt, 0.1);
        assert_eq!(cfg.decomposition.sample_rate, 0.05);
        assert_eq!(cfg.areas[0].populations[0].neuron, NeuronParams::default());
        let dumped = cfg.dump();
        assert_eq!(parse_config(&dumped).unwrap(), cfg);
    }

    #[test]
    fn full_config_round_trips() {
        let text = format!(
            "{MINIMAL}{}",
            r#"
[[projections]]
source = "A/E"
target = "A/E"
rule = { pairwise_bernoulli = 0.2 }
weight = { normal = { mean = 87.8, sd = 8.78 } }
delay = { uniform_steps = { low = 1, high = 15 } }
plastic = true
receptor = "inhibitory"
"#
        );
        let mut cfg = parse_config(&text).unwrap();
        cfg.d_min = Some(0.1);
        cfg.areas[0].populations[0].u_init = Some([-70.0, -55.0]);
        assert_eq!(parse_config(&cfg.dump()).unwrap(), cfg);
    }

    #[test]
    fn probability_out_of_range() {
        let text = format!(
            "{MINIMAL}{}",
            r#"
[[projections]]
source = "A/E"
target = "A/E"
rule = { pairwise_bernoulli = 1.5 }
weight = { constant = 1.0 }
delay = { constant = 1.0 }
"#
        );
        let msg = parse_config(&text).unwrap_err().to_string();
        assert!(msg.contains("probability out of range"), "{msg}");
    }

    #[test]
    fn schema_violations() {
        let err = parse_config(&format!("d_min = 2.0\nd_max = 1.0\n{MINIMAL}")).unwrap_err();
        assert!(err.to_string().contains("d_min"));
        let err = parse_config(&format!("bogus = 1\n{MINIMAL}")).unwrap_err();
        assert!(matches!(err, Error::ConfigSyntax(ref m) if m.contains("bogus") && m.contains("line")), "{err}");
        assert!(parse_config(&MINIMAL.replace("count = 10", "count = 0")).is_err());
        let unknown = format!(
            "{MINIMAL}[[projections]]\nsource = \"A/X\"\ntarget = \"A/E\"\nrule = {{ fixed_indegree = 1 }}\nweight = {{ constant = 1.0 }}\ndelay = {{ constant = 1.0 }}\n"
        );
        assert!(parse_config(&unknown).unwrap_err().to_string().contains("A/X"));
    }
}
