use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric, Normal};
use sha2::{Digest, Sha256};

use crate::decomposition::{
    estimate_area_cost, factorize_parts, make_partition_plan, map_areas_to_processes, multisection_divide,
    random_equivalent_map, sample_positions, AreaSpec, PartitionPlan, Point,
};
use crate::dynamics::{NeuronParams, Polarity};
use crate::error::{Error, Result};
use crate::graph::DirectedGraph;
use crate::network::{Drive, Network, Population};

use super::config::{DelayDist, NetworkConfig, Rule, WeightDist};
use super::connectome::ConnectomeMatrix;

/// Stable 64-bit key of a label, used to pick an RNG stream.
pub fn stream_key(label: &str) -> u64 {
    let digest = Sha256::digest(label.as_bytes());
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

pub fn stream_rng(seed: u64, label: &str) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_key(label));
    rng
}

/// Vertex ranges of areas and populations, in config order.
#[derive(Clone, Debug, PartialEq)]
pub struct Layout {
    pub areas: Vec<Range<u32>>,
    /// `(area, vertices)` per population, area-major.
    pub populations: Vec<(usize, Range<u32>)>,
    /// `area/population` per population.
    pub labels: Vec<String>,
}

impl Layout {
    pub fn new(cfg: &NetworkConfig) -> Result<Self> {
        let mut next: u64 = 0;
        let mut areas = Vec::new();
        let mut populations = Vec::new();
        let mut labels = Vec::new();
        for (a, area) in cfg.areas.iter().enumerate() {
            let start = next;
            for p in &area.populations {
                let end = next + p.count as u64;
                if end > u32::MAX as u64 {
                    return Err(Error::config("areas", "more than 2^32 - 1 neurons"));
                }
                populations.push((a, next as u32..end as u32));
                labels.push(format!("{}/{}", area.name, p.name));
                next = end;
            }
            areas.push(start as u32..next as u32);
        }
        Ok(Self {
            areas,
            populations,
            labels,
        })
    }

    pub fn n_vertices(&self) -> u32 {
        self.areas.last().map_or(0, |r| r.end)
    }

    pub fn population(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// A projection with its endpoints resolved to vertex ranges.
#[derive(Clone, Debug, PartialEq)]
pub struct ResolvedProjection {
    /// Unique, stable name; also keys the RNG stream.
    pub label: String,
    pub source: Range<u32>,
    pub target: Range<u32>,
    pub source_area: usize,
    pub target_area: usize,
    pub rule: Rule,
    pub weight: WeightDist,
    pub delay: DelayDist,
    pub polarity: Polarity,
    pub plastic: bool,
}

impl ResolvedProjection {
    pub fn expected_edges(&self) -> f64 {
        let (ns, nt) = (self.source.len() as f64, self.target.len() as f64);
        match self.rule {
            Rule::FixedIndegree(k) => k as f64 * nt,
            Rule::PairwiseBernoulli(p) => p * ns * nt,
        }
    }
}

/// Every projection of a network, fully resolved. Edge counts are known in
/// expectation before anything is drawn.
#[derive(Clone, Debug, PartialEq)]
pub struct WiringRecipe {
    pub layout: Layout,
    pub projections: Vec<ResolvedProjection>,
}

impl WiringRecipe {
    pub fn new(cfg: &NetworkConfig, connectome: Option<&ConnectomeMatrix>) -> Result<Self> {
        cfg.validate()?;
        let layout = Layout::new(cfg)?;
        let mut projections = Vec::new();
        let mut push = |source: &str, target: &str, rule, weight: WeightDist, delay, plastic, receptor: Option<Polarity>| -> Result<()> {
            let find = |label: &str| {
                layout
                    .population(label)
                    .ok_or_else(|| Error::config("projections", format!("unknown population `{label}`")))
            };
            let (s, t) = (find(source)?, find(target)?);
            let base = format!("{source}->{target}#");
            let n_same = projections
                .iter()
                .filter(|p: &&ResolvedProjection| p.label.starts_with(&base))
                .count();
            let sign = match weight {
                WeightDist::Constant(w) => w,
                WeightDist::Normal { mean, .. } => mean,
                WeightDist::Uniform { low, high } => low + high,
            };
            projections.push(ResolvedProjection {
                label: format!("{base}{n_same}"),
                source: layout.populations[s].1.clone(),
                target: layout.populations[t].1.clone(),
                source_area: layout.populations[s].0,
                target_area: layout.populations[t].0,
                rule,
                weight,
                delay,
                polarity: receptor.unwrap_or(if sign < 0.0 {
                    Polarity::Inhibitory
                } else {
                    Polarity::Excitatory
                }),
                plastic,
            });
            Ok(())
        };
        for p in &cfg.projections {
            push(&p.source, &p.target, p.rule, p.weight, p.delay, p.plastic, p.receptor)?;
        }
        if let (Some(cc), Some(m)) = (&cfg.connectome, connectome) {
            for label in &m.labels {
                if !cfg.areas.iter().any(|a| &a.name == label) {
                    return Err(Error::config("connectome", format!("unknown area `{label}` in matrix")));
                }
            }
            for (i, src) in m.labels.iter().enumerate() {
                for (j, dst) in m.labels.iter().enumerate() {
                    let p = m.values[i][j] * cc.normalization;
                    if i == j || p == 0.0 {
                        continue;
                    }
                    if p > 1.0 {
                        return Err(Error::config(
                            "connectome.normalization",
                            format!("probability out of range: {p} for {src}->{dst}"),
                        ));
                    }
                    let delay = match &m.distances {
                        Some(d) => DelayDist::Constant(d[i][j] / cc.velocity + cc.delay_offset),
                        None => cc.delay,
                    };
                    for tp in &cc.target_populations {
                        push(
                            &format!("{src}/{}", cc.source_population),
                            &format!("{dst}/{tp}"),
                            Rule::PairwiseBernoulli(p),
                            cc.weight,
                            delay,
                            cc.plastic,
                            None,
                        )?;
                    }
                }
            }
        }
        Ok(Self { layout, projections })
    }

    /// Expected incoming edges per area.
    pub fn expected_in_edges(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.layout.areas.len()];
        for p in &self.projections {
            out[p.target_area] += p.expected_edges();
        }
        out
    }

    /// Expected number of distinct pre-neurons outside each area that feed
    /// it: a source population of `n` neurons sending `m` edges covers about
    /// `n·(1 - e^{-m/n})` distinct sources.
    pub fn expected_remote_pre(&self) -> Vec<f64> {
        let n_areas = self.layout.areas.len();
        let n_pops = self.layout.populations.len();
        let mut edges = vec![vec![0.0; n_pops]; n_areas];
        for p in &self.projections {
            if p.source_area != p.target_area {
                let s = self
                    .layout
                    .populations
                    .iter()
                    .position(|(_, r)| *r == p.source)
                    .expect("projection sources are populations");
                edges[p.target_area][s] += p.expected_edges();
            }
        }
        edges
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&self.layout.populations)
                    .filter(|(&m, _)| m > 0.0)
                    .map(|(&m, (_, r))| {
                        let n = r.len() as f64;
                        n * (1.0 - (-m / n).exp())
                    })
                    .sum()
            })
            .collect()
    }
}

fn sample_weight(w: &WeightDist, rng: &mut ChaCha8Rng) -> f64 {
    match *w {
        WeightDist::Constant(x) => x,
        WeightDist::Normal { mean, sd } => {
            let x = if sd > 0.0 {
                Normal::new(mean, sd).expect("validated sd").sample(rng)
            } else {
                mean
            };
            if mean >= 0.0 {
                x.max(0.0)
            } else {
                x.min(0.0)
            }
        }
        WeightDist::Uniform { low, high } => {
            if high > low {
                rng.random_range(low..high)
            } else {
                low
            }
        }
    }
}

fn quantize(ms: f64, dt: f64) -> Result<u16> {
    let steps = (ms / dt).round().max(1.0);
    if steps > u16::MAX as f64 {
        return Err(Error::config("delay", format!("{ms} ms is more than {} steps", u16::MAX)));
    }
    Ok(steps as u16)
}

fn sample_delay(d: &DelayDist, dt: f64, rng: &mut ChaCha8Rng) -> Result<u16> {
    match *d {
        DelayDist::Constant(ms) => quantize(ms, dt),
        DelayDist::Uniform { low, high } => {
            let ms = if high > low { rng.random_range(low..high) } else { low };
            quantize(ms, dt)
        }
        DelayDist::UniformSteps { low, high } => Ok(rng.random_range(low..=high)),
        DelayDist::Normal { mean, sd } => {
            let ms = if sd > 0.0 {
                Normal::new(mean, sd).expect("validated sd").sample(rng)
            } else {
                mean
            };
            quantize(ms.max(dt), dt)
        }
    }
}

struct EdgeSink {
    edges: Vec<(u32, u32)>,
    weights: Vec<f64>,
    delays: Vec<u16>,
    polarity: Vec<Polarity>,
    plastic: Vec<bool>,
}

fn draw_projection(p: &ResolvedProjection, seed: u64, dt: f64, out: &mut EdgeSink) -> Result<()> {
    let mut rng = stream_rng(seed, &format!("projection:{}", p.label));
    let n_src = p.source.len() as u64;
    let mut emit = |s: u32, t: u32, rng: &mut ChaCha8Rng| -> Result<()> {
        out.edges.push((s, t));
        out.weights.push(sample_weight(&p.weight, rng));
        out.delays.push(sample_delay(&p.delay, dt, rng)?);
        out.polarity.push(p.polarity);
        out.plastic.push(p.plastic);
        Ok(())
    };
    if n_src == 0 {
        return Ok(());
    }
    match p.rule {
        Rule::FixedIndegree(k) => {
            for t in p.target.clone() {
                for _ in 0..k {
                    let s = p.source.start + rng.random_range(0..n_src) as u32;
                    emit(s, t, &mut rng)?;
                }
            }
        }
        Rule::PairwiseBernoulli(prob) => {
            if prob <= 0.0 {
                return Ok(());
            }
            let total = n_src * p.target.len() as u64;
            let skip = Geometric::new(prob).map_err(|e| Error::config("rule", e.to_string()))?;
            // target-major linear index over all pairs
            let mut i = skip.sample(&mut rng);
            while i < total {
                let t = p.target.start + (i / n_src) as u32;
                let s = p.source.start + (i % n_src) as u32;
                emit(s, t, &mut rng)?;
                i = i.saturating_add(1).saturating_add(skip.sample(&mut rng));
            }
        }
    }
    Ok(())
}

/// Materializes the network of `cfg`. Each projection and each area draws
/// from its own RNG stream keyed by its label, so the result does not depend
/// on what else the config contains.
pub fn build_network(cfg: &NetworkConfig, connectome: Option<&ConnectomeMatrix>) -> Result<Network> {
    let recipe = WiringRecipe::new(cfg, connectome)?;
    build_from_recipe(cfg, &recipe)
}

pub fn build_from_recipe(cfg: &NetworkConfig, recipe: &WiringRecipe) -> Result<Network> {
    let layout = &recipe.layout;
    let n = layout.n_vertices();
    let mut models: Vec<NeuronParams> = Vec::new();
    let mut populations = Vec::new();
    let mut population_of = vec![0u16; n as usize];
    let mut positions: Vec<Point> = Vec::with_capacity(n as usize);
    let mut areas = Vec::new();
    let mut pop_index = 0usize;
    for (a, area) in cfg.areas.iter().enumerate() {
        let mut rng = stream_rng(cfg.seed, &format!("positions:{}", area.name));
        for p in &area.populations {
            let (_, range) = &layout.populations[pop_index];
            let model = match models.iter().position(|m| *m == p.neuron) {
                Some(i) => i,
                None => {
                    models.push(p.neuron);
                    models.len() - 1
                }
            };
            for v in range.clone() {
                population_of[v as usize] = pop_index as u16;
                let mut x = [0.0; 3];
                for d in 0..3 {
                    let r: f64 = rng.random();
                    x[d] = area.origin[d] + r * area.extent[d];
                }
                positions.push(x);
            }
            populations.push(Population {
                name: layout.labels[pop_index].clone(),
                area: a,
                vertices: range.clone(),
                model,
                drive: Drive {
                    i_ext: p.drive.i_ext,
                    poisson_rate_hz: p.drive.poisson_rate,
                    poisson_weight: p.drive.poisson_weight,
                },
                u_init: p.u_init.map(|[lo, hi]| (lo, hi)),
                stream_key: stream_key(&format!("neuron:{}", layout.labels[pop_index])),
            });
            pop_index += 1;
        }
        areas.push(AreaSpec {
            area_id: a,
            name: area.name.clone(),
            vertices: layout.areas[a].clone(),
            origin: area.origin,
            extent: area.extent,
        });
    }
    if populations.len() > u16::MAX as usize {
        return Err(Error::config("areas", "too many populations"));
    }

    let mut sink = EdgeSink {
        edges: Vec::new(),
        weights: Vec::new(),
        delays: Vec::new(),
        polarity: Vec::new(),
        plastic: Vec::new(),
    };
    for p in &recipe.projections {
        draw_projection(p, cfg.seed, cfg.dt, &mut sink)?;
    }
    let lo = cfg.d_min.map(|ms| quantize(ms, cfg.dt)).transpose()?;
    let hi = cfg.d_max.map(|ms| quantize(ms, cfg.dt)).transpose()?;
    for d in &mut sink.delays {
        if let Some(lo) = lo {
            *d = (*d).max(lo);
        }
        if let Some(hi) = hi {
            *d = (*d).min(hi);
        }
    }
    let d_min_steps = lo.unwrap_or_else(|| sink.delays.iter().copied().min().unwrap_or(1));
    let d_max_steps = hi
        .unwrap_or_else(|| sink.delays.iter().copied().max().unwrap_or(1))
        .max(d_min_steps);

    Ok(Network {
        seed: cfg.seed,
        dt: cfg.dt,
        d_min_steps,
        d_max_steps,
        graph: DirectedGraph::new(n, sink.edges)?,
        weights: sink.weights,
        delays: sink.delays,
        polarity: sink.polarity,
        plastic: sink.plastic,
        positions,
        areas,
        populations,
        population_of,
        models,
        stdp: cfg.stdp,
    })
}

/// Area-Processes Mapping followed by per-area multisection, or the random
/// equivalent mapping when the config asks for it.
pub fn plan_network(
    cfg: &NetworkConfig,
    recipe: &WiringRecipe,
    net: &Network,
    n_ranks: usize,
    n_threads: usize,
) -> Result<PartitionPlan> {
    if cfg.decomposition.random_mapping {
        return random_equivalent_map(net.n_neurons() as u32, n_ranks, n_threads, cfg.seed);
    }
    let in_edges = recipe.expected_in_edges();
    let remote = recipe.expected_remote_pre();
    let costs: Vec<f64> = net
        .areas
        .iter()
        .enumerate()
        .map(|(a, spec)| {
            estimate_area_cost(
                spec.n_neurons() as u64,
                in_edges[a].round() as u64,
                remote[a].round() as u64,
            )
            .bytes as f64
        })
        .collect();
    let map = map_areas_to_processes(&costs, n_ranks)?;
    let mut grids = Vec::with_capacity(net.areas.len());
    for (a, spec) in net.areas.iter().enumerate() {
        let pts = &net.positions[spec.vertices.start as usize..spec.vertices.end as usize];
        let n_cells = map.ranks[a].len();
        let sample_idx = sample_positions(pts, cfg.decomposition.sample_rate, n_cells, cfg.seed ^ a as u64)?;
        let sample: Vec<Point> = sample_idx.iter().map(|&i| pts[i]).collect();
        grids.push(multisection_divide(&sample, &factorize_parts(n_cells, spec.extent))?);
    }
    let mut plan = make_partition_plan(&net.areas, &net.positions, &map, &grids, n_threads)?;
    for (a, block) in map.ranks.iter().enumerate() {
        for r in block.clone() {
            plan.remote_pre_estimate[r] = remote[a] / block.len() as f64;
        }
    }
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netbuild::config::parse_config;

    fn two_areas(p_intra: f64, p_inter: f64, n: u32) -> NetworkConfig {
        parse_config(&format!(
            r#"
seed = 7
[[areas]]
name = "A"
[[areas.populations]]
name = "E"
count = {n}
[[areas]]
name = "B"
origin = [5.0, 0.0, 0.0]
[[areas.populations]]
name = "E"
count = {n}

[[projections]]
source = "A/E"
target = "A/E"
rule = {{ pairwise_bernoulli = {p_intra} }}
weight = {{ constant = 1.0 }}
delay = {{ constant = 1.0 }}
[[projections]]
source = "B/E"
target = "B/E"
rule = {{ pairwise_bernoulli = {p_intra} }}
weight = {{ constant = 1.0 }}
delay = {{ constant = 1.0 }}
[[projections]]
source = "A/E"
target = "B/E"
rule = {{ pairwise_bernoulli = {p_inter} }}
weight = {{ constant = 1.0 }}
delay = {{ constant = 2.0 }}
[[projections]]
source = "B/E"
target = "A/E"
rule = {{ pairwise_bernoulli = {p_inter} }}
weight = {{ constant = 1.0 }}
delay = {{ constant = 2.0 }}
"#
        ))
        .unwrap()
    }

    #[test]
    fn fixed_indegree_is_exact() {
        let cfg = parse_config(
            r#"
[[areas]]
name = "A"
[[areas.populations]]
name = "E"
count = 300
[[areas.populations]]
name = "I"
count = 50
[[projections]]
source = "A/E"
target = "A/I"
rule = { fixed_indegree = 100 }
weight = { normal = { mean = 87.8, sd = 8.78 } }
delay = { uniform = { low = 0.5, high = 2.0 } }
"#,
        )
        .unwrap();
        let net = build_network(&cfg, None).unwrap();
        let mut indeg = vec![0usize; net.n_neurons()];
        for &(s, t) in net.graph.edges() {
            assert!(s < 300 && t >= 300);
            indeg[t as usize] += 1;
        }
        assert!(indeg[300..].iter().all(|&k| k == 100));
        assert!(net.weights.iter().all(|&w| w >= 0.0));
        assert!(net.delays.iter().all(|&d| (5..=20).contains(&d)));
        assert_eq!(net.d_min_steps, *net.delays.iter().min().unwrap());
    }

    #[test]
    fn same_seed_same_edges() {
        let cfg = two_areas(0.1, 0.01, 200);
        let a = build_network(&cfg, None).unwrap();
        let b = build_network(&cfg, None).unwrap();
        assert_eq!(a.graph, b.graph);
        assert_eq!(a.weights, b.weights);
        assert_eq!(a.delays, b.delays);
        let mut other = cfg.clone();
        other.seed = 8;
        assert_ne!(build_network(&other, None).unwrap().graph, a.graph);
    }

    #[test]
    fn inter_area_count_within_binomial_bounds() {
        let net = build_network(&two_areas(0.1, 0.001, 1000), None).unwrap();
        let inter = net
            .graph
            .edges()
            .iter()
            .filter(|&&(s, t)| (s < 1000) != (t < 1000))
            .count() as f64;
        // two directed inter-area blocks of 10^6 pairs each
        let (n, p): (f64, f64) = (2.0e6, 0.001);
        let sigma = (n * p * (1.0 - p)).sqrt();
        assert!((inter - n * p).abs() < 5.0 * sigma, "{inter}");
    }

    #[test]
    fn recipe_expectations() {
        let cfg = two_areas(0.1, 0.001, 1000);
        let r = WiringRecipe::new(&cfg, None).unwrap();
        let e = r.expected_in_edges();
        assert!((e[0] - (1e5 + 1e3)).abs() < 1e-6);
        let remote = r.expected_remote_pre();
        assert!((remote[0] - 1000.0 * (1.0 - (-1.0f64).exp())).abs() < 1e-9);
    }

    #[test]
    fn plans_cover_every_neuron() {
        let cfg = two_areas(0.1, 0.001, 400);
        let net = build_network(&cfg, None).unwrap();
        let recipe = WiringRecipe::new(&cfg, None).unwrap();
        let plan = plan_network(&cfg, &recipe, &net, 4, 2).unwrap();
        plan.validate().unwrap();
        assert_eq!(plan.n_ranks, 4);
        // areas keep to their own rank blocks
        for (r, owned) in plan.owned.iter().enumerate() {
            let area = if r < 2 { 0..400 } else { 400..800 };
            assert!(owned.iter().all(|v| area.contains(v)), "rank {r}");
        }
    }
}
