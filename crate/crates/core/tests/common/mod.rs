#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use cortex::graph::DirectedGraph;
use cortex::netbuild::{build_from_recipe, parse_config, NetworkConfig, WiringRecipe};
use cortex::network::Network;
use cortex::plasticity::StdpParams;

/// 800 E + 200 I LIF neurons, indegree 100 (80 E + 20 I), delays uniform in
/// 1..=15 steps, Poisson drive, plastic E→E.
pub const EQUIVALENCE_NET: &str = r#"
seed = 20240601
[[areas]]
name = "net"
extent = [1.0, 1.0, 1.0]
[[areas.populations]]
name = "E"
count = 800
drive = { poisson_rate = 8000.0, poisson_weight = 87.8 }
u_init = [-65.0, -50.0]
[[areas.populations]]
name = "I"
count = 200
drive = { poisson_rate = 8000.0, poisson_weight = 87.8 }
u_init = [-65.0, -50.0]
[[projections]]
source = "net/E"
target = "net/E"
rule = { fixed_indegree = 80 }
weight = { constant = 87.8 }
delay = { uniform_steps = { low = 1, high = 15 } }
plastic = true
[[projections]]
source = "net/E"
target = "net/I"
rule = { fixed_indegree = 80 }
weight = { constant = 87.8 }
delay = { uniform_steps = { low = 1, high = 15 } }
[[projections]]
source = "net/I"
target = "net/E"
rule = { fixed_indegree = 20 }
weight = { constant = -439.0 }
delay = { uniform_steps = { low = 1, high = 15 } }
[[projections]]
source = "net/I"
target = "net/I"
rule = { fixed_indegree = 20 }
weight = { constant = -439.0 }
delay = { uniform_steps = { low = 1, high = 15 } }
"#;

pub fn build(text: &str) -> (NetworkConfig, WiringRecipe, Network) {
    let cfg = parse_config(text).expect("fixture config");
    let recipe = WiringRecipe::new(&cfg, None).expect("fixture recipe");
    let net = build_from_recipe(&cfg, &recipe).expect("fixture network");
    (cfg, recipe, net)
}

pub fn equivalence_net() -> (NetworkConfig, WiringRecipe, Network) {
    build(EQUIVALENCE_NET)
}

/// Two areas of `n` excitatory neurons with the given intra- and inter-area
/// connection probabilities.
pub fn two_area_config(n: u32, p_intra: f64, p_inter: f64) -> String {
    let mut s = String::from("seed = 5\n");
    for (name, x) in [("A", 0.0), ("B", 3.0)] {
        s += &format!(
            "[[areas]]\nname = \"{name}\"\norigin = [{x}, 0.0, 0.0]\n\
             [[areas.populations]]\nname = \"E\"\ncount = {n}\n"
        );
    }
    for (src, tgt, p) in [("A", "A", p_intra), ("B", "B", p_intra), ("A", "B", p_inter), ("B", "A", p_inter)] {
        s += &format!(
            "[[projections]]\nsource = \"{src}/E\"\ntarget = \"{tgt}/E\"\n\
             rule = {{ pairwise_bernoulli = {p} }}\nweight = {{ constant = 10.0 }}\ndelay = {{ constant = 1.0 }}\n"
        );
    }
    s
}

pub fn random_graph(rng: &mut ChaCha8Rng, max_v: u32, max_e: usize) -> DirectedGraph {
    let n = rng.random_range(1..=max_v);
    let m = rng.random_range(0..=max_e);
    let edges = (0..m).map(|_| (rng.random_range(0..n), rng.random_range(0..n))).collect();
    DirectedGraph::new(n, edges).unwrap()
}

pub fn random_subset(rng: &mut ChaCha8Rng, n: u32, p: f64) -> Vec<u32> {
    (0..n).filter(|_| rng.random_bool(p)).collect()
}

/// Random partition of `0..n` into `k` cells, some possibly empty.
pub fn random_partition(rng: &mut ChaCha8Rng, n: u32, k: usize) -> Vec<Vec<u32>> {
    let mut cells = vec![Vec::new(); k];
    for v in 0..n {
        cells[rng.random_range(0..k)].push(v);
    }
    cells
}

/// Set-enumeration oracle for sub-graphs: `(pre, post, edges)`.
pub type Triple = (BTreeSet<u32>, BTreeSet<u32>, BTreeSet<usize>);

pub fn oracle_indegree(g: &DirectedGraph, v: &[u32]) -> Triple {
    let vs: BTreeSet<u32> = v.iter().copied().collect();
    let mut t: Triple = (BTreeSet::new(), vs.clone(), BTreeSet::new());
    for (i, &(x, y)) in g.edges().iter().enumerate() {
        if vs.contains(&y) {
            t.0.insert(x);
            t.2.insert(i);
        }
    }
    t
}

pub fn oracle_outdegree(g: &DirectedGraph, v: &[u32]) -> Triple {
    let vs: BTreeSet<u32> = v.iter().copied().collect();
    let mut t: Triple = (vs.clone(), BTreeSet::new(), BTreeSet::new());
    for (i, &(x, y)) in g.edges().iter().enumerate() {
        if vs.contains(&x) {
            t.1.insert(y);
            t.2.insert(i);
        }
    }
    t
}

pub fn triple(s: &cortex::graph::SubGraph) -> Triple {
    (
        s.pre.iter().copied().collect(),
        s.post.iter().copied().collect(),
        s.edges.iter().copied().collect(),
    )
}

pub fn meet(a: &Triple, b: &Triple) -> Triple {
    (
        a.0.intersection(&b.0).copied().collect(),
        a.1.intersection(&b.1).copied().collect(),
        a.2.intersection(&b.2).copied().collect(),
    )
}

pub fn join(a: &Triple, b: &Triple) -> Triple {
    (
        a.0.union(&b.0).copied().collect(),
        a.1.union(&b.1).copied().collect(),
        a.2.union(&b.2).copied().collect(),
    )
}

/// Sorted event times of a Poisson process of `rate` (1/ms) on `[0, t_end)`.
pub fn poisson_train(rng: &mut ChaCha8Rng, rate: f64, t_end: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut t = 0.0;
    loop {
        let u: f64 = rng.random();
        t += -(1.0 - u).ln() / rate;
        if t >= t_end {
            return out;
        }
        out.push(t);
    }
}

/// Weight trajectory of one synapse under the STDP rule, with every trace
/// value summed explicitly over all earlier spikes of the other side.
/// `events` is `(time, is_pre)` sorted by time.
pub fn stdp_pair_sum_oracle(p: &StdpParams, w0: f64, events: &[(f64, bool)]) -> Vec<f64> {
    let mut pre_times = Vec::new();
    let mut post_times = Vec::new();
    let mut w = w0;
    let mut out = Vec::with_capacity(events.len());
    for &(t, is_pre) in events {
        if is_pre {
            let k_minus: f64 = post_times.iter().map(|&tj: &f64| (-(t - tj) / p.tau_minus).exp()).sum();
            w = (w - p.lambda * p.alpha * w * k_minus).max(p.w_min);
            pre_times.push(t);
        } else {
            let k_plus: f64 = pre_times.iter().map(|&ti: &f64| (-(t - ti) / p.tau_plus).exp()).sum();
            w = (w + p.lambda * p.w_ref.powf(1.0 - p.mu) * w.powf(p.mu) * k_plus).max(p.w_min);
            post_times.push(t);
        }
        out.push(w);
    }
    out
}
