mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::build;
use cortex::decomposition::PartitionPlan;
use cortex::engine::{build_rank_state, NoExchange, RankOptions, RunOptions};
use cortex::exchange::{simulate, SimulationOptions};
use cortex::graph::DirectedGraph;
use cortex::netbuild::{run_reference, ReferenceSim};
use cortex::network::Network;

#[derive(Clone, Debug)]
struct NetShape {
    n_e: u32,
    n_i: u32,
    k_e: u32,
    k_i: u32,
    d_lo: u32,
    d_hi: u32,
    seed: u64,
}

fn shapes() -> impl Strategy<Value = NetShape> {
    (10u32..80, 3u32..20, 1u32..10, 1u32..4, 1u32..6, 0u32..10, any::<u64>()).prop_map(
        |(n_e, n_i, k_e, k_i, d_lo, span, seed)| NetShape {
            n_e,
            n_i,
            k_e: k_e.min(n_e),
            k_i: k_i.min(n_i),
            d_lo,
            d_hi: d_lo + span,
            seed,
        },
    )
}

fn config(s: &NetShape) -> String {
    let mut t = format!("seed = {}\n[[areas]]\nname = \"a\"\n", s.seed);
    for (name, n) in [("E", s.n_e), ("I", s.n_i)] {
        t += &format!(
            "[[areas.populations]]\nname = \"{name}\"\ncount = {n}\n\
             drive = {{ poisson_rate = 15000.0, poisson_weight = 87.8 }}\nu_init = [-65.0, -52.0]\n"
        );
    }
    for (src, tgt, k, w, plastic) in [
        ("E", "E", s.k_e, 87.8, true),
        ("E", "I", s.k_e, 87.8, false),
        ("I", "E", s.k_i, -439.0, false),
        ("I", "I", s.k_i, -439.0, false),
    ] {
        t += &format!(
            "[[projections]]\nsource = \"a/{src}\"\ntarget = \"a/{tgt}\"\nrule = {{ fixed_indegree = {k} }}\n\
             weight = {{ constant = {w} }}\ndelay = {{ uniform_steps = {{ low = {}, high = {} }} }}\nplastic = {plastic}\n",
            s.d_lo, s.d_hi
        );
    }
    t
}

fn random_plan(n: usize, ranks: usize, threads: usize, seed: u64) -> PartitionPlan {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rank_of: Vec<u32> = (0..n).map(|i| (i % ranks) as u32).collect();
    rank_of.shuffle(&mut rng);
    PartitionPlan::from_rank_assignment(rank_of, ranks, threads).unwrap()
}

/// Keeps the first edge of every (pre, post) pair, then applies `order`
/// (a permutation of the kept edges) to all edge arrays.
fn dedup_and_permute(net: &Network, seed: u64) -> (Network, Network, Vec<usize>) {
    let mut seen = BTreeSet::new();
    let keep: Vec<usize> = (0..net.n_edges()).filter(|&e| seen.insert(net.graph.edge(e))).collect();
    let pick = |idx: &[usize]| {
        let mut m = net.clone();
        m.graph = DirectedGraph::new(net.graph.n_vertices(), idx.iter().map(|&e| net.graph.edge(e)).collect()).unwrap();
        m.weights = idx.iter().map(|&e| net.weights[e]).collect();
        m.delays = idx.iter().map(|&e| net.delays[e]).collect();
        m.polarity = idx.iter().map(|&e| net.polarity[e]).collect();
        m.plastic = idx.iter().map(|&e| net.plastic[e]).collect();
        m
    };
    let base = pick(&keep);
    let mut order: Vec<usize> = (0..keep.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let permuted_ids: Vec<usize> = order.iter().map(|&i| keep[i]).collect();
    (base, pick(&permuted_ids), order)
}

const STEPS: u64 = 500;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn engine_matches_reference(
        shape in shapes(),
        ranks in 1usize..5,
        threads in 1usize..5,
        overlap in any::<bool>(),
        plan_seed in any::<u64>(),
    ) {
        let (_, _, net) = build(&config(&shape));
        let plan = random_plan(net.n_neurons(), ranks, threads, plan_seed);
        let opts = SimulationOptions { n_ranks: ranks, n_threads: threads, overlap, ..SimulationOptions::default() };
        let res = simulate(&net, &plan, STEPS, &opts).unwrap();
        let mut reference = ReferenceSim::new(&net).unwrap();
        for _ in 0..STEPS {
            reference.step().unwrap();
        }
        let log = run_reference(&net, STEPS).unwrap();
        prop_assert!(!log.is_empty());
        prop_assert_eq!(res.log.first_divergence(&log), None);
        prop_assert_eq!(&res.plastic_weights, &reference.plastic_weights());
        res.check_conservation().unwrap();
        prop_assert_eq!(res.reports.len(), ranks);
    }

    #[test]
    fn edge_order_does_not_matter(shape in shapes(), ranks in 1usize..4, threads in 1usize..4, seed in any::<u64>()) {
        let (_, _, net) = build(&config(&shape));
        let (base, permuted, order) = dedup_and_permute(&net, seed);
        let plan = random_plan(net.n_neurons(), ranks, threads, seed);
        let opts = SimulationOptions { n_ranks: ranks, n_threads: threads, ..SimulationOptions::default() };
        let a = simulate(&base, &plan, STEPS, &opts).unwrap();
        let b = simulate(&permuted, &plan, STEPS, &opts).unwrap();
        prop_assert_eq!(&a.log, &b.log);
        let mut mapped: Vec<(u32, f64)> = b.plastic_weights.iter().map(|&(e, w)| (order[e as usize] as u32, w)).collect();
        mapped.sort_unstable_by_key(|&(e, _)| e);
        prop_assert_eq!(a.plastic_weights, mapped);
    }

    #[test]
    fn deposits_land_exactly_one_delay_later(shape in shapes(), threads in 1usize..4) {
        let (_, _, net) = build(&config(&shape));
        let plan = PartitionPlan::from_rank_assignment(vec![0; net.n_neurons()], 1, threads).unwrap();
        let mut rs = build_rank_state(&net, &plan, 0, &RankOptions { audit: false, trace_deposits: true }).unwrap();
        let report = rs.run(STEPS, &mut NoExchange, &RunOptions::default()).unwrap();
        prop_assert!(!report.log.is_empty());
        let mut want = Vec::new();
        for &(s, v) in &report.log.events {
            for e in 0..net.n_edges() {
                let (pre, post) = net.graph.edge(e);
                let at = s + net.delays[e] as u64;
                if pre == v && at < STEPS {
                    want.push((at, e as u32, post));
                }
            }
        }
        want.sort_unstable();
        let mut got: Vec<(u64, u32, u32)> = rs.deposit_log().iter().map(|d| (d.step, d.edge, d.target)).collect();
        got.sort_unstable();
        prop_assert_eq!(got, want);
    }
}

#[test]
fn rank_count_mismatch_is_rejected() {
    let shape = NetShape { n_e: 20, n_i: 5, k_e: 2, k_i: 1, d_lo: 1, d_hi: 3, seed: 1 };
    let (_, _, net) = build(&config(&shape));
    let plan = random_plan(net.n_neurons(), 2, 1, 0);
    let opts = SimulationOptions { n_ranks: 3, ..SimulationOptions::default() };
    assert!(simulate(&net, &plan, 10, &opts).is_err());
}

#[test]
fn spikes_are_conserved_over_four_ranks() {
    let shape = NetShape { n_e: 40, n_i: 10, k_e: 5, k_i: 2, d_lo: 2, d_hi: 4, seed: 3 };
    let (_, _, net) = build(&config(&shape));
    let plan = random_plan(net.n_neurons(), 4, 2, 9);
    let res = simulate(&net, &plan, 500, &SimulationOptions { n_ranks: 4, n_threads: 2, ..Default::default() }).unwrap();
    res.check_conservation().unwrap();
    assert!(!res.log.is_empty());
}
