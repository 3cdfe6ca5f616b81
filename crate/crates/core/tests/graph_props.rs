mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;

use common::*;
use cortex::graph::{DirectedGraph, SpikeSet};

fn graph_and_sets() -> impl Strategy<Value = (DirectedGraph, Vec<u32>, Vec<u32>)> {
    (1u32..200).prop_flat_map(|n| {
        (
            prop::collection::vec((0..n, 0..n), 0..2000),
            prop::collection::btree_set(0..n, 0..n as usize),
            prop::collection::btree_set(0..n, 0..n as usize),
        )
            .prop_map(move |(edges, a, b)| {
                (
                    DirectedGraph::new(n, edges).unwrap(),
                    a.into_iter().collect(),
                    b.into_iter().collect(),
                )
            })
    })
}

fn union(a: &[u32], b: &[u32]) -> Vec<u32> {
    a.iter().chain(b).copied().collect::<BTreeSet<_>>().into_iter().collect()
}

fn intersection(a: &[u32], b: &[u32]) -> Vec<u32> {
    let bs: BTreeSet<u32> = b.iter().copied().collect();
    a.iter().copied().filter(|v| bs.contains(v)).collect()
}

fn minus(a: &[u32], b: &[u32]) -> Vec<u32> {
    let bs: BTreeSet<u32> = b.iter().copied().collect();
    a.iter().copied().filter(|v| !bs.contains(v)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn constructions_match_set_oracle((g, a, _b) in graph_and_sets()) {
        prop_assert_eq!(triple(&g.indegree_subgraph(&a).unwrap()), oracle_indegree(&g, &a));
        prop_assert_eq!(triple(&g.outdegree_subgraph(&a).unwrap()), oracle_outdegree(&g, &a));
    }

    #[test]
    fn join_homomorphism((g, a, b) in graph_and_sets()) {
        let joined = g.indegree_subgraph(&a).unwrap().join(&g.indegree_subgraph(&b).unwrap()).unwrap();
        prop_assert_eq!(joined, g.indegree_subgraph(&union(&a, &b)).unwrap());
    }

    #[test]
    fn meet_homomorphism_restricted((g, a, b) in graph_and_sets()) {
        let met = g.indegree_subgraph(&a).unwrap().meet(&g.indegree_subgraph(&b).unwrap()).unwrap();
        let direct = g.indegree_subgraph(&intersection(&a, &b)).unwrap();
        prop_assert_eq!(&met.post, &direct.post);
        prop_assert_eq!(&met.edges, &direct.edges);
        let met_pre: BTreeSet<u32> = met.pre.iter().copied().collect();
        prop_assert!(direct.pre.iter().all(|v| met_pre.contains(v)));
    }

    #[test]
    fn disjoint_cells_are_race_free_and_outdegree_is_not((g, a, b) in graph_and_sets()) {
        let b = minus(&b, &a);
        let m = g.indegree_subgraph(&a).unwrap().meet(&g.indegree_subgraph(&b).unwrap()).unwrap();
        prop_assert!(m.post.is_empty() && m.edges.is_empty());
        let o = g.outdegree_subgraph(&a).unwrap().meet(&g.outdegree_subgraph(&b).unwrap()).unwrap();
        prop_assert!(o.pre.is_empty() && o.edges.is_empty());
        let shared = meet(&oracle_outdegree(&g, &a), &oracle_outdegree(&g, &b)).1;
        prop_assert_eq!(o.post.iter().copied().collect::<BTreeSet<_>>(), shared);
    }

    #[test]
    fn split_is_disjoint_and_reconstructs((g, a, _b) in graph_and_sets()) {
        let s = g.indegree_subgraph(&a).unwrap();
        let (local, remote) = g.split_local_remote(&s, &a).unwrap();
        prop_assert!(local.meet(&remote).unwrap().edges.is_empty());
        prop_assert_eq!(local.join(&remote).unwrap(), s);
    }

    #[test]
    fn spiking_subgraph_keeps_edges_of_spiking_sources((g, a, b) in graph_and_sets()) {
        let s = g.indegree_subgraph(&a).unwrap();
        let sp = g.spiking_subgraph(&s, &SpikeSet::new(b.clone()));
        let bs: BTreeSet<u32> = b.into_iter().collect();
        let want: Vec<usize> = s.edges.iter().copied().filter(|&e| bs.contains(&g.edge(e).0)).collect();
        prop_assert_eq!(sp.edges, want);
        prop_assert!(sp.pre.iter().all(|v| bs.contains(v)));
    }
}

#[test]
fn meet_pre_set_can_exceed_pre_of_intersection() {
    // 0 feeds 1 and 3, both outside {1,2} ∩ {2,3}
    let g = DirectedGraph::new(4, vec![(0, 1), (0, 3)]).unwrap();
    let (a, b) = ([1, 2], [2, 3]);
    let met = g.indegree_subgraph(&a).unwrap().meet(&g.indegree_subgraph(&b).unwrap()).unwrap();
    let direct = g.indegree_subgraph(&[2]).unwrap();
    assert_eq!(met.pre, vec![0]);
    assert!(direct.pre.is_empty());
}
