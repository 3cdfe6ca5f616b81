//! Indegree/outdegree sub-graphs of a small graph, their meet and join, the
//! local/remote split of a rank, and the sub-graph touched by one spike set.

use cortex::graph::{DirectedGraph, SpikeSet};

fn main() -> cortex::Result<()> {
    // 0 → 1 → 2 → 3, 0 → 2, 3 → 0, 1 → 3
    let g = DirectedGraph::new(4, vec![(0, 1), (1, 2), (2, 3), (0, 2), (3, 0), (1, 3)])?;

    let owned = [2, 3];
    let ind = g.indegree_subgraph(&owned)?;
    println!("indegree of {owned:?}: pre {:?}, edges {:?}", ind.pre, ind.edges);

    let out = g.outdegree_subgraph(&[0, 1])?;
    println!("outdegree of [0, 1]: post {:?}, edges {:?}", out.post, out.edges);

    let (local, remote) = g.split_local_remote(&ind, &owned)?;
    println!("local pre {:?}, remote pre {:?}", local.pre, remote.pre);
    assert_eq!(local.join(&remote)?, ind);
    assert!(local.meet(&remote)?.edges.is_empty());

    let spikes = SpikeSet::new(vec![1, 0]);
    let active = g.spiking_subgraph(&ind, &spikes);
    println!("spikes {:?} reach {:?} via edges {:?}", spikes.ids(), active.post, active.edges);
    Ok(())
}
