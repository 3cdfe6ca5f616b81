//! Directed synaptic graph and the sub-graph algebra used by decomposition.
//!
//! A sub-graph is a triplet `(pre, post, edges)` of sorted vertex ids and
//! sorted edge indices into the parent [`DirectedGraph`]. Edge identity is the
//! position in the parent edge list, so parallel edges (multi-synapses) stay
//! distinct through every set operation.
//!
//! Indegree sub-graphs bind each edge to its post-synaptic endpoint. For a
//! partition of the vertices, the meet of two indegree sub-graphs has no post
//! vertices and no edges, which is what lets every cell write its own neuron
//! state without synchronisation.

mod io;
pub mod sorted;

pub use io::{read_edge_list, write_edge_list};

use crate::error::{Error, Result};

pub type VertexId = u32;
pub type EdgeId = usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectedGraph {
    n_vertices: u32,
    edges: Vec<(VertexId, VertexId)>,
}

impl DirectedGraph {
    /// Builds a graph, keeping the edge order as given. Self-loops and
    /// duplicate pairs are allowed.
    pub fn new(n_vertices: u32, edges: Vec<(VertexId, VertexId)>) -> Result<Self> {
        for (i, &(pre, post)) in edges.iter().enumerate() {
            if pre >= n_vertices {
                return Err(Error::EdgeOutOfRange {
                    edge: i,
                    endpoint: "pre",
                    id: pre,
                    n_vertices,
                });
            }
            if post >= n_vertices {
                return Err(Error::EdgeOutOfRange {
                    edge: i,
                    endpoint: "post",
                    id: post,
                    n_vertices,
                });
            }
        }
        Ok(Self { n_vertices, edges })
    }

    pub fn n_vertices(&self) -> u32 {
        self.n_vertices
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(VertexId, VertexId)] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> (VertexId, VertexId) {
        self.edges[id]
    }

    fn selection_mask(&self, v_tilde: &[VertexId]) -> Result<Vec<bool>> {
        let mut mask = vec![false; self.n_vertices as usize];
        for &v in v_tilde {
            if v >= self.n_vertices {
                return Err(Error::VertexOutOfRange {
                    id: v,
                    n_vertices: self.n_vertices,
                });
            }
            mask[v as usize] = true;
        }
        Ok(mask)
    }

    /// All edges terminating in `v_tilde`, their sources, and `v_tilde` itself
    /// as the post set (vertices without incoming edges included).
    pub fn indegree_subgraph(&self, v_tilde: &[VertexId]) -> Result<SubGraph> {
        let mask = self.selection_mask(v_tilde)?;
        let mut pre = Vec::new();
        let mut edges = Vec::new();
        for (i, &(x, y)) in self.edges.iter().enumerate() {
            if mask[y as usize] {
                edges.push(i);
                pre.push(x);
            }
        }
        sorted::normalize(&mut pre);
        let mut post = v_tilde.to_vec();
        sorted::normalize(&mut post);
        Ok(SubGraph {
            orientation: Orientation::Indegree,
            pre,
            post,
            edges,
        })
    }

    /// Dual of [`indegree_subgraph`](Self::indegree_subgraph): edges leaving
    /// `v_tilde`.
    pub fn outdegree_subgraph(&self, v_tilde: &[VertexId]) -> Result<SubGraph> {
        let mask = self.selection_mask(v_tilde)?;
        let mut post = Vec::new();
        let mut edges = Vec::new();
        for (i, &(x, y)) in self.edges.iter().enumerate() {
            if mask[x as usize] {
                edges.push(i);
                post.push(y);
            }
        }
        sorted::normalize(&mut post);
        let mut pre = v_tilde.to_vec();
        sorted::normalize(&mut pre);
        Ok(SubGraph {
            orientation: Orientation::Outdegree,
            pre,
            post,
            edges,
        })
    }

    /// Restriction of `s` to the edges whose source spiked.
    pub fn spiking_subgraph(&self, s: &SubGraph, spikes: &SpikeSet) -> SubGraph {
        let mut post = Vec::new();
        let mut edges = Vec::new();
        for &e in &s.edges {
            let (x, y) = self.edges[e];
            if spikes.contains(x) {
                edges.push(e);
                post.push(y);
            }
        }
        sorted::normalize(&mut post);
        SubGraph {
            orientation: s.orientation,
            pre: sorted::intersect(spikes.ids(), &s.pre),
            post,
            edges,
        }
    }

    /// Splits an indegree sub-graph built from `owned` into the part fed by
    /// owned sources (local) and the part fed from elsewhere (remote).
    ///
    /// Each half keeps `owned` as its post set and the sources of its own edges
    /// as its pre set, so `local.join(&remote)` reproduces `s` exactly.
    pub fn split_local_remote(
        &self,
        s: &SubGraph,
        owned: &[VertexId],
    ) -> Result<(SubGraph, SubGraph)> {
        let mut owned_sorted = owned.to_vec();
        sorted::normalize(&mut owned_sorted);
        if s.orientation != Orientation::Indegree {
            return Err(Error::Precondition(
                "local/remote split requires an indegree sub-graph".into(),
            ));
        }
        if s.post != owned_sorted {
            return Err(Error::Precondition(
                "sub-graph post set differs from the owned vertex set".into(),
            ));
        }
        let mask = self.selection_mask(&owned_sorted)?;
        let (mut local_pre, mut remote_pre) = (Vec::new(), Vec::new());
        let (mut local_edges, mut remote_edges) = (Vec::new(), Vec::new());
        for &e in &s.edges {
            let x = self.edges[e].0;
            if mask[x as usize] {
                local_edges.push(e);
                local_pre.push(x);
            } else {
                remote_edges.push(e);
                remote_pre.push(x);
            }
        }
        sorted::normalize(&mut local_pre);
        sorted::normalize(&mut remote_pre);
        let local = SubGraph {
            orientation: Orientation::Indegree,
            pre: local_pre,
            post: owned_sorted.clone(),
            edges: local_edges,
        };
        let remote = SubGraph {
            orientation: Orientation::Indegree,
            pre: remote_pre,
            post: owned_sorted,
            edges: remote_edges,
        };
        Ok((local, remote))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    Indegree,
    Outdegree,
}

/// `(pre, post, edges)` triplet; all three components sorted ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubGraph {
    pub orientation: Orientation,
    pub pre: Vec<VertexId>,
    pub post: Vec<VertexId>,
    pub edges: Vec<EdgeId>,
}

impl SubGraph {
    pub fn empty(orientation: Orientation) -> Self {
        Self {
            orientation,
            pre: Vec::new(),
            post: Vec::new(),
            edges: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.pre.is_empty() && self.post.is_empty() && self.edges.is_empty()
    }

    fn check_orientation(&self, other: &SubGraph) -> Result<()> {
        if self.orientation != other.orientation {
            return Err(Error::OrientationMismatch(
                self.orientation,
                other.orientation,
            ));
        }
        Ok(())
    }

    /// Componentwise intersection.
    pub fn meet(&self, other: &SubGraph) -> Result<SubGraph> {
        self.check_orientation(other)?;
        Ok(SubGraph {
            orientation: self.orientation,
            pre: sorted::intersect(&self.pre, &other.pre),
            post: sorted::intersect(&self.post, &other.post),
            edges: sorted::intersect(&self.edges, &other.edges),
        })
    }

    /// Componentwise union.
    pub fn join(&self, other: &SubGraph) -> Result<SubGraph> {
        self.check_orientation(other)?;
        Ok(SubGraph {
            orientation: self.orientation,
            pre: sorted::union(&self.pre, &other.pre),
            post: sorted::union(&self.post, &other.post),
            edges: sorted::union(&self.edges, &other.edges),
        })
    }
}

/// Pre-synaptic vertices that spiked in one step, sorted and unique.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SpikeSet(Vec<VertexId>);

impl SpikeSet {
    pub fn new(mut ids: Vec<VertexId>) -> Self {
        sorted::normalize(&mut ids);
        Self(ids)
    }

    pub fn ids(&self) -> &[VertexId] {
        &self.0
    }

    pub fn contains(&self, id: VertexId) -> bool {
        sorted::contains(&self.0, &id)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<VertexId> for SpikeSet {
    fn from_iter<I: IntoIterator<Item = VertexId>>(iter: I) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g4() -> DirectedGraph {
        DirectedGraph::new(4, vec![(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]).unwrap()
    }

    fn edge_pairs(g: &DirectedGraph, s: &SubGraph) -> Vec<(u32, u32)> {
        let mut v: Vec<_> = s.edges.iter().map(|&e| g.edge(e)).collect();
        v.sort();
        v
    }

    #[test]
    fn build_graph_cases() {
        assert_eq!(g4().n_edges(), 5);
        let single = DirectedGraph::new(1, vec![]).unwrap();
        assert_eq!(single.n_vertices(), 1);
        assert_eq!(single.n_edges(), 0);
        let err = DirectedGraph::new(3, vec![(0, 5)]).unwrap_err();
        assert_eq!(err.to_string(), "edge 0: post id 5 \u{2265} 3");
    }

    #[test]
    fn indegree_cases() {
        let g = g4();
        let s = g.indegree_subgraph(&[1, 2]).unwrap();
        assert_eq!(s.pre, vec![0, 1]);
        assert_eq!(s.post, vec![1, 2]);
        assert_eq!(edge_pairs(&g, &s), vec![(0, 1), (0, 2), (1, 2)]);

        assert!(g.indegree_subgraph(&[]).unwrap().is_empty());

        let full = g.indegree_subgraph(&[0, 1, 2, 3]).unwrap();
        assert_eq!(full.pre, vec![0, 1, 2, 3]);
        assert_eq!(full.post, vec![0, 1, 2, 3]);
        assert_eq!(full.edges, vec![0, 1, 2, 3, 4]);
        assert!(g.indegree_subgraph(&[4]).is_err());
    }

    #[test]
    fn outdegree_cases() {
        let g = g4();
        let s = g.outdegree_subgraph(&[0]).unwrap();
        assert_eq!((s.pre.clone(), s.post.clone()), (vec![0], vec![1, 2]));
        assert_eq!(edge_pairs(&g, &s), vec![(0, 1), (0, 2)]);
        assert!(g.outdegree_subgraph(&[]).unwrap().is_empty());
        let s3 = g.outdegree_subgraph(&[3]).unwrap();
        assert_eq!((s3.pre.clone(), s3.post.clone()), (vec![3], vec![0]));
        assert_eq!(edge_pairs(&g, &s3), vec![(3, 0)]);
    }

    #[test]
    fn meet_and_join() {
        let g = g4();
        let a = g.indegree_subgraph(&[1]).unwrap();
        let b = g.indegree_subgraph(&[2]).unwrap();
        let m = a.meet(&b).unwrap();
        assert_eq!(m.pre, vec![0]);
        assert!(m.post.is_empty() && m.edges.is_empty());

        let j = a.join(&b).unwrap();
        assert_eq!(j, g.indegree_subgraph(&[1, 2]).unwrap());
        assert_eq!(a.meet(&a).unwrap(), a);

        let out = g.outdegree_subgraph(&[1]).unwrap();
        assert!(matches!(
            a.meet(&out),
            Err(Error::OrientationMismatch(..))
        ));
    }

    #[test]
    fn spiking_cases() {
        let g = g4();
        let s = g.indegree_subgraph(&[1, 2]).unwrap();
        let sp = g.spiking_subgraph(&s, &SpikeSet::new(vec![0]));
        assert_eq!(sp.pre, vec![0]);
        assert_eq!(sp.post, vec![1, 2]);
        assert_eq!(edge_pairs(&g, &sp), vec![(0, 1), (0, 2)]);
        assert!(g.spiking_subgraph(&s, &SpikeSet::default()).is_empty());
        assert!(g.spiking_subgraph(&s, &SpikeSet::new(vec![3])).is_empty());
    }

    #[test]
    fn local_remote_cases() {
        let g = g4();
        let s = g.indegree_subgraph(&[1, 2]).unwrap();
        let (local, remote) = g.split_local_remote(&s, &[1, 2]).unwrap();
        assert_eq!(edge_pairs(&g, &local), vec![(1, 2)]);
        assert_eq!(edge_pairs(&g, &remote), vec![(0, 1), (0, 2)]);
        assert_eq!(remote.pre, vec![0]);
        assert_eq!(local.join(&remote).unwrap(), s);

        let all = g.indegree_subgraph(&[0, 1, 2, 3]).unwrap();
        let (_, remote) = g.split_local_remote(&all, &[0, 1, 2, 3]).unwrap();
        assert!(remote.pre.is_empty() && remote.edges.is_empty());
        assert_eq!(remote.post, vec![0, 1, 2, 3]);

        let sparse = DirectedGraph::new(3, vec![(0, 1), (0, 2)]).unwrap();
        let s = sparse.indegree_subgraph(&[1, 2]).unwrap();
        let (local, _) = sparse.split_local_remote(&s, &[1, 2]).unwrap();
        assert!(local.edges.is_empty());

        assert!(g.split_local_remote(&s, &[1]).is_err());
    }
}
