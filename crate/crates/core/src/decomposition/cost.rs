/// Bytes per stored pre-synaptic entry (global id plus table index).
pub const BYTES_PER_PRE: u64 = 8;
/// Bytes per owned post-synaptic neuron (state, parameters handle, trace).
pub const BYTES_PER_POST: u64 = 64;
/// Bytes per stored synapse record.
pub const BYTES_PER_EDGE: u64 = 32;

/// Memory model `n_pre·c_pre + n_post·c_post + n_edges·c_edge` of one
/// indegree sub-graph.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CostEstimate {
    pub n_pre: u64,
    pub n_post: u64,
    pub n_edges: u64,
    pub bytes: u64,
}

impl CostEstimate {
    pub fn new(n_pre: u64, n_post: u64, n_edges: u64) -> Self {
        Self {
            n_pre,
            n_post,
            n_edges,
            bytes: n_pre * BYTES_PER_PRE + n_post * BYTES_PER_POST + n_edges * BYTES_PER_EDGE,
        }
    }
}

/// Cost of an area hosting `n_neurons` post-synaptic neurons with
/// `n_in_edges` incoming edges, `n_remote_pre` of whose sources live outside
/// the area. The pre table holds every owned neuron plus the remote sources.
pub fn estimate_area_cost(n_neurons: u64, n_in_edges: u64, n_remote_pre: u64) -> CostEstimate {
    CostEstimate::new(n_neurons + n_remote_pre, n_neurons, n_in_edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_model() {
        let c = estimate_area_cost(1000, 100_000, 50);
        assert_eq!(c.n_pre, 1050);
        assert_eq!(c.n_post, 1000);
        assert_eq!(
            c.bytes,
            1050 * BYTES_PER_PRE + 1000 * BYTES_PER_POST + 100_000 * BYTES_PER_EDGE
        );

        let bare = estimate_area_cost(1000, 0, 0);
        assert_eq!(bare.bytes, 1000 * (BYTES_PER_PRE + BYTES_PER_POST));

        let doubled = estimate_area_cost(1000, 200_000, 50);
        assert_eq!(doubled.bytes - bare.bytes - 50 * BYTES_PER_PRE, 2 * 100_000 * BYTES_PER_EDGE);
    }
}
