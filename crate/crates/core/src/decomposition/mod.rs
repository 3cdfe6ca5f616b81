//! Two-stage domain decomposition: areas are mapped onto blocks of ranks in
//! proportion to their estimated memory cost, then each area is cut into one
//! cell per rank by multisection over a sample of neuron positions. Inside a
//! rank, owned neurons are split into contiguous per-thread ranges.

mod cost;
mod mapping;
mod multisection;
mod plan;

pub use cost::{estimate_area_cost, CostEstimate, BYTES_PER_EDGE, BYTES_PER_POST, BYTES_PER_PRE};
pub use mapping::{map_areas_to_processes, random_equivalent_map, AreaProcessMap};
pub use multisection::{
    apply_division, factorize_parts, multisection_divide, sample_positions, DivisionGrid,
    DivisionNode, Point,
};
pub use plan::{make_partition_plan, split_even, AreaSpec, PartitionPlan};
