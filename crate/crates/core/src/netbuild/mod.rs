//! Network construction from declarative configs and connectome files, the
//! two benchmark generators, and the global reference simulator.

mod build;
mod config;
mod connectome;
mod generators;
mod reference;

pub use build::{
    build_from_recipe, build_network, plan_network, stream_key, stream_rng, Layout, ResolvedProjection,
    WiringRecipe,
};
pub use config::{
    load_config, parse_config, AreaConfig, ConnectomeConfig, DecompositionConfig, DelayDist, DriveConfig,
    NetworkConfig, OutputConfig, PopulationConfig, ProjectionConfig, Rule, WeightDist,
};
pub use connectome::{check_distances, load_connectome, read_labelled_matrix, ConnectomeMatrix};
pub use generators::{
    make_balanced_random_net, make_balanced_random_net_with, make_layered_cortex_net, BalancedNetParams,
    LayeredCortexParams, MicrocircuitTable,
};
pub use reference::{run_reference, ReferenceSim};
