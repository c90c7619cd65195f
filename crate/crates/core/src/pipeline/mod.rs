//! Staged factor construction on partitioned instances: a reserved set,
//! an exceptional-vertex cover, integer-weight balancing of the cluster
//! tuples and an exact factor of each balanced tuple, each stage on its own
//! sparsification round.

pub mod embed;
pub mod instance;
pub mod regularity;
pub mod run;
pub mod weights;

pub use embed::{cover_exceptional, CoverReport, EdgeReveal, FixedReveal, LazyReveal, QuotaUsage};
pub use instance::{
    gen_super_regular_instance, PairDensity, PartitionedInstance, PlantedConfig, RegularityParams,
};
pub use regularity::{
    build_reduced_graph, check_regular_pair, pair_density, super_regularize, Regularity,
    RegularityReport,
};
pub use run::{
    pipeline_graph, run_pipeline, select_w, PipelineConfig, PipelineReport, Stage, StageFailure,
    WSelection,
};
pub use weights::{balance_tuples, balance_weights, BalanceReport, WeightAssignment, WeightReport};
