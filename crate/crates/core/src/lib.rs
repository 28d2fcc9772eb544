//! Continuous-time random-loop Monte Carlo for quantum spin systems with
//! `T`, `Q` and `P` pair interactions, together with an exact-diagonalization
//! oracle for small systems.

pub mod error;
pub mod estimators;
pub mod events;
pub mod lattice;
pub mod loops;
pub mod measure;
pub mod oracle;
pub mod par;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use estimators::{
    correlation_plain, correlation_tilde, macroscopic_fraction, one_point, pair_event_probs, pair_event_table,
    CorrelationCoefficients, PairEventProbs,
};
pub use events::{sample_events, Event, EventList, Kind};
pub use lattice::{Graph, GraphSpec};
pub use loops::{build_loops, build_loops_oriented, Direction, LoopDecomposition, LoopTracer, Orientation, PairEvent};
pub use measure::{
    direct_estimate, loop_weight, metropolis_estimate, DirectConfig, MetropolisConfig, Observable, SamplerConfig,
    SamplerOutput, WeightSpec,
};
pub use par::Execution;
pub use stats::{BatchSeries, EstimateWithError};
