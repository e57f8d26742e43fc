//! Discrete diffusion load balancing on graphs: quasirandom, RSW and
//! randomized rounding, the idealized process they track, and the spectral
//! and random-walk analysis behind their deviation bounds.

pub mod adversarial;
pub mod error;
pub mod harness;
pub mod markov;
pub mod processes;
pub mod spectral;
pub mod topology;

pub use adversarial::{verify_bundle, InstanceBundle, Verdict};
pub use error::{Error, Result};
pub use harness::{run_experiment, sweep, ExperimentConfig, RunSummary};
pub use processes::{
    deviation, discrepancy, run, IdealMode, IdealState, LoadState, RoundingPolicy, SimulationTrace,
    Simulator, TieBreak,
};
pub use topology::{DiffusionMatrix, Graph, GraphKind, GraphSpec};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/graphs.md")]
    mod graphs {}
    #[doc = include_str!("../../../book/src/rounding.md")]
    mod rounding {}
    #[doc = include_str!("../../../book/src/spectral.md")]
    mod spectral {}
    #[doc = include_str!("../../../book/src/random-walks.md")]
    mod random_walks {}
    #[doc = include_str!("../../../book/src/lower-bounds.md")]
    mod lower_bounds {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
