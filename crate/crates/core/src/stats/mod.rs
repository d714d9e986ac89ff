//! Observables of sampled cycle types and checks of their limit laws.

pub mod distance;
mod process;
mod report;
mod verify;

pub use process::{longest_cycles, process_path, process_samples, LongestCycles, ProcessPath, ProcessSample};
pub use report::{Check, VerificationReport};
pub use verify::{
    bn_event_frequency, bn_markov_bound, cumulative_profile, exponential_reference, verify_gumbel,
    verify_poisson_increments, Tolerances, REFERENCE_SEED,
};
