//! Random permutations under multiplicative cycle weights `theta_k`.
//!
//! The measure gives `sigma` in `S_n` probability proportional to
//! `prod_k theta_k^{C_k}`, where `C_k` counts the `k`-cycles. The crate
//! covers exact computation at small `n` ([`oracle`]), exact sampling of
//! cycle types at large `n` ([`sampler`]), saddle-point asymptotics
//! ([`asymptotics`]), and the statistics of long cycles ([`stats`]).

pub mod asymptotics;
pub mod cycle_type;
pub mod error;
pub mod numeric;
pub mod oracle;
pub mod sampler;
pub mod stats;
pub mod scaled;
pub mod weights;

pub use cycle_type::CycleType;
pub use error::{Error, Result};
pub use scaled::ScaledReal;
pub use weights::WeightSequence;
