//! Energy-optimal partial offloading of data-partitioned applications from a
//! mobile terminal (MT) to a femto access point (FAP) over MIMO links.
//!
//! The library answers one question: given a MIMO channel, the MT power
//! consumption model, and an application profile (bits to process, latency
//! budget, per-bit local cost), how many bits should be processed locally and
//! how many shipped to the FAP so that the MT spends the least energy while
//! finishing on time?
//!
//! Modules:
//! - [`channel`]: complex channel matrices, Gram eigenvalues, water-filling
//!   power allocation in both directions.
//! - [`energy`]: MT power consumption models, minimum UL energy per bit and
//!   its derivative, the min-energy UL rate.
//! - [`optimizer`]: the joint radio/computation allocation reduced to a
//!   one-dimensional convex problem over the offloaded bit count, solved by
//!   nested intervals on the derivative sign.
//! - [`cases`]: closed-form special cases — no/total offloading optimality,
//!   minimum affordable latency, unconstrained-latency decision.
//! - [`sim`]: seeded Rayleigh channel generation, Monte Carlo sweeps over
//!   channel gain and latency budget, curve tables, CSV emission.

pub mod cases;
pub mod channel;
pub mod energy;
pub mod optimizer;
pub mod sim;

/// Library error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("channel has no usable eigenmode")]
    NoChannel,
    #[error("infeasible split: {0}")]
    InfeasibleSplit(String),
}

pub type Result<T> = std::result::Result<T, Error>;
