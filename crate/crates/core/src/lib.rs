//! Statistics of invariant sets of random permutations.
//!
//! A permutation fixes a set exactly when the set is a union of its cycles,
//! so whether some `k`-set is fixed depends only on the multiset of cycle
//! lengths at most `k`. This crate computes the probability of that event
//! three ways and cross-checks them:
//!
//! * [`exact`] — arbitrary-precision rational counting at finite `n`;
//! * [`poisson`] — the `n -> infinity` model with independent Poisson(1/i)
//!   cycle counts, evaluated by an exact sum-set dynamic program;
//! * [`sampler`] — seeded, reproducible Monte Carlo for everything beyond
//!   the exact envelopes.
//!
//! [`asymptotics`] layers the decay-rate diagnostics on top: envelope
//! normalization, log-log slope fits, and the exact dyadic-interval and
//! rotation-average identities.

pub mod asymptotics;
pub mod bitset;
pub mod cycle;
pub mod error;
pub mod exact;
pub mod numeric;
pub mod parts;
pub mod poisson;
pub mod report;
pub mod sampler;

pub use bitset::SumSet;
pub use cycle::CycleType;
pub use error::{Error, Result};
pub use exact::{ExactEngine, ExactProb};
pub use parts::PartList;
pub use report::{Check, Report};
pub use sampler::{EstimatorResult, RngStream};
