//! Equilibrium solver for a two-period targeted-advertising game in which the
//! advertiser only sees a randomized-response copy of the consumer's purchase
//! bit.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure
//! function of immutable inputs, so all of it is safe to call from many
//! threads at once.
//!
//! Module map:
//!
//! * [`model`]: value distributions, type models, payoffs, privacy levels.
//! * [`posterior`]: the advertiser's Bayesian posterior for a cutoff strategy.
//! * [`pricing`]: monopoly price and the discriminatory price/cutoff pair.
//! * [`equilibrium`]: classification of the three equilibrium kinds.
//! * [`metrics`]: welfare, profit, advertiser utility, mutual information.
//! * [`oracle`]: seeded Monte-Carlo simulation of the literal game.

#![no_std]
// `!(a < b)` is used on purpose so NaN inputs take the rejecting branch
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod equilibrium;
mod error;
pub mod metrics;
pub mod model;
pub mod numeric;
pub mod oracle;
pub mod posterior;
pub mod pricing;

pub use error::{Error, Result};
pub use model::{
    AdChoice, AdvertiserStrategy, ConsumerType, Epsilon, Game, GameParams, PrivacyLevel,
    TypeModel, ValueDistribution,
};
