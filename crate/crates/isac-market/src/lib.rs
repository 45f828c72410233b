//! Resource trading between ISAC base stations and mobile users.
//!
//! Users buy communication individually and sensing in coalitions that share
//! one target. Trading happens in two stages: long-term contracts are signed
//! ahead of time under uncertainty about who will show up, and a spot market
//! clears whatever is left once participation is realized.
//!
//! - [`values`]: rate and sensing-accuracy valuations of bandwidth and power.
//! - [`market`]: entities, contracts, utilities, risks, feasibility audits.
//! - [`matching`]: the long-term matching with overbooking and its verifiers.
//! - [`online`]: realization, volunteer selection, and spot-market matching.
//! - [`sim`]: scenario generation, baselines, Monte Carlo and metrics.

// `!(x > 0.0)` is how input checks reject NaN along with the bad range.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod market;
pub mod matching;
pub mod online;
pub mod sim;
pub mod values;

pub use error::{Error, Result};
