//! Federated hyperdimensional classification with randomized sub-model
//! retraining.
//!
//! - [`hdc`]: encoder, prototype model, retraining, sub-model gather/scatter.
//! - [`federated`]: the multi-client training loop.
//! - [`data`]: dataset loaders and client partitioning.
//! - [`metrics`]: accuracy, traffic ledger, traffic-to-target.
//! - [`experiment`]: configuration, single runs and grids with CSV/JSON output.
//!
//! The guide in `book/` walks through each part with runnable examples.

pub mod data;
pub mod error;
pub mod experiment;
pub mod federated;
pub mod hdc;
pub mod metrics;
pub mod seed;

pub use error::{HdcError, Result};

// The guide's code blocks run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/encoding.md")]
    mod encoding {}
    #[doc = include_str!("../../../book/src/prototypes.md")]
    mod prototypes {}
    #[doc = include_str!("../../../book/src/retraining.md")]
    mod retraining {}
    #[doc = include_str!("../../../book/src/federated.md")]
    mod federated {}
    #[doc = include_str!("../../../book/src/traffic.md")]
    mod traffic {}
    #[doc = include_str!("../../../book/src/data.md")]
    mod data {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
