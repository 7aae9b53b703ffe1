//! Closed-form kernels for 18-class human-object-contact maps.
//!
//! Everything in this crate operates on plain row-major grids: label maps,
//! per-class probability stacks, depth fields and person masks. The modules
//! split along the pipeline stages:
//!
//! - [`grid`]: the shared containers and their validation rules
//! - [`regions`]: 8-connected component labeling and enclosed-region analysis
//! - [`hpp`]: depth normalization and the human-proximal depth-band filter
//! - [`loss`]: cross-entropy, the local/global region-consistency losses and
//!   the prompt-similarity binary loss, with analytic gradients
//! - [`metrics`]: the five evaluation metrics including adaptive accuracy
//! - [`synth`]: a deterministic synthetic scene generator used as the oracle
//!   substrate for property tests
//!
//! All functions are pure and all types are immutable after construction, so
//! values can be shared across threads freely. The crate is `no_std`
//! compatible (`alloc` required); the `std` feature only switches the float
//! math source.

#![cfg_attr(not(any(test, feature = "std")), no_std)]

extern crate alloc;

pub mod grid;
pub mod hpp;
pub mod loss;
mod math;
pub mod metrics;
pub mod regions;
pub mod rng;
pub mod synth;

pub use grid::{
    ContactIndicator, DepthMap, FieldStack, LabelMap, LossWeights, PersonMaskSet, ProbMap,
    ScalarField, SimilarityVector,
};
