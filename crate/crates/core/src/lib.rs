//! Conjoint-based adoption thresholds and threshold contagion on mixed
//! human/artificial populations.
//!
//! The pipeline runs: study design ([`conjoint`]) → choices, recorded or
//! simulated ([`choice_data`]) → hierarchical Bayes estimation ([`hb`]) →
//! per-product thresholds and importances ([`threshold`]) → diffusion on
//! networks ([`network`]) → parameter sweeps and summaries ([`experiment`]).

pub mod choice_data;
pub mod coding;
pub mod conjoint;
pub mod error;
pub mod experiment;
pub mod logit;
pub mod network;
pub mod params;
pub mod hb;
pub mod rng;
pub mod stats;
pub mod threshold;

pub use error::{Error, Result};
