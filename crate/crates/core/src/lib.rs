//! Hand-use and hand-role analysis for egocentric video.
//!
//! The crate covers the classical pipeline end to end: corpus ingestion
//! ([`corpus`]), hand masks ([`masks`]), colour/motion/shape descriptors
//! ([`features`]), a binary random forest ([`forest`]), the aggregation rules
//! that turn raw model outputs into per-hand decisions ([`fusion`]),
//! classification and agreement metrics ([`metrics`]), the statistical
//! model-comparison chain ([`stats`]) and the leave-one-subject-out harness
//! ([`harness`]).
//!
//! Data-parallel loops go through [`par::Execution`]. Building without the
//! default `parallel` feature drops the rayon dependency and every loop runs
//! sequentially with identical results.

pub mod color;
pub mod config;
pub mod corpus;
pub mod error;
pub mod features;
pub mod forest;
pub mod fusion;
pub mod harness;
pub mod masks;
pub mod metrics;
pub mod par;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
