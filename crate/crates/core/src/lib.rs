//! Aggregation of crowds of human and machine probabilistic forecasts.
//!
//! The crate provides:
//!
//! - [`domain`]: questions, forecasters, forecasts and tournament access rules.
//! - [`scoring`]: unordered and ordered Brier scores, MDB/MMDB, the one-sided
//!   z-test, calibration, ROC/AUC, rank percentiles and progress profiles.
//! - [`baseline`]: the M0/M1/M2 linear pools with temporal decay,
//!   inverse-Brier weights and log-odds extremization.
//! - [`features`]: word-vector anchors, forecaster embeddings, time embeddings
//!   and per-forecast input features.
//! - [`model`]: the anchor-attention aggregator with a hand-written backward pass.
//! - [`training`]: loss, gradients, Adam, the plateau schedule and
//!   question-level cross-validation.
//! - [`synthdata`]: seeded synthetic tournaments and the random-walk / AR(1)
//!   machine forecasters.
//! - [`report`]: evaluation reports and their JSON/CSV exports.

// NaN must fail the range checks, so they are written as negated comparisons.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baseline;
pub mod domain;
pub mod error;
pub mod features;
pub mod linalg;
pub mod model;
pub mod report;
pub mod rng;
pub mod scoring;
pub mod synthdata;
pub mod training;

pub use error::{Error, Result};
