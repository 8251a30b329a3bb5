//! # shears
//!
//! A toolkit for extractive sentence compression by dependency-subtree
//! deletion, supervised with human acceptability judgements.
//!
//! The pipeline, end to end:
//!
//! * [`deptree`] parses CoNLL-U sentences into immutable dependency trees and
//!   implements the prune/linearize framework: a compression is whatever is
//!   left after deleting whole subtrees, read off in original token order.
//! * [`lm`] provides backoff n-gram scoring, ARPA I/O, and the NormLP / SLOR
//!   normalizations used as fluency signals.
//! * [`colloc`] collects signed token-distance statistics from a corpus and
//!   decides whether an edit breaks a collocation.
//! * [`features`] maps one prune edit, as seen by one (optional) worker, to a
//!   sparse named feature vector.
//! * [`model`] trains and applies an L2-regularized logistic regression over
//!   those vectors, predicting whether a worker endorses a deletion.
//! * [`acceptability`] composes per-edit endorsement probabilities into
//!   whole-compression scores (sum, min, edit count, language model).
//! * [`sampler`] draws diverse multi-prune candidates by probability matching
//!   and selects the best one under brevity and importance constraints.
//! * [`metrics`] implements the evaluation suite: accuracy, tie-aware ROC
//!   AUC, paired bootstrap significance, variable-rater Fleiss kappa,
//!   worker agreement and per-dependency endorsement rates.
//! * [`corpus`] ingests judgment datasets and gold compression pairs,
//!   enforces split discipline and computes corpus statistics.
//! * [`synth`] generates deterministic synthetic judgment releases for
//!   benchmarking the full pipeline without external data.
//!
//! The `shears` binary wires these into reproducible command-line workflows;
//! see the crate README for usage.

pub mod acceptability;
pub mod colloc;
pub mod corpus;
pub mod deptree;
mod error;
pub mod features;
pub mod lm;
pub mod metrics;
pub mod model;
pub mod pipeline;
pub mod sampler;
pub mod synth;
pub mod text;

pub use error::{Error, Result};
