//! Phage-display panning analysis toolkit.
//!
//! Converts before/after-panning sequence libraries into labeled
//! antigen-VHH interaction datasets via a two-proportion z-test with
//! min-p replicate aggregation and a negative-control noise filter,
//! validates the labeling against an in-silico panning simulator with
//! known ground truth, and reproduces an incremental-mutant benchmark
//! with from-scratch logistic-regression and MLP baselines.
//!
//! The full pipeline runs from the `panseq` binary:
//! translate -> count -> label -> split -> train-eval -> stats,
//! with `simulate` producing synthetic inputs for end-to-end checks.

pub mod bench;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod io_util;
pub mod labeler;
pub mod manifest;
pub mod noise;
pub mod pipeline;
pub mod seqio;
pub mod sim;
pub mod stats;

pub use error::{Error, Result};
