//! Readmission prediction from discharge summaries.
//!
//! The crate is organised along the pipeline:
//!
//! * [`cohort`] parses admission and note tables and labels each eligible
//!   admission with its 30-day unplanned readmission outcome.
//! * [`text`] turns summaries into tf-idf weighted bag-of-words vectors.
//! * [`concepts`] maps summaries to concept identifiers (CUIs) and builds
//!   bag-of-CUIs vectors.
//! * [`classifiers`] holds the five learners and their common scoring surface.
//! * [`evaluation`] provides stratified splitting, cross-validated tuning and
//!   ROC/AUC computation.
//! * [`pipeline`] wires everything into the commands used by the CLI,
//!   including the synthetic corpus generator.
//!
//! Data-parallel loops go through [`par`], which uses rayon when the
//! `parallel` feature is enabled (the default) and plain iterators otherwise.
//! Both paths produce identical results.

pub mod classifiers;
pub mod cohort;
pub mod concepts;
pub mod csv;
mod error;
pub mod evaluation;
pub mod par;
pub mod pipeline;
pub mod rng;
pub mod sparse;
pub mod text;

pub use error::{Error, Result};
