//! Nash welfare product (NWP) post-processing for binary classifiers.
//!
//! The crate is organised bottom-up:
//!
//! * [`agent`] and [`welfare`]: stakeholder state, scenario payoffs and the
//!   log-domain welfare product that scores each approve/deny decision.
//! * [`classifier`]: a hinge-loss linear classifier exposing a normalized
//!   hyperplane distance.
//! * [`modulation`]: the confidence-gated adjustment of a raw score by
//!   decision utility.
//! * [`temporal`]: the multi-epoch lending simulation with the end-of-epoch
//!   weight update.
//! * [`baseline`]: the calibrated equalized odds comparator.
//! * [`data`]: CSV ingestion, dataset preparation and synthetic populations.
//! * [`metrics`]: error rates, Gini and comparison reports.
//! * [`experiment`]: method comparisons wiring all of the above.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agent;
pub mod baseline;
pub mod classifier;
pub mod data;
pub mod error;
pub mod experiment;
pub mod metrics;
pub mod modulation;
pub mod rng;
pub mod temporal;
pub mod welfare;

pub use agent::{FeatureVector, IndividualState, InstitutionState, Label, LedgerEntry};
pub use error::{Error, Result};
pub use welfare::{DecisionUtility, Party, Scenario, ScenarioNwpMatrix, UtilityTable};
