//! Ethical risk analysis toolkit for Layer-2 rollups.
//!
//! * [`snapshot`] ingests saved project-risk snapshots and computes the
//!   per-dimension prevalence of hazardous configurations.
//! * [`incidents`] parses curated incident records, classifies them and
//!   computes their historical distribution.
//! * [`engine`] builds stakeholder role matrices, assigns diagram fields,
//!   detects problematic role configurations and prioritizes mitigations.
//! * [`sim`] is a deterministic discrete-event simulator of a generic
//!   rollup with incident injection and mitigation toggles.
//! * [`report`] cross-validates the two data signals and assembles reports.

pub mod engine;
pub mod incidents;
pub mod model;
pub mod report;
pub mod sim;
pub mod snapshot;

pub use model::*;
