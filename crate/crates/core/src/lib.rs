//! Box embeddings for EL++ ontologies.
//!
//! Concepts are axis-aligned boxes whose coordinates may individually be
//! empty, roles are boxes of translations, and individuals are points.

pub mod geometry;
pub mod ontology;
pub mod model;
pub mod training;
pub mod evaluation;
pub mod plot;
pub mod manifest;
pub mod cli;
