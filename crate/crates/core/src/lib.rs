//! Tabular classification toolkit: supervised tree discretization of
//! continuous columns, a catalog of categorical encoders, entity-embedding
//! and attention ("context") classifiers, and a seeded benchmark harness
//! comparing encoders by F1 and binary cross-entropy.

pub mod dataset;
pub mod discretizer;
pub mod encoders;
pub mod models;
pub mod bench;
mod error;

pub use error::{Error, Result};
