//! Expert finding from document collections: datasets, text representations,
//! ranking models and their evaluation.

pub mod corpus;
pub mod error;
pub mod eval;
pub mod ingest;
pub mod models;
pub mod textrep;

pub use error::{Error, Result};
