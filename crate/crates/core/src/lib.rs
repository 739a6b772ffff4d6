//! Battery-electric feasibility and grid-emissions model for short-haul aviation.

// `!(x > 0.0)` is used deliberately so NaN inputs fail validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod app;
pub mod corpus;
pub mod csvio;
pub mod curves;
pub mod data;
pub mod emissions;
pub mod error;
pub mod params;
pub mod propulsion;
pub mod registry;
pub mod report;
pub mod schedule;

pub use error::{Error, Result};
pub use params::ModelParameters;
