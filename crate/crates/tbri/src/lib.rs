//! File formats, sweep plans, the ensemble runner and the command-line
//! front end built on `tbri-core`.

pub mod aggregate;
pub mod cli;
pub mod error;
pub mod export;
pub mod pipeline;
pub mod plan;
pub mod runner;

pub use error::{AppError, Result};
