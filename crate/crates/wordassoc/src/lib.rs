//! File formats, ingestion, run configuration and the staged pipeline on
//! top of `wordassoc-core`.

#![deny(rust_2018_idioms)]

pub mod config;
pub mod error;
pub mod formats;
pub mod ingest;
pub mod pipeline;

pub use config::RunConfig;
pub use error::{Error, Result};
pub use ingest::NormFormat;
pub use pipeline::run_pipeline;
