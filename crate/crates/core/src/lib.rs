//! Differential testing of compiler code-size optimisation.
//!
//! A seed function is grown step by step by a mutation provider (normally a
//! language model); every step is compiled by a matrix of compilers and
//! flags, and the sizes are compared. Programs where one configuration emits
//! clearly more code than another are filtered for false positives and
//! written out as reproducible reports.

pub mod catalog;
pub mod config;
pub mod corpus;
pub mod dedup;
pub mod error;
pub mod filters;
pub mod language;
pub mod model;
pub mod mutation;
pub mod report;
pub mod session;
pub mod strategies;
pub mod toolchain;

pub use error::{Error, Result};
