pub mod data;
pub mod error;
pub mod harness;
pub mod ingest;
pub mod measures;
pub mod oracle;
pub mod screening;
pub mod selftest;
pub mod simgen;
pub mod transport;

pub use error::{Error, Result};
