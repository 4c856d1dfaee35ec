pub mod error;
pub mod fe;
pub mod geometry;
pub mod sparse;
pub mod ale;
pub mod shell;
pub mod fluid;
pub mod config;
pub mod driver;
pub mod diagnostics;
pub mod mms;
pub mod output;
pub mod cli;

pub use error::{Error, Result};
