//! File formats, run configuration and the `crembo` command line on top of
//! [`crembo_core`].

pub mod cli;
pub mod config;
pub mod error;
pub mod io;

pub use crembo_core;
