//! Experiments, file formats and the `nc` command-line tool on top of
//! [`nc_core`].

pub mod cli;
pub mod error;
pub mod experiments;
pub mod io;

pub use error::{Error, Result};
pub use nc_core;
