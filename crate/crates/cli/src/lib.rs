//! Library side of the `mrset` command: index directories, element file
//! parsing and benchmark sweeps.

pub mod bench;
pub mod error;
pub mod index;
pub mod input;

pub use error::{CliError, Result};
