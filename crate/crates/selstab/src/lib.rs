//! Command-line tool, file formats and experiment drivers built on
//! [`selstab_core`].
//!
//! - [`cache`]: the per-curve `p,a_p` cache, usable as a trace source.
//! - [`io`]: curve lists, comma lists, group table files.
//! - [`cli`]: the `selstab` subcommands.
//! - [`acceptance`]: the check suite run by `selstab selftest`.

pub mod acceptance;
pub mod cache;
pub mod cli;
pub mod error;
pub mod io;

pub use error::CliError;
