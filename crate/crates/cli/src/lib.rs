//! Library side of the `waveobs` command-line tool: commands, CSV artifacts
//! and the verification battery.

pub mod commands;
pub mod error;
pub mod io;
pub mod manifest;
pub mod verify;

pub use commands::{cmd_full, cmd_invert, cmd_simulate, load_config, RunOptions};
pub use error::{CliError, CliResult};
pub use verify::cmd_verify;
