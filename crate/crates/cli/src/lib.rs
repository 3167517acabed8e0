//! Figure-data front end for `phasequant`.

pub mod commands;
pub mod config;
pub mod error;
pub mod figures;
pub mod output;

pub use commands::{cmd_chi, cmd_fock, cmd_mass, cmd_phase, cmd_qqdot, cmd_spectrum, cmd_traj, cmd_veff};
pub use config::RunConfig;
pub use error::{CliError, Result};
pub use figures::{reproduce_all, Manifest};
pub use output::{Format, Sink, Table};
