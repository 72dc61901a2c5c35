//! Numerical laboratory for the conformal algebra of a one-dimensional
//! massless scalar quantum field.
//!
//! The crate builds the three conformal generators (energy E, dilatation D,
//! conformal acceleration C) on a truncated Fock space, derives the time
//! operator U and the frequency operator Ω from them, and machine-checks the
//! commutation identities, invariances and quantum corrections they obey,
//! including finite exponentiated frame transformations and semiclassical
//! transfer scenarios.

pub mod cli;
pub mod error;
pub mod flows;
pub mod fock;
pub mod grid;
pub mod linalg;
pub mod observables;
pub mod spectral;
pub mod states;
pub mod verify;

pub use error::{LabError, Result};

/// CLI entry point; returns the process exit code.
pub fn run() -> i32 {
    cli::run_cli(std::env::args_os())
}
