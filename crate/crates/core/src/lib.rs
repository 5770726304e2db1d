//! Finite-dimensional quantum measurement processes and their thermodynamic audits.
//!
//! The crate models discrete observables (POVMs), quantum operations and
//! instruments in Kraus form, and full measurement processes
//! (apparatus state, premeasurement channel, objectification instrument).
//! On top of that substrate it computes entropic information measures
//! (Shannon, von Neumann, GLO information gain, mutual information,
//! Holevo chi) and audits processes against the second and third laws of
//! thermodynamics, including the trilemma classification of which of the
//! three compatibility assumptions a given process violates.
//!
//! Everything is dense, double-precision, and tolerance-aware; all random
//! object generation is deterministic in an explicit 64-bit seed.

pub mod channels;
pub mod error;
pub mod instruments;
pub mod linop;
pub mod measproc;
pub mod qobjects;
pub mod sweep;
pub mod thermo;
pub mod tol;

pub use error::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
