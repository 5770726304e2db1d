//! Library surface of the `qmt` binary: the on-disk JSON formats and the
//! report model, shared with the integration tests.

pub mod formats;
pub mod report;
