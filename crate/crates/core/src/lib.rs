//! Simulation toolkit for two beamsplitter-coupled cavities dispersively
//! coupled to a transmon ancilla.
//!
//! Frequencies are angular (rad/µs) and times are in µs throughout; the
//! [`units`] module converts at the MHz boundary.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod config;
pub mod error;
pub mod fit;
pub mod evolver;
pub mod hilbert;
pub mod io;
pub mod par;
pub mod protocols;
pub mod pulses;
pub mod spin;
pub mod studies;
pub mod tuneup;
pub mod units;

pub use error::{Error, Result};
