//! Simulation toolkit for a Raman-assisted six-quanta exchange between a
//! storage resonator `a` and a transmon `b`: `|f0> <-> |g4>` driven through
//! the virtual level `|e2>` by two four-wave-mixing pumps.
//!
//! Modes are always ordered `(a, b)` in tensor products. Frequencies are
//! ordinary (MHz, GHz for bare modes), times in us.

// `!(x > 0.0)` style checks are used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod hilbert;
pub mod model;
pub mod rwa;
pub mod table;
pub mod tomography;

pub use error::{Error, Result};
