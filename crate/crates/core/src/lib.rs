//! Operator-valued kernels on finite sets: Hilbert and Krein linearisations,
//! reproducing kernel spaces, and *-representations of finite
//! *-semigroupoids induced by invariant kernels.

pub mod bundle;
pub mod commands;
pub mod error;
pub mod generate;
pub mod hilbert_lin;
pub mod io;
pub mod kernel;
pub mod krein_core;
pub mod krein_lin;
pub mod numlin;
pub mod report;
pub mod sgpd;

pub use error::{Error, Result};
