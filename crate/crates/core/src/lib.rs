//! Expected real-root counts of Gaussian random polynomial systems, centered
//! or shifted by a deterministic signal.
//!
//! ```
//! use noisyroots::covariance::{shub_smale_q, NoiseModel};
//! use noisyroots::rice::{centered_expectation, QuadratureSettings};
//!
//! let model = NoiseModel::uniform(shub_smale_q(3)?, 4)?;
//! let e = centered_expectation(&model, &QuadratureSettings::default())?;
//! assert!((e.value - 9.0).abs() < 1e-9);
//! # Ok::<(), noisyroots::Error>(())
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod covariance;
pub mod ensemble;
pub mod error;
pub mod estimate;
pub mod optimize;
pub mod poly;
pub mod quadrature;
pub mod rice;
pub mod rootcount;
pub mod signal;
pub mod special;
pub mod stream;
pub mod theorem2;

pub use error::{Error, Result};
