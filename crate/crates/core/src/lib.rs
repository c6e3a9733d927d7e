//! Empirical mode decomposition with boundary end conditions, per-component
//! support vector regression ensembles, and a forecast-comparison harness.
//!
//! The pipeline: [`preprocess`] removes multiplicative seasonality and any
//! significant trend, [`emd`] splits the result into IMFs and a residue
//! (with envelopes extended past the series ends by an [`endcond`] method),
//! [`forecast`] fits one RBF [`svr`] per component on lags picked by
//! [`features`] and tuned by [`pso`], and a linear-kernel SVR recombines the
//! component forecasts. [`eval`] and [`harness`] score and compare models.

pub mod emd;
pub mod endcond;
pub mod envelope;
pub mod error;
pub mod eval;
pub mod features;
pub mod forecast;
pub mod harness;
pub mod par;
pub mod preprocess;
pub mod pso;
pub mod series;
pub mod svr;

pub use emd::{decompose, sift_pass, SiftingConfig};
pub use endcond::{EndConditionMethod, ExtendedExtrema};
pub use error::{Error, Result};
pub use series::{Decomposition, Imf, Series};
