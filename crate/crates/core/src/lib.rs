//! Conditional GAN for augmenting daily air-pollution time series.
//!
//! Daily series are 24 hourly concentrations labelled by season and day
//! type (8 classes). A generator MLP maps `[z | one_hot(y)]` to a synthetic
//! day; a discriminator MLP scores `[x | one_hot(y)]`. Generated data is
//! judged by its RMSE against each class's mean real day.
//!
//! - [`ndcore`]: matrices, MLPs with analytic gradients, Adam
//! - [`data`]: CSV ingestion, daily series, labels, balancing, band statistics
//! - [`cgan`]: models, losses, training loop, checkpoints
//! - [`eval`]: RMSE metric, fake datasets, reports and ranking
//! - [`plot`]: SVG band plots and training curves

pub mod cgan;
pub mod data;
pub mod error;
pub mod eval;
pub mod ndcore;
pub mod plot;

pub use error::{Error, Result};

/// Hours per daily series.
pub const SERIES_LEN: usize = 24;
/// Number of season x day-type classes.
pub const NUM_CLASSES: usize = 8;
