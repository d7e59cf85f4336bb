//! Online deterministic annealing: a prototype-based learner for clustering
//! and classification that grows its codebook progressively as a
//! temperature parameter is lowered.
//!
//! * [`bregman`]: divergence measures and centroids.
//! * [`wavelet`]: Haar transforms and multi-resolution pyramids.
//! * [`oda`]: the online annealing learner.
//! * [`mrtree`]: trees of learners trained over multiple resolutions.
//! * [`data`]: datasets, generators, file formats and sample streams.
//! * [`metrics`]: accuracy, distortion and history reports.
//! * [`persist`]: model files.

pub mod bregman;
pub mod data;
pub mod error;
pub mod metrics;
pub mod mrtree;
pub mod oda;
pub mod par;
pub mod persist;
pub mod wavelet;

pub use error::{OdaError, Result};
