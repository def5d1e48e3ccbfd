//! Binary classification from noisy Similar/Dissimilar pair supervision.
//!
//! The crate covers the two corruption processes (pairing and labeling
//! noise), backward loss correction, the weighted cost-sensitive method,
//! prior estimation from S/D counts, a small MLP trained by SGD with
//! momentum, cross-validation of noise parameters, and k-means baselines.
//!
//! Everything here is `no_std` with `alloc`. File formats, configuration
//! and the experiment runner live in the companion `sdnoise` crate.

#![no_std]

extern crate alloc;

pub mod cluster;
pub mod correction;
pub mod cv;
pub mod data;
pub mod error;
pub mod estimation;
pub mod model;
pub mod noise;
pub mod rng;
pub mod weighted;

pub use correction::{BaseLoss, CorrectedLoss, CorrectionMatrix};
pub use data::{Dataset, LabeledPoint, PairPoint, PointwiseSDPoint, Sign, SplitSpec};
pub use error::{Error, Result};
pub use model::{Arch, PerExampleLoss, Predictor, TrainConfig};
pub use noise::{LabelingNoise, NoiseModel, PairingNoise, PosteriorCoefficients};
pub use weighted::{WeightedLoss, WeightedRiskParams};
