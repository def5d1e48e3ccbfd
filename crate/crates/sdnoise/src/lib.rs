//! Experiment runner, file formats and CLI support for learning binary
//! classifiers from noisy Similar/Dissimilar pairs. The algorithms live in
//! `sdnoise-core`, re-exported here as [`core`].

pub use sdnoise_core as core;

pub mod error;
pub mod experiment;
pub mod loader;
pub mod model_io;
pub mod report;
pub mod spec;

pub use error::{Error, Result};
pub use experiment::{run, sweep_noise, sweep_samples, Experiment, RunReport, SweepTable};
pub use spec::{ExperimentSpec, Method};
