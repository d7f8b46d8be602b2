//! Neural generative coding: a hierarchy of state neurons and error neurons
//! that settles to explain its input through local iterative inference and
//! learns with local Hebbian-style updates. A Gaussian mixture fitted to the
//! top-layer latents turns the trained network into a sampler.

pub mod activation;
pub mod config;
pub mod data;
pub mod error;
pub mod eval;
pub mod gmm;
pub mod linalg;
pub mod model;
pub mod runner;
pub mod tensor_io;
pub mod train;

pub use activation::Activation;
pub use config::{
    CovarianceKind, DataConfig, EvalConfig, GmmConfig, MaskKind, ModelConfig, OptimizerConfig, PrecisionMode,
    RunConfig,
};
pub use error::{NgcError, Result};
pub use gmm::{fit_em, EmOptions, EmReport, GmmParams};
pub use model::{GncnParams, InferenceState};
