//! Temporal brightness models for retinal-prosthesis percepts.
//!
//! Three model families predict perceived brightness over time from a pulse
//! train's rate and duration: a spectral (Fourier-series) model, a piecewise
//! exponential model and a fading/persistence baseline. The crate also provides
//! the dataset loader, derivative-free optimizers, scoring and cross-validation.

pub mod baseline;
pub mod cli;
pub mod crossval;
pub mod data;
pub mod error;
pub mod exponential;
pub mod metrics;
pub mod model;
pub mod optim;
pub mod spectral;

pub use data::{load_dataset, Condition, Dataset, Grid, Stimulus, TimeCourse, Trial};
pub use error::{Error, Result};
pub use model::{fit_descriptive, fit_predictive, FitConfig, FitResult, ModelKind, ModelParams};
