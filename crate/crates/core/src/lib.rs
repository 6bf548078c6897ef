//! Regression on bags of scalar observations.
//!
//! A *bag* is an unordered group of scalar observations that shares a single
//! outcome label. This crate reduces each bag to a vector of polynomial
//! moments, accumulates three sufficient statistics over the dataset (the
//! moment Gram matrix, its label-weighted counterpart, and the label-moment
//! projection), and answers two questions in closed form:
//!
//! * what outcome should we expect for a given state (two estimators: a
//!   least-squares surface and a ratio-of-quadratic-forms estimator that can
//!   never leave the observed label range), and
//! * which discrete outcome levels does the model support at all, and with
//!   what probability for a given state (a generalized eigenproblem over the
//!   accumulated statistics).
//!
//! Fitting is one pass, needs no iteration, and the entire model is a handful
//! of small dense matrices, so it serializes to a short plain-text file.
//!
//! Modules follow the pipeline: [`basis`] evaluates the polynomial family,
//! [`moments`] turns bags into moment vectors, [`linalg`] supplies the
//! symmetric solvers, [`regression`] fits and predicts, [`spectrum`] exposes
//! the outcome distribution, [`synthetic`] draws reproducible benchmark
//! datasets, and [`io`] reads and writes the text formats.
//!
//! ```
//! use bagreg::basis::{BasisSpec, PolyFamily};
//! use bagreg::moments::{Bag, BagDataset, NormalizationMode};
//! use bagreg::regression::TrainedModel;
//! use bagreg::spectrum::{outcome_distribution, spectral_decompose};
//!
//! let dataset = BagDataset::new(vec![
//!     Bag::new(vec![0.10, 0.15, 0.12], 1.0)?,
//!     Bag::new(vec![0.45, 0.50, 0.55], 2.0)?,
//!     Bag::new(vec![0.80, 0.85, 0.82], 3.0)?,
//! ])?;
//! let (lo, hi) = dataset.observation_range();
//! let spec = BasisSpec::covering(PolyFamily::Chebyshev, 3, lo, hi)?;
//! let model = TrainedModel::fit(&dataset, &spec, NormalizationMode::SizeNormalized)?;
//!
//! let state = model.point_state(0.5)?;
//! let expected = model.predict_rn(&state)?;
//! assert!((1.0..=3.0).contains(&expected));
//!
//! let spectral = spectral_decompose(&model)?;
//! let distribution = outcome_distribution(&spectral, &state)?;
//! assert!((distribution.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-12);
//! # Ok::<(), bagreg::Error>(())
//! ```

pub mod accum;
pub mod basis;
mod error;
pub mod io;
pub mod linalg;
pub mod moments;
pub mod regression;
pub mod spectrum;
pub mod synthetic;

pub use error::{Error, Result};
