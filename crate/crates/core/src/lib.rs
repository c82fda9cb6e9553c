//! FFD-GAN: a generative free-form-deformation parameterization of 3D wing
//! shapes, plus the baselines and evaluation machinery around it.
//!
//! The crate is organized around the experiment pipeline:
//!
//! - [`geometry`]: surface grids, FFD control lattices, Bernstein kernels,
//!   Hausdorff/MSE metrics, alignment and cross-section validity checks.
//! - [`grammar`]: probabilistic-grammar wing synthesizer producing aligned
//!   surface grids and the on-disk dataset format.
//! - [`neural`]: a small reverse-mode autodiff tape with higher-order
//!   support, the generator/critic networks and WGAN-GP training.
//! - [`param`]: the uniform design-vector -> surface interface with FFD,
//!   B-spline surface and FFD-GAN instances.
//! - [`aero`]: lifting-line aerodynamic evaluation and the feasibility
//!   predicate.
//! - [`harness`]: fitting/coverage tests, Monte-Carlo feasibility ratios and
//!   latent traversals.
//! - [`bayes`]: Latin hypercube sampling, GP regression and GP-UCB shape
//!   optimization.
//! - [`obj`]: OBJ mesh export/import for generated wings.
//!
//! Batch work is data-parallel via rayon (default `parallel` feature) with a
//! sequential fallback; see [`parallel`].

pub mod error;
pub mod geometry;
pub mod grammar;
pub mod neural;
pub mod param;
pub mod parallel;

pub use error::{Error, Result};
