//! Importance samplers for discretized SDE paths conditioned on an end-time
//! observation.
//!
//! The target density over a path `x_{1:N}` with fixed start `x_0` is
//! proportional to `rho(x_{1:N} | x_0) * exp(-g(x_N) / eps)`, where `rho` is
//! the Euler(-type) discretization of `dX = f(X) dt + sqrt(eps) sigma dW` and
//! `g` penalizes the end state. Proposals are built around the minimizer of
//! the associated path cost: a single Gaussian centered on the optimal path
//! (`Lm`), a step-by-step re-optimized variant (`Dlm`), and antithetic
//! symmetrizations of both (`Slm`, `Sdlm`) that cancel the leading-order
//! weight fluctuations.

pub mod diagnostics;
pub mod error;
pub mod linalg;
pub mod model;
pub mod optimize;
pub mod pathspace;
pub mod samplers;

pub mod config;
pub mod experiments;

pub use error::{Error, Result};
pub use model::{builtin_model, ModelParams, PathGrid, SdeModel, StepperKind};
pub use pathspace::{BlockTridiag, NoiseDraw, Path};
pub use samplers::{run_ensemble, SamplerKind, WeightedPath};
