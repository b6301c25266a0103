//! Operator-theoretic, kernel-based learning for ergodic dynamical systems.
//!
//! The crate builds data-driven approximations of Koopman (composition)
//! operators from time-ordered samples of a dynamical system: kernel
//! integral operators supply an empirical eigenbasis, shift operators
//! represent the dynamics in that basis, and on top of those sit two
//! forecasting schemes (diffusion forecasting of expectations and kernel
//! analog forecasting of conditional expectations with uncertainty) and a
//! coherent-pattern extractor built from a compactified skew-symmetric
//! generator ranked by Dirichlet energy.
//!
//! Reference systems (Lorenz 63 and a quasiperiodic torus rotation) and a
//! CSV-producing experiment driver are included; see the `koopcast` binary.
//!
//! ```no_run
//! use koopcast::dynamics::{delay_embed, simulate, CovariateMap, SystemSpec};
//! use koopcast::kernels::{kernel_eval, normalize, KernelSpec, Normalization};
//! use koopcast::spectral::eigenbasis;
//!
//! let spec = SystemSpec::lorenz63_default();
//! let data = simulate(&spec, &CovariateMap::Identity)?;
//! let embedding = delay_embed(&data, 1)?;
//! let kspec = KernelSpec::gaussian(10.0, 1, Normalization::None);
//! let raw = kernel_eval(&kspec, &embedding)?;
//! let kernel = normalize(raw, Normalization::Markov, 1.0)?;
//! let basis = eigenbasis(&kernel, 50)?;
//! assert!((basis.eigenvalues[0] - 1.0).abs() < 1e-10);
//! # Ok::<(), koopcast::Error>(())
//! ```

pub mod config;
pub mod dynamics;
pub mod error;
pub mod forecast;
pub mod generator;
pub mod kernels;
pub mod linalg;
pub mod pipeline;
pub mod spectral;
pub mod table;

pub use error::{Error, Result};
