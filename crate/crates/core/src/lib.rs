//! Gradient Gram ("G-") matrices of overparametrized two-layer and deep
//! networks, together with the polynomial-approximation machinery that bounds
//! their spectra and the training simulators that check the predicted
//! dynamics.
//!
//! The crate is organized bottom-up:
//!
//! - [`quadrature`], [`linalg`], [`reduce`], [`rng`]: numerical plumbing
//!   (Gauss rules, Jacobi eigen/SVD solvers, deterministic reductions,
//!   index-keyed random substreams).
//! - [`activation`]: activation catalog with derivatives and kink metadata.
//! - [`hermite`], [`chebyshev`]: orthogonal-polynomial expansions.
//! - [`data`]: dataset generation and validation.
//! - [`gram`], [`kill`]: G-matrix construction, spectra and kill vectors.
//! - [`network`], [`train`], [`predict`], [`depth`]: initialization,
//!   gradient descent, spectral predictors and depth propagation.

pub mod activation;
pub mod chebyshev;
pub mod data;
pub mod depth;
pub mod error;
pub mod gradcheck;
pub mod gram;
pub mod hermite;
pub mod kill;
pub mod linalg;
pub mod network;
pub mod ordering;
pub mod predict;
pub mod quadrature;
pub mod reduce;
pub mod rng;
pub mod train;

pub use activation::{catalog, ActivationSpec, Smoothness};
pub use chebyshev::{cheb_approx, cheb_degree_for_eps, ChebyshevApprox};
pub use data::Dataset;
pub use depth::DepthTrace;
pub use error::{Error, Result};
pub use gram::{GramMatrix, Provenance};
pub use hermite::HermiteSeries;
pub use kill::KillBasis;
pub use linalg::Spectrum;
pub use network::{InitScheme, NetworkState};
pub use train::{TrainConfig, Trajectory};
