//! A spectral laboratory for the two-dimensional Anderson Hamiltonian and the
//! stochastic objects built on top of it.
//!
//! The crate works on the unit torus `(R/Z)^2`, discretized as an `n x n`
//! Fourier grid. From white noise it builds, in order:
//!
//! * the mollified enhanced noise `(xi_eps, xi_eps o G xi_eps - c_eps)` and
//!   its renormalization constant ([`noise`]),
//! * paraproducts, resonant products and the paracontrolled representation of
//!   the renormalized operator `-Delta + xi_eps - c_eps` ([`para`]),
//! * the dense Fourier-truncated operator, its spectrum and functional
//!   calculus ([`operator`]),
//! * Gaussian free fields, the Anderson free field, their coupling through a
//!   shared white noise, and Wick / pseudo-Wick powers ([`gaussian`]),
//! * the quartic Gibbs reweighting of the Anderson free field ([`gibbs`]),
//! * exact linear wave propagation, Galerkin flows with the Wick-ordered
//!   cubic nonlinearity, and the Da Prato-Debussche local solver ([`wave`],
//!   [`dpd`]),
//! * end-to-end statistical experiments with pass/fail verdicts
//!   ([`experiment`]).
//!
//! Everything is deterministic in `(configuration, seed)`: random draws are
//! keyed by counter-based streams so that ensembles parallelize over samples
//! without changing any output bit. The `parallel` feature (on by default)
//! routes ensemble loops through rayon; without it the same loops run
//! sequentially.

pub mod dpd;
pub mod dyadic;
pub mod error;
pub mod experiment;
pub mod fft;
pub mod field;
pub mod gaussian;
pub mod gibbs;
pub mod grid;
pub mod io;
pub mod mollifier;
pub mod noise;
pub mod operator;
pub mod par;
pub mod para;
pub mod rng;
pub mod stats;
pub mod wave;

pub use error::{Error, Result};
pub use field::SpectralField;
pub use grid::TorusGrid;
pub use mollifier::{Mollifier, MollifierKind};
pub use noise::EnhancedNoise;
