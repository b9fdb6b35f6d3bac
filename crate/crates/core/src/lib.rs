//! Numerical core of the Noise Collector sparse-recovery toolkit.
//!
//! Support recovery from noisy measurements `b = A ρ + e` is done by solving
//! the weighted augmented problem
//!
//! ```text
//! min  τ‖ρ‖₁ + ‖η‖₁   subject to   A ρ + C η = b
//! ```
//!
//! where `C` is a random circulant *noise collector* that absorbs the noise.
//! With `τ = c₀ √(ln n)` the recovered `ρ` carries no phantom signals, so its
//! support can be read off directly and refit by least squares.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, experiments and
//! the command-line front end live in the companion `nc` crate.

#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;

pub mod collector;
pub mod error;
pub mod fft;
pub mod imaging;
pub mod linop;
pub mod lstsq;
mod math;
pub mod matrix;
pub mod random;
pub mod solver;
pub mod vector;

pub use collector::{CoherenceReport, NoiseCollector};
pub use error::{Error, Result};
pub use fft::{dft, Direction, Fft};
pub use imaging::{ImagingConfig, SourceScene};
pub use linop::{spectral_norm, LinearOperator, PowerIteration, SpectralNorm};
pub use matrix::DenseMatrix;
pub use random::Seed;
pub use solver::{KktReport, RecoveryResult, Solver, SolverConfig};
pub use vector::C64;
