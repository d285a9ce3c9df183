//! Spreading-sequence design for asynchronous DS-CDMA.
//!
//! For a desired user whose interferers are fixed, the total interference
//! seen at the correlator is a Hermitian quadratic form `s* Σ s` in the
//! user's chip vector. Minimising it under the power constraint `‖s‖² = N`
//! is a Rayleigh-quotient problem, so the optimal sequence is `√N` times the
//! eigenvector of the smallest eigenvalue of `Σ`.
//!
//! Modules:
//! - [`sequences`]: chip vectors, Gold and random generators, JSON file format.
//! - [`spectral`]: transform powers, weighted quadratic forms, `Σ` assembly.
//! - [`eigen`]: minimum eigenpair with canonical phase.
//! - [`optimizer`]: single-user optimum and the cyclic all-user sweep.
//! - [`metrics`]: SINR/SIR, maximum SINR, capacity and eigenvalue bounds.
//! - [`simulator`]: chip-level Monte-Carlo correlator and BER estimation.

pub mod eigen;
mod error;
pub mod metrics;
pub mod optimizer;
pub mod sequences;
pub mod simulator;
pub mod spectral;

pub use eigen::{min_eigenpair, EigenPair};
pub use metrics::{BoundsReport, LogBase, SystemParams};
pub use optimizer::{run_algorithm1, solve_single, Algorithm1, SingleUserSolution, SweepTrace};
pub use error::{Error, Result};


pub use simulator::{BerReport, SimConfig};
pub use sequences::{gold_codes, random_sequences, SequenceSet, SpreadingSequence};

pub use spectral::{InterferenceMatrix, SpectralWeights, SpectrumProfile};

pub use num_complex::Complex64;
