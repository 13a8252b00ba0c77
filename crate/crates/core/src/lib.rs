// SPDX-License-Identifier: Apache-2.0

//! Exact-diagonalization simulator for locally charged, disordered spin
//! quantum batteries.
//!
//! Two reference models are supported: an open Ising chain with nearest and
//! next-to-nearest `σˣσˣ` couplings in a longitudinal `σᶻ` field, and the
//! 8-qubit Chimera unit cell with random `σᶻσᶻ` couplings. Both start in the
//! ground state of their reference Hamiltonian and are charged by a uniform
//! transverse field `Ω Σ σˣ`, either static or oscillating.
//!
//! The crate is organised bottom-up:
//!
//! * [`pauli`]: dense operators and Hamiltonian builders.
//! * [`disorder`]: coupling distributions, phase presets, seeding.
//! * [`spectral`]: Hermitian eigendecomposition.
//! * [`dynamics`]: exact static propagation and the midpoint stepper.
//! * [`metrics`]: ergotropy, dephasing, fidelity, coherence, power.
//! * [`cost`]: Hilbert-Schmidt energy-cost accounting.
//! * [`ensemble`]: disorder-averaged runs.
//! * [`config`], [`report`], [`validate`]: experiment configuration, file
//!   output and the built-in oracle suite used by the CLI.

pub mod config;
pub mod cost;
pub mod disorder;
pub mod dynamics;
pub mod ensemble;
mod error;
pub mod metrics;
pub mod pauli;
pub mod report;
pub mod spectral;
pub mod validate;

pub use error::{Error, Result};

/// Complex scalar used for all amplitudes and matrix entries.
pub type C64 = num_complex::Complex64;
