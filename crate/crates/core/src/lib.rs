//! Dissipative qubit under continuous measurement and feedback control.
//!
//! The qubit `H₀ = (Δ/2)σ_z` exchanges heat with thermal baths and energy with
//! a monitor that detects the state `|m⟩` at rate `γ` and rotates it to `|n⟩`
//! on detection. The crate provides the master-equation solver, energy flows,
//! the quantum-jump unraveling and noise estimators, without `std`.

#![no_std]

extern crate alloc;

pub mod energetics;
pub mod error;
pub mod lindblad;
pub mod mat2;
pub mod noise;
pub mod qubit;
pub mod real;
pub mod rng;
pub mod system;
pub mod trajectory;

pub use error::{Error, Result};
pub use mat2::{Mat2, C64};
pub use qubit::{Bath, BathSpec, BlochState, DensityMatrix, MonitorConfig, QubitParams, Rates};
pub use system::System;
