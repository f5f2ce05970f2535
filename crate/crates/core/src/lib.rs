//! Dissipative Hamiltonian dynamics built from gap vectors and likelihoods.
//!
//! A Hamiltonian system on the flat phase space `ℝⁿ × ℝⁿ` is perturbed by a
//! gap vector `η = ż − XH`. Which gap vectors are admissible is decided by a
//! tempered likelihood `π = exp(−I)`: a curve is a solution when
//! `I(z, ż, η) = 0` along it. Equivalently, the symplectic bipotential
//! `b_ω = I + ω` is saturated.
//!
//! The crate is `no_std` (it needs `alloc`) and split into:
//!
//! * [`phase_space`]: points, pairings, the symplectic form and Hamiltonians.
//! * [`convex_kernel`]: polars and subgradients relative to a duality,
//!   separable bipotentials and brute-force grid oracles.
//! * [`likelihood`]: dissipation models, temperedness, axiom and dominance checks.
//! * [`dynamics`]: per-step solvers and the scenario integrator.
//! * [`diagnostics`]: dissipation functional, energy balance, dissipation
//!   inequalities and the information-gap functional.
#![cfg_attr(not(test), no_std)]
#![deny(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod convex_kernel;
pub mod diagnostics;
pub mod dynamics;
mod error;
mod ext_real;
pub mod likelihood;
pub(crate) mod math;
pub mod phase_space;

pub use error::{Error, Result, Witness};
pub use ext_real::ExtReal;
pub use likelihood::DissipationModel;
pub use phase_space::{Duality, DualityKind, Hamiltonian, PhasePoint};
