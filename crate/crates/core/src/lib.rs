//! Simulation of optically driven CPHASE gates between electron-spin qubits
//! in two coupled quantum dots.
//!
//! The nine-level model ([`system`]) is driven by a Gaussian or square
//! laser pulse ([`pulses`]) and decoheres through spontaneous emission and
//! acoustic phonons ([`lindblad`], [`phonons`]). [`evolve`] integrates the
//! master equation and runs gate experiments; [`dressed`] holds the
//! closed-form dressed-state analysis used for estimates and cross-checks.
//!
//! Energies are given in meV at the API boundary and converted to angular
//! frequencies in ps⁻¹ internally ([`units`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dressed;
pub mod error;
pub mod evolve;
pub mod exec;
pub mod lindblad;
pub mod phonons;
pub mod pulses;
pub mod quadrature;
pub mod system;
pub mod units;

pub use error::{Error, Result};
pub use exec::Exec;
pub use system::{DensityMatrix, SystemParams};
