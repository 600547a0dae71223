//! Collective-coordinate master equations for a two-level emitter that is
//! coupled to a structured vibrational (phonon) environment and to the
//! electromagnetic field.
//!
//! The phonon bath is mapped onto a single collective coordinate (CC) that is
//! absorbed into an augmented emitter+CC system. The electromagnetic
//! dissipator is then built either in the eigenbasis of that augmented system
//! (non-additive) or from the bare emitter alone (additive Lindblad form).
//!
//! Units: energies and rates are carried internally in cm⁻¹ (ħ = 1, angular
//! frequency ω = 2πc·ν̃); times are converted from ps at the boundary. See
//! [`params::units`].

// Negated comparisons are deliberate: they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cc;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod liouvillian;
pub mod operators;
pub mod oracles;
pub mod params;
pub mod quadrature;
pub mod report;
pub mod sector;
pub mod spectral;
pub mod svg;
pub mod validation;

pub use error::{Error, Result};
pub use params::ModelParams;

/// Complex scalar used for every operator entry.
pub type C64 = nalgebra::Complex<f64>;
