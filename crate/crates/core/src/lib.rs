//! Quantum Brownian rotation of rigid rotors.
//!
//! The crate builds Lindblad master equations for planar and linear rotors in
//! contact with a thermal bath, propagates states to equilibrium, computes the
//! closed-form and numerical stationary states, and provides the classical
//! Fokker-Planck/SDE reference dynamics.
//!
//! Units throughout: `hbar = I = k_B = 1`. The bath enters through the
//! dimensionless temperature `xi = 2 I k_B T / hbar^2` (so `kT = xi / 2`) and
//! the friction rate `gamma`; the momentum diffusion constant is
//! `D = kT gamma I = xi gamma / 2`.
//!
//! Modules:
//! - [`angular`]: `|l m>` basis, 3-j symbols, `J` and orientation matrices.
//! - [`tensors`]: inertia, diffusion, friction tensors and Lindblad weights.
//! - [`lindblad`]: generators, propagation, stationary states, observables.
//! - [`linear`]: the linear rotor and its thermalization experiment.
//! - [`planar`]: the planar rotor, its Wigner function, and the two-blob experiment.
//! - [`classical`]: stochastic rigid-body dynamics and ensemble moments.
//! - [`runner`]: configuration, experiment drivers, and output files.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod angular;
pub mod classical;
pub mod error;
pub mod lindblad;
pub mod linear;
pub mod operator;
pub mod planar;
pub mod runner;
pub mod special;
pub mod tensors;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use error::{Error, Result};
pub use lindblad::{DensityMatrix, GeneratorMap};
pub use operator::{Basis, OperatorMatrix, SparseOperator, C64};

/// Which temperature expansion of the dissipator to use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// Full Lindblad operators, including the terms of order `1/T`.
    #[default]
    #[serde(rename = "full")]
    Full,
    /// Expansion truncated after the temperature-independent friction term.
    #[serde(rename = "high_T")]
    HighT,
}

impl Variant {
    pub fn includes_inverse_temperature_terms(self) -> bool {
        matches!(self, Variant::Full)
    }

    pub fn from_flag(include_1overt_terms: bool) -> Self {
        if include_1overt_terms {
            Variant::Full
        } else {
            Variant::HighT
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Full => "full",
            Variant::HighT => "high_T",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Variant::Full),
            "high_T" | "high_t" | "high-T" | "high-t" => Ok(Variant::HighT),
            other => Err(Error::InvalidArgument(format!(
                "unknown variant {other:?}; expected full or high_T"
            ))),
        }
    }
}
