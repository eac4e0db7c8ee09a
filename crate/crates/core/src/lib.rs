//! Mean-field spin-1 Potts model with a linear field `x` and a nematic
//! field `y`.
//!
//! * [`model`]: moments, probabilities, free energy and equations of state.
//! * [`exact`]: finite-N partition function by occupation-class enumeration.
//! * [`eos`]: branches of the equations of state, equilibrium selection,
//!   sweeps and catastrophe onset.
//! * [`singularity`]: closed-form fold and cusp loci.
//! * [`mc`]: Metropolis cross-check.

pub mod eos;
pub mod error;
pub mod exact;
pub mod mc;
pub mod model;
pub mod numeric;
pub mod singularity;

pub use error::{PottsError, Result};
pub use model::{ModelSpec, MomentVector, ProbabilityVector, ThermoPoint};
