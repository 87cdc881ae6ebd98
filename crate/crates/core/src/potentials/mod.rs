//! Modified-Helmholtz ball potentials, the energy-type integral `J(τ)` and
//! its large-τ limits.

pub mod asymptotic;
pub mod jint;
pub mod yukawa;

pub use asymptotic::{asymptotic_rhs, AsymptoticInputs, AsymptoticKind, ReflectorTerm};
pub use jint::{j_boundary, j_kernel_expansion, j_volume, volume_kernel, JEvaluation, JMethod, JProblem};
pub use yukawa::{ball_ball_integral, ball_ball_integral_log, m_factor, m_hat, YukawaBallField};
