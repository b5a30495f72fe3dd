//! Discrete-time equivariant filter for systems on homogeneous spaces.
//!
//! The observer state is a reference element `X̂` of the symmetry group; the
//! belief about the true state is a concentrated Gaussian in a chart centred
//! at a fixed origin `ξ°`. Each measurement step is split into a Gaussian
//! fusion that produces a local mean `μ` and a reset that moves `X̂` along
//! `exp(tΔ)` and transports the covariance with it.

mod eqf;
mod gaussian;
mod steps;
mod system;

pub use eqf::{EquivariantFilter, FilterOptions, JacobianCheck, UpdateReport};
pub use gaussian::{ConcentratedGaussian, LinearizedModel};
pub use steps::{filter_energy, fuse, predict, reset, update, Prediction, Reset, ResetMode};
pub use system::{
    equivariant_error, error_dynamics_step, origin_input, output_matrix_numeric,
    chart_adjoint, left_transport_matrix, reset_correction, state_matrix_factored,
    state_matrix_numeric, transport_matrix,
    EquivariantSystem, FD_STEP,
};
