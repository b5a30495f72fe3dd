//! Discrete-time equivariant filtering on homogeneous spaces.
//!
//! - [`lie`]: `SO(3)` and the similarity group `SO(3) × MR(1) ⋉ R³`.
//! - [`filter`]: the generic filter (predict, Gaussian-fusion update,
//!   parallel-transport reset) over any [`filter::EquivariantSystem`].
//! - [`kinematics`]: second-order kinematics in R³ with bearing and range.
//! - [`baselines`]: flat EKF and the filter without covariance transport.
//!
//! Everything is generic over the scalar (`f32` or `f64`); the aliases below
//! fix `f64`.

pub mod baselines;
pub mod error;
pub mod filter;
pub mod kinematics;
pub mod lie;
pub mod linalg;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Sim3d = lie::Sim3<f64>;
pub type Sim3f = lie::Sim3<f32>;
pub type SO3d = lie::SO3<f64>;
pub type KinematicStated = kinematics::KinematicState<f64>;
pub type KinematicInputd = kinematics::KinematicInput<f64>;
pub type Kinematicsd = kinematics::SecondOrderKinematics<f64>;
pub type KinematicBeliefd = filter::ConcentratedGaussian<f64, Sim3d>;
pub type KinematicFilterd = filter::EquivariantFilter<f64, Kinematicsd>;
pub type EkfBeliefd = baselines::EkfBelief<f64>;
