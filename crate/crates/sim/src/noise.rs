//! Sensor corruption.

use eqf_core::kinematics::tangent_basis;
use eqf_core::lie::SO3;
use nalgebra::Vector3;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::config::SimConfig;
use crate::truth::Trajectory;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Measurement {
    /// Accelerometer reading over the interval ending at this sample.
    pub accel: Vector3<f64>,
    pub bearing: Vector3<f64>,
    pub range: f64,
}

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Rotates `bearing` by an `N(0, σ²)` angle about a uniformly random axis
/// orthogonal to it.
pub fn perturb_bearing<R: Rng + ?Sized>(rng: &mut R, bearing: &Vector3<f64>, sigma: f64) -> Vector3<f64> {
    let (e1, e2) = tangent_basis(bearing);
    let heading = rng.random_range(0.0..std::f64::consts::TAU);
    let axis = e1 * heading.cos() + e2 * heading.sin();
    let angle = sigma * gaussian(rng);
    SO3::exp(&(axis * angle)).act(bearing)
}

/// One measurement per sample interval `k = 1..=N`. Accelerometer noise is
/// drawn once per interval and held over it.
pub fn corrupt_measurements<R: Rng + ?Sized>(
    truth: &Trajectory,
    cfg: &SimConfig,
    rng: &mut R,
) -> Vec<Measurement> {
    let sigma_b = cfg.sigma_bearing_deg.to_radians();
    truth
        .mean_accel
        .iter()
        .zip(&truth.samples[1..])
        .map(|(a, s)| {
            let noise = Vector3::from_fn(|_, _| cfg.sigma_accel * gaussian(rng));
            let y = s.position.normalize();
            let bearing = perturb_bearing(rng, &y, sigma_b);
            let range = s.position.norm() + cfg.sigma_range * gaussian(rng);
            Measurement {
                accel: a + noise,
                bearing,
                range,
            }
        })
        .collect()
}
