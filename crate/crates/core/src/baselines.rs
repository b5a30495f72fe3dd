//! Comparison filters: a flat-space EKF on `(p, v)` fed with reconstructed
//! positions, and the equivariant filter with the covariance transport
//! switched off.

use nalgebra::{DMatrix, DVector, Matrix3, Matrix3x6, Matrix6, Matrix6x3, Vector3, Vector6};

use crate::error::{Error, Result};
use crate::filter::{predict, reset, update, ConcentratedGaussian, EquivariantSystem, ResetMode};
use crate::kinematics::tangent_basis;
use crate::linalg::is_spd;
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct EkfBelief<T: Real> {
    /// `(p, v)` stacked.
    pub mean: Vector6<T>,
    pub covariance: Matrix6<T>,
}

impl<T: Real> EkfBelief<T> {
    pub fn new(mean: Vector6<T>, covariance: Matrix6<T>) -> Self {
        Self { mean, covariance }
    }

    pub fn position(&self) -> Vector3<T> {
        self.mean.fixed_rows::<3>(0).into_owned()
    }

    pub fn velocity(&self) -> Vector3<T> {
        self.mean.fixed_rows::<3>(3).into_owned()
    }
}

/// `[[I, tI], [0, I]]`.
pub fn transition_matrix<T: Real>(t: T) -> Matrix6<T> {
    let mut f = Matrix6::identity();
    f.fixed_view_mut::<3, 3>(0, 3).copy_from(&(Matrix3::identity() * t));
    f
}

fn symmetric6<T: Real>(m: &Matrix6<T>) -> Matrix6<T> {
    (m + m.transpose()) * T::lit(0.5)
}

/// Exact constant-acceleration propagation of the mean and `FΣFᵀ + P`.
pub fn ekf_predict<T: Real>(
    belief: &EkfBelief<T>,
    accel: &Vector3<T>,
    t: T,
    process_noise: &Matrix6<T>,
) -> Result<EkfBelief<T>> {
    if !(t > T::zero()) {
        return Err(Error::Degenerate("time step must be positive"));
    }
    let f = transition_matrix(t);
    let mut g = Vector6::zeros();
    g.fixed_rows_mut::<3>(0).copy_from(&(accel * (T::lit(0.5) * t * t)));
    g.fixed_rows_mut::<3>(3).copy_from(&(accel * t));
    Ok(EkfBelief {
        mean: f * belief.mean + g,
        covariance: symmetric6(&(f * belief.covariance * f.transpose() + process_noise)),
    })
}

/// First-order covariance of `y₂ y₁` for isotropic bearing noise `σ_b`
/// (radians per tangent axis) and range noise `σ_r`:
/// `y₂² σ_b² (e₁e₁ᵀ + e₂e₂ᵀ) + σ_r² y₁y₁ᵀ` with `(e₁, e₂, y₁)` a frame
/// from [`tangent_basis`].
pub fn reconstructed_position_covariance<T: Real>(
    bearing: &Vector3<T>,
    range: T,
    sigma_bearing: T,
    sigma_range: T,
) -> Matrix3<T> {
    let (e1, e2) = tangent_basis(bearing);
    let tangent = e1 * e1.transpose() + e2 * e2.transpose();
    tangent * (range * range * sigma_bearing * sigma_bearing)
        + bearing * bearing.transpose() * (sigma_range * sigma_range)
}

/// Kalman update with the reconstructed position `y₂ y₁` and `H = [I 0]`.
/// Uses the Joseph form for the covariance.
pub fn ekf_update_position<T: Real>(
    belief: &EkfBelief<T>,
    bearing: &Vector3<T>,
    range: T,
    sigma_bearing: T,
    sigma_range: T,
) -> Result<EkfBelief<T>> {
    let q = reconstructed_position_covariance(bearing, range, sigma_bearing, sigma_range);
    let mut h = Matrix3x6::<T>::zeros();
    h.fixed_view_mut::<3, 3>(0, 0).copy_from(&Matrix3::identity());
    let s: Matrix3<T> = h * belief.covariance * h.transpose() + q;
    let s = (s + s.transpose()) * T::lit(0.5);
    let chol = s
        .cholesky()
        .ok_or(Error::NotPositiveDefinite("innovation covariance"))?;
    let gain: Matrix6x3<T> = chol.solve(&(h * belief.covariance)).transpose();
    let innovation: Vector3<T> = bearing * range - h * belief.mean;
    let i_kh: Matrix6<T> = Matrix6::identity() - gain * h;
    Ok(EkfBelief {
        mean: belief.mean + gain * innovation,
        covariance: symmetric6(
            &(i_kh * belief.covariance * i_kh.transpose() + gain * q * gain.transpose()),
        ),
    })
}

/// One predict/update/reset cycle of the equivariant filter that moves the
/// base point by `exp(Δ)` but keeps the fused covariance untransported.
#[allow(clippy::too_many_arguments)]
pub fn eqf_no_reset_step<T: Real, S: EquivariantSystem<T>>(
    system: &S,
    belief: &ConcentratedGaussian<T, S::Group>,
    u: &S::Input,
    y: &DVector<T>,
    process_noise: &DMatrix<T>,
    measurement_cov: &DMatrix<T>,
    chart_radius: T,
) -> Result<ConcentratedGaussian<T, S::Group>> {
    let predicted = predict(system, belief, u, process_noise)?;
    let fused = update(system, &predicted.belief, y, measurement_cov)?;
    let out = reset(system, &fused, ResetMode::BasePointOnly, chart_radius)?;
    Ok(out.belief)
}

/// `true` when the belief covariance is SPD.
pub fn ekf_is_consistent<T: Real>(belief: &EkfBelief<T>) -> bool {
    is_spd(&DMatrix::from_fn(6, 6, |i, j| belief.covariance[(i, j)]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::{f_discrete, KinematicInput, KinematicState};
    use approx::assert_relative_eq;

    fn belief() -> EkfBelief<f64> {
        EkfBelief::new(
            Vector6::new(1.0, -2.0, 40.0, 0.5, 0.0, -0.25),
            Matrix6::identity() * 4.0,
        )
    }

    #[test]
    fn predict_at_rest() {
        let b = EkfBelief::new(Vector6::new(0.0, 0.0, 50.0, 0.0, 0.0, 0.0), Matrix6::zeros());
        let out = ekf_predict(&b, &Vector3::zeros(), 0.01, &Matrix6::zeros()).unwrap();
        assert_eq!(out.mean, b.mean);
        assert_eq!(out.covariance, Matrix6::zeros());
    }

    #[test]
    fn predict_matches_kinematics() {
        let b = belief();
        let a = Vector3::new(0.3, 1.0, -0.7);
        let out = ekf_predict(&b, &a, 0.01, &Matrix6::zeros()).unwrap();
        let xi = KinematicState::from_vector(&b.mean);
        let expect = f_discrete(&xi, &KinematicInput::from_accel(a), 0.01);
        assert_relative_eq!(out.mean, expect.to_vector(), epsilon = 1e-12);
        assert!(ekf_predict(&b, &a, 0.0, &Matrix6::zeros()).is_err());
    }

    #[test]
    fn zero_innovation_shrinks_covariance() {
        let b = belief();
        let p = b.position();
        let out = ekf_update_position(&b, &p.normalize(), p.norm(), 0.01, 1.0).unwrap();
        assert_relative_eq!(out.mean, b.mean, epsilon = 1e-12);
        let diff = b.covariance - out.covariance;
        assert!(diff.symmetric_eigenvalues().min() > -1e-12);
        assert!(out.covariance.trace() < b.covariance.trace());
    }

    #[test]
    fn position_covariance_without_bearing_noise() {
        let y = Vector3::new(1.0, 2.0, 2.0) / 3.0;
        let q = reconstructed_position_covariance(&y, 30.0, 0.0, 1.5);
        assert_relative_eq!(q, y * y.transpose() * 2.25, epsilon = 1e-15);
        assert_relative_eq!(q * y, y * 2.25, epsilon = 1e-14);
    }

    #[test]
    fn position_covariance_is_spd() {
        let y = Vector3::new(-0.2, 0.9, 0.1).normalize();
        let q = reconstructed_position_covariance(&y, 50.0, 0.0175, 1.0);
        assert!(q.cholesky().is_some());
    }

    #[test]
    fn singular_innovation_rejected() {
        let b = EkfBelief::new(Vector6::new(0.0, 0.0, 50.0, 0.0, 0.0, 0.0), Matrix6::zeros());
        let out = ekf_update_position(&b, &Vector3::z(), 50.0, 0.0, 0.0);
        assert!(matches!(out, Err(Error::NotPositiveDefinite(_))));
    }
}
