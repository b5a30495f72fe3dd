//! Predict, update and reset as pure functions of the belief.

use nalgebra::{DMatrix, DVector};

use super::gaussian::ConcentratedGaussian;
use super::system::{left_transport_matrix, origin_input, reset_correction, transport_matrix, EquivariantSystem};
use crate::error::{Error, Result};
use crate::lie::LieGroup;
use crate::linalg::{is_spd, spd_inverse, symmetrize};
use crate::scalar::Real;

/// How the reset step treats the covariance once the base point moves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ResetMode {
    /// Parallel transport along `exp(tΔ)` for the Cartan-Schouten (0)-connection,
    /// `Ad_{exp(Δ/2)}` in the error's own trivialization.
    #[default]
    ParallelTransport,
    /// The transport congruence with `Ad_{exp(−Δ/2)}` (left trivialization).
    LeftTrivialized,
    /// Move the base point only and keep the fused covariance as is.
    BasePointOnly,
}

/// Output of [`predict`]: the propagated belief and the state matrix used.
#[derive(Clone, Debug)]
pub struct Prediction<T: Real, G> {
    pub belief: ConcentratedGaussian<T, G>,
    pub state_matrix: DMatrix<T>,
}

/// Output of [`reset`]: the re-centred belief and the algebra correction applied.
#[derive(Clone, Debug)]
pub struct Reset<T: Real, G> {
    pub belief: ConcentratedGaussian<T, G>,
    pub correction: DVector<T>,
}

/// Propagates a zero-mean belief through one input.
///
/// `X̂₊ = X̂ Λ(φ_{ξ°}(X̂), u)` and `Σ₊ = AΣAᵀ + P` with `A` evaluated at
/// the origin input `ψ(X̂⁻¹, u)`.
pub fn predict<T: Real, S: EquivariantSystem<T> + ?Sized>(
    system: &S,
    belief: &ConcentratedGaussian<T, S::Group>,
    u: &S::Input,
    process_noise: &DMatrix<T>,
) -> Result<Prediction<T, S::Group>> {
    if !belief.is_reset() {
        return Err(Error::UnresetBelief);
    }
    if !is_spd(belief.covariance()) {
        return Err(Error::NotPositiveDefinite("prior covariance"));
    }
    let m = belief.dim();
    if process_noise.shape() != (m, m) {
        return Err(Error::Dimension {
            what: "process noise",
            expected: m,
            actual: process_noise.nrows(),
        });
    }
    let xhat = belief.reference();
    let estimate = system.act_state(xhat, system.origin());
    let next_ref = xhat.compose(&system.lift(&estimate, u)?);
    let a = system.state_matrix(&origin_input(system, xhat, u))?;
    let cov = symmetrize(&(&a * belief.covariance() * a.transpose() + process_noise));
    Ok(Prediction {
        belief: ConcentratedGaussian::from_parts(next_ref, DVector::zeros(m), cov),
        state_matrix: a,
    })
}

/// Gaussian fusion in information form:
/// `Σ⋄ = (Σ⁻¹ + CᵀQ⁻¹C)⁻¹`, `μ = Σ⋄CᵀQ⁻¹ỹ`. The reference is unchanged.
pub fn fuse<T: Real, G: LieGroup<T>>(
    belief: &ConcentratedGaussian<T, G>,
    innovation: &DVector<T>,
    measurement_cov: &DMatrix<T>,
    output_matrix: &DMatrix<T>,
) -> Result<ConcentratedGaussian<T, G>> {
    let m = belief.dim();
    let n = innovation.len();
    if output_matrix.shape() != (n, m) {
        return Err(Error::Dimension {
            what: "output matrix rows",
            expected: n,
            actual: output_matrix.nrows(),
        });
    }
    if measurement_cov.shape() != (n, n) {
        return Err(Error::Dimension {
            what: "measurement covariance",
            expected: n,
            actual: measurement_cov.nrows(),
        });
    }
    let q_inv = spd_inverse(measurement_cov, "measurement covariance")?;
    let info = spd_inverse(belief.covariance(), "prior covariance")?;
    let ct_qinv = output_matrix.transpose() * q_inv;
    let fused_info = symmetrize(&(info + &ct_qinv * output_matrix));
    let cov = spd_inverse(&fused_info, "fused information")?;
    let mean = &cov * (&ct_qinv * innovation);
    Ok(ConcentratedGaussian::from_parts(
        belief.reference().clone(),
        belief.mean() + mean,
        cov,
    ))
}

/// Fuses a measurement `y` with noise covariance `Q` into a zero-mean belief.
pub fn update<T: Real, S: EquivariantSystem<T> + ?Sized>(
    system: &S,
    belief: &ConcentratedGaussian<T, S::Group>,
    y: &DVector<T>,
    measurement_cov: &DMatrix<T>,
) -> Result<ConcentratedGaussian<T, S::Group>> {
    if !belief.is_reset() {
        return Err(Error::UnresetBelief);
    }
    let xhat = belief.reference();
    let predicted = system.output(&system.act_state(xhat, system.origin()))?;
    if predicted.len() != y.len() {
        return Err(Error::Dimension {
            what: "measurement",
            expected: predicted.len(),
            actual: y.len(),
        });
    }
    let c = system.output_matrix(xhat)?;
    fuse(belief, &(y - predicted), measurement_cov, &c)
}

/// Moves the reference to absorb the local mean.
///
/// `Δ = Dφ† DΘ⁻¹ μ`, `X̂₊ = exp(Δ) X̂`, and the covariance is carried along
/// `exp(tΔ)` as selected by `mode`. Rejects means whose norm
/// exceeds `chart_radius`.
pub fn reset<T: Real, S: EquivariantSystem<T> + ?Sized>(
    system: &S,
    belief: &ConcentratedGaussian<T, S::Group>,
    mode: ResetMode,
    chart_radius: T,
) -> Result<Reset<T, S::Group>> {
    let mean = belief.mean();
    let norm = mean.norm();
    if !(norm <= chart_radius) {
        return Err(Error::ChartDomain {
            norm: norm.as_f64(),
            radius: chart_radius.as_f64(),
        });
    }
    let m = belief.dim();
    if belief.is_reset() {
        return Ok(Reset {
            belief: belief.clone(),
            correction: DVector::zeros(S::Group::DIM),
        });
    }
    let delta = reset_correction(system, mean);
    let reference = S::Group::exp_coords(&delta).compose(belief.reference());
    let covariance = match mode {
        ResetMode::ParallelTransport | ResetMode::LeftTrivialized => {
            let t = if mode == ResetMode::ParallelTransport {
                transport_matrix(system, &delta)?
            } else {
                left_transport_matrix(system, &delta)?
            };
            symmetrize(&(&t * belief.covariance() * t.transpose()))
        }
        ResetMode::BasePointOnly => belief.covariance().clone(),
    };
    Ok(Reset {
        belief: ConcentratedGaussian::from_parts(reference, DVector::zeros(m), covariance),
        correction: delta,
    })
}

/// Normalized consistency statistic `εᵀΣ⁻¹ε / m`.
pub fn filter_energy<T: Real>(error: &DVector<T>, covariance: &DMatrix<T>) -> Result<T> {
    let chol = symmetrize(covariance)
        .cholesky()
        .ok_or(Error::NotPositiveDefinite("covariance"))?;
    let whitened = chol.solve(error);
    Ok(error.dot(&whitened) / T::lit(error.len() as f64))
}
