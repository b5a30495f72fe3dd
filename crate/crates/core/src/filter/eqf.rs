use nalgebra::{DMatrix, DVector};

use super::gaussian::ConcentratedGaussian;
use super::steps::{self, ResetMode};
use super::system::{output_matrix_numeric, state_matrix_numeric, EquivariantSystem};
use crate::error::{Error, Result};
use crate::lie::LieGroup;
use crate::linalg::relative_error;
use crate::scalar::Real;

/// Finite-difference cross-check applied to `A` and `C` on every step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JacobianCheck<T> {
    pub step: T,
    pub relative_tolerance: T,
}

impl<T: Real> Default for JacobianCheck<T> {
    fn default() -> Self {
        Self {
            step: T::lit(1e-6),
            relative_tolerance: T::lit(1e-5),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FilterOptions<T> {
    pub reset: ResetMode,
    /// Largest local-mean norm accepted by the reset step.
    pub chart_radius: T,
    pub jacobian_check: Option<JacobianCheck<T>>,
}

impl<T: Real> Default for FilterOptions<T> {
    fn default() -> Self {
        Self {
            reset: ResetMode::ParallelTransport,
            chart_radius: T::one(),
            jacobian_check: None,
        }
    }
}

/// Diagnostics from one measurement step.
#[derive(Clone, Debug)]
pub struct UpdateReport<T: Real> {
    /// Local mean produced by the fusion, before the reset.
    pub local_mean: DVector<T>,
    /// Algebra correction `Δ` applied by the reset.
    pub correction: DVector<T>,
}

/// Discrete-time equivariant filter driving [`steps`] for a fixed system.
#[derive(Clone, Debug)]
pub struct EquivariantFilter<T: Real, S: EquivariantSystem<T>> {
    system: S,
    belief: ConcentratedGaussian<T, S::Group>,
    process_noise: DMatrix<T>,
    options: FilterOptions<T>,
}

impl<T: Real, S: EquivariantSystem<T>> EquivariantFilter<T, S> {
    /// Starts at `X̂ = id` with the given chart-coordinate covariance.
    pub fn new(
        system: S,
        initial_covariance: DMatrix<T>,
        process_noise: DMatrix<T>,
        options: FilterOptions<T>,
    ) -> Result<Self> {
        let belief = ConcentratedGaussian::new(S::Group::identity(), initial_covariance)?;
        let m = system.state_dim();
        if belief.dim() != m {
            return Err(Error::Dimension {
                what: "initial covariance",
                expected: m,
                actual: belief.dim(),
            });
        }
        Ok(Self {
            system,
            belief,
            process_noise,
            options,
        })
    }

    pub fn system(&self) -> &S {
        &self.system
    }

    pub fn belief(&self) -> &ConcentratedGaussian<T, S::Group> {
        &self.belief
    }

    pub fn options(&self) -> &FilterOptions<T> {
        &self.options
    }

    /// State estimate `φ(X̂, ξ°)`.
    pub fn estimate(&self) -> S::State {
        self.system
            .act_state(self.belief.reference(), self.system.origin())
    }

    /// Chart coordinates of the true state relative to the estimate.
    pub fn local_error(&self, truth: &S::State) -> Result<DVector<T>> {
        let e = super::system::equivariant_error(&self.system, self.belief.reference(), truth);
        self.system.chart_inv(&e)
    }

    /// Filter energy of the true state under the current belief.
    pub fn energy(&self, truth: &S::State) -> Result<T> {
        steps::filter_energy(&self.local_error(truth)?, self.belief.covariance())
    }

    pub fn predict(&mut self, u: &S::Input) -> Result<()> {
        let out = steps::predict(&self.system, &self.belief, u, &self.process_noise)?;
        if let Some(check) = self.options.jacobian_check {
            let u0 = super::system::origin_input(&self.system, self.belief.reference(), u);
            let fd = state_matrix_numeric(&self.system, &u0, check.step)?;
            cross_check("state", &out.state_matrix, &fd, check.relative_tolerance)?;
        }
        self.belief = out.belief;
        Ok(())
    }

    /// Fuses `y` and resets according to the configured mode.
    pub fn update(&mut self, y: &DVector<T>, measurement_cov: &DMatrix<T>) -> Result<UpdateReport<T>> {
        if let Some(check) = self.options.jacobian_check {
            let xhat = self.belief.reference();
            let analytic = self.system.output_matrix(xhat)?;
            let fd = output_matrix_numeric(&self.system, xhat, check.step)?;
            cross_check("output", &analytic, &fd, check.relative_tolerance)?;
        }
        let fused = steps::update(&self.system, &self.belief, y, measurement_cov)?;
        let local_mean = fused.mean().clone();
        let out = steps::reset(
            &self.system,
            &fused,
            self.options.reset,
            self.options.chart_radius,
        )?;
        self.belief = out.belief;
        Ok(UpdateReport {
            local_mean,
            correction: out.correction,
        })
    }
}

fn cross_check<T: Real>(
    which: &'static str,
    analytic: &DMatrix<T>,
    numeric: &DMatrix<T>,
    tol: T,
) -> Result<()> {
    let rel = relative_error(analytic, numeric);
    if rel > tol {
        Err(Error::JacobianMismatch {
            which,
            relative_error: rel.as_f64(),
        })
    } else {
        Ok(())
    }
}
