use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lie::LieGroup;
use crate::linalg::is_spd;
use crate::scalar::Real;

/// Extended concentrated Gaussian: `ξ = φ_X̂(Θ⁻¹(ε))` with `ε ~ N(μ, Σ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConcentratedGaussian<T: Real, G> {
    reference: G,
    mean: DVector<T>,
    covariance: DMatrix<T>,
}

impl<T: Real, G: LieGroup<T>> ConcentratedGaussian<T, G> {
    /// Zero-mean belief. The covariance must be symmetric positive-definite.
    pub fn new(reference: G, covariance: DMatrix<T>) -> Result<Self> {
        let m = covariance.nrows();
        Self::with_mean(reference, DVector::zeros(m), covariance)
    }

    pub fn with_mean(reference: G, mean: DVector<T>, covariance: DMatrix<T>) -> Result<Self> {
        if mean.len() != covariance.nrows() {
            return Err(Error::Dimension {
                what: "local mean",
                expected: covariance.nrows(),
                actual: mean.len(),
            });
        }
        if !is_spd(&covariance) {
            return Err(Error::NotPositiveDefinite("belief covariance"));
        }
        Ok(Self {
            reference,
            mean,
            covariance,
        })
    }

    /// Internal constructor for values the filter steps have already validated.
    pub(crate) fn from_parts(reference: G, mean: DVector<T>, covariance: DMatrix<T>) -> Self {
        Self {
            reference,
            mean,
            covariance,
        }
    }

    #[inline]
    pub fn reference(&self) -> &G {
        &self.reference
    }

    #[inline]
    pub fn mean(&self) -> &DVector<T> {
        &self.mean
    }

    #[inline]
    pub fn covariance(&self) -> &DMatrix<T> {
        &self.covariance
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn is_reset(&self) -> bool {
        self.mean.iter().all(|x| *x == T::zero())
    }
}

/// Linearized error dynamics `ε₊ ≈ Aε` and output residual `ỹ ≈ Cε`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearizedModel<T: Real> {
    pub state: DMatrix<T>,
    pub output: DMatrix<T>,
}
