use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use super::{skew, unskew, LieGroup};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Rotation group SO(3), stored as an orthonormal matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SO3<T: Real> {
    matrix: Matrix3<T>,
}

/// Orthonormality drift above which a rotation is projected back onto SO(3).
pub(crate) fn drift_tolerance<T: Real>() -> T {
    T::lit(1e-9).max(T::default_epsilon() * T::lit(100.0))
}

impl<T: Real> SO3<T> {
    pub fn identity() -> Self {
        Self {
            matrix: Matrix3::identity(),
        }
    }

    /// Wraps a matrix without checking it. Callers guarantee orthonormality.
    pub fn from_matrix_unchecked(matrix: Matrix3<T>) -> Self {
        Self { matrix }
    }

    /// Projects an arbitrary invertible matrix onto the nearest rotation.
    pub fn from_matrix(matrix: Matrix3<T>) -> Self {
        Self {
            matrix: project_to_rotation(&matrix),
        }
    }

    #[inline]
    pub fn matrix(&self) -> &Matrix3<T> {
        &self.matrix
    }

    /// Frobenius norm of `RᵀR − I`.
    pub fn orthonormality_error(&self) -> T {
        (self.matrix.transpose() * self.matrix - Matrix3::identity()).norm()
    }

    /// Rodrigues formula.
    pub fn exp(omega: &Vector3<T>) -> Self {
        let theta2 = omega.norm_squared();
        let theta = theta2.sqrt();
        let (a, b) = if theta < T::lit(1e-3) {
            (
                T::one() - theta2 / T::lit(6.0) + theta2 * theta2 / T::lit(120.0),
                T::lit(0.5) - theta2 / T::lit(24.0) + theta2 * theta2 / T::lit(720.0),
            )
        } else {
            (theta.sin() / theta, (T::one() - theta.cos()) / theta2)
        };
        let k = skew(omega);
        Self {
            matrix: Matrix3::identity() + k * a + k * k * b,
        }
    }

    /// Rotation vector of this rotation. Fails when the angle is (numerically) pi.
    pub fn log(&self) -> Result<Vector3<T>> {
        let r = &self.matrix;
        let cos = ((r.trace() - T::one()) * T::lit(0.5)).clamp(-T::one(), T::one());
        let u = unskew(r);
        let sin = u.norm();
        let theta = sin.atan2(cos);

        if theta < T::lit(1e-3) {
            let t2 = theta * theta;
            return Ok(u * (T::one() + t2 / T::lit(6.0) + t2 * t2 * T::lit(7.0 / 360.0)));
        }
        let pi = T::pi();
        if pi - theta < T::default_epsilon().sqrt() {
            return Err(Error::LogOutOfDomain {
                angle: theta.as_f64(),
            });
        }
        if cos > T::lit(-0.5) {
            return Ok(u * (theta / sin));
        }
        // Near pi the antisymmetric part is small; read the axis from the symmetric part.
        let sym = (r + r.transpose()) * T::lit(0.5) - Matrix3::identity() * cos;
        let mut best = 0;
        for i in 1..3 {
            if sym[(i, i)] > sym[(best, best)] {
                best = i;
            }
        }
        let mut axis: Vector3<T> = sym.column(best).into_owned();
        axis /= axis.norm();
        if axis.dot(&u) < T::zero() {
            axis = -axis;
        }
        Ok(axis * theta)
    }

    pub fn compose(&self, rhs: &Self) -> Self {
        let m = self.matrix * rhs.matrix;
        let out = Self { matrix: m };
        if out.orthonormality_error() > drift_tolerance() {
            Self::from_matrix(m)
        } else {
            out
        }
    }

    pub fn inverse(&self) -> Self {
        Self {
            matrix: self.matrix.transpose(),
        }
    }

    /// Rotates a vector.
    #[inline]
    pub fn act(&self, v: &Vector3<T>) -> Vector3<T> {
        self.matrix * v
    }

    /// The adjoint of SO(3) in rotation-vector coordinates is the rotation itself.
    pub fn adjoint(&self) -> Matrix3<T> {
        self.matrix
    }
}

/// Polar projection `U Vᵀ` with the determinant forced to +1.
pub(crate) fn project_to_rotation<T: Real>(m: &Matrix3<T>) -> Matrix3<T> {
    let svd = m.svd(true, true);
    let mut u = svd.u.expect("svd computed with u");
    let v_t = svd.v_t.expect("svd computed with v_t");
    if (u * v_t).determinant() < T::zero() {
        let mut col = u.column_mut(2);
        col.neg_mut();
    }
    u * v_t
}

impl<T: Real> LieGroup<T> for SO3<T> {
    const DIM: usize = 3;

    fn identity() -> Self {
        SO3::identity()
    }

    fn compose(&self, rhs: &Self) -> Self {
        SO3::compose(self, rhs)
    }

    fn inverse(&self) -> Self {
        SO3::inverse(self)
    }

    fn exp_coords(v: &DVector<T>) -> Self {
        assert_eq!(v.len(), 3, "so(3) coordinates have length 3");
        SO3::exp(&Vector3::new(v[0], v[1], v[2]))
    }

    fn log_coords(&self) -> Result<DVector<T>> {
        let w = self.log()?;
        Ok(DVector::from_column_slice(w.as_slice()))
    }

    fn adjoint_matrix(&self) -> DMatrix<T> {
        DMatrix::from_fn(3, 3, |i, j| self.matrix[(i, j)])
    }
}
