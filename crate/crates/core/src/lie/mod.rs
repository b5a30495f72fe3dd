//! Lie group primitives.
//!
//! Groups expose their Lie algebra through coordinate vectors (the vee/wedge
//! isomorphism is fixed per group). The generic filter only talks to groups
//! through [`LieGroup`], which uses dynamically sized algebra vectors so that
//! systems with different group dimensions share one implementation.

mod sim3;
mod so3;

pub use sim3::{sim3_vee, sim3_wedge, translation_jacobian, Sim3, Sim3Algebra};
pub use so3::SO3;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use crate::error::Result;
use crate::scalar::Real;

/// A matrix Lie group with a fixed algebra basis.
pub trait LieGroup<T: Real>: Clone + std::fmt::Debug {
    /// Dimension of the Lie algebra.
    const DIM: usize;

    fn identity() -> Self;

    /// Group product `self * rhs`.
    fn compose(&self, rhs: &Self) -> Self;

    fn inverse(&self) -> Self;

    /// Exponential of an algebra coordinate vector of length [`Self::DIM`].
    fn exp_coords(v: &DVector<T>) -> Self;

    /// Logarithm, returning algebra coordinates.
    fn log_coords(&self) -> Result<DVector<T>>;

    /// Matrix of `Ad_X` acting on algebra coordinates.
    fn adjoint_matrix(&self) -> DMatrix<T>;
}

/// Inner automorphism `I_X(Z) = X Z X⁻¹`.
pub fn inner_automorphism<T: Real, G: LieGroup<T>>(x: &G, z: &G) -> G {
    x.compose(z).compose(&x.inverse())
}

/// Conjugates a state map by a right action: `ξ ↦ φ_X(F(φ_X⁻¹(ξ)))`.
///
/// `phi` is the right action `φ(X, ξ)`. The result satisfies
/// `Φ_Y(Φ_X(F)) = Φ_{XY}(F)` pointwise.
pub fn conjugate_diffeo<'a, T, G, S, A, F>(phi: A, x: &G, f: F) -> impl Fn(&S) -> S + 'a
where
    T: Real,
    G: LieGroup<T> + 'a,
    A: Fn(&G, &S) -> S + 'a,
    F: Fn(&S) -> S + 'a,
{
    let x = x.clone();
    let x_inv = x.inverse();
    move |xi: &S| phi(&x, &f(&phi(&x_inv, xi)))
}

/// Skew-symmetric matrix with `skew(a) * b = a × b`.
#[inline]
pub fn skew<T: Real>(v: &Vector3<T>) -> Matrix3<T> {
    let z = T::zero();
    Matrix3::new(z, -v.z, v.y, v.z, z, -v.x, -v.y, v.x, z)
}

/// Inverse of [`skew`], reading the antisymmetric part.
#[inline]
pub fn unskew<T: Real>(m: &Matrix3<T>) -> Vector3<T> {
    let half = T::lit(0.5);
    Vector3::new(
        (m[(2, 1)] - m[(1, 2)]) * half,
        (m[(0, 2)] - m[(2, 0)]) * half,
        (m[(1, 0)] - m[(0, 1)]) * half,
    )
}
