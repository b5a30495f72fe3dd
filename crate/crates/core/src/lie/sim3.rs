use nalgebra::{DMatrix, DVector, Matrix3, Matrix4, SMatrix, SVector, Vector3};

use super::{skew, so3::SO3, LieGroup};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Algebra coordinates `(Ω, s, b)`: rotation (3), log-scale (1), translation (3).
pub type Sim3Algebra<T> = SVector<T, 7>;

/// The group `SO(3) × MR(1) ⋉ R³` of rotation, positive scale and translation.
///
/// Multiplication is `(R₁, r₁, β₁)(R₂, r₂, β₂) = (R₁R₂, r₁r₂, β₁ + r₁R₁β₂)`,
/// which makes it isomorphic to Sim(3) through the embedding
/// `[[rR, β], [0, 1]]` (see [`Sim3::to_homogeneous`]).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sim3<T: Real> {
    rotation: SO3<T>,
    scale: T,
    translation: Vector3<T>,
}

impl<T: Real> Sim3<T> {
    pub fn identity() -> Self {
        Self {
            rotation: SO3::identity(),
            scale: T::one(),
            translation: Vector3::zeros(),
        }
    }

    pub fn new(rotation: SO3<T>, scale: T, translation: Vector3<T>) -> Result<Self> {
        if !(scale > T::zero()) || !scale.is_finite() {
            return Err(Error::NonPositiveScale(scale.as_f64()));
        }
        Ok(Self {
            rotation,
            scale,
            translation,
        })
    }

    /// Builds an element whose scale is known to be positive.
    pub(crate) fn from_parts(rotation: SO3<T>, scale: T, translation: Vector3<T>) -> Self {
        debug_assert!(scale > T::zero());
        Self {
            rotation,
            scale,
            translation,
        }
    }

    #[inline]
    pub fn rotation(&self) -> &SO3<T> {
        &self.rotation
    }

    #[inline]
    pub fn scale(&self) -> T {
        self.scale
    }

    #[inline]
    pub fn translation(&self) -> &Vector3<T> {
        &self.translation
    }

    pub fn compose(&self, rhs: &Self) -> Self {
        Self {
            rotation: self.rotation.compose(&rhs.rotation),
            scale: self.scale * rhs.scale,
            translation: self.translation + self.rotation.act(&rhs.translation) * self.scale,
        }
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.inverse();
        let inv_scale = T::one() / self.scale;
        Self {
            rotation: rt,
            scale: inv_scale,
            translation: -rt.act(&self.translation) * inv_scale,
        }
    }

    pub fn exp(v: &Sim3Algebra<T>) -> Self {
        let omega = Vector3::new(v[0], v[1], v[2]);
        let s = v[3];
        let b = Vector3::new(v[4], v[5], v[6]);
        Self {
            rotation: SO3::exp(&omega),
            scale: s.exp(),
            translation: translation_jacobian(&omega, s) * b,
        }
    }

    pub fn log(&self) -> Result<Sim3Algebra<T>> {
        let omega = self.rotation.log()?;
        let s = self.scale.ln();
        let w = translation_jacobian(&omega, s);
        let b = w
            .lu()
            .solve(&self.translation)
            .ok_or(Error::Singular("translation Jacobian"))?;
        let mut out = Sim3Algebra::zeros();
        out.fixed_rows_mut::<3>(0).copy_from(&omega);
        out[3] = s;
        out.fixed_rows_mut::<3>(4).copy_from(&b);
        Ok(out)
    }

    /// `Ad_X` in `(Ω, s, b)` coordinates:
    /// `[[R, 0, 0], [0, 1, 0], [β^× R, −β, rR]]`.
    pub fn adjoint(&self) -> SMatrix<T, 7, 7> {
        let r = *self.rotation.matrix();
        let beta = self.translation;
        let mut ad = SMatrix::<T, 7, 7>::zeros();
        ad.fixed_view_mut::<3, 3>(0, 0).copy_from(&r);
        ad[(3, 3)] = T::one();
        ad.fixed_view_mut::<3, 3>(4, 0).copy_from(&(skew(&beta) * r));
        ad.fixed_view_mut::<3, 1>(4, 3).copy_from(&(-beta));
        ad.fixed_view_mut::<3, 3>(4, 4).copy_from(&(r * self.scale));
        ad
    }

    /// Re-projects the rotation factor onto SO(3).
    pub fn normalized(&self) -> Self {
        Self {
            rotation: SO3::from_matrix(*self.rotation.matrix()),
            ..*self
        }
    }

    /// The similarity matrix `[[rR, β], [0, 1]]`.
    pub fn to_homogeneous(&self) -> Matrix4<T> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0)
            .copy_from(&(self.rotation.matrix() * self.scale));
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        m
    }
}

/// Algebra element as a 4×4 matrix `[[sI + Ω^×, b], [0, 0]]`.
pub fn sim3_wedge<T: Real>(v: &Sim3Algebra<T>) -> Matrix4<T> {
    let omega = Vector3::new(v[0], v[1], v[2]);
    let mut m = Matrix4::zeros();
    m.fixed_view_mut::<3, 3>(0, 0)
        .copy_from(&(skew(&omega) + Matrix3::identity() * v[3]));
    m[(0, 3)] = v[4];
    m[(1, 3)] = v[5];
    m[(2, 3)] = v[6];
    m
}

/// Inverse of [`sim3_wedge`].
pub fn sim3_vee<T: Real>(m: &Matrix4<T>) -> Sim3Algebra<T> {
    let top: Matrix3<T> = m.fixed_view::<3, 3>(0, 0).into_owned();
    let omega = super::unskew(&top);
    let s = top.trace() / T::lit(3.0);
    Sim3Algebra::from_column_slice(&[
        omega.x, omega.y, omega.z, s, m[(0, 3)], m[(1, 3)], m[(2, 3)],
    ])
}

/// `∫₀¹ tⁿ e^{st} dt`.
fn moment<T: Real>(n: u32, s: T) -> T {
    if s.abs() <= T::lit(2.0) {
        let mut term = T::one(); // s^k / k!
        let mut sum = T::zero();
        for k in 0..60u32 {
            let contrib = term / T::lit(f64::from(n + k + 1));
            sum += contrib;
            if contrib.abs() < T::default_epsilon() * sum.abs() * T::lit(1e-2) {
                break;
            }
            term = term * s / T::lit(f64::from(k + 1));
        }
        sum
    } else {
        let es = s.exp();
        let mut acc = (es - T::one()) / s;
        for k in 1..=n {
            acc = (es - T::lit(f64::from(k)) * acc) / s;
        }
        acc
    }
}

/// `W(Ω, s) = ∫₀¹ e^{st} exp(tΩ^×) dt`, mapping algebra translation to group translation.
pub fn translation_jacobian<T: Real>(omega: &Vector3<T>, s: T) -> Matrix3<T> {
    let theta2 = omega.norm_squared();
    let theta = theta2.sqrt();
    let a0 = moment(0, s);
    let (b, c) = if theta < T::lit(1e-2) {
        let mut b = T::zero();
        let mut c = T::zero();
        let mut pow = T::one();
        let mut fact_odd = T::one(); // (2j+1)!
        let mut fact_even = T::lit(2.0); // (2j+2)!
        for j in 0..5u32 {
            let sign = if j % 2 == 0 { T::one() } else { -T::one() };
            b += sign * pow * moment(2 * j + 1, s) / fact_odd;
            c += sign * pow * moment(2 * j + 2, s) / fact_even;
            pow *= theta2;
            let n = f64::from(2 * j + 2);
            fact_odd = fact_odd * T::lit(n * (n + 1.0));
            fact_even = fact_even * T::lit((n + 1.0) * (n + 2.0));
        }
        (b, c)
    } else {
        let es = s.exp();
        let (sn, cs) = (theta.sin(), theta.cos());
        let d = s * s + theta2;
        let a1 = (s * es * sn - theta * (es * cs - T::one())) / d;
        let a2 = (s * (es * cs - T::one()) + theta * es * sn) / d;
        (a1 / theta, (a0 - a2) / theta2)
    };
    let k = skew(omega);
    Matrix3::identity() * a0 + k * b + k * k * c
}

impl<T: Real> LieGroup<T> for Sim3<T> {
    const DIM: usize = 7;

    fn identity() -> Self {
        Sim3::identity()
    }

    fn compose(&self, rhs: &Self) -> Self {
        Sim3::compose(self, rhs)
    }

    fn inverse(&self) -> Self {
        Sim3::inverse(self)
    }

    fn exp_coords(v: &DVector<T>) -> Self {
        assert_eq!(v.len(), 7, "algebra coordinates have length 7");
        Sim3::exp(&Sim3Algebra::from_column_slice(v.as_slice()))
    }

    fn log_coords(&self) -> Result<DVector<T>> {
        Ok(DVector::from_column_slice(self.log()?.as_slice()))
    }

    fn adjoint_matrix(&self) -> DMatrix<T> {
        let ad = self.adjoint();
        DMatrix::from_fn(7, 7, |i, j| ad[(i, j)])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn elem(r: SO3<f64>, s: f64, b: [f64; 3]) -> Sim3<f64> {
        Sim3::new(r, s, Vector3::from(b)).unwrap()
    }

    #[test]
    fn composition_by_hand() {
        let x = elem(SO3::identity(), 2.0, [1.0, 0.0, 0.0]);
        let y = elem(SO3::identity(), 3.0, [0.0, 1.0, 0.0]);
        let xy = x.compose(&y);
        assert_eq!(xy.scale(), 6.0);
        assert_eq!(*xy.translation(), Vector3::new(1.0, 2.0, 0.0));
        assert_eq!(*xy.rotation(), SO3::identity());
    }

    #[test]
    fn inverse_by_hand() {
        let inv = elem(SO3::identity(), 2.0, [2.0, 0.0, 0.0]).inverse();
        assert_eq!(inv.scale(), 0.5);
        assert_eq!(*inv.translation(), Vector3::new(-1.0, 0.0, 0.0));
        assert_eq!(Sim3::<f64>::identity().inverse(), Sim3::identity());
    }

    #[test]
    fn identity_is_neutral() {
        let x = Sim3::exp(&Sim3Algebra::from_column_slice(&[0.1, 0.2, -0.3, 0.4, 1.0, 2.0, 3.0]));
        assert_eq!(Sim3::identity().compose(&x), x);
    }

    #[test]
    fn rejects_non_positive_scale() {
        assert!(Sim3::new(SO3::<f64>::identity(), 0.0, Vector3::zeros()).is_err());
        assert!(Sim3::new(SO3::<f64>::identity(), -1.0, Vector3::zeros()).is_err());
    }

    #[test]
    fn exp_of_zero_and_pure_scale() {
        assert_eq!(Sim3::<f64>::exp(&Sim3Algebra::zeros()), Sim3::identity());
        let mut v = Sim3Algebra::zeros();
        v[3] = 0.7;
        let x = Sim3::exp(&v);
        assert_relative_eq!(x.scale(), 0.7f64.exp(), epsilon = 1e-15);
        assert_eq!(*x.translation(), Vector3::zeros());
        assert_eq!(*x.rotation(), SO3::identity());
    }

    #[test]
    fn adjoint_of_identity_is_exact_identity() {
        assert_eq!(Sim3::<f64>::identity().adjoint(), SMatrix::<f64, 7, 7>::identity());
    }

    #[test]
    fn moments_agree_across_branches() {
        for n in 0..10 {
            let lo = moment(n, 2.0f64);
            let hi = moment(n, 2.0 + 1e-12);
            assert_relative_eq!(lo, hi, max_relative = 1e-10);
            let lo = moment(n, -2.0f64);
            let hi = moment(n, -2.0 - 1e-12);
            assert_relative_eq!(lo, hi, max_relative = 1e-10);
        }
    }

    #[test]
    fn translation_jacobian_continuous_at_series_threshold() {
        let dir = Vector3::new(0.3, -0.2, 0.9).normalize();
        for s in [-3.0, -0.5, 0.0, 1e-9, 0.8, 2.5] {
            let a = translation_jacobian(&(dir * (1e-2 - 1e-12)), s);
            let b = translation_jacobian(&(dir * (1e-2 + 1e-12)), s);
            assert_relative_eq!(a, b, epsilon = 1e-11);
        }
    }

    #[test]
    fn f32_roundtrip() {
        let v = Sim3Algebra::<f32>::from_column_slice(&[0.1, -0.2, 0.3, 0.2, 1.0, -1.0, 0.5]);
        assert_relative_eq!(Sim3::exp(&v).log().unwrap(), v, epsilon = 1e-4);
    }
}
