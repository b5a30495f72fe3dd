//! Second-order kinematics in R³ with bearing and range outputs.
//!
//! State `ξ = (p, v)`, input `u = (ω, a)` where `ω` is a virtual velocity
//! input (always zero in practice, but needed for equivariance). The
//! symmetry group is [`Sim3`] acting by
//! `φ((R, r, β), (p, v)) = (Rᵀp / r, Rᵀ(v − β) / r)`.
//!
//! Chart coordinates `ε ∈ R⁶` are ordered `(α₁, α₂, s, b₁, b₂, b₃)`: the
//! rotation component lives in the plane orthogonal to the origin bearing
//! `p̂°`, spanned by [`SecondOrderKinematics::rotation_basis`].

use nalgebra::{DMatrix, DVector, Matrix3, Matrix3x2, Matrix6, SMatrix, Vector3, Vector6};

use crate::error::{Error, Result};
use crate::filter::EquivariantSystem;
use crate::lie::{skew, Sim3, Sim3Algebra, SO3};
use crate::linalg::central_difference;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KinematicState<T: Real> {
    pub position: Vector3<T>,
    pub velocity: Vector3<T>,
}

impl<T: Real> KinematicState<T> {
    pub fn new(position: Vector3<T>, velocity: Vector3<T>) -> Self {
        Self { position, velocity }
    }

    /// `(p, v)` stacked.
    pub fn to_vector(&self) -> Vector6<T> {
        let mut out = Vector6::zeros();
        out.fixed_rows_mut::<3>(0).copy_from(&self.position);
        out.fixed_rows_mut::<3>(3).copy_from(&self.velocity);
        out
    }

    pub fn from_vector(v: &Vector6<T>) -> Self {
        Self {
            position: v.fixed_rows::<3>(0).into_owned(),
            velocity: v.fixed_rows::<3>(3).into_owned(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KinematicInput<T: Real> {
    pub omega: Vector3<T>,
    pub accel: Vector3<T>,
}

impl<T: Real> KinematicInput<T> {
    pub fn new(omega: Vector3<T>, accel: Vector3<T>) -> Self {
        Self { omega, accel }
    }

    /// Physical input `(0, a)`.
    pub fn from_accel(accel: Vector3<T>) -> Self {
        Self {
            omega: Vector3::zeros(),
            accel,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BearingRange<T: Real> {
    pub bearing: Vector3<T>,
    pub range: T,
}

impl<T: Real> BearingRange<T> {
    /// `(y₁, y₂)` stacked into R⁴.
    pub fn to_vector(&self) -> DVector<T> {
        DVector::from_column_slice(&[self.bearing.x, self.bearing.y, self.bearing.z, self.range])
    }
}

/// Exact update for acceleration held constant over `t`:
/// `p₊ = p + t(v + ω) + ½t²a`, `v₊ = v + ta`.
pub fn f_discrete<T: Real>(xi: &KinematicState<T>, u: &KinematicInput<T>, t: T) -> KinematicState<T> {
    KinematicState {
        position: next_position(xi, u, t),
        velocity: xi.velocity + u.accel * t,
    }
}

fn next_position<T: Real>(xi: &KinematicState<T>, u: &KinematicInput<T>, t: T) -> Vector3<T> {
    xi.position + (xi.velocity + u.omega) * t + u.accel * (T::lit(0.5) * t * t)
}

/// `φ((R, r, β), (p, v)) = (Rᵀp / r, Rᵀ(v − β) / r)`.
pub fn act_phi<T: Real>(x: &Sim3<T>, xi: &KinematicState<T>) -> KinematicState<T> {
    let rt = x.rotation().matrix().transpose();
    let inv_r = T::one() / x.scale();
    KinematicState {
        position: rt * xi.position * inv_r,
        velocity: rt * (xi.velocity - x.translation()) * inv_r,
    }
}

/// `ψ((R, r, β), (ω, a)) = (Rᵀ(ω + β) / r, Rᵀa / r)`.
pub fn act_psi<T: Real>(x: &Sim3<T>, u: &KinematicInput<T>) -> KinematicInput<T> {
    let rt = x.rotation().matrix().transpose();
    let inv_r = T::one() / x.scale();
    KinematicInput {
        omega: rt * (u.omega + x.translation()) * inv_r,
        accel: rt * u.accel * inv_r,
    }
}

/// Cross-product norm below which two bearings count as aligned.
const ALIGNMENT_TOL: f64 = 1e-12;

/// Rotation `R` with `R a = b` for unit vectors `a`, `b`, about `a × b`.
fn align<T: Real>(a: &Vector3<T>, b: &Vector3<T>) -> Result<Matrix3<T>> {
    let c = a.cross(b);
    let d = a.dot(b);
    let sin = c.norm();
    if sin < T::lit(ALIGNMENT_TOL) {
        return if d > T::zero() {
            Ok(Matrix3::identity())
        } else {
            Err(Error::Degenerate("antiparallel bearings have no unique aligning rotation"))
        };
    }
    if d > T::zero() {
        let k = skew(&c);
        Ok(Matrix3::identity() + k + k * k / (T::one() + d))
    } else {
        Ok(*SO3::exp(&(c * (sin.atan2(d) / sin))).matrix())
    }
}

/// Equivariant lift `Λ((p, v), (ω, a)) = (R_Λ, r_Λ, β_Λ)` for step `t`.
///
/// With `p′ = p + t(v + ω) + ½t²a`: `R_Λ p̂′ = p̂`, `r_Λ = |p| / |p′|` and
/// `β_Λ = v − r_Λ R_Λ (v + ta)`.
pub fn lift_lambda<T: Real>(xi: &KinematicState<T>, u: &KinematicInput<T>, t: T) -> Result<Sim3<T>> {
    let p = xi.position;
    let p_next = next_position(xi, u, t);
    let (np, nn) = (p.norm(), p_next.norm());
    if np == T::zero() {
        return Err(Error::Degenerate("lift undefined at zero position"));
    }
    if nn == T::zero() {
        return Err(Error::Degenerate("trajectory passes through the origin"));
    }
    let rot = align(&(p_next / nn), &(p / np))?;
    let scale = np / nn;
    let beta = xi.velocity - rot * (xi.velocity + u.accel * t) * scale;
    Ok(Sim3::from_parts(SO3::from_matrix_unchecked(rot), scale, beta))
}

/// Bearing `p / |p|`.
pub fn h_bearing<T: Real>(xi: &KinematicState<T>) -> Result<Vector3<T>> {
    let n = xi.position.norm();
    if n == T::zero() {
        return Err(Error::Degenerate("bearing undefined at zero position"));
    }
    Ok(xi.position / n)
}

/// Range `|p|`.
pub fn h_range<T: Real>(xi: &KinematicState<T>) -> Result<T> {
    let n = xi.position.norm();
    if n == T::zero() {
        return Err(Error::Degenerate("range undefined at zero position"));
    }
    Ok(n)
}

pub fn measure<T: Real>(xi: &KinematicState<T>) -> Result<BearingRange<T>> {
    Ok(BearingRange {
        bearing: h_bearing(xi)?,
        range: h_range(xi)?,
    })
}

/// Orthonormal pair completing the unit vector `u` to a right-handed frame
/// `(e₁, e₂, u)`. `e₁` is Gram-Schmidt of the coordinate axis least aligned
/// with `u`.
pub fn tangent_basis<T: Real>(u: &Vector3<T>) -> (Vector3<T>, Vector3<T>) {
    let abs = u.map(|x| x.abs());
    let axis = if abs.x <= abs.y && abs.x <= abs.z {
        Vector3::x()
    } else if abs.y <= abs.z {
        Vector3::y()
    } else {
        Vector3::z()
    };
    let e1 = (axis - u * u.dot(&axis)).normalize();
    let e2 = u.cross(&e1);
    (e1, e2)
}

/// The example system with a fixed origin `ξ°` and step `t`.
#[derive(Clone, Debug)]
pub struct SecondOrderKinematics<T: Real> {
    origin: KinematicState<T>,
    step: T,
    rotation_basis: Matrix3x2<T>,
    dphi: SMatrix<T, 6, 7>,
    chart_diff: Matrix6<T>,
    chart_diff_inv: Matrix6<T>,
}

impl<T: Real> SecondOrderKinematics<T> {
    pub fn new(origin: KinematicState<T>, step: T) -> Result<Self> {
        if !(step > T::zero()) {
            return Err(Error::Degenerate("time step must be positive"));
        }
        let bearing = h_bearing(&origin)?;
        let (e1, e2) = tangent_basis(&bearing);
        let rotation_basis = Matrix3x2::from_columns(&[e1, e2]);

        let (p0, v0) = (origin.position, origin.velocity);
        let mut dphi = SMatrix::<T, 6, 7>::zeros();
        dphi.fixed_view_mut::<3, 3>(0, 0).copy_from(&skew(&p0));
        dphi.fixed_view_mut::<3, 1>(0, 3).copy_from(&(-p0));
        dphi.fixed_view_mut::<3, 3>(3, 0).copy_from(&skew(&v0));
        dphi.fixed_view_mut::<3, 1>(3, 3).copy_from(&(-v0));
        dphi.fixed_view_mut::<3, 3>(3, 4).copy_from(&(-Matrix3::identity()));

        let chart_diff = dphi * embedding(&rotation_basis);
        let chart_diff_inv = chart_diff
            .try_inverse()
            .ok_or(Error::Singular("chart differential"))?;
        Ok(Self {
            origin,
            step,
            rotation_basis,
            dphi,
            chart_diff,
            chart_diff_inv,
        })
    }

    #[inline]
    pub fn step(&self) -> T {
        self.step
    }

    pub fn origin_state(&self) -> &KinematicState<T> {
        &self.origin
    }

    /// Orthonormal basis `(e₁, e₂)` of the plane orthogonal to `p̂°`.
    pub fn rotation_basis(&self) -> &Matrix3x2<T> {
        &self.rotation_basis
    }

    /// Embedding of chart coordinates into the horizontal subspace of the algebra.
    pub fn embed(&self, eps: &Vector6<T>) -> Sim3Algebra<T> {
        embedding(&self.rotation_basis) * eps
    }

    /// Generator `(p̂°, 0, −p̂° × v°)` of the stabilizer of `ξ°`.
    pub fn stabilizer_generator(&self) -> Sim3Algebra<T> {
        let ph = self.origin.position.normalize();
        let b = -ph.cross(&self.origin.velocity);
        Sim3Algebra::from_column_slice(&[ph.x, ph.y, ph.z, T::zero(), b.x, b.y, b.z])
    }

    /// `Dφ_{ξ°}(id)` as a 6×7 matrix.
    pub fn dphi_matrix(&self) -> &SMatrix<T, 6, 7> {
        &self.dphi
    }

    /// `DΘ⁻¹` at zero, as a 6×6 matrix.
    pub fn chart_diff_matrix(&self) -> &Matrix6<T> {
        &self.chart_diff
    }

    /// Inverse chart `Θ⁻¹(ε) = φ(exp(Hε), ξ°)`.
    pub fn chart(&self, eps: &Vector6<T>) -> KinematicState<T> {
        act_phi(&Sim3::exp(&self.embed(eps)), &self.origin)
    }

    /// Chart `Θ`, solved in closed form.
    ///
    /// Scale from the range ratio, rotation about `p̂ × p̂°` (which is
    /// orthogonal to `p̂°`), translation from the velocity.
    pub fn chart_inv(&self, xi: &KinematicState<T>) -> Result<Vector6<T>> {
        let p = xi.position;
        let norm_p = p.norm();
        if norm_p == T::zero() {
            return Err(Error::Degenerate("chart undefined at zero position"));
        }
        let p0 = self.origin.position;
        let norm_p0 = p0.norm();
        let (ph, ph0) = (p / norm_p, p0 / norm_p0);

        let c = ph.cross(&ph0);
        let sin = c.norm();
        let cos = ph.dot(&ph0);
        let omega = if sin < T::lit(ALIGNMENT_TOL) {
            if cos < T::zero() {
                return Err(Error::Degenerate(
                    "state bearing is antipodal to the origin bearing",
                ));
            }
            c
        } else {
            c * (sin.atan2(cos) / sin)
        };
        if !(omega.norm() < T::pi()) {
            return Err(Error::Degenerate("state outside chart domain"));
        }

        let s = (norm_p0 / norm_p).ln();
        let rot = SO3::exp(&omega);
        let beta = self.origin.velocity - rot.act(&xi.velocity) * s.exp();
        let w = crate::lie::translation_jacobian(&omega, s);
        let b = w
            .lu()
            .solve(&beta)
            .ok_or(Error::Singular("translation Jacobian"))?;

        let alpha = self.rotation_basis.transpose() * omega;
        Ok(Vector6::new(alpha.x, alpha.y, s, b.x, b.y, b.z))
    }

    /// Chart `Θ` by Newton iteration on `ε ↦ Θ⁻¹(ε)` with a
    /// finite-difference Jacobian (convergence 1e-12, at most 50 iterations).
    pub fn chart_inv_newton(&self, xi: &KinematicState<T>) -> Result<Vector6<T>> {
        const MAX_ITERS: usize = 50;
        let target = xi.to_vector();
        let mut eps = self.chart_diff_inv * (target - self.origin.to_vector());
        let tol = T::lit(1e-12);
        let mut residual = T::max_value().unwrap_or_else(T::one);
        for _ in 0..MAX_ITERS {
            let r = self.chart(&eps).to_vector() - target;
            residual = r.norm();
            let jac = central_difference(
                |e: &DVector<T>| {
                    let e6 = Vector6::from_column_slice(e.as_slice());
                    Ok(DVector::from_column_slice(self.chart(&e6).to_vector().as_slice()))
                },
                &DVector::from_column_slice(eps.as_slice()),
                T::lit(1e-7),
            )?;
            let jac6 = Matrix6::from_fn(|i, j| jac[(i, j)]);
            let delta = jac6
                .lu()
                .solve(&r)
                .ok_or(Error::Singular("chart Jacobian"))?;
            eps -= delta;
            if delta.norm() <= tol * (T::one() + eps.norm()) {
                return Ok(eps);
            }
        }
        Err(Error::ChartInversion {
            iterations: MAX_ITERS,
            residual: residual.as_f64(),
        })
    }

    /// Right inverse of `Dφ_{ξ°}(id)` with image in the horizontal subspace.
    pub fn dphi_origin_pinv(&self, w: &Vector6<T>) -> Sim3Algebra<T> {
        self.embed(&(self.chart_diff_inv * w))
    }

    /// Closed-form state matrix.
    ///
    /// By the lift condition the unforced error dynamics are
    /// `e₊ = φ(Λ(ξ°, u°)⁻¹, F(e, u°))`, which is affine in `e`; in chart
    /// coordinates this gives `A = J⁻¹ · blkdiag(rR, rR) · [[I, tI], [0, I]] · J`
    /// with `(R, r)` the rotation and scale of `Λ(ξ°, u°)` and `J = DΘ⁻¹`.
    pub fn state_matrix_analytic(&self, u_origin: &KinematicInput<T>) -> Result<Matrix6<T>> {
        let lift = lift_lambda(&self.origin, u_origin, self.step)?;
        let rr = lift.rotation().matrix() * lift.scale();
        let mut m = Matrix6::zeros();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&rr);
        m.fixed_view_mut::<3, 3>(0, 3).copy_from(&(rr * self.step));
        m.fixed_view_mut::<3, 3>(3, 3).copy_from(&rr);
        Ok(self.chart_diff_inv * m * self.chart_diff)
    }

    /// Closed-form output matrix `C = Dh(ξ̂) · Dφ_X̂(ξ°) · DΘ⁻¹`.
    pub fn output_matrix_analytic(&self, xhat: &Sim3<T>) -> Result<SMatrix<T, 4, 6>> {
        let estimate = act_phi(xhat, &self.origin);
        let y = h_bearing(&estimate)?;
        let range = estimate.position.norm();
        let mut dh = SMatrix::<T, 4, 6>::zeros();
        dh.fixed_view_mut::<3, 3>(0, 0)
            .copy_from(&((Matrix3::identity() - y * y.transpose()) / range));
        dh.fixed_view_mut::<1, 3>(3, 0).copy_from(&y.transpose());
        let rt = xhat.rotation().matrix().transpose() / xhat.scale();
        let mut dphi = Matrix6::zeros();
        dphi.fixed_view_mut::<3, 3>(0, 0).copy_from(&rt);
        dphi.fixed_view_mut::<3, 3>(3, 3).copy_from(&rt);
        Ok(dh * dphi * self.chart_diff)
    }
}

/// `H`: chart coordinates `(α, s, b)` to algebra coordinates `(Eα, s, b)`.
fn embedding<T: Real>(basis: &Matrix3x2<T>) -> SMatrix<T, 7, 6> {
    let mut h = SMatrix::<T, 7, 6>::zeros();
    h.fixed_view_mut::<3, 2>(0, 0).copy_from(basis);
    h[(3, 2)] = T::one();
    h.fixed_view_mut::<3, 3>(4, 3).copy_from(&Matrix3::identity());
    h
}

fn to_dvector<T: Real, const N: usize>(v: &SMatrix<T, N, 1>) -> DVector<T> {
    DVector::from_column_slice(v.as_slice())
}

fn to_dmatrix<T: Real, const R: usize, const C: usize>(m: &SMatrix<T, R, C>) -> DMatrix<T> {
    DMatrix::from_fn(R, C, |i, j| m[(i, j)])
}

fn to_vector6<T: Real>(v: &DVector<T>) -> Result<Vector6<T>> {
    if v.len() != 6 {
        return Err(Error::Dimension {
            what: "chart coordinates",
            expected: 6,
            actual: v.len(),
        });
    }
    Ok(Vector6::from_column_slice(v.as_slice()))
}

impl<T: Real> EquivariantSystem<T> for SecondOrderKinematics<T> {
    type Group = Sim3<T>;
    type State = KinematicState<T>;
    type Input = KinematicInput<T>;

    fn state_dim(&self) -> usize {
        6
    }

    fn output_dim(&self) -> usize {
        4
    }

    fn origin(&self) -> &KinematicState<T> {
        &self.origin
    }

    fn transition(&self, xi: &KinematicState<T>, u: &KinematicInput<T>) -> KinematicState<T> {
        f_discrete(xi, u, self.step)
    }

    fn act_state(&self, x: &Sim3<T>, xi: &KinematicState<T>) -> KinematicState<T> {
        act_phi(x, xi)
    }

    fn act_input(&self, x: &Sim3<T>, u: &KinematicInput<T>) -> KinematicInput<T> {
        act_psi(x, u)
    }

    fn lift(&self, xi: &KinematicState<T>, u: &KinematicInput<T>) -> Result<Sim3<T>> {
        lift_lambda(xi, u, self.step)
    }

    fn output(&self, xi: &KinematicState<T>) -> Result<DVector<T>> {
        Ok(measure(xi)?.to_vector())
    }

    fn chart(&self, eps: &DVector<T>) -> Result<KinematicState<T>> {
        Ok(SecondOrderKinematics::chart(self, &to_vector6(eps)?))
    }

    fn chart_inv(&self, xi: &KinematicState<T>) -> Result<DVector<T>> {
        Ok(to_dvector(&SecondOrderKinematics::chart_inv(self, xi)?))
    }

    fn chart_differential(&self) -> DMatrix<T> {
        to_dmatrix(&self.chart_diff)
    }

    fn dphi_origin(&self) -> DMatrix<T> {
        to_dmatrix(&self.dphi)
    }

    fn dphi_origin_pinv(&self, w: &DVector<T>) -> DVector<T> {
        let w6 = Vector6::from_column_slice(w.as_slice());
        to_dvector(&SecondOrderKinematics::dphi_origin_pinv(self, &w6))
    }

    fn state_matrix(&self, u_origin: &KinematicInput<T>) -> Result<DMatrix<T>> {
        Ok(to_dmatrix(&self.state_matrix_analytic(u_origin)?))
    }

    fn output_matrix(&self, xhat: &Sim3<T>) -> Result<DMatrix<T>> {
        Ok(to_dmatrix(&self.output_matrix_analytic(xhat)?))
    }
}
