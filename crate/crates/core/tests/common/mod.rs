#![allow(dead_code)]

use eqf_core::error::{Error, Result};
use eqf_core::filter::EquivariantSystem;
use eqf_core::kinematics::{KinematicInput, KinematicState};
use eqf_core::lie::{LieGroup, Sim3, Sim3Algebra};
use nalgebra::{DMatrix, DVector, Matrix3, Matrix4, SMatrix, Vector3, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_vec3(rng: &mut ChaCha8Rng, half_width: f64) -> Vector3<f64> {
    Vector3::from_fn(|_, _| rng.random_range(-half_width..half_width))
}

/// Algebra vector with norm uniform in `[0, max_norm]` and uniform direction.
pub fn algebra_in_ball(rng: &mut ChaCha8Rng, max_norm: f64) -> Sim3Algebra<f64> {
    loop {
        let v = Sim3Algebra::<f64>::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let n = v.norm();
        if n > 1e-6 && n <= 1.0 {
            return v / n * rng.random_range(0.0..max_norm);
        }
    }
}

pub fn random_group(rng: &mut ChaCha8Rng, max_norm: f64) -> Sim3<f64> {
    Sim3::exp(&algebra_in_ball(rng, max_norm))
}

pub fn random_state(rng: &mut ChaCha8Rng) -> KinematicState<f64> {
    let dir = uniform_vec3(rng, 1.0).normalize();
    let range = rng.random_range(5.0..100.0);
    KinematicState::new(dir * range, uniform_vec3(rng, 5.0))
}

pub fn random_input(rng: &mut ChaCha8Rng) -> KinematicInput<f64> {
    KinematicInput::new(uniform_vec3(rng, 1.0), uniform_vec3(rng, 3.0))
}

pub fn state_residual(a: &KinematicState<f64>, b: &KinematicState<f64>) -> f64 {
    (a.to_vector() - b.to_vector()).norm()
}

/// `[[rR, β], [0, 1]]`, built from the parts.
pub fn matrix_of(x: &Sim3<f64>) -> Matrix4<f64> {
    let mut m = Matrix4::identity();
    let rr = x.rotation().matrix() * x.scale();
    for i in 0..3 {
        for j in 0..3 {
            m[(i, j)] = rr[(i, j)];
        }
        m[(i, 3)] = x.translation()[i];
    }
    m
}

/// Reads a similarity matrix back into `(R, r, β)`.
pub fn group_of(m: &Matrix4<f64>) -> Sim3<f64> {
    let a = m.fixed_view::<3, 3>(0, 0).into_owned();
    let scale = a.determinant().cbrt();
    let rot = eqf_core::lie::SO3::from_matrix(a / scale);
    Sim3::new(rot, scale, m.fixed_view::<3, 1>(0, 3).into_owned()).unwrap()
}

/// Algebra basis element `i` as a 4×4 matrix, independent of the library wedge.
pub fn basis_matrix(i: usize) -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    match i {
        0 => {
            m[(2, 1)] = 1.0;
            m[(1, 2)] = -1.0;
        }
        1 => {
            m[(0, 2)] = 1.0;
            m[(2, 0)] = -1.0;
        }
        2 => {
            m[(1, 0)] = 1.0;
            m[(0, 1)] = -1.0;
        }
        3 => {
            m[(0, 0)] = 1.0;
            m[(1, 1)] = 1.0;
            m[(2, 2)] = 1.0;
        }
        4..=6 => m[(i - 4, 3)] = 1.0,
        _ => unreachable!(),
    }
    m
}

pub fn hat(v: &Sim3Algebra<f64>) -> Matrix4<f64> {
    (0..7).fold(Matrix4::zeros(), |acc, i| acc + basis_matrix(i) * v[i])
}

pub fn vee(m: &Matrix4<f64>) -> Sim3Algebra<f64> {
    let s = (m[(0, 0)] + m[(1, 1)] + m[(2, 2)]) / 3.0;
    Sim3Algebra::from_column_slice(&[
        0.5 * (m[(2, 1)] - m[(1, 2)]),
        0.5 * (m[(0, 2)] - m[(2, 0)]),
        0.5 * (m[(1, 0)] - m[(0, 1)]),
        s,
        m[(0, 3)],
        m[(1, 3)],
        m[(2, 3)],
    ])
}

/// Inverse scaling and squaring: repeated square roots, then the
/// `log(I + X)` series.
pub fn matrix_log(m: &Matrix4<f64>) -> Matrix4<f64> {
    let mut a = *m;
    let mut k = 0;
    while (a - Matrix4::identity()).norm() > 1e-3 {
        a = sqrtm(&a);
        k += 1;
        assert!(k < 60, "square-root iteration diverged");
    }
    let x = a - Matrix4::identity();
    let mut term = x;
    let mut sum = Matrix4::zeros();
    for n in 1..40 {
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        sum += term * (sign / n as f64);
        term *= x;
    }
    sum * 2f64.powi(k)
}

/// Denman–Beavers square root.
fn sqrtm(a: &Matrix4<f64>) -> Matrix4<f64> {
    let mut y = *a;
    let mut z = Matrix4::identity();
    for _ in 0..100 {
        let yi = y.try_inverse().unwrap();
        let zi = z.try_inverse().unwrap();
        let y_next = (y + zi) * 0.5;
        let z_next = (z + yi) * 0.5;
        let done = (y_next - y).norm() < 1e-15 * y.norm();
        y = y_next;
        z = z_next;
        if done {
            break;
        }
    }
    y
}

/// `Ad_X` by conjugating each basis element in the matrix representation.
pub fn adjoint_oracle(x: &Sim3<f64>) -> SMatrix<f64, 7, 7> {
    let m = matrix_of(x);
    let mi = m.try_inverse().unwrap();
    let mut ad = SMatrix::<f64, 7, 7>::zeros();
    for j in 0..7 {
        ad.set_column(j, &vee(&(m * basis_matrix(j) * mi)));
    }
    ad
}

/// `ad_v` from brackets of basis elements.
pub fn little_adjoint(v: &Sim3Algebra<f64>) -> SMatrix<f64, 7, 7> {
    let a = hat(v);
    let mut out = SMatrix::<f64, 7, 7>::zeros();
    for j in 0..7 {
        let b = basis_matrix(j);
        out.set_column(j, &vee(&(a * b - b * a)));
    }
    out
}

/// Position then velocity rows of `Dφ_{ξ°}(id)`, from differentiating
/// `(Rᵀp/r, Rᵀ(v − β)/r)` at the identity by hand.
pub fn dphi_oracle(origin: &KinematicState<f64>) -> SMatrix<f64, 6, 7> {
    let (p, v) = (origin.position, origin.velocity);
    let mut d = SMatrix::<f64, 6, 7>::zeros();
    for j in 0..7 {
        let e = Sim3Algebra::from_fn(|i, _| if i == j { 1.0 } else { 0.0 });
        let omega = Vector3::new(e[0], e[1], e[2]);
        let s = e[3];
        let b = Vector3::new(e[4], e[5], e[6]);
        // d/dt of Rᵀ(t) = −Ω×, d/dt of 1/r(t) = −s
        let dp = -omega.cross(&p) - p * s;
        let dv = -omega.cross(&v) - v * s - b;
        for i in 0..3 {
            d[(i, j)] = dp[i];
            d[(i + 3, j)] = dv[i];
        }
    }
    d
}

/// Toy system: the similarity group acting on itself by right multiplication,
/// with algebra-valued inputs, `F(ξ, u) = ξ exp(tu)` and a landmark output.
/// The chart is the group logarithm, so the covariance transport is exactly
/// the adjoint of `exp(Δ/2)`.
#[derive(Clone, Debug)]
pub struct SelfAction {
    pub step: f64,
    pub landmark: Vector3<f64>,
    pub origin: Sim3<f64>,
    pub frozen: bool,
    pub constant_output: bool,
}

impl SelfAction {
    pub fn new(step: f64) -> Self {
        Self {
            step,
            landmark: Vector3::new(1.0, -2.0, 3.0),
            origin: Sim3::identity(),
            frozen: false,
            constant_output: false,
        }
    }

    /// `F = id`, `Λ ≡ id`.
    pub fn frozen() -> Self {
        Self {
            frozen: true,
            ..Self::new(0.1)
        }
    }
}

impl EquivariantSystem<f64> for SelfAction {
    type Group = Sim3<f64>;
    type State = Sim3<f64>;
    type Input = Sim3Algebra<f64>;

    fn state_dim(&self) -> usize {
        7
    }
    fn output_dim(&self) -> usize {
        3
    }
    fn origin(&self) -> &Sim3<f64> {
        &self.origin
    }
    fn transition(&self, xi: &Sim3<f64>, u: &Sim3Algebra<f64>) -> Sim3<f64> {
        if self.frozen {
            xi.clone()
        } else {
            xi.compose(&Sim3::exp(&(u * self.step)))
        }
    }
    fn act_state(&self, x: &Sim3<f64>, xi: &Sim3<f64>) -> Sim3<f64> {
        xi.compose(x)
    }
    fn act_input(&self, x: &Sim3<f64>, u: &Sim3Algebra<f64>) -> Sim3Algebra<f64> {
        x.inverse().adjoint() * u
    }
    fn lift(&self, _xi: &Sim3<f64>, u: &Sim3Algebra<f64>) -> Result<Sim3<f64>> {
        if self.frozen {
            Ok(Sim3::identity())
        } else {
            Ok(Sim3::exp(&(u * self.step)))
        }
    }
    fn output(&self, xi: &Sim3<f64>) -> Result<DVector<f64>> {
        if self.constant_output {
            return Ok(DVector::from_column_slice(self.landmark.as_slice()));
        }
        let h = matrix_of(xi) * Vector4::new(self.landmark.x, self.landmark.y, self.landmark.z, 1.0);
        Ok(DVector::from_column_slice(&h.as_slice()[..3]))
    }
    fn chart(&self, eps: &DVector<f64>) -> Result<Sim3<f64>> {
        Ok(Sim3::<f64>::exp_coords(eps))
    }
    fn chart_inv(&self, xi: &Sim3<f64>) -> Result<DVector<f64>> {
        xi.log_coords()
    }
    fn chart_differential(&self) -> DMatrix<f64> {
        DMatrix::identity(7, 7)
    }
    fn dphi_origin(&self) -> DMatrix<f64> {
        DMatrix::identity(7, 7)
    }
    fn dphi_origin_pinv(&self, w: &DVector<f64>) -> DVector<f64> {
        w.clone()
    }
}

pub fn to_dmatrix<const R: usize, const C: usize>(m: &SMatrix<f64, R, C>) -> DMatrix<f64> {
    DMatrix::from_fn(R, C, |i, j| m[(i, j)])
}

pub fn spd_from(rng: &mut ChaCha8Rng, n: usize, floor: f64) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    &a * a.transpose() + DMatrix::identity(n, n) * floor
}

pub fn skew3(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

pub fn unwrap_degenerate<T>(r: Result<T>) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(Error::Degenerate(_)) => None,
        Err(e) => panic!("unexpected error {e:?}"),
    }
}
