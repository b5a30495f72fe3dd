//! Runtime property checks behind `eqf check`.
//!
//! Each check samples seeded random inputs and reports the largest residual
//! of an identity that must hold exactly up to rounding.

use eqf_core::filter::{state_matrix_numeric, output_matrix_numeric, transport_matrix, EquivariantSystem, FD_STEP};
use eqf_core::kinematics::{act_phi, act_psi, f_discrete, lift_lambda, KinematicInput, KinematicState, SecondOrderKinematics};
use eqf_core::lie::{Sim3, Sim3Algebra};
use eqf_core::linalg::relative_error;
use nalgebra::{DMatrix, DVector, Vector3, Vector6};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::SimError;

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub samples: usize,
    pub max_residual: f64,
    pub tolerance: f64,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.max_residual < self.tolerance
    }
}

fn vec3(rng: &mut ChaCha8Rng, half: f64) -> Vector3<f64> {
    Vector3::from_fn(|_, _| rng.random_range(-half..half))
}

fn group(rng: &mut ChaCha8Rng, max_norm: f64) -> Sim3<f64> {
    let v = Sim3Algebra::<f64>::from_fn(|_, _| rng.random_range(-1.0..1.0));
    Sim3::exp(&(v.normalize() * rng.random_range(0.0..max_norm)))
}

fn state(rng: &mut ChaCha8Rng) -> KinematicState<f64> {
    let dir = vec3(rng, 1.0).normalize();
    KinematicState::new(dir * rng.random_range(5.0..100.0), vec3(rng, 5.0))
}

fn input(rng: &mut ChaCha8Rng) -> KinematicInput<f64> {
    KinematicInput::new(vec3(rng, 1.0), vec3(rng, 3.0))
}

/// Residual relative to the size of the expected value.
fn rel(a: &KinematicState<f64>, b: &KinematicState<f64>) -> f64 {
    (a.to_vector() - b.to_vector()).norm() / (1.0 + b.to_vector().norm())
}

fn input_rel(a: &KinematicInput<f64>, b: &KinematicInput<f64>) -> f64 {
    let d = (a.omega - b.omega).norm() + (a.accel - b.accel).norm();
    d / (1.0 + b.omega.norm() + b.accel.norm())
}

fn group_rel(a: &Sim3<f64>, b: &Sim3<f64>) -> f64 {
    let (ma, mb) = (a.to_homogeneous(), b.to_homogeneous());
    (ma - mb).norm() / (1.0 + mb.norm())
}

struct Tracker {
    name: &'static str,
    samples: usize,
    max: f64,
    tolerance: f64,
}

impl Tracker {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self { name, samples: 0, max: 0.0, tolerance }
    }

    fn push(&mut self, r: f64) {
        self.samples += 1;
        // NaN must never look like a pass.
        self.max = if r.is_nan() { f64::INFINITY } else { self.max.max(r) };
    }

    fn finish(self) -> CheckResult {
        CheckResult {
            name: self.name,
            samples: self.samples,
            max_residual: self.max,
            tolerance: self.tolerance,
        }
    }
}

const STEP: f64 = 0.01;

/// Runs every check with `samples` random draws each.
pub fn run_checks(seed: u64, samples: usize) -> Result<Vec<CheckResult>, SimError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    let mut assoc = Tracker::new("group associativity", 1e-10);
    let mut inv = Tracker::new("group inverse", 1e-10);
    let mut explog = Tracker::new("exp/log roundtrip", 1e-9);
    let mut hom = Tracker::new("adjoint homomorphism", 1e-10);
    for _ in 0..samples {
        let (x, y, z) = (group(&mut rng, 2.0), group(&mut rng, 2.0), group(&mut rng, 2.0));
        assoc.push(group_rel(&x.compose(&y).compose(&z), &x.compose(&y.compose(&z))));
        inv.push(group_rel(&x.compose(&x.inverse()), &Sim3::identity()));
        let v = Sim3Algebra::<f64>::from_fn(|_, _| rng.random_range(-1.0..1.0)) * 1.5;
        explog.push((Sim3::exp(&v).log()? - v).norm());
        let lhs = x.compose(&y).adjoint();
        hom.push((lhs - x.adjoint() * y.adjoint()).norm() / (1.0 + lhs.norm()));
    }
    out.extend([assoc.finish(), inv.finish(), explog.finish(), hom.finish()]);

    let mut phi = Tracker::new("state action axiom", 1e-10);
    let mut psi = Tracker::new("input action axiom", 1e-10);
    let mut compat = Tracker::new("dynamics equivariance", 1e-10);
    let mut lift = Tracker::new("lift condition", 1e-9);
    let mut lift_eq = Tracker::new("lift equivariance", 1e-9);
    for _ in 0..samples {
        let (x, y) = (group(&mut rng, 2.0), group(&mut rng, 2.0));
        let (xi, u) = (state(&mut rng), input(&mut rng));
        phi.push(rel(&act_phi(&x, &act_phi(&y, &xi)), &act_phi(&y.compose(&x), &xi)));
        psi.push(input_rel(&act_psi(&x, &act_psi(&y, &u)), &act_psi(&y.compose(&x), &u)));
        let moved = f_discrete(&act_phi(&x, &xi), &act_psi(&x, &u), STEP);
        compat.push(rel(&moved, &act_phi(&x, &f_discrete(&xi, &u, STEP))));
        let l = lift_lambda(&xi, &u, STEP)?;
        lift.push(rel(&act_phi(&l, &xi), &f_discrete(&xi, &u, STEP)));
        let l_moved = lift_lambda(&act_phi(&x, &xi), &act_psi(&x, &u), STEP)?;
        lift_eq.push(group_rel(&l_moved, &x.inverse().compose(&l).compose(&x)));
    }
    out.extend([phi.finish(), psi.finish(), compat.finish(), lift.finish(), lift_eq.finish()]);

    // Composing lifts along a trajectory reproduces the direct recursion.
    let mut projection = Tracker::new("lifted trajectory projection", 1e-8);
    for _ in 0..samples.div_ceil(100) {
        let xi0 = state(&mut rng);
        let (mut direct, mut lifted) = (xi0, Sim3::identity());
        for _ in 0..100 {
            let u = KinematicInput::from_accel(vec3(&mut rng, 3.0));
            let l = lift_lambda(&direct, &u, STEP)?;
            lifted = lifted.compose(&l);
            direct = f_discrete(&direct, &u, STEP);
            projection.push(rel(&act_phi(&lifted, &xi0), &direct));
        }
    }
    out.push(projection.finish());

    let mut a_fd = Tracker::new("state matrix vs finite differences", 1e-5);
    let mut c_fd = Tracker::new("output matrix vs finite differences", 1e-5);
    let mut chart = Tracker::new("chart roundtrip", 1e-9);
    let mut transport = Tracker::new("transport at zero correction", 1e-12);
    for _ in 0..samples.div_ceil(10) {
        let sys = SecondOrderKinematics::new(state(&mut rng), STEP)?;
        let u0 = KinematicInput::from_accel(vec3(&mut rng, 3.0));
        let a = sys.state_matrix(&u0)?;
        let a_num = state_matrix_numeric(&sys, &u0, FD_STEP)?;
        a_fd.push(relative_error(&a, &a_num));
        let xhat = group(&mut rng, 1.0);
        let c = sys.output_matrix(&xhat)?;
        let c_num = output_matrix_numeric(&sys, &xhat, FD_STEP)?;
        c_fd.push(relative_error(&c, &c_num));
        let eps = Vector6::from_fn(|_, _| rng.random_range(-0.3..0.3));
        chart.push((sys.chart_inv(&sys.chart(&eps))? - eps).norm());
        let t = transport_matrix(&sys, &DVector::zeros(7))?;
        transport.push((t - DMatrix::identity(6, 6)).norm());
    }
    out.extend([a_fd.finish(), c_fd.finish(), chart.finish(), transport.finish()]);
    Ok(out)
}
