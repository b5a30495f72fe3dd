mod common;

use common::*;
use eqf_core::kinematics::{
    act_phi, act_psi, f_discrete, h_bearing, h_range, lift_lambda, KinematicInput, KinematicState,
    SecondOrderKinematics,
};
use eqf_core::lie::{Sim3, SO3};
use nalgebra::{Vector3, Vector6};
use proptest::prelude::*;
use rand::Rng;

const T: f64 = 0.01;

fn rel(a: &KinematicState<f64>, b: &KinematicState<f64>) -> f64 {
    state_residual(a, b) / (1.0 + b.to_vector().norm())
}

#[test]
fn phi_is_a_right_action() {
    let mut rng = rng(20);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let (x, y) = (random_group(&mut rng, 2.0), random_group(&mut rng, 2.0));
        let xi = random_state(&mut rng);
        let lhs = act_phi(&y, &act_phi(&x, &xi));
        let rhs = act_phi(&x.compose(&y), &xi);
        worst = worst.max(rel(&lhs, &rhs));
    }
    assert!(worst < 1e-10, "{worst}");
}

#[test]
fn psi_is_a_right_action() {
    let mut rng = rng(21);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let (x, y) = (random_group(&mut rng, 2.0), random_group(&mut rng, 2.0));
        let u = random_input(&mut rng);
        let lhs = act_psi(&y, &act_psi(&x, &u));
        let rhs = act_psi(&x.compose(&y), &u);
        let scale = 1.0 + rhs.omega.norm() + rhs.accel.norm();
        worst = worst.max(((lhs.omega - rhs.omega).norm() + (lhs.accel - rhs.accel).norm()) / scale);
        let back = act_psi(&x.inverse(), &act_psi(&x, &u));
        assert!((back.omega - u.omega).norm() + (back.accel - u.accel).norm() < 1e-12 * scale.max(10.0));
    }
    assert!(worst < 1e-10, "{worst}");
}

#[test]
fn dynamics_are_equivariant() {
    let mut rng = rng(22);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let x = random_group(&mut rng, 2.0);
        let xi = random_state(&mut rng);
        let u = random_input(&mut rng);
        let lhs = act_phi(&x, &f_discrete(&xi, &u, T));
        let rhs = f_discrete(&act_phi(&x, &xi), &act_psi(&x, &u), T);
        worst = worst.max(rel(&lhs, &rhs));
    }
    assert!(worst < 1e-9, "{worst}");
}

#[test]
fn lift_condition_and_equivariance() {
    let mut rng = rng(23);
    let (mut cond, mut equi): (f64, f64) = (0.0, 0.0);
    for _ in 0..10_000 {
        let xi = random_state(&mut rng);
        let u = random_input(&mut rng);
        let x = random_group(&mut rng, 2.0);
        let lift = lift_lambda(&xi, &u, T).unwrap();
        cond = cond.max(rel(&act_phi(&lift, &xi), &f_discrete(&xi, &u, T)));

        let lhs = lift_lambda(&act_phi(&x, &xi), &act_psi(&x, &u), T).unwrap();
        let rhs = x.inverse().compose(&lift).compose(&x);
        equi = equi.max((matrix_of(&lhs) - matrix_of(&rhs)).amax());
    }
    assert!(cond < 1e-9, "lift condition {cond}");
    assert!(equi < 1e-9, "lift equivariance {equi}");
}

#[test]
fn lift_condition_for_large_steps() {
    let mut rng = rng(24);
    for _ in 0..1000 {
        let xi = random_state(&mut rng);
        let u = random_input(&mut rng);
        let t = rng.random_range(0.1..2.0);
        if let Some(lift) = unwrap_degenerate(lift_lambda(&xi, &u, t)) {
            assert!(rel(&act_phi(&lift, &xi), &f_discrete(&xi, &u, t)) < 1e-9);
        }
    }
}

#[test]
fn lifted_trajectory_projects_to_direct_trajectory() {
    let mut rng = rng(25);
    for _ in 0..20 {
        let origin = random_state(&mut rng);
        let mut direct = origin;
        let mut x = Sim3::identity();
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let u = KinematicInput::from_accel(uniform_vec3(&mut rng, 3.0));
            x = x.compose(&lift_lambda(&act_phi(&x, &origin), &u, T).unwrap());
            direct = f_discrete(&direct, &u, T);
            worst = worst.max(state_residual(&act_phi(&x, &origin), &direct));
        }
        assert!(worst < 1e-8, "{worst}");
    }
}

#[test]
fn action_is_transitive() {
    let mut rng = rng(26);
    for _ in 0..1000 {
        let a = random_state(&mut rng);
        let b = random_state(&mut rng);
        // rotation aligning b's bearing with a's, so Rᵀ p_a ∥ p_b
        let (pa, pb) = (a.position.normalize(), b.position.normalize());
        let axis = pb.cross(&pa);
        let angle = axis.norm().atan2(pb.dot(&pa));
        let rot = SO3::exp(&(axis.normalize() * angle));
        let r = a.position.norm() / b.position.norm();
        let beta = a.velocity - rot.act(&b.velocity) * r;
        let x = Sim3::new(rot, r, beta).unwrap();
        assert!(state_residual(&act_phi(&x, &a), &b) < 1e-9);
    }
}

#[test]
fn bearing_equivariance() {
    let mut rng = rng(27);
    for _ in 0..1000 {
        let x = random_group(&mut rng, 2.0);
        let xi = random_state(&mut rng);
        let lhs = h_bearing(&act_phi(&x, &xi)).unwrap();
        let rhs = x.rotation().matrix().transpose() * h_bearing(&xi).unwrap();
        assert!((lhs - rhs).norm() < 1e-12);
        assert!((h_bearing(&xi).unwrap().norm() - 1.0).abs() < 1e-12);
        let range = h_range(&act_phi(&x, &xi)).unwrap();
        assert!((range - h_range(&xi).unwrap() / x.scale()).abs() < 1e-10 * range.max(1.0));
    }
}

#[test]
fn discrete_step_matches_continuous_kinematics() {
    let mut rng = rng(28);
    let h = 1e-6;
    for _ in 0..100 {
        let xi = random_state(&mut rng);
        let a = uniform_vec3(&mut rng, 3.0);
        let u = KinematicInput::from_accel(a);
        let next = f_discrete(&xi, &u, h);
        let slope_p = (next.position - xi.position) / h;
        let slope_v = (next.velocity - xi.velocity) / h;
        assert!((slope_p - xi.velocity).norm() <= 1e-4 * xi.velocity.norm().max(1e-3) + 1e-6);
        assert!((slope_v - a).norm() <= 1e-4 * a.norm());
        let zero = f_discrete(&xi, &u, 0.0);
        assert_eq!(zero, xi);
    }
}

fn system(rng: &mut rand_chacha::ChaCha8Rng) -> SecondOrderKinematics<f64> {
    SecondOrderKinematics::new(random_state(rng), T).unwrap()
}

#[test]
fn chart_roundtrip() {
    let mut rng = rng(29);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let sys = system(&mut rng);
        let dir = Vector6::from_fn(|_, _| rng.random_range(-1.0..1.0)).normalize();
        let eps = dir * rng.random_range(0.0..0.5);
        let back = sys.chart_inv(&sys.chart(&eps)).unwrap();
        worst = worst.max((back - eps).norm());
    }
    assert!(worst < 1e-9, "{worst}");
}

#[test]
fn chart_inverse_roundtrip_on_states() {
    let mut rng = rng(30);
    for _ in 0..1000 {
        let sys = system(&mut rng);
        let origin = *sys.origin_state();
        let xi = KinematicState::new(
            origin.position + uniform_vec3(&mut rng, 0.2 * origin.position.norm()),
            origin.velocity + uniform_vec3(&mut rng, 10.0),
        );
        let eps = sys.chart_inv(&xi).unwrap();
        assert!(rel(&sys.chart(&eps), &xi) < 1e-12);
    }
}

#[test]
fn closed_form_chart_agrees_with_newton() {
    let mut rng = rng(31);
    for _ in 0..200 {
        let sys = system(&mut rng);
        let eps = Vector6::from_fn(|_, _| rng.random_range(-0.3..0.3));
        let xi = sys.chart(&eps);
        let newton = sys.chart_inv_newton(&xi).unwrap();
        let closed = sys.chart_inv(&xi).unwrap();
        assert!((newton - closed).norm() < 1e-9, "{}", (newton - closed).norm());
        assert!((newton - eps).norm() < 1e-9);
    }
}

#[test]
fn newton_reports_failure_outside_domain() {
    let sys = SecondOrderKinematics::new(
        KinematicState::new(Vector3::new(0.0, 0.0, 50.0), Vector3::zeros()),
        T,
    )
    .unwrap();
    let far = KinematicState::new(Vector3::new(0.0, 0.0, -50.0), Vector3::zeros());
    assert!(sys.chart_inv_newton(&far).is_err());
}

#[test]
fn stabilizer_and_rank() {
    let mut rng = rng(32);
    for _ in 0..1000 {
        let sys = system(&mut rng);
        let d = dphi_oracle(sys.origin_state());
        assert!((d - sys.dphi_matrix()).amax() < 1e-14);
        let k = d * sys.stabilizer_generator();
        assert!(k.norm() < 1e-12 * (1.0 + sys.origin_state().to_vector().norm()));
        let sv = d.svd(false, false).singular_values;
        assert_eq!(sv.iter().filter(|s| **s > 1e-9 * sv.max()).count(), 6);
    }
}

#[test]
fn right_inverse_of_dphi() {
    let mut rng = rng(33);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let sys = system(&mut rng);
        let w = Vector6::from_fn(|_, _| rng.random_range(-10.0..10.0));
        let v = sys.dphi_origin_pinv(&w);
        let d = dphi_oracle(sys.origin_state());
        worst = worst.max((d * v - w).norm() / w.norm());
        let omega = Vector3::new(v[0], v[1], v[2]);
        let ph = sys.origin_state().position.normalize();
        assert!(omega.dot(&ph).abs() < 1e-12 * omega.norm().max(1.0));
    }
    assert!(worst < 1e-10, "{worst}");
}

#[test]
fn chart_basis_spans_horizontal_plane() {
    let mut rng = rng(34);
    for _ in 0..100 {
        let sys = system(&mut rng);
        let e = sys.rotation_basis();
        let ph = sys.origin_state().position.normalize();
        assert!((e.transpose() * e - nalgebra::Matrix2::identity()).amax() < 1e-14);
        assert!((e.transpose() * ph).amax() < 1e-14);
    }
}

fn finite_state() -> impl Strategy<Value = KinematicState<f64>> {
    (
        proptest::array::uniform3(-50.0f64..50.0),
        proptest::array::uniform3(-5.0f64..5.0),
    )
        .prop_filter("nonzero position", |(p, _)| Vector3::from(*p).norm() > 1.0)
        .prop_map(|(p, v)| KinematicState::new(Vector3::from(p), Vector3::from(v)))
}

proptest! {
    #[test]
    fn prop_lift_condition(xi in finite_state(), a in proptest::array::uniform3(-3.0f64..3.0)) {
        let u = KinematicInput::from_accel(Vector3::from(a));
        let lift = lift_lambda(&xi, &u, T).unwrap();
        prop_assert!(rel(&act_phi(&lift, &xi), &f_discrete(&xi, &u, T)) < 1e-9);
    }

    #[test]
    fn prop_chart_roundtrip(origin in finite_state(), eps in proptest::array::uniform6(-0.08f64..0.08)) {
        let sys = SecondOrderKinematics::new(origin, T).unwrap();
        let eps = Vector6::from_column_slice(&eps);
        prop_assert!((sys.chart_inv(&sys.chart(&eps)).unwrap() - eps).norm() < 1e-9);
    }
}
