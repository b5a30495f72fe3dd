//! Ground-truth trajectories.

use nalgebra::Vector3;

use crate::config::SimConfig;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruthSample {
    pub t: f64,
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    /// States at the sample instants `0, T, 2T, …`.
    pub samples: Vec<TruthSample>,
    /// Mean acceleration over each sample interval, i.e. what an ideal
    /// accelerometer integrating at the sample rate reports.
    pub mean_accel: Vec<Vector3<f64>>,
}

/// Integrates `ṗ = v`, `v̇ = a` with explicit substeps of `truth_step`.
///
/// Each substep samples `a` at its start and advances
/// `p += h v + ½h²a`, `v += h a`.
pub fn simulate_truth(cfg: &SimConfig) -> Trajectory {
    let n = cfg.num_samples();
    let m = cfg.substeps();
    let interval = cfg.sample_interval();
    let h = cfg.truth_step;
    let mut p = Vector3::from(cfg.initial_position);
    let mut v = Vector3::from(cfg.initial_velocity);
    let mut samples = Vec::with_capacity(n + 1);
    let mut mean_accel = Vec::with_capacity(n);
    samples.push(TruthSample { t: 0.0, position: p, velocity: v });
    for k in 0..n {
        let t_k = k as f64 * interval;
        let mut sum = Vector3::zeros();
        for j in 0..m {
            let tau = t_k + j as f64 * h;
            let a = Vector3::from(cfg.profile.accel(tau, t_k));
            p += v * h + a * (0.5 * h * h);
            v += a * h;
            sum += a;
        }
        mean_accel.push(sum / m as f64);
        samples.push(TruthSample {
            t: (k + 1) as f64 * interval,
            position: p,
            velocity: v,
        });
    }
    Trajectory { samples, mean_accel }
}
