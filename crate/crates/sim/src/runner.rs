//! Single runs and Monte-Carlo batches.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use eqf_core::baselines::{ekf_predict, ekf_update_position, EkfBelief};
use eqf_core::filter::{filter_energy, EquivariantFilter, FilterOptions, ResetMode};
use eqf_core::kinematics::{KinematicInput, KinematicState, SecondOrderKinematics};
use nalgebra::{DMatrix, DVector, Matrix3, Matrix6, Vector3, Vector6};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{FilterGains, SimConfig};
use crate::error::SimError;
use crate::noise::{corrupt_measurements, gaussian, Measurement};
use crate::truth::{simulate_truth, Trajectory};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FilterKind {
    #[serde(rename = "eqf")]
    Eqf,
    #[serde(rename = "eqf-noreset")]
    EqfNoReset,
    /// Reset transport with the left-trivialized sign, for ablation.
    #[serde(rename = "eqf-left")]
    EqfLeft,
    #[serde(rename = "ekf")]
    Ekf,
}

impl FilterKind {
    pub const ALL: [FilterKind; 4] = [FilterKind::Eqf, FilterKind::EqfNoReset, FilterKind::EqfLeft, FilterKind::Ekf];

    pub fn name(self) -> &'static str {
        match self {
            FilterKind::Eqf => "eqf",
            FilterKind::EqfNoReset => "eqf-noreset",
            FilterKind::EqfLeft => "eqf-left",
            FilterKind::Ekf => "ekf",
        }
    }
}

impl fmt::Display for FilterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FilterKind {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, SimError> {
        FilterKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| SimError::Config(format!("unknown filter '{s}' (expected eqf, eqf-noreset, eqf-left or ekf)")))
    }
}

/// One CSV row: a filter's estimate and metrics at one sample.
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub run: usize,
    pub t: f64,
    pub filter: FilterKind,
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
    pub pos_err: f64,
    pub vel_err: f64,
    pub energy: f64,
}

/// A filter that stopped early in one run.
#[derive(Clone, Debug, PartialEq)]
pub struct Failure {
    pub run: usize,
    pub filter: FilterKind,
    pub t: f64,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub run: usize,
    pub rows: Vec<Row>,
    pub failures: Vec<Failure>,
}

impl RunRecord {
    pub fn rows_for(&self, kind: FilterKind) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(move |r| r.filter == kind)
    }
}

fn process_state_cov(sigma_a: f64, t: f64) -> Matrix6<f64> {
    let var = sigma_a * sigma_a;
    let mut p = Matrix6::zeros();
    for i in 0..3 {
        p[(i, i)] = var * t.powi(4) / 4.0;
        p[(i + 3, i + 3)] = var * t * t;
    }
    p
}

fn prior_state_cov(gains: &FilterGains) -> Matrix6<f64> {
    let (pp, pv) = (gains.prior_p * gains.prior_p, gains.prior_v * gains.prior_v);
    Matrix6::from_diagonal(&Vector6::new(pp, pp, pp, pv, pv, pv))
}

/// State-space covariance expressed in chart coordinates, `J⁻¹ S J⁻ᵀ`.
fn to_chart(sys: &SecondOrderKinematics<f64>, s: &Matrix6<f64>) -> Result<DMatrix<f64>, SimError> {
    let ji = sys
        .chart_diff_matrix()
        .try_inverse()
        .ok_or(eqf_core::Error::Singular("chart differential"))?;
    let c = ji * s * ji.transpose();
    let c = (c + c.transpose()) * 0.5;
    Ok(DMatrix::from_fn(6, 6, |i, j| c[(i, j)]))
}

/// Stacked `(bearing, range)` covariance around the predicted bearing.
pub fn measurement_covariance(predicted_bearing: &Vector3<f64>, gains: &FilterGains) -> DMatrix<f64> {
    let yy = predicted_bearing * predicted_bearing.transpose();
    let block = (Matrix3::identity() - yy) * gains.sigma_bearing.powi(2) + yy * gains.radial_variance;
    let mut q = DMatrix::zeros(4, 4);
    q.view_mut((0, 0), (3, 3)).copy_from(&block);
    q[(3, 3)] = gains.sigma_range.powi(2);
    q
}

enum Tracker {
    Equivariant(Box<EquivariantFilter<f64, SecondOrderKinematics<f64>>>),
    Flat {
        belief: EkfBelief<f64>,
        process: Matrix6<f64>,
    },
}

impl Tracker {
    fn new(
        kind: FilterKind,
        initial: &KinematicState<f64>,
        gains: &FilterGains,
        cfg: &SimConfig,
    ) -> Result<Self, SimError> {
        let t = cfg.sample_interval();
        let process = process_state_cov(gains.sigma_accel, t);
        let prior = prior_state_cov(gains);
        match kind {
            FilterKind::Eqf | FilterKind::EqfNoReset | FilterKind::EqfLeft => {
                let sys = SecondOrderKinematics::new(*initial, t)?;
                let reset = match kind {
                    FilterKind::Eqf => ResetMode::ParallelTransport,
                    FilterKind::EqfLeft => ResetMode::LeftTrivialized,
                    _ => ResetMode::BasePointOnly,
                };
                let options = FilterOptions {
                    reset,
                    chart_radius: cfg.chart_radius,
                    jacobian_check: None,
                };
                let sigma0 = to_chart(&sys, &prior)?;
                let p = to_chart(&sys, &process)?;
                Ok(Tracker::Equivariant(Box::new(EquivariantFilter::new(sys, sigma0, p, options)?)))
            }
            FilterKind::Ekf => Ok(Tracker::Flat {
                belief: EkfBelief::new(initial.to_vector(), prior),
                process,
            }),
        }
    }

    fn step(&mut self, m: &Measurement, gains: &FilterGains, t: f64) -> Result<(), SimError> {
        match self {
            Tracker::Equivariant(f) => {
                f.predict(&KinematicInput::from_accel(m.accel))?;
                let predicted = f.estimate().position.normalize();
                let y = DVector::from_column_slice(&[m.bearing.x, m.bearing.y, m.bearing.z, m.range]);
                f.update(&y, &measurement_covariance(&predicted, gains))?;
            }
            Tracker::Flat { belief, process } => {
                let predicted = ekf_predict(belief, &m.accel, t, process)?;
                *belief = ekf_update_position(&predicted, &m.bearing, m.range, gains.sigma_bearing, gains.sigma_range)?;
            }
        }
        Ok(())
    }

    fn estimate(&self) -> KinematicState<f64> {
        match self {
            Tracker::Equivariant(f) => f.estimate(),
            Tracker::Flat { belief, .. } => KinematicState::from_vector(&belief.mean),
        }
    }

    fn energy(&self, truth: &KinematicState<f64>) -> f64 {
        let value = match self {
            Tracker::Equivariant(f) => f.energy(truth),
            Tracker::Flat { belief, .. } => {
                let e = truth.to_vector() - belief.mean;
                let cov = DMatrix::from_fn(6, 6, |i, j| belief.covariance[(i, j)]);
                filter_energy(&DVector::from_column_slice(e.as_slice()), &cov)
            }
        };
        value.unwrap_or(f64::NAN)
    }
}

fn row(run: usize, t: f64, kind: FilterKind, est: &KinematicState<f64>, truth: &KinematicState<f64>, energy: f64) -> Row {
    Row {
        run,
        t,
        filter: kind,
        position: est.position,
        velocity: est.velocity,
        pos_err: (est.position - truth.position).norm(),
        vel_err: (est.velocity - truth.velocity).norm(),
        energy,
    }
}

/// Per-run RNG: the batch seed selects the key, the run index the stream.
pub fn run_rng(seed: u64, run: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run as u64);
    rng
}

/// Runs every configured filter on one noise realization.
///
/// A filter that errors (for example a local mean outside the chart radius)
/// stops for the rest of the run and is reported in `failures`.
pub fn run_experiment(
    cfg: &SimConfig,
    truth: &Trajectory,
    run: usize,
    filters: &[FilterKind],
) -> Result<RunRecord, SimError> {
    let gains = cfg.gains()?;
    let mut rng = run_rng(cfg.seed, run);
    let x0 = &truth.samples[0];
    let dp = Vector3::from_fn(|_, _| cfg.sigma_p0 * gaussian(&mut rng));
    let dv = Vector3::from_fn(|_, _| cfg.sigma_v0 * gaussian(&mut rng));
    let initial = KinematicState::new(x0.position + dp, x0.velocity + dv);
    let measurements = corrupt_measurements(truth, cfg, &mut rng);
    let t = cfg.sample_interval();

    let mut rows = Vec::with_capacity(filters.len() * truth.samples.len());
    let mut failures = Vec::new();
    for &kind in filters {
        let truth0 = KinematicState::new(x0.position, x0.velocity);
        let mut tracker = match Tracker::new(kind, &initial, &gains, cfg) {
            Ok(tr) => tr,
            Err(e) => {
                failures.push(Failure { run, filter: kind, t: 0.0, message: e.to_string() });
                continue;
            }
        };
        rows.push(row(run, 0.0, kind, &tracker.estimate(), &truth0, tracker.energy(&truth0)));
        for (m, s) in measurements.iter().zip(&truth.samples[1..]) {
            if let Err(e) = tracker.step(m, &gains, t) {
                failures.push(Failure { run, filter: kind, t: s.t, message: e.to_string() });
                break;
            }
            let xi = KinematicState::new(s.position, s.velocity);
            rows.push(row(run, s.t, kind, &tracker.estimate(), &xi, tracker.energy(&xi)));
        }
    }
    Ok(RunRecord { run, rows, failures })
}

/// Runs `runs` independent realizations in parallel; output is ordered by run index.
pub fn monte_carlo(cfg: &SimConfig, runs: usize, filters: &[FilterKind]) -> Result<Vec<RunRecord>, SimError> {
    cfg.validate()?;
    let truth = simulate_truth(cfg);
    (0..runs)
        .into_par_iter()
        .map(|run| run_experiment(cfg, &truth, run, filters))
        .collect()
}

/// Per-sample statistics across runs for one filter.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Curve {
    pub t: Vec<f64>,
    pub mean_pos_err: Vec<f64>,
    pub median_pos_err: Vec<f64>,
    pub mean_vel_err: Vec<f64>,
    pub median_vel_err: Vec<f64>,
    pub mean_energy: Vec<f64>,
    /// Runs contributing at each sample.
    pub count: Vec<usize>,
}

impl Curve {
    /// Mean of `values` over samples with `t0 ≤ t ≤ t1`.
    pub fn window_mean(&self, values: &[f64], t0: f64, t1: f64) -> f64 {
        let eps = 1e-9;
        let (sum, n) = self
            .t
            .iter()
            .zip(values)
            .filter(|(t, _)| **t >= t0 - eps && **t <= t1 + eps)
            .fold((0.0, 0usize), |(s, n), (_, v)| (s + v, n + 1));
        if n == 0 {
            f64::NAN
        } else {
            sum / n as f64
        }
    }

    /// First sample time at which `values` drops below `threshold`.
    pub fn first_below(&self, values: &[f64], threshold: f64) -> Option<f64> {
        self.t.iter().zip(values).find(|(_, v)| **v < threshold).map(|(t, _)| *t)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Summary {
    pub runs: usize,
    pub curves: BTreeMap<FilterKind, Curve>,
    pub failures: Vec<Failure>,
}

fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Reduces run records in run-index order. Non-finite energies are skipped.
pub fn aggregate(records: &[RunRecord], filters: &[FilterKind]) -> Summary {
    let mut curves = BTreeMap::new();
    for &kind in filters {
        let mut by_sample: Vec<(f64, Vec<f64>, Vec<f64>, Vec<f64>)> = Vec::new();
        for rec in records {
            for (k, r) in rec.rows_for(kind).enumerate() {
                if by_sample.len() <= k {
                    by_sample.push((r.t, Vec::new(), Vec::new(), Vec::new()));
                }
                let slot = &mut by_sample[k];
                slot.1.push(r.pos_err);
                slot.2.push(r.vel_err);
                if r.energy.is_finite() {
                    slot.3.push(r.energy);
                }
            }
        }
        let mut c = Curve::default();
        for (t, mut pos, mut vel, energy) in by_sample {
            let mean = |v: &[f64]| if v.is_empty() { f64::NAN } else { v.iter().sum::<f64>() / v.len() as f64 };
            c.t.push(t);
            c.count.push(pos.len());
            c.mean_pos_err.push(mean(&pos));
            c.mean_vel_err.push(mean(&vel));
            c.mean_energy.push(mean(&energy));
            c.median_pos_err.push(median(&mut pos));
            c.median_vel_err.push(median(&mut vel));
        }
        curves.insert(kind, c);
    }
    Summary {
        runs: records.len(),
        curves,
        failures: records.iter().flat_map(|r| r.failures.iter().cloned()).collect(),
    }
}
