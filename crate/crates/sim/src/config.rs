//! Experiment configuration, read from TOML. Unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::SimError;
use crate::runner::FilterKind;

/// Truth acceleration `a(τ) = (0, g(τ), 0)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    /// `g(τ) = cos τ`, evaluated at every integration substep.
    #[default]
    Cosine,
    /// `cos` held at the value of the last sample instant, so the truth is
    /// exactly piecewise constant at the sample rate.
    CosineHold,
    Zero,
}

impl Profile {
    /// Acceleration at time `tau` inside the sample interval starting at `t_sample`.
    pub fn accel(self, tau: f64, t_sample: f64) -> [f64; 3] {
        match self {
            Profile::Cosine => [0.0, tau.cos(), 0.0],
            Profile::CosineHold => [0.0, t_sample.cos(), 0.0],
            Profile::Zero => [0.0; 3],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    /// Simulated time in seconds.
    pub duration: f64,
    /// Truth integration step in seconds.
    pub truth_step: f64,
    /// Measurement and filter rate in Hz.
    pub sample_rate: f64,
    pub initial_position: [f64; 3],
    pub initial_velocity: [f64; 3],
    pub profile: Profile,

    /// Accelerometer noise standard deviation per axis (m/s²), held over each sample interval.
    pub sigma_accel: f64,
    /// Bearing noise: rotation angle standard deviation in degrees.
    pub sigma_bearing_deg: f64,
    /// Range noise standard deviation (m).
    pub sigma_range: f64,
    /// Initial estimate error per axis (m and m/s).
    pub sigma_p0: f64,
    pub sigma_v0: f64,

    /// Gains given to the filters. Unset means "the true noise value".
    pub filter_sigma_accel: Option<f64>,
    pub filter_sigma_bearing_deg: Option<f64>,
    pub filter_sigma_range: Option<f64>,
    pub prior_sigma_p0: Option<f64>,
    pub prior_sigma_v0: Option<f64>,
    /// Variance along the measured bearing, keeps the bearing block invertible.
    pub bearing_radial_variance: f64,

    /// Largest local-mean norm accepted by the reset.
    pub chart_radius: f64,
    pub seed: u64,
    pub runs: usize,
    pub filters: Vec<FilterKind>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            duration: 10.0,
            truth_step: 1e-4,
            sample_rate: 100.0,
            initial_position: [0.0, 0.0, 50.0],
            initial_velocity: [0.0; 3],
            profile: Profile::Cosine,
            sigma_accel: 0.05f64.sqrt(),
            sigma_bearing_deg: 1.0,
            sigma_range: 1.0,
            sigma_p0: 7.5,
            sigma_v0: 2.0,
            filter_sigma_accel: None,
            filter_sigma_bearing_deg: None,
            filter_sigma_range: None,
            prior_sigma_p0: None,
            prior_sigma_v0: None,
            bearing_radial_variance: 1e-9,
            chart_radius: 10.0,
            seed: 0,
            runs: 100,
            filters: vec![FilterKind::Eqf, FilterKind::EqfNoReset, FilterKind::Ekf],
        }
    }
}

/// Noise levels and priors handed to the filters, all strictly positive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FilterGains {
    pub sigma_accel: f64,
    /// Per tangent axis, radians.
    pub sigma_bearing: f64,
    pub sigma_range: f64,
    pub prior_p: f64,
    pub prior_v: f64,
    pub radial_variance: f64,
}

impl SimConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, SimError> {
        let cfg: SimConfig = toml::from_str(text).map_err(|e| SimError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Filter step `1 / sample_rate`.
    pub fn sample_interval(&self) -> f64 {
        1.0 / self.sample_rate
    }

    pub fn num_samples(&self) -> usize {
        (self.duration * self.sample_rate).round() as usize
    }

    pub fn substeps(&self) -> usize {
        (self.sample_interval() / self.truth_step).round() as usize
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: String| Err(SimError::Config(msg));
        for (name, v) in [
            ("duration", self.duration),
            ("truth_step", self.truth_step),
            ("sample_rate", self.sample_rate),
            ("chart_radius", self.chart_radius),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        for (name, v) in [
            ("sigma_accel", self.sigma_accel),
            ("sigma_bearing_deg", self.sigma_bearing_deg),
            ("sigma_range", self.sigma_range),
            ("sigma_p0", self.sigma_p0),
            ("sigma_v0", self.sigma_v0),
            ("bearing_radial_variance", self.bearing_radial_variance),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be non-negative, got {v}"));
            }
        }
        let n = self.substeps();
        if n == 0 || (n as f64 * self.truth_step - self.sample_interval()).abs() > 1e-9 * self.sample_interval() {
            return bad(format!(
                "truth_step {} does not divide the sample interval {}",
                self.truth_step,
                self.sample_interval()
            ));
        }
        if self.initial_position.iter().all(|x| *x == 0.0) {
            return bad("initial_position must be nonzero".into());
        }
        if self.filters.is_empty() {
            return bad("filters must not be empty".into());
        }
        self.gains()?;
        Ok(())
    }

    /// Resolves the filter gains, falling back to the true noise levels.
    pub fn gains(&self) -> Result<FilterGains, SimError> {
        let pick = |name: &str, explicit: Option<f64>, truth: f64| -> Result<f64, SimError> {
            let v = explicit.unwrap_or(truth);
            if v.is_finite() && v > 0.0 {
                Ok(v)
            } else {
                Err(SimError::Config(format!(
                    "{name} resolves to {v}; filters need a positive value (set it explicitly for noiseless runs)"
                )))
            }
        };
        let bearing_deg = pick("filter_sigma_bearing_deg", self.filter_sigma_bearing_deg, self.sigma_bearing_deg)?;
        Ok(FilterGains {
            sigma_accel: pick("filter_sigma_accel", self.filter_sigma_accel, self.sigma_accel)?,
            sigma_bearing: bearing_deg.to_radians() / std::f64::consts::SQRT_2,
            sigma_range: pick("filter_sigma_range", self.filter_sigma_range, self.sigma_range)?,
            prior_p: pick("prior_sigma_p0", self.prior_sigma_p0, self.sigma_p0)?,
            prior_v: pick("prior_sigma_v0", self.prior_sigma_v0, self.sigma_v0)?,
            radial_variance: if self.bearing_radial_variance > 0.0 {
                self.bearing_radial_variance
            } else {
                return Err(SimError::Config("bearing_radial_variance must be positive".into()));
            },
        })
    }
}
