use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::integrator::IntegratorConfig;
use super::schedule::DriveSchedule;
use crate::model::SystemParams;
use crate::spectra::TimeSeries;

/// Recorded output of one integration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub b_samples: Vec<Complex64>,
    pub a_samples: Vec<Complex64>,
    pub m_c_samples: Vec<Complex64>,
    /// Phase-quadrature output of the nonlinear probe cavity.
    pub homodyne_alpha: Vec<f64>,
    /// Phase-quadrature output of the calibration probe.
    pub homodyne_mc: Vec<f64>,
    /// Spacing of `times`: dt · record_stride.
    pub record_dt: f64,
    /// Integration steps taken.
    pub steps: u64,
    pub params: SystemParams,
    pub schedule: DriveSchedule,
    pub config: IntegratorConfig,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn t0(&self) -> f64 {
        self.times.first().copied().unwrap_or(0.0)
    }

    pub fn alpha_series(&self) -> TimeSeries {
        TimeSeries::new_unchecked(self.t0(), self.record_dt, self.homodyne_alpha.clone())
    }

    pub fn mc_series(&self) -> TimeSeries {
        TimeSeries::new_unchecked(self.t0(), self.record_dt, self.homodyne_mc.clone())
    }

    /// Index of the recorded sample closest to `t`, if `t` lies within the record.
    pub fn index_at(&self, t: f64) -> Option<usize> {
        if self.is_empty() || self.record_dt <= 0.0 {
            return None;
        }
        let k = ((t - self.t0()) / self.record_dt).round();
        if k < 0.0 || k as usize >= self.len() {
            None
        } else {
            Some(k as usize)
        }
    }

    pub fn b_at(&self, t: f64) -> Option<Complex64> {
        self.index_at(t).map(|k| self.b_samples[k])
    }

    /// Largest |b|² in the record.
    pub fn max_b_sq(&self) -> f64 {
        self.b_samples
            .iter()
            .map(|b| b.norm_sqr())
            .fold(0.0, f64::max)
    }

    pub fn final_b(&self) -> Option<Complex64> {
        self.b_samples.last().copied()
    }
}
