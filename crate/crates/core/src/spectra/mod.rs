//! Homodyne output records, windowed periodograms and the analytic
//! Bessel-series spectra used as oracles.

mod analytic;
pub mod bessel;
mod homodyne;
mod periodogram;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use analytic::{
    analytic_calibration_spectrum, analytic_sideband_spectrum, effective_force, sideband_amplitude,
    steady_amplitude, SeriesForm, DEFAULT_N_MAX, MAX_N_MAX,
};
pub use homodyne::homodyne;
pub use periodogram::{periodogram, periodogram_with, SpectrumWindow, WindowFn};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectraError {
    #[error("series length mismatch: {what} ({left} vs {right})")]
    LengthMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },
    #[error("invalid time series: {0}")]
    InvalidSeries(String),
    #[error("window [{start:.6e}, {end:.6e}] s lies outside the record [{t0:.6e}, {t_end:.6e}] s")]
    WindowOutOfRange {
        start: f64,
        end: f64,
        t0: f64,
        t_end: f64,
    },
    #[error("Bessel series not converged; retry with n_max >= {suggested_n_max}")]
    NotConverged { suggested_n_max: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Uniformly sampled real record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub t0: f64,
    pub dt_sample: f64,
    pub values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(t0: f64, dt_sample: f64, values: Vec<f64>) -> Result<Self, SpectraError> {
        if !(dt_sample.is_finite() && dt_sample > 0.0) {
            return Err(SpectraError::InvalidSeries(format!(
                "sample spacing must be positive, got {dt_sample}"
            )));
        }
        if !t0.is_finite() {
            return Err(SpectraError::InvalidSeries("t0 is not finite".into()));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(SpectraError::InvalidSeries(format!(
                "non-finite value at sample {k}"
            )));
        }
        Ok(Self {
            t0,
            dt_sample,
            values,
        })
    }

    pub(crate) fn new_unchecked(t0: f64, dt_sample: f64, values: Vec<f64>) -> Self {
        Self {
            t0,
            dt_sample,
            values,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Time just past the last sample; the record covers `[t0, t_end)`.
    pub fn t_end(&self) -> f64 {
        self.t0 + self.values.len() as f64 * self.dt_sample
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt_sample
    }
}

/// Which family a tabulated line belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Line {
    /// Motion of the oscillator (the sideband ladder at u·ω′_b).
    Mechanical,
    /// Phase modulation of the calibration drive at Ω_c.
    Modulation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SidebandEntry {
    pub u: i32,
    pub omega: f64,
    /// Coefficient of δ(ω − omega).
    pub weight: f64,
    pub line: Line,
}

/// Delta-peak spectrum: line positions and weights, sorted by order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SidebandTable {
    pub entries: Vec<SidebandEntry>,
}

impl SidebandTable {
    pub(crate) fn from_entries(mut entries: Vec<SidebandEntry>) -> Self {
        entries.sort_by(|x, y| x.u.cmp(&y.u).then(x.omega.total_cmp(&y.omega)));
        Self { entries }
    }

    pub fn get(&self, line: Line, u: i32) -> Option<&SidebandEntry> {
        self.entries.iter().find(|e| e.line == line && e.u == u)
    }

    /// Weight of the mechanical line of order `u` (0 when absent).
    pub fn weight(&self, u: i32) -> f64 {
        self.get(Line::Mechanical, u).map_or(0.0, |e| e.weight)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
