//! Peak localisation, amplitude calibration, sideband regression and
//! ensemble statistics.

mod calibration;
mod peaks;
mod pipeline;
mod purity;
mod regression;
mod sidebands;
mod stats;

use thiserror::Error;

pub use calibration::{
    calibrate_amplitude, calibrate_from_powers, CalibrationForm, CalibrationOptions,
    CalibrationReading,
};
pub use peaks::{find_peak, find_peak_with, Peak, DEFAULT_MIN_SNR};
pub use pipeline::{
    analyze, analyze_series, AnalysisMode, AnalysisPlan, RunAnalysis, WindowFailure,
};
pub use purity::{ensemble_purity, purity_from_samples, PurityEstimate, MIN_TRAJECTORIES};
pub use regression::{regress_beta, regress_beta_with, FitPoint, FitResult, FitWeighting};
pub use sidebands::{extract_sidebands, SidebandOptions, SidebandPeak, WindowObservation};
pub use stats::{aggregate, aggregate_er, error_metric, percentile, EnsembleStats};

use crate::model::ModelError;
use crate::spectra::SpectraError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimationError {
    #[error("no peak in [{lo:.6e}, {hi:.6e}] rad/s (snr {snr:.2} below {threshold})")]
    NoPeak {
        lo: f64,
        hi: f64,
        snr: f64,
        threshold: f64,
    },
    #[error("search band [{lo:.6e}, {hi:.6e}] rad/s: {reason}")]
    InvalidBand { lo: f64, hi: f64, reason: String },
    #[error("calibration failed: {0}")]
    CalibrationFailed(String),
    #[error("insufficient sidebands: found {found}, need at least {needed}")]
    InsufficientSidebands { found: usize, needed: usize },
    #[error("regression needs at least {needed} points, got {found}")]
    InsufficientPoints { found: usize, needed: usize },
    #[error("degenerate fit: all amplitudes are equal")]
    DegenerateFit,
    #[error("no valid results to aggregate ({undefined} undefined)")]
    NoValidResults { undefined: usize },
    #[error("purity needs at least {needed} trajectories, got {found}")]
    InsufficientTrajectories { found: usize, needed: usize },
    #[error(
        "singular quadrature covariance: purity requires a stochastic ensemble (enable noise)"
    )]
    SingularCovariance,
    #[error("no window produced an observation: {0}")]
    NoObservations(String),
    #[error("invalid analysis plan: {0}")]
    InvalidPlan(String),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
    #[error(transparent)]
    Model(#[from] ModelError),
}
