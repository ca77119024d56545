//! Windowed analysis of a ringdown: calibrate each window, locate the
//! sidebands, then fit the frequency–amplitude law over all windows.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::calibration::{calibrate_amplitude, CalibrationOptions};
use super::peaks::find_peak_with;
use super::regression::{regress_beta_with, FitResult, FitWeighting};
use super::sidebands::{extract_sidebands, SidebandOptions, SidebandPeak, WindowObservation};
use super::EstimationError;
use crate::dynamics::{DriveSchedule, Trajectory};
use crate::model::SystemParams;
use crate::spectra::{periodogram_with, SpectrumWindow, TimeSeries, WindowFn};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalysisMode {
    /// Sideband ladder of the nonlinear probe.
    #[default]
    Sideband,
    /// Linear measurement only: the fundamental of the calibration probe
    /// stands in as the single u = 1 line.
    Baseline,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisPlan {
    /// Window length Δt, s.
    pub window: f64,
    /// Number of windows; `None` takes as many as fit in the record.
    pub n_windows: Option<usize>,
    /// Start of the first window, s.
    pub t_start: f64,
    /// Start-to-start spacing; `None` means contiguous windows.
    pub spacing: Option<f64>,
    pub orders: Vec<u32>,
    pub window_fn: WindowFn,
    pub mode: AnalysisMode,
    /// Band `[ω_b(1 − below), ω_b(1 + above)]` searched for the mechanical
    /// line in the calibration spectrum.
    pub mech_band_below: f64,
    pub mech_band_above: f64,
    pub calibration: CalibrationOptions,
    pub sidebands: SidebandOptions,
    pub weighting: FitWeighting,
    /// Keep the per-window spectra in the result.
    pub keep_spectra: bool,
}

impl AnalysisPlan {
    pub fn new(window: f64, t_start: f64, orders: Vec<u32>) -> Self {
        Self {
            window,
            n_windows: None,
            t_start,
            spacing: None,
            orders,
            window_fn: WindowFn::Hann,
            mode: AnalysisMode::Sideband,
            mech_band_below: 0.003,
            mech_band_above: 0.2,
            calibration: CalibrationOptions::default(),
            sidebands: SidebandOptions::default(),
            weighting: FitWeighting::Unweighted,
            keep_spectra: false,
        }
    }

    /// Enforces ω_b⁻¹ ≪ Δt ≪ γ⁻¹ as Δt·γ ≤ 0.2 and at least 50 periods.
    pub fn validate(&self, params: &SystemParams) -> Result<(), EstimationError> {
        let bad = |m: String| Err(EstimationError::InvalidPlan(m));
        if !(self.window.is_finite() && self.window > 0.0) {
            return bad(format!(
                "window length must be positive, got {}",
                self.window
            ));
        }
        let periods = self.window * params.omega_b / std::f64::consts::TAU;
        if self.window * params.gamma > 0.2 || periods < 50.0 {
            return bad(format!(
                "window length violates ω_b⁻¹ ≪ Δt ≪ γ⁻¹: Δt·γ = {:.3} (max 0.2), Δt spans {:.1} periods (min 50)",
                self.window * params.gamma,
                periods
            ));
        }
        if let Some(s) = self.spacing {
            if !(s.is_finite() && s > 0.0) {
                return bad(format!("window spacing must be positive, got {s}"));
            }
        }
        if self.n_windows == Some(0) {
            return bad("window count must be >= 1".into());
        }
        if self.mode == AnalysisMode::Sideband && self.orders.is_empty() {
            return bad("no sideband orders requested".into());
        }
        if !(self.mech_band_below >= 0.0 && self.mech_band_above > 0.0) {
            return bad("mechanical search band must have positive width".into());
        }
        Ok(())
    }

    /// Window start times that fit within `[t_start, t_end]`.
    pub fn window_starts(&self, t_end: f64) -> Vec<f64> {
        let step = self.spacing.unwrap_or(self.window);
        let mut out = Vec::new();
        let mut k = 0usize;
        loop {
            let t = self.t_start + k as f64 * step;
            if t + self.window > t_end * (1.0 + 1e-12) {
                break;
            }
            if let Some(n) = self.n_windows {
                if out.len() == n {
                    break;
                }
            }
            out.push(t);
            k += 1;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowFailure {
    pub t: f64,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct RunAnalysis {
    pub observations: Vec<WindowObservation>,
    pub failures: Vec<WindowFailure>,
    pub fit: Result<FitResult, EstimationError>,
    /// `(calibration, nonlinear probe)` spectra per analysed window, when kept.
    pub spectra: Vec<(SpectrumWindow, Option<SpectrumWindow>)>,
}

type WindowOutcome = (
    Result<WindowObservation, EstimationError>,
    Option<(SpectrumWindow, Option<SpectrumWindow>)>,
);

fn analyze_window(
    t: f64,
    alpha: Option<&TimeSeries>,
    mc: &TimeSeries,
    params: &SystemParams,
    sched: &DriveSchedule,
    plan: &AnalysisPlan,
) -> WindowOutcome {
    let spec_mc = match periodogram_with(mc, t, plan.window, plan.window_fn) {
        Ok(s) => s,
        Err(e) => return (Err(e.into()), None),
    };
    let run = || -> Result<(WindowObservation, Option<SpectrumWindow>), EstimationError> {
        let lo = params.omega_b * (1.0 - plan.mech_band_below);
        let hi = params.omega_b * (1.0 + plan.mech_band_above);
        let fundamental = find_peak_with(&spec_mc, lo, hi, plan.calibration.min_snr)
            .map_err(|e| EstimationError::CalibrationFailed(format!("mechanical line: {e}")))?;
        let cal = calibrate_amplitude(
            &spec_mc,
            params,
            sched.phi0,
            sched.omega_c,
            fundamental.omega,
            &plan.calibration,
        )?;
        match plan.mode {
            AnalysisMode::Baseline => Ok((
                WindowObservation {
                    t,
                    a_sq_cal: cal.a_sq,
                    sidebands: vec![SidebandPeak {
                        u: 1,
                        omega: cal.omega_mech,
                        snr: cal.snr_mech,
                    }],
                },
                None,
            )),
            AnalysisMode::Sideband => {
                let alpha = alpha.ok_or_else(|| {
                    EstimationError::InvalidPlan("nonlinear probe channel missing".into())
                })?;
                let spec_a = periodogram_with(alpha, t, plan.window, plan.window_fn)?;
                let sidebands =
                    extract_sidebands(&spec_a, cal.omega_mech, &plan.orders, &plan.sidebands)?;
                Ok((
                    WindowObservation {
                        t,
                        a_sq_cal: cal.a_sq,
                        sidebands,
                    },
                    Some(spec_a),
                ))
            }
        }
    };
    match run() {
        Ok((obs, spec_a)) => (Ok(obs), Some((spec_mc, spec_a))),
        Err(e) => (Err(e), Some((spec_mc, None))),
    }
}

/// Runs the windowed analysis over explicit homodyne records.
pub fn analyze_series(
    alpha: Option<&TimeSeries>,
    mc: &TimeSeries,
    params: &SystemParams,
    sched: &DriveSchedule,
    plan: &AnalysisPlan,
) -> Result<RunAnalysis, EstimationError> {
    plan.validate(params)?;
    let starts = plan.window_starts(mc.t_end());
    if starts.is_empty() {
        return Err(EstimationError::InvalidPlan(format!(
            "no window of {:.4e} s fits between {:.4e} s and the record end {:.4e} s",
            plan.window,
            plan.t_start,
            mc.t_end()
        )));
    }
    let outcomes: Vec<WindowOutcome> = starts
        .par_iter()
        .map(|&t| analyze_window(t, alpha, mc, params, sched, plan))
        .collect();

    let mut observations = Vec::new();
    let mut failures = Vec::new();
    let mut spectra = Vec::new();
    for (&t, (obs, spec)) in starts.iter().zip(outcomes) {
        match obs {
            Ok(o) => observations.push(o),
            Err(e) => failures.push(WindowFailure {
                t,
                reason: e.to_string(),
            }),
        }
        if plan.keep_spectra {
            if let Some(s) = spec {
                spectra.push(s);
            }
        }
    }
    let fit = if observations.is_empty() {
        Err(EstimationError::NoObservations(
            failures
                .first()
                .map(|f| f.reason.clone())
                .unwrap_or_default(),
        ))
    } else {
        regress_beta_with(&observations, params, plan.weighting)
    };
    Ok(RunAnalysis {
        observations,
        failures,
        fit,
        spectra,
    })
}

pub fn analyze(traj: &Trajectory, plan: &AnalysisPlan) -> Result<RunAnalysis, EstimationError> {
    let alpha = traj.alpha_series();
    let mc = traj.mc_series();
    let mut result = analyze_series(Some(&alpha), &mc, &traj.params, &traj.schedule, plan)?;
    if let Ok(fit) = result.fit.as_mut() {
        if traj.params.beta_nl > 0.0 {
            fit.er = super::stats::error_metric(fit.beta_nl_est, traj.params.beta_nl);
        }
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::preset;

    #[test]
    fn window_plan_constraint_named() {
        let p = preset("com").unwrap().with_q(1e5);
        let period = std::f64::consts::TAU / p.omega_b;
        let plan = AnalysisPlan::new(10.0 * period, 0.0, vec![1, 3]);
        let msg = plan.validate(&p).unwrap_err().to_string();
        assert!(msg.contains("ω_b⁻¹ ≪ Δt ≪ γ⁻¹"), "{msg}");
        let long = AnalysisPlan::new(0.5 / p.gamma, 0.0, vec![1, 3]);
        assert!(long.validate(&p).is_err());
        AnalysisPlan::new(800.0 * period, 0.0, vec![1, 3])
            .validate(&p)
            .unwrap();
    }

    #[test]
    fn window_starts() {
        let mut plan = AnalysisPlan::new(1.0, 2.0, vec![1]);
        assert_eq!(plan.window_starts(5.0), vec![2.0, 3.0, 4.0]);
        plan.n_windows = Some(2);
        assert_eq!(plan.window_starts(100.0), vec![2.0, 3.0]);
        plan.spacing = Some(0.5);
        plan.n_windows = None;
        assert_eq!(plan.window_starts(4.0), vec![2.0, 2.5, 3.0]);
    }
}
