use serde::{Deserialize, Serialize};

use super::sidebands::WindowObservation;
use super::stats::error_metric;
use super::EstimationError;
use crate::model::{convert_beta, BetaDirection, SystemParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitWeighting {
    #[default]
    Unweighted,
    /// Weights ∝ u²·snr, the inverse variance of ω_u/u when the line
    /// position error scales as 1/√snr.
    OrderSnr,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitPoint {
    /// Window start, s.
    pub t: f64,
    pub u: u32,
    /// |A′_t|².
    pub x: f64,
    /// ω_{u,t}/u, rad/s.
    pub y: f64,
    pub snr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub beta_nl_est: f64,
    pub beta0_est: f64,
    /// Fitted ω at zero amplitude, rad/s.
    pub intercept: f64,
    pub slope: f64,
    pub slope_stderr: f64,
    pub r_squared: f64,
    /// True when the intercept is more than 1% away from ω_b.
    pub intercept_flagged: bool,
    /// log₁₀(β′₀/β₀); `None` when no truth was supplied or the estimate is
    /// not positive.
    pub er: Option<f64>,
    pub points: Vec<FitPoint>,
    pub weighting: FitWeighting,
}

impl FitResult {
    pub fn max_x(&self) -> f64 {
        self.points.iter().map(|p| p.x).fold(0.0, f64::max)
    }

    /// Resolution bound 1/(Q·max|A′|²) for this point cloud.
    pub fn resolution_limit(&self, params: &SystemParams) -> f64 {
        1.0 / (params.q_factor * self.max_x())
    }

    /// Sets Er against a known β_NL.
    pub fn with_truth(mut self, beta_nl_true: f64) -> Self {
        self.er = error_metric(self.beta_nl_est, beta_nl_true);
        self
    }
}

pub fn regress_beta(
    observations: &[WindowObservation],
    params: &SystemParams,
) -> Result<FitResult, EstimationError> {
    regress_beta_with(observations, params, FitWeighting::Unweighted)
}

/// Least squares of `ω_u/u = ω_b β_NL |A′|² + c` over the pooled points of
/// every window and order.
pub fn regress_beta_with(
    observations: &[WindowObservation],
    params: &SystemParams,
    weighting: FitWeighting,
) -> Result<FitResult, EstimationError> {
    let points: Vec<FitPoint> = observations
        .iter()
        .flat_map(|o| {
            o.sidebands.iter().map(move |s| FitPoint {
                t: o.t,
                u: s.u,
                x: o.a_sq_cal,
                y: s.omega / s.u as f64,
                snr: s.snr,
            })
        })
        .collect();
    if points.len() < 3 {
        return Err(EstimationError::InsufficientPoints {
            found: points.len(),
            needed: 3,
        });
    }
    let w: Vec<f64> = points
        .iter()
        .map(|p| match weighting {
            FitWeighting::Unweighted => 1.0,
            FitWeighting::OrderSnr => {
                let s = if p.snr.is_finite() { p.snr } else { 1e12 };
                (p.u as f64).powi(2) * s
            }
        })
        .collect();
    let sw: f64 = w.iter().sum();
    let mx = points.iter().zip(&w).map(|(p, w)| w * p.x).sum::<f64>() / sw;
    let my = points.iter().zip(&w).map(|(p, w)| w * p.y).sum::<f64>() / sw;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (p, w) in points.iter().zip(&w) {
        let (dx, dy) = (p.x - mx, p.y - my);
        sxx += w * dx * dx;
        sxy += w * dx * dy;
        syy += w * dy * dy;
    }
    let x_scale = points.iter().map(|p| p.x.abs()).fold(0.0, f64::max);
    if !(sxx > 1e-24 * x_scale * x_scale * sw) {
        return Err(EstimationError::DegenerateFit);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res = (syy - slope * sxy).max(0.0);
    let r_squared = if syy > 0.0 {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    let n = points.len() as f64;
    // conventional (unweighted-equivalent) standard error of the slope
    let slope_stderr = (ss_res / sw * n / (n - 2.0) / (sxx / sw * n)).sqrt();

    let beta_nl_est = slope / params.omega_b;
    let beta0_est = if beta_nl_est >= 0.0 {
        convert_beta(beta_nl_est, BetaDirection::BetaNlToBeta0, params)?
    } else {
        -convert_beta(-beta_nl_est, BetaDirection::BetaNlToBeta0, params)?
    };
    Ok(FitResult {
        beta_nl_est,
        beta0_est,
        intercept,
        slope,
        slope_stderr,
        r_squared,
        intercept_flagged: (intercept / params.omega_b - 1.0).abs() > 0.01,
        er: None,
        points,
        weighting,
    })
}
