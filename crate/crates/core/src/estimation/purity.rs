use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::EstimationError;
use crate::dynamics::Trajectory;

pub const MIN_TRAJECTORIES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PurityEstimate {
    pub t: f64,
    /// Sample covariance of (Q, P) with Q = √2 Re b, P = √2 Im b.
    pub covariance: [[f64; 2]; 2],
    pub purity: f64,
}

/// Gaussian purity 1/(2√det σ) of the mechanical quadratures at one instant.
pub fn purity_from_samples(t: f64, b: &[Complex64]) -> Result<PurityEstimate, EstimationError> {
    let n = b.len();
    if n < 2 {
        return Err(EstimationError::InsufficientTrajectories {
            found: n,
            needed: 2,
        });
    }
    let s2 = std::f64::consts::SQRT_2;
    let mean = b.iter().sum::<Complex64>() / n as f64;
    let (mut qq, mut pp, mut qp) = (0.0, 0.0, 0.0);
    for z in b {
        let d = (z - mean) * s2;
        qq += d.re * d.re;
        pp += d.im * d.im;
        qp += d.re * d.im;
    }
    let k = 1.0 / (n - 1) as f64;
    let cov = [[qq * k, qp * k], [qp * k, pp * k]];
    let det = cov[0][0] * cov[1][1] - cov[0][1] * cov[1][0];
    let scale = cov[0][0].abs() + cov[1][1].abs();
    if !(det > 1e-12 * scale * scale) || !(cov[0][0] > 0.0) {
        return Err(EstimationError::SingularCovariance);
    }
    Ok(PurityEstimate {
        t,
        covariance: cov,
        purity: 1.0 / (2.0 * det.sqrt()),
    })
}

/// Purity of the ensemble at the recorded sample nearest `t`.
pub fn ensemble_purity(
    trajectories: &[Trajectory],
    t: f64,
) -> Result<PurityEstimate, EstimationError> {
    if trajectories.len() < MIN_TRAJECTORIES {
        return Err(EstimationError::InsufficientTrajectories {
            found: trajectories.len(),
            needed: MIN_TRAJECTORIES,
        });
    }
    let samples: Vec<Complex64> = trajectories
        .iter()
        .map(|tr| {
            tr.b_at(t).ok_or_else(|| {
                EstimationError::InvalidPlan(format!(
                    "t = {t:.6e} s is outside a trajectory record"
                ))
            })
        })
        .collect::<Result<_, _>>()?;
    purity_from_samples(t, &samples)
}
