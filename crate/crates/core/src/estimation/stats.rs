use serde::{Deserialize, Serialize};

use super::regression::FitResult;
use super::EstimationError;

/// log₁₀(estimate/truth); `None` unless both are positive and finite.
pub fn error_metric(estimate: f64, truth: f64) -> Option<f64> {
    if estimate > 0.0 && truth > 0.0 && estimate.is_finite() && truth.is_finite() {
        Some((estimate / truth).log10())
    } else {
        None
    }
}

/// Percentile `q ∈ [0, 100]` of sorted data with linear interpolation
/// between closest ranks.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of empty data");
    let pos = (q / 100.0).clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub mean_er: f64,
    /// 16th percentile.
    pub ci68_low: f64,
    /// 84th percentile.
    pub ci68_high: f64,
    /// Runs with a defined Er.
    pub n_runs: usize,
    pub n_undefined: usize,
}

impl EnsembleStats {
    pub fn ci_width(&self) -> f64 {
        self.ci68_high - self.ci68_low
    }
}

/// Mean and 16th–84th percentile band of the defined values.
pub fn aggregate_er(values: &[Option<f64>]) -> Result<EnsembleStats, EstimationError> {
    let mut ok: Vec<f64> = values.iter().flatten().copied().collect();
    let n_undefined = values.len() - ok.len();
    if ok.is_empty() {
        return Err(EstimationError::NoValidResults {
            undefined: n_undefined,
        });
    }
    ok.sort_by(f64::total_cmp);
    let mean = ok.iter().sum::<f64>() / ok.len() as f64;
    let lo = percentile(&ok, 16.0);
    let hi = percentile(&ok, 84.0);
    Ok(EnsembleStats {
        mean_er: mean,
        // a skewed sample can put the mean outside the band; widen to keep
        // low ≤ mean ≤ high
        ci68_low: lo.min(mean),
        ci68_high: hi.max(mean),
        n_runs: ok.len(),
        n_undefined,
    })
}

pub fn aggregate(results: &[FitResult]) -> Result<EnsembleStats, EstimationError> {
    let ers: Vec<Option<f64>> = results.iter().map(|r| r.er).collect();
    aggregate_er(&ers)
}
