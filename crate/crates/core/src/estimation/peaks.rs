use serde::{Deserialize, Serialize};

use super::EstimationError;
use crate::spectra::SpectrumWindow;

/// Height-to-median ratio below which a band is treated as noise.
pub const DEFAULT_MIN_SNR: f64 = 10.0;

/// The median is taken over at least this many bins on either side of the
/// band centre, so a narrow band is not dominated by the peak itself.
const MEDIAN_HALF_WIDTH: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    /// Interpolated position, rad/s.
    pub omega: f64,
    /// Interpolated height.
    pub height: f64,
    pub snr: f64,
    /// Grid index of the maximum bin.
    pub bin: usize,
}

pub fn find_peak(spec: &SpectrumWindow, lo: f64, hi: f64) -> Result<Peak, EstimationError> {
    find_peak_with(spec, lo, hi, DEFAULT_MIN_SNR)
}

/// Largest bin in `[lo, hi]`, refined by a parabola through the logarithms
/// of it and its two neighbours.
///
/// A log-parabola is exact for a Gaussian line and is close to the Hann
/// main lobe, which keeps the interpolation error small off-grid. Ties are
/// resolved toward the lower frequency.
pub fn find_peak_with(
    spec: &SpectrumWindow,
    lo: f64,
    hi: f64,
    min_snr: f64,
) -> Result<Peak, EstimationError> {
    let invalid = |reason: &str| EstimationError::InvalidBand {
        lo,
        hi,
        reason: reason.to_string(),
    };
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(invalid("bounds must be finite with lo < hi"));
    }
    if spec.is_empty() {
        return Err(invalid("empty spectrum"));
    }
    let res = spec.resolution();
    let last = spec.len() - 1;
    let top = spec.freqs[last];
    if hi < 0.0 || lo > top {
        return Err(invalid("band outside the spectrum"));
    }
    let k_lo = (lo / res).ceil().max(0.0) as usize;
    let k_hi = ((hi / res).floor() as usize).min(last);
    if k_hi < k_lo + 2 {
        return Err(invalid("band narrower than 3 bins"));
    }

    let psd = &spec.psd;
    let mut k = k_lo;
    for j in k_lo + 1..=k_hi {
        if psd[j] > psd[k] {
            k = j;
        }
    }

    let centre = (k_lo + k_hi) / 2;
    let half = ((k_hi - k_lo) / 2).max(MEDIAN_HALF_WIDTH);
    let m_lo = centre.saturating_sub(half);
    let m_hi = (centre + half).min(last);
    let mut band: Vec<f64> = psd[m_lo..=m_hi].to_vec();
    band.sort_by(f64::total_cmp);
    let median = band[band.len() / 2];
    let snr = if median > 0.0 {
        psd[k] / median
    } else if psd[k] > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };

    let no_peak = EstimationError::NoPeak {
        lo,
        hi,
        snr,
        threshold: min_snr,
    };
    if !(snr >= min_snr) {
        return Err(no_peak);
    }
    // An edge maximum that keeps rising outside the band is a slope, not a line.
    if (k == k_lo && k > 0 && psd[k - 1] > psd[k]) || (k == k_hi && k < last && psd[k + 1] > psd[k])
    {
        return Err(no_peak);
    }

    let (omega, height) = if k == 0 || k == last {
        (spec.freqs[k], psd[k])
    } else {
        refine(psd[k - 1], psd[k], psd[k + 1])
            .map(|(off, h)| ((k as f64 + off) * res, h))
            .unwrap_or((spec.freqs[k], psd[k]))
    };
    Ok(Peak {
        omega,
        height,
        snr,
        bin: k,
    })
}

/// Vertex offset (in bins) and height of the parabola through the logs.
fn refine(left: f64, centre: f64, right: f64) -> Option<(f64, f64)> {
    if !(left > 0.0 && centre > 0.0 && right > 0.0) {
        return None;
    }
    // neighbours at rounding level: the line sits on the grid point
    if left.max(right) < 1e-12 * centre {
        return None;
    }
    let (l, c, r) = (left.ln(), centre.ln(), right.ln());
    let denom = l - 2.0 * c + r;
    if denom >= 0.0 {
        return None;
    }
    let off = (0.5 * (l - r) / denom).clamp(-0.5, 0.5);
    let h = c - 0.25 * (l - r) * off;
    Some((off, h.exp()))
}
