use serde::{Deserialize, Serialize};

use super::peaks::{find_peak_with, DEFAULT_MIN_SNR};
use super::EstimationError;
use crate::spectra::SpectrumWindow;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SidebandOptions {
    /// Search half-width as a fraction of u·ω_nominal.
    pub delta_search: f64,
    pub min_snr: f64,
    /// Windows with fewer detected orders are rejected.
    pub min_orders: usize,
}

impl Default for SidebandOptions {
    fn default() -> Self {
        Self {
            delta_search: 0.003,
            min_snr: DEFAULT_MIN_SNR,
            min_orders: 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SidebandPeak {
    pub u: u32,
    pub omega: f64,
    pub snr: f64,
}

/// One analysed window: calibrated amplitude and located sidebands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowObservation {
    /// Window start, s.
    pub t: f64,
    /// |A′_t|².
    pub a_sq_cal: f64,
    pub sidebands: Vec<SidebandPeak>,
}

/// Locates the odd-order sidebands `u·ω` within `u·ω_nominal·(1 ± δ)`.
/// Even orders are skipped; orders without a line above threshold are
/// dropped.
pub fn extract_sidebands(
    spec_alpha: &SpectrumWindow,
    omega_nominal: f64,
    orders: &[u32],
    opts: &SidebandOptions,
) -> Result<Vec<SidebandPeak>, EstimationError> {
    let mut out = Vec::with_capacity(orders.len());
    let res = spec_alpha.resolution();
    for &u in orders {
        if u == 0 || u % 2 == 0 {
            log::warn!(
                "sideband order {u} skipped: even orders are suppressed for a resonant probe"
            );
            continue;
        }
        let centre = u as f64 * omega_nominal;
        if centre > *spec_alpha.freqs.last().unwrap_or(&0.0) {
            log::warn!("sideband order {u} lies above the Nyquist frequency");
            continue;
        }
        let half = (opts.delta_search * centre).max(2.0 * res);
        match find_peak_with(spec_alpha, centre - half, centre + half, opts.min_snr) {
            Ok(p) => out.push(SidebandPeak {
                u,
                omega: p.omega,
                snr: p.snr,
            }),
            Err(e) => log::debug!("order {u}: {e}"),
        }
    }
    if out.len() < opts.min_orders {
        return Err(EstimationError::InsufficientSidebands {
            found: out.len(),
            needed: opts.min_orders,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::WindowFn;
    use std::f64::consts::TAU;

    /// Spectrum with one-bin lines on the grid at u·ω for the given orders.
    fn comb(omega: f64, orders: &[u32], res: f64, bins: usize) -> SpectrumWindow {
        let mut psd = vec![1e-6; bins];
        for &u in orders {
            psd[(u as f64 * omega / res).round() as usize] = 1.0 / u as f64;
        }
        SpectrumWindow {
            t_start: 0.0,
            delta_t: TAU / res,
            freqs: (0..bins).map(|k| k as f64 * res).collect(),
            psd,
            window: WindowFn::Rectangular,
            samples: 2 * (bins - 1),
        }
    }

    #[test]
    fn returns_exact_positions_on_oracle_input() {
        let res = 1.0;
        let omega = 1000.0;
        let spec = comb(omega, &[1, 3, 5, 7, 9], res, 12_000);
        let got =
            extract_sidebands(&spec, omega, &[1, 3, 5, 7, 9], &SidebandOptions::default()).unwrap();
        assert_eq!(got.len(), 5);
        for p in got {
            assert!((p.omega - p.u as f64 * omega).abs() < 1e-9);
        }
    }

    #[test]
    fn even_orders_skipped() {
        let spec = comb(1000.0, &[1, 2, 3], 1.0, 4000);
        let got =
            extract_sidebands(&spec, 1000.0, &[1, 2, 3], &SidebandOptions::default()).unwrap();
        assert_eq!(got.iter().map(|p| p.u).collect::<Vec<_>>(), vec![1, 3]);
    }

    #[test]
    fn too_few_orders() {
        let spec = comb(1000.0, &[1], 1.0, 4000);
        assert!(matches!(
            extract_sidebands(&spec, 1000.0, &[1, 3], &SidebandOptions::default()),
            Err(EstimationError::InsufficientSidebands {
                found: 1,
                needed: 2
            })
        ));
    }
}
