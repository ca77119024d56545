use serde::{Deserialize, Serialize};

use super::peaks::{find_peak_with, DEFAULT_MIN_SNR};
use super::EstimationError;
use crate::model::SystemParams;
use crate::spectra::SpectrumWindow;

/// How the calibration line ratio is turned into `|A′_t|²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalibrationForm {
    /// `|A′|² = [(φ₀ω_b/2g_m)·√(S(ω′_b)/S(Ω_c))]²`. The line weights go as
    /// ξ_m² and φ₀², so the amplitude ratio is what returns |A|.
    #[default]
    SquareRoot,
    /// `|A′|² = (φ₀ω_b/2g_m)·S(ω′_b)/S(Ω_c)`.
    AsWritten,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationOptions {
    pub form: CalibrationForm,
    /// Line power is summed over this many bins either side of the peak.
    pub half_width_bins: usize,
    /// Fractional half-width of the search around the expected mechanical line.
    pub search_fraction: f64,
    pub min_snr: f64,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        Self {
            form: CalibrationForm::SquareRoot,
            half_width_bins: 2,
            search_fraction: 0.003,
            min_snr: DEFAULT_MIN_SNR,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReading {
    pub a_sq: f64,
    pub omega_mech: f64,
    pub power_mech: f64,
    pub power_mod: f64,
    pub snr_mech: f64,
    pub snr_mod: f64,
}

/// `|A′|²` from the integrated powers of the mechanical and modulation lines.
pub fn calibrate_from_powers(
    power_mech: f64,
    power_mod: f64,
    params: &SystemParams,
    phi0: f64,
    form: CalibrationForm,
) -> Result<f64, EstimationError> {
    if !(power_mod > 0.0 && power_mech >= 0.0) {
        return Err(EstimationError::CalibrationFailed(format!(
            "line powers must be positive (mechanical {power_mech:.3e}, modulation {power_mod:.3e})"
        )));
    }
    let scale = phi0 * params.omega_b / (2.0 * params.g_m);
    let ratio = power_mech / power_mod;
    Ok(match form {
        CalibrationForm::SquareRoot => scale * scale * ratio,
        CalibrationForm::AsWritten => scale * ratio,
    })
}

/// Locates the mechanical line near `omega_guess` and the modulation line
/// at `omega_c` in the calibration-probe spectrum and converts their power
/// ratio into `|A′_t|²`.
pub fn calibrate_amplitude(
    spec_mc: &SpectrumWindow,
    params: &SystemParams,
    phi0: f64,
    omega_c: f64,
    omega_guess: f64,
    opts: &CalibrationOptions,
) -> Result<CalibrationReading, EstimationError> {
    let fail = |what: &str, e: EstimationError| {
        EstimationError::CalibrationFailed(format!("{what} line: {e}"))
    };
    let res = spec_mc.resolution();
    let widen = |centre: f64| {
        let half = (opts.search_fraction * centre).max(3.0 * res);
        (centre - half, centre + half)
    };
    let (lo, hi) = widen(omega_guess);
    let mech = find_peak_with(spec_mc, lo, hi, opts.min_snr).map_err(|e| fail("mechanical", e))?;
    // the modulation line sits at a known frequency; keep its search tight
    let half = 3.0 * res;
    let modl = find_peak_with(spec_mc, omega_c - half, omega_c + half, opts.min_snr)
        .map_err(|e| fail("modulation", e))?;
    if mech.bin.abs_diff(modl.bin) <= 2 * opts.half_width_bins {
        return Err(EstimationError::CalibrationFailed(format!(
            "mechanical line at {:.6e} rad/s overlaps the modulation line at {omega_c:.6e} rad/s",
            mech.omega
        )));
    }
    let power_mech = spec_mc.band_power(mech.bin, opts.half_width_bins);
    let power_mod = spec_mc.band_power(modl.bin, opts.half_width_bins);
    let a_sq = calibrate_from_powers(power_mech, power_mod, params, phi0, opts.form)?;
    Ok(CalibrationReading {
        a_sq,
        omega_mech: mech.omega,
        power_mech,
        power_mod,
        snr_mech: mech.snr,
        snr_mod: modl.snr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::preset;
    use crate::spectra::{analytic_calibration_spectrum, Line};

    #[test]
    fn unit_ratio() {
        let p = preset("com").unwrap();
        let phi0 = 0.01;
        let got = calibrate_from_powers(3.0, 3.0, &p, phi0, CalibrationForm::SquareRoot).unwrap();
        let want = (phi0 * p.omega_b / (2.0 * p.g_m)).powi(2);
        assert!((got / want - 1.0).abs() < 1e-14);
    }

    #[test]
    fn round_trip_through_line_weights() {
        let p = preset("eom1").unwrap();
        for a in [1.0, 37.0, 1e3, 2.5e4] {
            let t =
                analytic_calibration_spectrum(&p, a, p.omega_b, 0.02, 0.99 * p.omega_b, 5.0, 1.0);
            let wm = t.weight(1);
            let wc = t.get(Line::Modulation, 1).unwrap().weight;
            let got = calibrate_from_powers(wm, wc, &p, 0.02, CalibrationForm::SquareRoot).unwrap();
            assert!((got / (a * a) - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn as_written_differs() {
        let p = preset("com").unwrap();
        let a = 100.0;
        let t = analytic_calibration_spectrum(&p, a, p.omega_b, 0.02, p.omega_b, 1.0, 1.0);
        let wm = t.weight(1);
        let wc = t.get(Line::Modulation, 1).unwrap().weight;
        let printed = calibrate_from_powers(wm, wc, &p, 0.02, CalibrationForm::AsWritten).unwrap();
        assert!((printed / (a * a) - 1.0).abs() > 0.5);
    }

    #[test]
    fn missing_modulation_power() {
        let p = preset("com").unwrap();
        assert!(matches!(
            calibrate_from_powers(1.0, 0.0, &p, 0.1, CalibrationForm::SquareRoot),
            Err(EstimationError::CalibrationFailed(_))
        ));
    }
}
