use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::{SpectraError, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowFn {
    #[default]
    Rectangular,
    /// Periodic Hann taper scaled to unit mean, so a tone keeps its
    /// rectangular-window peak height.
    Hann,
}

impl WindowFn {
    fn weights(self, n: usize) -> Option<Vec<f64>> {
        match self {
            WindowFn::Rectangular => None,
            WindowFn::Hann => Some(
                (0..n)
                    .map(|k| 1.0 - (TAU * k as f64 / n as f64).cos())
                    .collect(),
            ),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            WindowFn::Rectangular => "rectangular",
            WindowFn::Hann => "hann",
        }
    }
}

/// Periodogram of one window, stored one-sided on `0 ≤ ω ≤ π/dt`.
///
/// `psd[k]` is the two-sided density `S(ω_k)`; for a real record
/// `S(−ω) = S(ω)`, so the negative half is implied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumWindow {
    pub t_start: f64,
    pub delta_t: f64,
    pub freqs: Vec<f64>,
    pub psd: Vec<f64>,
    pub window: WindowFn,
    /// Number of samples in the window.
    pub samples: usize,
}

impl SpectrumWindow {
    /// Grid spacing, 2π/Δt.
    pub fn resolution(&self) -> f64 {
        TAU / self.delta_t
    }

    pub fn len(&self) -> usize {
        self.psd.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psd.is_empty()
    }

    /// Nearest grid index to `omega`, clamped to the stored range.
    pub fn bin_of(&self, omega: f64) -> usize {
        let k = (omega / self.resolution()).round();
        k.clamp(0.0, (self.len().saturating_sub(1)) as f64) as usize
    }

    /// ∫S dω over the whole real line (both halves).
    pub fn total_power(&self) -> f64 {
        let dw = self.resolution();
        let nyquist_present = self.samples.is_multiple_of(2);
        let last = self.len() - 1;
        self.psd
            .iter()
            .enumerate()
            .map(|(k, &s)| {
                if k == 0 || (nyquist_present && k == last) {
                    s
                } else {
                    2.0 * s
                }
            })
            .sum::<f64>()
            * dw
    }

    /// Σ S·Δω over bins `center−half ..= center+half` on the positive axis.
    pub fn band_power(&self, center: usize, half: usize) -> f64 {
        let lo = center.saturating_sub(half);
        let hi = (center + half).min(self.len() - 1);
        self.psd[lo..=hi].iter().sum::<f64>() * self.resolution()
    }
}

/// Rectangular-window periodogram over `[t, t + delta_t]`.
pub fn periodogram(
    series: &TimeSeries,
    t: f64,
    delta_t: f64,
) -> Result<SpectrumWindow, SpectraError> {
    periodogram_with(series, t, delta_t, WindowFn::Rectangular)
}

/// `S(ω) = |(2π)^{-1/2} Σ_k O_k e^{-iω t_k} dt|²` on the grid ω_j = 2πj/Δt,
/// after removing the window mean.
pub fn periodogram_with(
    series: &TimeSeries,
    t: f64,
    delta_t: f64,
    window: WindowFn,
) -> Result<SpectrumWindow, SpectraError> {
    let dt = series.dt_sample;
    if !(delta_t.is_finite() && delta_t > 0.0 && t.is_finite()) {
        return Err(SpectraError::InvalidArgument(format!(
            "window start {t} and length {delta_t} must be finite, length positive"
        )));
    }
    let start_f = (t - series.t0) / dt;
    let n_f = delta_t / dt;
    let start = start_f.round();
    let n = n_f.round();
    let out_of_range = SpectraError::WindowOutOfRange {
        start: t,
        end: t + delta_t,
        t0: series.t0,
        t_end: series.t_end(),
    };
    if start < -1e-6 || start + n > series.len() as f64 + 1e-6 {
        return Err(out_of_range);
    }
    let (start, n) = (start.max(0.0) as usize, n as usize);
    if n < 4 {
        return Err(SpectraError::InvalidArgument(format!(
            "window holds {n} samples; need at least 4"
        )));
    }
    if start + n > series.len() {
        return Err(out_of_range);
    }

    let slice = &series.values[start..start + n];
    let mean = slice.iter().sum::<f64>() / n as f64;
    let taper = window.weights(n);
    let mut buf: Vec<Complex64> = slice
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let w = taper.as_ref().map_or(1.0, |w| w[k]);
            Complex64::new((v - mean) * w, 0.0)
        })
        .collect();

    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(n).process(&mut buf);

    let scale = dt * dt / (2.0 * PI);
    let span = n as f64 * dt;
    let bins = n / 2 + 1;
    let res = TAU / span;
    let freqs = (0..bins).map(|k| k as f64 * res).collect();
    let psd = buf[..bins].iter().map(|z| z.norm_sqr() * scale).collect();

    Ok(SpectrumWindow {
        t_start: series.time(start),
        delta_t: span,
        freqs,
        psd,
        window,
        samples: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone(amp: f64, omega: f64, dt: f64, n: usize) -> TimeSeries {
        let v = (0..n)
            .map(|k| amp * (omega * k as f64 * dt).cos())
            .collect();
        TimeSeries::new(0.0, dt, v).unwrap()
    }

    #[test]
    fn zero_signal() {
        let s = TimeSeries::new(0.0, 0.1, vec![0.0; 64]).unwrap();
        let p = periodogram(&s, 0.0, 6.4).unwrap();
        assert!(p.psd.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn integer_period_tone() {
        // 25 periods in 1000 samples; the tone sits on bin 25.
        let (dt, n) = (1e-3, 1000);
        let omega = TAU * 25.0;
        let amp = 1.7;
        let p = periodogram(&tone(amp, omega, dt, n), 0.0, n as f64 * dt).unwrap();
        let k = p.bin_of(omega);
        assert_eq!(k, 25);
        let delta_t = n as f64 * dt;
        let peak = amp * amp * delta_t * delta_t / (8.0 * PI);
        assert!((p.psd[k] / peak - 1.0).abs() < 0.02);
        for (j, &v) in p.psd.iter().enumerate() {
            if j != k {
                assert!(v < 1e-20 * peak, "bin {j}: {v}");
            }
        }
    }

    #[test]
    fn grid_resolution_and_start() {
        let s = tone(1.0, 3.0, 0.01, 500);
        let p = periodogram(&s, 1.0, 2.0).unwrap();
        assert_eq!(p.samples, 200);
        assert!((p.resolution() - TAU / 2.0).abs() < 1e-12);
        assert!((p.t_start - 1.0).abs() < 1e-12);
        assert!((p.freqs[1] - p.resolution()).abs() < 1e-12);
    }

    #[test]
    fn parseval_rectangular() {
        let dt = 0.01;
        let n = 777;
        let v: Vec<f64> = (0..n)
            .map(|k| {
                let t = k as f64 * dt;
                (13.0 * t).sin() + 0.3 * (71.0 * t + 0.2).cos() + 0.1 * (k % 7) as f64
            })
            .collect();
        let mean = v.iter().sum::<f64>() / n as f64;
        let energy: f64 = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() * dt;
        let s = TimeSeries::new(0.0, dt, v).unwrap();
        let p = periodogram(&s, 0.0, n as f64 * dt).unwrap();
        assert!((p.total_power() / energy - 1.0).abs() < 1e-10);
        let s2 = TimeSeries::new(0.0, dt, s.values[..776].to_vec()).unwrap();
        let p2 = periodogram(&s2, 0.0, 776.0 * dt).unwrap();
        assert!(p2.total_power() > 0.0);
    }

    #[test]
    fn dc_removed() {
        let s = TimeSeries::new(0.0, 0.1, vec![5.0; 100]).unwrap();
        let p = periodogram(&s, 0.0, 10.0).unwrap();
        assert!(p.psd.iter().all(|&v| v.abs() < 1e-24));
    }

    #[test]
    fn out_of_range() {
        let s = tone(1.0, 1.0, 0.1, 100);
        assert!(matches!(
            periodogram(&s, 5.0, 6.0),
            Err(SpectraError::WindowOutOfRange { .. })
        ));
        assert!(periodogram(&s, -1.0, 2.0).is_err());
        assert!(periodogram(&s, 0.0, 10.0).is_ok());
    }

    #[test]
    fn hann_keeps_coherent_gain() {
        let (dt, n) = (1e-3, 1000);
        let omega = TAU * 40.0;
        let rect = periodogram(&tone(1.0, omega, dt, n), 0.0, 1.0).unwrap();
        let hann = periodogram_with(&tone(1.0, omega, dt, n), 0.0, 1.0, WindowFn::Hann).unwrap();
        let k = rect.bin_of(omega);
        assert!((hann.psd[k] / rect.psd[k] - 1.0).abs() < 1e-9);
        assert_eq!(hann.window, WindowFn::Hann);
        // main lobe spreads a quarter of the height onto each neighbour
        assert!((hann.psd[k + 1] / hann.psd[k] - 0.25).abs() < 1e-9);
    }

    #[test]
    fn non_negative() {
        let s = tone(2.0, 17.3, 0.013, 900);
        for w in [WindowFn::Rectangular, WindowFn::Hann] {
            let p = periodogram_with(&s, 0.0, 900.0 * 0.013, w).unwrap();
            assert!(p.psd.iter().all(|&v| v >= 0.0));
        }
    }
}
