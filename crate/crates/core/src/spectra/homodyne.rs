use num_complex::Complex64;

use super::{SpectraError, TimeSeries};

/// Phase-quadrature output `K·Im(√(2κ)·field − noise)` of a cavity port.
///
/// `input_noise` is the input white-noise amplitude on the same time grid;
/// pass zeros (or an all-zero slice) when noise is disabled.
pub fn homodyne(
    intracavity: &[Complex64],
    input_noise: &[Complex64],
    kappa: f64,
    gain: f64,
    t0: f64,
    dt_sample: f64,
) -> Result<TimeSeries, SpectraError> {
    if intracavity.len() != input_noise.len() {
        return Err(SpectraError::LengthMismatch {
            what: "intracavity field vs input noise",
            left: intracavity.len(),
            right: input_noise.len(),
        });
    }
    if !(gain.is_finite() && gain > 0.0) {
        return Err(SpectraError::InvalidArgument(format!(
            "homodyne gain must be positive, got {gain}"
        )));
    }
    if !(kappa.is_finite() && kappa >= 0.0) {
        return Err(SpectraError::InvalidArgument(format!(
            "decay rate must be non-negative, got {kappa}"
        )));
    }
    let root = (2.0 * kappa).sqrt();
    let values = intracavity
        .iter()
        .zip(input_noise)
        .map(|(f, n)| gain * (root * f - n).im)
        .collect();
    TimeSeries::new(t0, dt_sample, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{noise_increments, trajectory_rng, BathOccupancies};

    #[test]
    fn zero_in_zero_out() {
        let z = vec![Complex64::new(0.0, 0.0); 16];
        let s = homodyne(&z, &z, 3.0, 1.0, 0.0, 0.1).unwrap();
        assert!(s.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn imaginary_constant_field() {
        let kappa = 2.5;
        let x = 0.7;
        let f = vec![Complex64::new(0.0, x); 8];
        let n = vec![Complex64::new(0.0, 0.0); 8];
        let s = homodyne(&f, &n, kappa, 1.0, 0.0, 1.0).unwrap();
        for v in s.values {
            assert!((v - (2.0 * kappa).sqrt() * x).abs() < 1e-15);
        }
    }

    #[test]
    fn length_mismatch() {
        let f = vec![Complex64::new(0.0, 0.0); 3];
        let n = vec![Complex64::new(0.0, 0.0); 4];
        assert!(matches!(
            homodyne(&f, &n, 1.0, 1.0, 0.0, 1.0),
            Err(SpectraError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn white_noise_output_variance() {
        // Per-sample noise amplitude dW/dt has ⟨(Im)²⟩ = (n̄+½)/(2dt).
        let (gain, nbar, dt) = (2.0, 1.5, 0.01);
        let occ = BathOccupancies {
            a: nbar,
            ..Default::default()
        };
        let mut rng = trajectory_rng(11, 0);
        let count = 200_000;
        let noise: Vec<Complex64> = (0..count)
            .map(|_| noise_increments(&mut rng, dt, &occ, true).a / dt)
            .collect();
        let field = vec![Complex64::new(0.0, 0.0); count];
        let s = homodyne(&field, &noise, 1.0, gain, 0.0, dt).unwrap();
        let var = s.values.iter().map(|v| v * v).sum::<f64>() / count as f64;
        let want = gain * gain * (nbar + 0.5) / 2.0 / dt;
        // sample variance of a Gaussian: relative sd √(2/N)
        assert!((var / want - 1.0).abs() < 4.0 * (2.0 / count as f64).sqrt());
    }
}
