//! Closed-form delta-peak spectra of the two probes and the pump force.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::bessel::BesselTable;
use super::{Line, SidebandEntry, SidebandTable, SpectraError};
use crate::model::SystemParams;

/// Starting truncation of the Bessel series.
pub const DEFAULT_N_MAX: usize = 32;
/// Truncation beyond which a series is reported as not converged.
pub const MAX_N_MAX: usize = 4096;

const TAIL_TOL: f64 = 1e-12;

/// Sign convention of the sideband series.
///
/// For the resonant probe the intracavity field is
/// `a = E_p Σ_{u,n} J_{u-n}(ξ) J_n(−ξ) e^{-iuωt} / (inω + κ)`: the phase
/// factor from integrating the modulated detuning enters the propagator
/// with the opposite sign to the one it carries in the exponent, hence
/// `J_n(−ξ) = (−1)^n J_n(ξ)`. `AsWritten` drops that sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesForm {
    #[default]
    Corrected,
    AsWritten,
}

/// `Σ_{|n|≤n_max} s_n J_{u−n}(ξ) J_n(ξ) / (inω + κ)` with `s_n = (−1)^n`
/// for [`SeriesForm::Corrected`] and 1 otherwise.
pub fn sideband_amplitude(
    u: i64,
    xi: f64,
    omega: f64,
    kappa: f64,
    n_max: usize,
    form: SeriesForm,
) -> Complex64 {
    let table = BesselTable::new(n_max + u.unsigned_abs() as usize, xi);
    series(&table, u, omega, kappa, n_max as i64, form)
}

fn series(
    table: &BesselTable,
    u: i64,
    omega: f64,
    kappa: f64,
    n_max: i64,
    form: SeriesForm,
) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    for n in -n_max..=n_max {
        let mut c = table.get(u - n) * table.get(n);
        if c == 0.0 {
            continue;
        }
        if form == SeriesForm::Corrected && n % 2 != 0 {
            c = -c;
        }
        sum += c / Complex64::new(kappa, n as f64 * omega);
    }
    sum
}

/// Linear-response spectrum of the calibration probe: lines at ±ω′_b of
/// weight `(8K²E_c²/κ_m)ξ_m²` and at ±Ω_c of weight `(8K²E_c²/κ_m)φ₀²`,
/// with `ξ_m = 2g_m|A_t|/ω_b`.
#[allow(clippy::too_many_arguments)]
pub fn analytic_calibration_spectrum(
    params: &SystemParams,
    a_t: f64,
    omega_b_t: f64,
    phi0: f64,
    omega_c: f64,
    ec: f64,
    gain: f64,
) -> SidebandTable {
    let xi_m = 2.0 * params.g_m * a_t.abs() / params.omega_b;
    if xi_m > 0.1 {
        log::warn!("calibration index xi_m = {xi_m:.3} is outside the linear regime");
    }
    let pre = 8.0 * gain * gain * ec * ec / params.kappa_m;
    let mut entries = Vec::with_capacity(4);
    for s in [-1, 1] {
        entries.push(SidebandEntry {
            u: s,
            omega: s as f64 * omega_b_t,
            weight: pre * xi_m * xi_m,
            line: Line::Mechanical,
        });
        entries.push(SidebandEntry {
            u: s,
            omega: s as f64 * omega_c,
            weight: pre * phi0 * phi0,
            line: Line::Modulation,
        });
    }
    SidebandTable::from_entries(entries)
}

/// Sideband ladder of the nonlinear probe at `u·ω′_b`, `1 ≤ u ≤ u_max`:
/// weight `2K²E_p²κ_a[1−(−1)^u]·|Σ_n …|²` with `ξ_a = 2g_a|A_t|/ω_b`.
///
/// The truncation starts at `n_max` and is doubled until no weight moves by
/// more than 1e-12 of the largest one.
#[allow(clippy::too_many_arguments)]
pub fn analytic_sideband_spectrum(
    params: &SystemParams,
    a_t: f64,
    omega_b_t: f64,
    ep: f64,
    gain: f64,
    u_max: u32,
    n_max: usize,
    form: SeriesForm,
) -> Result<SidebandTable, SpectraError> {
    if u_max < 1 {
        return Err(SpectraError::InvalidArgument("u_max must be >= 1".into()));
    }
    if !(omega_b_t.is_finite() && omega_b_t > 0.0) {
        return Err(SpectraError::InvalidArgument(format!(
            "oscillation frequency must be positive, got {omega_b_t}"
        )));
    }
    let xi = 2.0 * params.g_a * a_t.abs() / params.omega_b;
    let pre = 2.0 * gain * gain * ep * ep * params.kappa_a;
    let weights_at = |n: usize| -> Vec<f64> {
        let table = BesselTable::new(n + u_max as usize, xi);
        (1..=u_max as i64)
            .map(|u| {
                if u % 2 == 0 {
                    0.0
                } else {
                    2.0 * pre
                        * series(&table, u, omega_b_t, params.kappa_a, n as i64, form).norm_sqr()
                }
            })
            .collect()
    };

    let mut n = n_max.max(1);
    let mut current = weights_at(n);
    let cap = MAX_N_MAX.max(n_max);
    loop {
        if 2 * n > cap {
            return Err(SpectraError::NotConverged {
                suggested_n_max: 2 * n,
            });
        }
        let next = weights_at(2 * n);
        let scale = next.iter().cloned().fold(0.0, f64::max);
        let moved = current
            .iter()
            .zip(&next)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        current = next;
        n *= 2;
        if moved <= TAIL_TOL * scale || scale == 0.0 {
            break;
        }
    }

    let entries = current
        .into_iter()
        .enumerate()
        .map(|(k, weight)| {
            let u = k as i32 + 1;
            SidebandEntry {
                u,
                omega: u as f64 * omega_b_t,
                weight,
                line: Line::Mechanical,
            }
        })
        .collect();
    Ok(SidebandTable::from_entries(entries))
}

/// Effective pump force
/// `F = E₁E₂ Σ_n J_n²(−ξ_m) / ([inω_b − iΔ₁ − L_m][−inω_b − L_m*])`,
/// `L_m = −iΔ′₂ − κ_m`, truncation doubled from `n_max` until the sum
/// changes by less than 1e-12 relative.
#[allow(clippy::too_many_arguments)]
pub fn effective_force(
    e1: f64,
    e2: f64,
    xi_m: f64,
    delta1: f64,
    delta2p: f64,
    kappa_m: f64,
    omega_b: f64,
    n_max: usize,
) -> Result<Complex64, SpectraError> {
    let l_m = Complex64::new(-kappa_m, -delta2p);
    let sum_to = |n: usize| -> Complex64 {
        let table = BesselTable::new(n, -xi_m);
        let mut s = Complex64::new(0.0, 0.0);
        for k in -(n as i64)..=n as i64 {
            let j = table.get(k);
            if j == 0.0 {
                continue;
            }
            let nw = k as f64 * omega_b;
            let left = Complex64::new(0.0, nw - delta1) - l_m;
            let right = Complex64::new(0.0, -nw) - l_m.conj();
            s += j * j / (left * right);
        }
        s
    };
    let mut n = n_max.max(1);
    let mut current = sum_to(n);
    let cap = MAX_N_MAX.max(n_max);
    loop {
        if 2 * n > cap {
            return Err(SpectraError::NotConverged {
                suggested_n_max: 2 * n,
            });
        }
        let next = sum_to(2 * n);
        let moved = (next - current).norm();
        let scale = next.norm();
        current = next;
        n *= 2;
        if moved <= TAIL_TOL * scale || scale == 0.0 {
            break;
        }
    }
    Ok(current * (e1 * e2))
}

/// Driven steady-state `|A_s|² = |F|² / [(Δ₁ − ω_b − ω_eff)² + γ_eff²]`.
pub fn steady_amplitude(
    force: Complex64,
    delta1: f64,
    omega_b: f64,
    omega_eff: f64,
    gamma_eff: f64,
) -> Result<f64, SpectraError> {
    if !(gamma_eff.is_finite() && gamma_eff > 0.0) {
        return Err(SpectraError::InvalidArgument(format!(
            "effective damping must be positive, got {gamma_eff}"
        )));
    }
    let d = delta1 - omega_b - omega_eff;
    Ok(force.norm_sqr() / (d * d + gamma_eff * gamma_eff))
}
