//! Physical constants, scenario presets and conversions between the two
//! representations of the deformation parameter.
//!
//! All rates are angular (rad/s). Table values quoted per 2π in the
//! literature are multiplied by 2π on construction.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid preset `{0}` (expected one of: com, eom1, eom2, omm)")]
    InvalidPreset(String),
    #[error("non-finite value for {0}")]
    NonFinite(&'static str),
    #[error("{name} must be {requirement}, got {value}")]
    OutOfRange {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("inconsistent parameters: {0}")]
    Inconsistent(String),
}

/// CODATA 2018 values. The Planck mass is derived, not tabulated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    hbar: f64,
    c: f64,
    k_b: f64,
    planck_mass: f64,
}

pub const HBAR: f64 = 1.054_571_817e-34;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const GRAVITATIONAL_CONSTANT: f64 = 6.674_30e-11;

impl PhysicalConstants {
    pub fn codata() -> Self {
        Self {
            hbar: HBAR,
            c: SPEED_OF_LIGHT,
            k_b: BOLTZMANN,
            planck_mass: (HBAR * SPEED_OF_LIGHT / GRAVITATIONAL_CONSTANT).sqrt(),
        }
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn k_b(&self) -> f64 {
        self.k_b
    }

    /// √(ħc/G), about 2.18×10⁻⁸ kg.
    pub fn planck_mass(&self) -> f64 {
        self.planck_mass
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::codata()
    }
}

/// One experimental scenario.
///
/// `q_factor` and `gamma` are tied by `q_factor = omega_b / gamma`, where
/// `gamma` is the decay rate of the mechanical *amplitude*. Use
/// [`SystemParams::with_q`] to change either consistently.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub scenario_name: String,
    pub omega_b: f64,
    pub kappa_a: f64,
    pub kappa_m: f64,
    pub gamma: f64,
    pub q_factor: f64,
    pub g_a: f64,
    pub g_m: f64,
    /// kg
    pub mass: f64,
    /// K
    pub temperature: f64,
    pub beta_nl: f64,
    /// Carrier frequency of the strongly coupled probe cavity. `None`
    /// treats its bath as vacuum (optical carrier).
    #[serde(default)]
    pub carrier_a: Option<f64>,
    /// Carrier frequency of the weakly coupled cavity modes.
    #[serde(default)]
    pub carrier_m: Option<f64>,
}

/// Default bath temperature for presets; no temperature is tabulated with
/// the scenario rates.
pub const DEFAULT_TEMPERATURE: f64 = 10e-3;

const TWO_PI: f64 = 2.0 * PI;

struct TableRow {
    name: &'static str,
    omega_b_mhz: f64,
    kappa_a_mhz: f64,
    kappa_m_mhz: f64,
    q: f64,
    g_a_hz: f64,
    g_m_hz: f64,
    mass_ng: f64,
}

const COM_ROW: TableRow = TableRow {
    name: "com",
    omega_b_mhz: 0.525,
    kappa_a_mhz: 2.2,
    kappa_m_mhz: 2.2,
    q: 1e9,
    g_a_hz: 200.0,
    g_m_hz: 5.0,
    mass_ng: 50.0,
};

const EOM_ROW: TableRow = TableRow {
    name: "eom",
    omega_b_mhz: 10.0,
    kappa_a_mhz: 1.0,
    kappa_m_mhz: 2.0,
    q: 1e7,
    g_a_hz: 115.512,
    g_m_hz: 0.327,
    mass_ng: 10.0,
};

const OMM_ROW: TableRow = TableRow {
    name: "omm",
    omega_b_mhz: 40.0,
    kappa_a_mhz: 6.0,
    kappa_m_mhz: 4.0,
    q: 1e7,
    g_a_hz: 8.0,
    g_m_hz: 0.2,
    mass_ng: 0.04,
};

/// Scenario presets. `Eom1` and `Eom2` share physical parameters and differ
/// only in their pump amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Com,
    Eom1,
    Eom2,
    Omm,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Com, Preset::Eom1, Preset::Eom2, Preset::Omm];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Com => "com",
            Preset::Eom1 => "eom1",
            Preset::Eom2 => "eom2",
            Preset::Omm => "omm",
        }
    }

    fn row(self) -> &'static TableRow {
        match self {
            Preset::Com => &COM_ROW,
            Preset::Eom1 | Preset::Eom2 => &EOM_ROW,
            Preset::Omm => &OMM_ROW,
        }
    }

    pub fn params(self) -> SystemParams {
        let row = self.row();
        debug_assert!(row.name == "eom" || row.name == self.name());
        let omega_b = TWO_PI * row.omega_b_mhz * 1e6;
        SystemParams {
            scenario_name: self.name().to_string(),
            omega_b,
            kappa_a: TWO_PI * row.kappa_a_mhz * 1e6,
            kappa_m: TWO_PI * row.kappa_m_mhz * 1e6,
            gamma: omega_b / row.q,
            q_factor: row.q,
            g_a: TWO_PI * row.g_a_hz,
            g_m: TWO_PI * row.g_m_hz,
            mass: row.mass_ng * 1e-12,
            temperature: DEFAULT_TEMPERATURE,
            beta_nl: 0.0,
            carrier_a: None,
            carrier_m: None,
        }
    }
}

impl std::str::FromStr for Preset {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "com" => Ok(Preset::Com),
            "eom1" => Ok(Preset::Eom1),
            "eom2" => Ok(Preset::Eom2),
            "omm" => Ok(Preset::Omm),
            _ => Err(ModelError::InvalidPreset(s.to_string())),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Looks up a preset by (case-insensitive) name.
pub fn preset(name: &str) -> Result<SystemParams, ModelError> {
    name.parse::<Preset>().map(Preset::params)
}

fn check_positive(name: &'static str, value: f64) -> Result<(), ModelError> {
    if !value.is_finite() {
        return Err(ModelError::NonFinite(name));
    }
    if value <= 0.0 {
        return Err(ModelError::OutOfRange {
            name,
            requirement: "strictly positive",
            value,
        });
    }
    Ok(())
}

fn check_non_negative(name: &'static str, value: f64) -> Result<(), ModelError> {
    if !value.is_finite() {
        return Err(ModelError::NonFinite(name));
    }
    if value < 0.0 {
        return Err(ModelError::OutOfRange {
            name,
            requirement: "non-negative",
            value,
        });
    }
    Ok(())
}

impl SystemParams {
    /// Replaces the quality factor and the amplitude decay rate together.
    pub fn with_q(mut self, q_factor: f64) -> Self {
        self.q_factor = q_factor;
        self.gamma = self.omega_b / q_factor;
        self
    }

    pub fn with_beta_nl(mut self, beta_nl: f64) -> Self {
        self.beta_nl = beta_nl;
        self
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        check_positive("omega_b", self.omega_b)?;
        check_positive("kappa_a", self.kappa_a)?;
        check_positive("kappa_m", self.kappa_m)?;
        check_positive("gamma", self.gamma)?;
        check_positive("q_factor", self.q_factor)?;
        check_non_negative("g_a", self.g_a)?;
        check_non_negative("g_m", self.g_m)?;
        check_positive("mass", self.mass)?;
        check_non_negative("temperature", self.temperature)?;
        check_non_negative("beta_nl", self.beta_nl)?;
        let q_implied = self.omega_b / self.gamma;
        if ((q_implied - self.q_factor) / self.q_factor).abs() > 1e-9 {
            return Err(ModelError::Inconsistent(format!(
                "q_factor {} disagrees with omega_b/gamma = {}",
                self.q_factor, q_implied
            )));
        }
        if self.g_m > 0.0 && self.g_a > 0.0 && self.g_a < self.g_m {
            log::warn!(
                "g_a/g_m = {:.3} < 1: the nonlinear probe is the weaker one",
                self.g_a / self.g_m
            );
        }
        Ok(())
    }

    /// ħ·m·ω_b/(M_p²c²): the factor taking β₀ to β_NL.
    pub fn beta_ratio(&self) -> f64 {
        let k = PhysicalConstants::codata();
        k.hbar() * self.mass * self.omega_b / (k.planck_mass().powi(2) * k.c().powi(2))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BetaDirection {
    Beta0ToBetaNl,
    BetaNlToBeta0,
}

pub fn convert_beta(
    value: f64,
    direction: BetaDirection,
    params: &SystemParams,
) -> Result<f64, ModelError> {
    check_non_negative("beta", value)?;
    let ratio = params.beta_ratio();
    Ok(match direction {
        BetaDirection::Beta0ToBetaNl => value * ratio,
        BetaDirection::BetaNlToBeta0 => value / ratio,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GupParams {
    pub beta0: f64,
    pub beta_nl: f64,
    pub a0_sq: f64,
}

impl GupParams {
    pub fn from_beta0(beta0: f64, params: &SystemParams, a0_sq: f64) -> Result<Self, ModelError> {
        let beta_nl = convert_beta(beta0, BetaDirection::Beta0ToBetaNl, params)?;
        Ok(Self {
            beta0,
            beta_nl,
            a0_sq,
        })
    }

    pub fn from_beta_nl(
        beta_nl: f64,
        params: &SystemParams,
        a0_sq: f64,
    ) -> Result<Self, ModelError> {
        let beta0 = convert_beta(beta_nl, BetaDirection::BetaNlToBeta0, params)?;
        Ok(Self {
            beta0,
            beta_nl,
            a0_sq,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolutionBound {
    pub beta_nl_lim: f64,
    pub beta0_lim: f64,
}

/// Smallest resolvable deformation for a ringdown of initial |A₀|²: the
/// frequency resolution is limited to about γ by the finite signal length.
pub fn resolution_bound(params: &SystemParams, a0_sq: f64) -> Result<ResolutionBound, ModelError> {
    check_positive("a0_sq", a0_sq)?;
    let beta_nl_lim = 1.0 / (params.q_factor * a0_sq);
    let k = PhysicalConstants::codata();
    let beta0_lim = k.planck_mass().powi(2) * k.c().powi(2)
        / (params.q_factor * a0_sq * k.hbar() * params.mass * params.omega_b);
    Ok(ResolutionBound {
        beta_nl_lim,
        beta0_lim,
    })
}

/// Bose–Einstein occupancy 1/(exp(ħω/k_BT) − 1); zero at T = 0.
pub fn thermal_occupancy(omega: f64, temperature: f64) -> Result<f64, ModelError> {
    check_positive("omega", omega)?;
    check_non_negative("temperature", temperature)?;
    if temperature == 0.0 {
        return Ok(0.0);
    }
    let x = HBAR * omega / (BOLTZMANN * temperature);
    Ok(1.0 / x.exp_m1())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn planck_mass_near_22_micrograms() {
        let mp = PhysicalConstants::codata().planck_mass();
        assert!((mp / 2.176e-8 - 1.0).abs() < 0.01, "{mp}");
    }

    #[test]
    fn com_preset_matches_table() {
        let p = preset("COM").unwrap();
        assert_relative_eq!(p.omega_b, TWO_PI * 0.525e6);
        assert_relative_eq!(p.kappa_a, TWO_PI * 2.2e6);
        assert_relative_eq!(p.kappa_m, TWO_PI * 2.2e6);
        assert_eq!(p.q_factor, 1e9);
        assert_relative_eq!(p.g_a, TWO_PI * 200.0);
        assert_relative_eq!(p.g_m, TWO_PI * 5.0);
        assert_relative_eq!(p.mass, 50e-12);
        p.validate().unwrap();
    }

    #[test]
    fn omm_preset_matches_table() {
        let p = preset("omm").unwrap();
        assert_relative_eq!(p.omega_b, TWO_PI * 40e6);
        assert_relative_eq!(p.kappa_a, TWO_PI * 6e6);
        assert_relative_eq!(p.kappa_m, TWO_PI * 4e6);
        assert_eq!(p.q_factor, 1e7);
        assert_relative_eq!(p.g_a, TWO_PI * 8.0);
        assert_relative_eq!(p.g_m, TWO_PI * 0.2);
        assert_relative_eq!(p.mass, 0.04e-12);
    }

    #[test]
    fn eom_presets_share_physics() {
        let mut a = preset("eom1").unwrap();
        let b = preset("Eom2").unwrap();
        a.scenario_name = b.scenario_name.clone();
        assert_eq!(a, b);
        assert_relative_eq!(b.g_a, TWO_PI * 115.512);
    }

    #[test]
    fn unknown_preset_rejected() {
        assert_eq!(
            preset("xyz"),
            Err(ModelError::InvalidPreset("xyz".to_string()))
        );
    }

    #[test]
    fn presets_have_stronger_nonlinear_probe() {
        for p in Preset::ALL {
            let s = p.params();
            assert!(s.g_a > s.g_m, "{p}");
            s.validate().unwrap();
        }
    }

    #[test]
    fn com_conversion_ratio() {
        let p = preset("com").unwrap();
        assert_relative_eq!(p.beta_ratio(), 4.086e-40, max_relative = 1e-3);
        let nl = convert_beta(1e31, BetaDirection::Beta0ToBetaNl, &p).unwrap();
        assert_relative_eq!(nl, 4.09e-9, max_relative = 2e-3);
        assert_eq!(convert_beta(0.0, BetaDirection::Beta0ToBetaNl, &p), Ok(0.0));
    }

    #[test]
    fn conversion_rejects_non_finite() {
        let p = preset("com").unwrap();
        assert!(convert_beta(f64::NAN, BetaDirection::Beta0ToBetaNl, &p).is_err());
        assert!(convert_beta(f64::INFINITY, BetaDirection::BetaNlToBeta0, &p).is_err());
    }

    #[test]
    fn resolution_bound_quoted_value() {
        let p = preset("com").unwrap();
        let b = resolution_bound(&p, 4e5).unwrap();
        assert_eq!(b.beta_nl_lim, 2.5e-15);
        assert_relative_eq!(b.beta0_lim, 2.5e-15 / 4.086e-40, max_relative = 1e-3);
        let b10 = resolution_bound(&p, 4e6).unwrap();
        assert_relative_eq!(b10.beta_nl_lim * 10.0, b.beta_nl_lim, max_relative = 1e-15);
        assert!(resolution_bound(&p, 0.0).is_err());
        assert!(resolution_bound(&p, -1.0).is_err());
    }

    #[test]
    fn thermal_occupancy_values() {
        assert_eq!(thermal_occupancy(1e6, 0.0).unwrap(), 0.0);
        let n = thermal_occupancy(TWO_PI * 0.525e6, 10e-3).unwrap();
        assert!((n - 396.4).abs() < 0.5, "{n}");
        assert!(thermal_occupancy(0.0, 1.0).is_err());
        assert!(thermal_occupancy(-1.0, 1.0).is_err());
        // Rayleigh–Jeans limit
        let omega = 1e6;
        let t = HBAR * omega / (BOLTZMANN * 0.02);
        let n = thermal_occupancy(omega, t).unwrap();
        assert_relative_eq!(n, BOLTZMANN * t / (HBAR * omega), max_relative = 0.01);
    }

    #[test]
    fn q_convention_enforced() {
        let mut p = preset("com").unwrap().with_q(1e5);
        assert_relative_eq!(p.gamma, p.omega_b / 1e5);
        p.validate().unwrap();
        p.gamma *= 2.0;
        assert!(matches!(p.validate(), Err(ModelError::Inconsistent(_))));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn beta_round_trips(log_beta in -30.0f64..60.0, preset_idx in 0usize..4) {
                let p = Preset::ALL[preset_idx].params();
                let beta0 = 10f64.powf(log_beta);
                let nl = convert_beta(beta0, BetaDirection::Beta0ToBetaNl, &p).unwrap();
                let back = convert_beta(nl, BetaDirection::BetaNlToBeta0, &p).unwrap();
                prop_assert!(((back - beta0) / beta0).abs() <= 1e-12);
                let b0 = convert_beta(beta0, BetaDirection::BetaNlToBeta0, &p).unwrap();
                let again = convert_beta(b0, BetaDirection::Beta0ToBetaNl, &p).unwrap();
                prop_assert!(((again - beta0) / beta0).abs() <= 1e-12);
            }

            #[test]
            fn bound_outputs_are_consistent(log_a in 0.0f64..12.0, preset_idx in 0usize..4) {
                let p = Preset::ALL[preset_idx].params();
                let b = resolution_bound(&p, 10f64.powf(log_a)).unwrap();
                let converted = convert_beta(b.beta_nl_lim, BetaDirection::BetaNlToBeta0, &p).unwrap();
                prop_assert!(((converted - b.beta0_lim) / b.beta0_lim).abs() <= 1e-12);
            }

            #[test]
            fn occupancy_monotone(omega in 1e3f64..1e9, t in 1e-6f64..10.0, bump in 1.001f64..2.0) {
                let n = thermal_occupancy(omega, t).unwrap();
                prop_assert!(thermal_occupancy(omega, t * bump).unwrap() >= n);
                prop_assert!(thermal_occupancy(omega * bump, t).unwrap() <= n);
            }
        }
    }
}
