//! Named run profiles.
//!
//! `paper` uses the tabulated scenario rates with the stage times and drive
//! strengths of the full-scale runs; those runs take 10⁸–10⁹ steps. `desk`
//! keeps the tabulated rates but lowers Q to 10⁵, shortens the stages and
//! chooses couplings and drives from a few dimensionless targets so that a
//! run finishes in about a second.

use std::f64::consts::TAU;

use gup_core::dynamics::{DriveSchedule, IntegratorConfig, Scheme};
use gup_core::estimation::{AnalysisPlan, FitWeighting};
use gup_core::model::{Preset, SystemParams};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    #[default]
    Desk,
    Paper,
}

impl Profile {
    pub fn name(self) -> &'static str {
        match self {
            Profile::Desk => "desk",
            Profile::Paper => "paper",
        }
    }
}

/// Everything needed for one run except β and the seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub params: SystemParams,
    pub schedule: DriveSchedule,
    pub integrator: IntegratorConfig,
    pub plan: AnalysisPlan,
}

/// Dimensionless design targets of the desk profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeskTargets {
    pub q_factor: f64,
    /// |A|² reached by the pump.
    pub a_sq: f64,
    /// Modulation index of the nonlinear probe at |A|² = `a_sq`.
    pub xi_a: f64,
    /// Modulation index of the calibration probe at |A|² = `a_sq`.
    pub xi_m: f64,
    /// Intracavity photon number of the nonlinear probe.
    pub n_a: f64,
    /// Intracavity photon number of the calibration probe.
    pub n_c: f64,
    /// Calibration phase-modulation depth.
    pub phi0: f64,
    /// Ω_c = ω_b(1 − offset).
    pub omega_c_offset: f64,
    /// Pump duration in mechanical periods.
    pub pump_periods: f64,
    /// Bath temperature, K.
    pub temperature: f64,
    pub steps_per_period: f64,
    pub record_stride: usize,
    /// Analysis window length in mechanical periods.
    pub window_periods: f64,
    pub n_windows: usize,
    /// Delay between the end of the pump and the first window, periods.
    pub settle_periods: f64,
}

impl Default for DeskTargets {
    fn default() -> Self {
        Self {
            q_factor: 1e5,
            a_sq: 2e4,
            xi_a: 3.0,
            xi_m: 0.04,
            n_a: 24.0,
            n_c: 3e3,
            phi0: 0.02,
            omega_c_offset: 0.0075,
            pump_periods: 2.0,
            temperature: 10e-6,
            steps_per_period: 100.0,
            record_stride: 4,
            window_periods: 1000.0,
            n_windows: 20,
            settle_periods: 10.0,
        }
    }
}

pub fn desk(preset: Preset) -> Scenario {
    desk_with(preset, &DeskTargets::default())
}

pub fn desk_with(preset: Preset, t: &DeskTargets) -> Scenario {
    let base = preset.params().with_q(t.q_factor);
    let w = base.omega_b;
    let period = TAU / w;
    let amp = t.a_sq.sqrt();

    let mut params = base;
    params.g_a = t.xi_a * w / (2.0 * amp);
    params.g_m = t.xi_m * w / (2.0 * amp);
    params.temperature = t.temperature;

    let mut sched = DriveSchedule::resonant_defaults(w);
    // The resonant part of the pump beat grows the amplitude linearly,
    // |A| ≈ g_m |m₁||m₂| t; split the required product evenly.
    let t_pump = t.pump_periods * period;
    let field = (amp / (params.g_m * t_pump)).sqrt();
    let km = params.kappa_m;
    sched.e1 = field * km;
    sched.e2 = field * (km * km + w * w).sqrt();
    sched.ep = t.n_a.sqrt() * params.kappa_a;
    sched.ec = t.n_c.sqrt() * km;
    sched.phi0 = t.phi0;
    sched.omega_c = w * (1.0 - t.omega_c_offset);
    sched.t_c = 0.0;
    sched.t_p = t_pump;

    let window = t.window_periods * period;
    let t_start = t_pump + t.settle_periods * period;
    let t_end = t_start + t.n_windows as f64 * window + period;

    let fastest = [w, params.kappa_a, params.kappa_m]
        .into_iter()
        .fold(0.0, f64::max);
    let dt = (period / t.steps_per_period).min(TAU / (20.0 * fastest));
    let mut integrator = IntegratorConfig::new(dt, t_end, t.record_stride);
    integrator.scheme = Scheme::Rk4;
    integrator.record_start = t_pump;

    let mut plan = AnalysisPlan::new(window, t_start, vec![1, 3]);
    plan.n_windows = Some(t.n_windows);
    // search for the shifted line from just above Ω_c upward
    plan.mech_band_below = 0.6 * t.omega_c_offset;
    plan.mech_band_above = 0.6;
    plan.weighting = FitWeighting::OrderSnr;

    Scenario {
        params,
        schedule: sched,
        integrator,
        plan,
    }
}

/// Stage times and drive strengths of the full-scale runs for one preset.
#[derive(Debug, Clone, Copy, PartialEq)]
struct PaperStages {
    tau: f64,
    t_c: f64,
    t_p: f64,
    window: f64,
    /// Drives in units of ω_b.
    e1: f64,
    e2: f64,
    ec: f64,
    ep: f64,
}

fn paper_stages(preset: Preset, gamma: f64) -> PaperStages {
    match preset {
        Preset::Com => PaperStages {
            tau: 5.25e-6 / gamma,
            t_c: 0.0,
            t_p: 5.25e-4 / gamma,
            window: 5.25e-4 / gamma,
            e1: 124.0,
            e2: 3931.0,
            ec: 768.0,
            ep: 38.4,
        },
        Preset::Eom1 | Preset::Eom2 => PaperStages {
            tau: 1e-4,
            t_c: 1e-2,
            t_p: 0.3,
            window: 0.01,
            e1: if preset == Preset::Eom1 { 3.8e2 } else { 8.0e3 },
            e2: 1.3e4,
            ec: 0.8,
            ep: 0.8,
        },
        Preset::Omm => PaperStages {
            tau: 2.5e-5,
            t_c: 2.5e-3,
            t_p: 0.075,
            window: 0.0025,
            e1: 3.8e5,
            e2: 1.3e6,
            ec: 3.2e2,
            ep: 3.2e2,
        },
    }
}

/// Number of windows analysed by the paper profile.
pub const PAPER_WINDOWS: usize = 10;
/// Odd sideband orders up to this value enter the paper-profile fit.
pub const PAPER_MAX_ORDER: u32 = 19;

pub fn paper(preset: Preset) -> Scenario {
    let params = preset.params();
    let w = params.omega_b;
    let period = TAU / w;
    let st = paper_stages(preset, params.gamma);

    let mut sched = DriveSchedule::resonant_defaults(w);
    sched.e1 = st.e1 * w;
    sched.e2 = st.e2 * w;
    sched.ec = st.ec * w;
    sched.ep = st.ep * w;
    sched.t_c = st.t_c;
    sched.t_p = st.t_p;
    sched.tau_pdh = st.tau;
    sched.phi0 = 0.02;
    let offset = 0.0075;
    sched.omega_c = w * (1.0 - offset);

    let settle = 10.0 * period;
    let t_start = st.t_p + settle;
    let t_end = t_start + PAPER_WINDOWS as f64 * st.window + period;

    let fastest = [w, params.kappa_a, params.kappa_m]
        .into_iter()
        .fold(0.0, f64::max);
    // keep the sampled band above the highest order
    let sample_dt = period / (2.5 * PAPER_MAX_ORDER as f64);
    let dt = (TAU / (20.0 * fastest)).min(sample_dt);
    let stride = (sample_dt / dt).floor().max(1.0) as usize;
    let mut integrator = IntegratorConfig::new(dt, t_end, stride);
    integrator.scheme = Scheme::Rk4;
    integrator.record_start = st.t_p;

    let orders = (1..=PAPER_MAX_ORDER).step_by(2).collect();
    let mut plan = AnalysisPlan::new(st.window, t_start, orders);
    plan.n_windows = Some(PAPER_WINDOWS);
    plan.mech_band_below = 0.6 * offset;

    Scenario {
        params,
        schedule: sched,
        integrator,
        plan,
    }
}

pub fn scenario(profile: Profile, preset: Preset) -> Scenario {
    match profile {
        Profile::Desk => desk(preset),
        Profile::Paper => paper(preset),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn desk_profiles_validate() {
        for p in Preset::ALL {
            let s = desk(p);
            s.params.validate().unwrap();
            s.schedule.validate().unwrap();
            s.integrator.validate_for(&s.params, &s.schedule).unwrap();
            s.plan.validate(&s.params).unwrap();
            assert_eq!(s.params.q_factor, 1e5);
        }
    }

    #[test]
    fn desk_modulation_indices() {
        let s = desk(Preset::Com);
        let t = DeskTargets::default();
        let amp = t.a_sq.sqrt();
        let xi_a = 2.0 * s.params.g_a * amp / s.params.omega_b;
        let xi_m = 2.0 * s.params.g_m * amp / s.params.omega_b;
        assert!((xi_a - t.xi_a).abs() < 1e-12);
        assert!((xi_m - t.xi_m).abs() < 1e-12);
    }

    #[test]
    fn paper_profiles_follow_published_stages() {
        for p in Preset::ALL {
            let s = paper(p);
            s.schedule.validate().unwrap();
            s.integrator.validate_for(&s.params, &s.schedule).unwrap();
            s.plan.validate(&s.params).unwrap();
            let w = s.params.omega_b;
            let period = TAU / w;
            let samples_per_period = period / (s.integrator.dt * s.integrator.record_stride as f64);
            assert!(samples_per_period > 2.0 * PAPER_MAX_ORDER as f64);
        }
        let com = paper(Preset::Com);
        assert!((com.plan.window * com.params.gamma - 5.25e-4).abs() < 1e-15);
        assert!((com.schedule.e2 / com.params.omega_b - 3931.0).abs() < 1e-9);
        let (e1, e2) = (paper(Preset::Eom1), paper(Preset::Eom2));
        assert_eq!(e1.params.omega_b, e2.params.omega_b);
        assert_eq!(e1.params.g_a, e2.params.g_a);
        assert!((e1.schedule.e1 / e1.params.omega_b - 380.0).abs() < 1e-9);
        assert!((e2.schedule.e1 / e2.params.omega_b - 8000.0).abs() < 1e-9);
    }
}
