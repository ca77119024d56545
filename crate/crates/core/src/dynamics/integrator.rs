use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::noise::{complex_gaussian, trajectory_rng, BathOccupancies, NoiseSource};
use super::schedule::{drive_envelope, DriveSchedule};
use super::trajectory::Trajectory;
use super::{DynamicsError, Modes, SystemState};
use crate::model::{thermal_occupancy, SystemParams};
use crate::spectra::homodyne;

/// |amplitude| above which a step is reported as a blow-up.
pub const BLOW_UP_THRESHOLD: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    EulerMaruyama,
    /// Predictor–corrector on the drift, additive noise.
    StochasticHeun,
    /// Classical fourth-order Runge–Kutta on the drift, additive noise.
    #[default]
    Rk4,
}

/// How the mechanical amplitude evolves.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mechanics {
    #[default]
    Dynamic,
    /// `b(t) = amplitude · e^{-i omega t}`, imposed rather than integrated.
    /// Used to drive the probe fields with a known motion.
    Prescribed { amplitude: f64, omega: f64 },
}

impl Mechanics {
    fn prescribed_b(&self, t: f64) -> Option<Complex64> {
        match *self {
            Mechanics::Dynamic => None,
            Mechanics::Prescribed { amplitude, omega } => {
                Some(Complex64::from_polar(amplitude, -omega * t))
            }
        }
    }
}

/// Mean of the initial mechanical Gaussian state. The fields start empty.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct InitialCondition {
    #[serde(default)]
    pub b_mean: Complex64,
    /// Add a thermal fluctuation of variance n̄_b + ½ to `b_mean` when noise
    /// is enabled.
    #[serde(default = "default_true")]
    pub thermal: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub t_end: f64,
    pub record_stride: usize,
    /// Samples before this time are not stored.
    #[serde(default)]
    pub record_start: f64,
    #[serde(default)]
    pub scheme: Scheme,
    pub noise_enabled: bool,
    pub seed: u64,
    /// Index of this trajectory within an ensemble; selects the RNG stream.
    #[serde(default)]
    pub stream: u64,
    #[serde(default)]
    pub initial: InitialCondition,
    #[serde(default)]
    pub mechanics: Mechanics,
    /// Homodyne gain K.
    #[serde(default = "default_gain")]
    pub homodyne_gain: f64,
}

fn default_gain() -> f64 {
    1.0
}

impl IntegratorConfig {
    pub fn new(dt: f64, t_end: f64, record_stride: usize) -> Self {
        Self {
            dt,
            t_end,
            record_stride,
            record_start: 0.0,
            scheme: Scheme::default(),
            noise_enabled: true,
            seed: 0,
            stream: 0,
            initial: InitialCondition {
                b_mean: Complex64::new(0.0, 0.0),
                thermal: true,
            },
            mechanics: Mechanics::Dynamic,
            homodyne_gain: 1.0,
        }
    }

    /// Largest rate that must be resolved with at least 20 steps per period.
    pub fn fastest_rate(&self, params: &SystemParams, sched: &DriveSchedule) -> f64 {
        let mut rates = vec![
            params.omega_b,
            params.kappa_a,
            params.kappa_m,
            sched.delta1.abs(),
            sched.omega_c,
        ];
        if let Mechanics::Prescribed { omega, .. } = self.mechanics {
            rates.push(omega.abs());
        }
        rates.into_iter().fold(0.0, f64::max)
    }

    pub fn validate_for(
        &self,
        params: &SystemParams,
        sched: &DriveSchedule,
    ) -> Result<(), DynamicsError> {
        let bad = |m: String| Err(DynamicsError::InvalidConfig(m));
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return bad(format!("t_end must be positive, got {}", self.t_end));
        }
        if self.record_stride == 0 {
            return bad("record_stride must be >= 1".into());
        }
        if !(self.homodyne_gain.is_finite() && self.homodyne_gain > 0.0) {
            return bad("homodyne gain K must be positive".into());
        }
        let dt_max = TAU / (20.0 * self.fastest_rate(params, sched));
        if self.dt > dt_max * (1.0 + 1e-12) {
            return bad(format!(
                "dt = {:.4e} s exceeds {:.4e} s (20 steps per period of the fastest rate)",
                self.dt, dt_max
            ));
        }
        if self.record_start >= self.t_end {
            return bad("record_start must precede t_end".into());
        }
        Ok(())
    }

    pub fn n_steps(&self) -> u64 {
        (self.t_end / self.dt).round() as u64
    }
}

/// The right-hand side together with the noise couplings.
#[derive(Debug, Clone, Copy)]
pub struct LangevinModel<'a> {
    pub params: &'a SystemParams,
    pub sched: &'a DriveSchedule,
    pub mechanics: Mechanics,
    noise_scale: [f64; 4],
}

impl<'a> LangevinModel<'a> {
    pub fn new(params: &'a SystemParams, sched: &'a DriveSchedule, mechanics: Mechanics) -> Self {
        let b_scale = match mechanics {
            Mechanics::Dynamic => (2.0 * params.gamma).sqrt(),
            Mechanics::Prescribed { .. } => 0.0,
        };
        Self {
            params,
            sched,
            mechanics,
            noise_scale: [
                (2.0 * params.kappa_a).sqrt(),
                (2.0 * params.kappa_m).sqrt(),
                (2.0 * params.kappa_m).sqrt(),
                b_scale,
            ],
        }
    }

    fn at(&self, modes: &Modes, t: f64) -> Modes {
        match self.mechanics.prescribed_b(t) {
            Some(b) => Modes { b, ..*modes },
            None => *modes,
        }
    }

    fn rhs(&self, modes: &Modes, t: f64, x_pdh: f64) -> Modes {
        let m = self.at(modes, t);
        let mut d = rhs_unchecked(&m, t, x_pdh, self.params, self.sched);
        if let Mechanics::Prescribed { .. } = self.mechanics {
            d.b = Complex64::new(0.0, 0.0);
        }
        d
    }
}

#[inline]
fn rhs_unchecked(m: &Modes, t: f64, x_pdh: f64, p: &SystemParams, s: &DriveSchedule) -> Modes {
    let position = 2.0 * m.b.re - x_pdh;
    let (e1, e2) = drive_envelope(t, s);

    let a = Complex64::new(-p.kappa_a, -s.delta_ap - p.g_a * position) * m.a + s.ep;

    let mut pump = Complex64::new(e2, 0.0);
    if e1 != 0.0 {
        pump += Complex64::from_polar(e1, -s.delta1 * t);
    }
    let m_p = Complex64::new(-p.kappa_m, -s.delta2p + p.g_m * position) * m.m_p + pump;

    let modulation = s.phi0 * s.omega_c * (s.omega_c * t).cos();
    let m_c =
        Complex64::new(-p.kappa_m, -s.delta_cp + p.g_m * position + modulation) * m.m_c + s.ec;

    // (b - b*)³ = (2i Im b)³ = -8i (Im b)³, so the GUP term is real.
    let y = m.b.im;
    let gup = 8.0 / 3.0 * p.omega_b * p.beta_nl * y * y * y;
    let pressure = p.g_m * (m.m_p.norm_sqr() + m.m_c.norm_sqr()) - p.g_a * m.a.norm_sqr();
    let b = Complex64::new(-p.gamma, -p.omega_b) * m.b + Complex64::new(gup, pressure);

    Modes { a, m_p, m_c, b }
}

fn check_finite(m: &Modes, t: f64) -> Result<(), DynamicsError> {
    for (component, z) in m.components() {
        if !z.is_finite() {
            return Err(DynamicsError::NonFinite { component, t });
        }
    }
    Ok(())
}

/// Deterministic right-hand side of the Langevin equations.
pub fn drift(
    modes: &Modes,
    t: f64,
    x_pdh: f64,
    params: &SystemParams,
    sched: &DriveSchedule,
) -> Result<Modes, DynamicsError> {
    check_finite(modes, t)?;
    if !x_pdh.is_finite() {
        return Err(DynamicsError::NonFinite {
            component: "x_pdh",
            t,
        });
    }
    Ok(rhs_unchecked(modes, t, x_pdh, params, sched))
}

/// Advances `state` by one step and returns the Wiener increments used
/// (before scaling by the decay rates), so callers can reconstruct the
/// input noise seen by the output ports.
///
/// The lock average is frozen over the step and updated with the new
/// position afterwards.
pub fn step(
    model: &LangevinModel<'_>,
    state: &mut SystemState,
    dt: f64,
    noise: &mut NoiseSource,
    scheme: Scheme,
) -> Result<Modes, DynamicsError> {
    let t = state.t;
    let x = state.x_pdh();
    let y = state.modes;
    let dw = noise.increments();
    let kick = dw.scaled(&model.noise_scale);

    let next = match scheme {
        Scheme::EulerMaruyama => y + model.rhs(&y, t, x) * dt + kick,
        Scheme::StochasticHeun => {
            let f0 = model.rhs(&y, t, x);
            let pred = y + f0 * dt + kick;
            let f1 = model.rhs(&pred, t + dt, x);
            y + (f0 + f1) * (0.5 * dt) + kick
        }
        Scheme::Rk4 => {
            let h = 0.5 * dt;
            let k1 = model.rhs(&y, t, x);
            let k2 = model.rhs(&(y + k1 * h), t + h, x);
            let k3 = model.rhs(&(y + k2 * h), t + h, x);
            let k4 = model.rhs(&(y + k3 * dt), t + dt, x);
            y + (k1 + (k2 + k3) * 2.0 + k4) * (dt / 6.0) + kick
        }
    };

    let t_next = t + dt;
    let next = model.at(&next, t_next);
    for (component, z) in next.components() {
        if !z.is_finite() {
            return Err(DynamicsError::NonFinite {
                component,
                t: t_next,
            });
        }
        let magnitude = z.norm();
        if magnitude > BLOW_UP_THRESHOLD {
            return Err(DynamicsError::BlowUp {
                component,
                t: t_next,
                magnitude,
            });
        }
    }
    state.modes = next;
    state.t = t_next;
    state.pdh.push(2.0 * next.b.re);
    Ok(dw)
}

fn bath_occupancies(params: &SystemParams) -> Result<BathOccupancies, DynamicsError> {
    let field = |carrier: Option<f64>| -> Result<f64, DynamicsError> {
        match carrier {
            Some(w) => Ok(thermal_occupancy(w, params.temperature)?),
            None => Ok(0.0),
        }
    };
    let n_m = field(params.carrier_m)?;
    Ok(BathOccupancies {
        a: field(params.carrier_a)?,
        m_p: n_m,
        m_c: n_m,
        b: thermal_occupancy(params.omega_b, params.temperature)?,
    })
}

/// Integrates one trajectory and records the mode amplitudes and both
/// homodyne channels every `record_stride` steps.
///
/// The recorded input noise for a sample is the mean white-noise amplitude
/// over the preceding stride, ΣdW/(stride·dt), which is what the output
/// port reflects alongside the intracavity field.
pub fn integrate(
    params: &SystemParams,
    sched: &DriveSchedule,
    config: &IntegratorConfig,
) -> Result<Trajectory, DynamicsError> {
    params.validate()?;
    sched.validate()?;
    config.validate_for(params, sched)?;

    let dt = config.dt;
    let occ = bath_occupancies(params)?;
    let mut rng = trajectory_rng(config.seed, config.stream);

    let mut b0 = config.initial.b_mean;
    if config.noise_enabled && config.initial.thermal {
        b0 += complex_gaussian(&mut rng, (occ.b + 0.5) / 2.0);
    }
    let model = LangevinModel::new(params, sched, config.mechanics);
    let init = model.at(
        &Modes {
            b: b0,
            ..Modes::ZERO
        },
        0.0,
    );
    let mut state = SystemState::new(init, sched.tau_pdh, dt);
    state.pdh.push(2.0 * init.b.re);
    let mut noise = NoiseSource::new(rng, config.noise_enabled, dt, occ);

    let n_steps = config.n_steps();
    let stride = config.record_stride as u64;
    let first_record = ((config.record_start / dt).ceil() as u64).div_ceil(stride) * stride;
    let n_records = if first_record > n_steps {
        0
    } else {
        ((n_steps - first_record) / stride + 1) as usize
    };

    let mut times = Vec::with_capacity(n_records);
    let mut b = Vec::with_capacity(n_records);
    let mut a = Vec::with_capacity(n_records);
    let mut m_c = Vec::with_capacity(n_records);
    let mut a_in = Vec::with_capacity(n_records);
    let mut mc_in = Vec::with_capacity(n_records);

    let mut acc_a = Complex64::new(0.0, 0.0);
    let mut acc_c = Complex64::new(0.0, 0.0);
    let mut acc_steps = 0u64;
    let mut record = |n: u64, modes: &Modes, acc_a: Complex64, acc_c: Complex64, k: u64| {
        let norm = if k == 0 { 0.0 } else { 1.0 / (k as f64 * dt) };
        times.push(n as f64 * dt);
        b.push(modes.b);
        a.push(modes.a);
        m_c.push(modes.m_c);
        a_in.push(acc_a * norm);
        mc_in.push(acc_c * norm);
    };

    if first_record == 0 {
        record(0, &state.modes, acc_a, acc_c, 0);
    }
    for n in 1..=n_steps {
        let dw = step(&model, &mut state, dt, &mut noise, config.scheme)?;
        // keep the clock exact instead of accumulating dt
        state.t = n as f64 * dt;
        acc_a += dw.a;
        acc_c += dw.m_c;
        acc_steps += 1;
        if n % stride == 0 {
            if n >= first_record {
                record(n, &state.modes, acc_a, acc_c, acc_steps);
            }
            acc_a = Complex64::new(0.0, 0.0);
            acc_c = Complex64::new(0.0, 0.0);
            acc_steps = 0;
        }
    }

    let record_dt = dt * stride as f64;
    let t0 = times.first().copied().unwrap_or(0.0);
    let gain = config.homodyne_gain;
    let alpha = homodyne(&a, &a_in, params.kappa_a, gain, t0, record_dt)?;
    let mc = homodyne(&m_c, &mc_in, params.kappa_m, gain, t0, record_dt)?;

    Ok(Trajectory {
        times,
        b_samples: b,
        a_samples: a,
        m_c_samples: m_c,
        homodyne_alpha: alpha.values,
        homodyne_mc: mc.values,
        record_dt,
        steps: n_steps,
        params: params.clone(),
        schedule: sched.clone(),
        config: config.clone(),
    })
}

/// Runs `count` trajectories that differ only in their RNG stream
/// (`stream = base.stream + index`). Output order is the index order and
/// every member is independent of how the work is scheduled.
pub fn integrate_ensemble(
    params: &SystemParams,
    sched: &DriveSchedule,
    base: &IntegratorConfig,
    count: usize,
) -> Result<Vec<Trajectory>, DynamicsError> {
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut cfg = base.clone();
            cfg.stream = base.stream + i as u64;
            integrate(params, sched, &cfg)
        })
        .collect()
}
