//! Stochastic Langevin dynamics of the two probe fields, the pump/cooling
//! field and the mechanical mode.
//!
//! Field amplitudes are integrated in their drive-rotating frames, so the
//! detunings appear explicitly; the mechanical amplitude carries its full
//! `e^{-iω_b t}` oscillation. Input noises are additive, which is what lets
//! the deterministic part be integrated at high order with the Wiener
//! increments added once per step.

mod integrator;
mod noise;
mod pdh;
mod schedule;
mod trajectory;

use std::ops::{Add, AddAssign, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use integrator::{
    drift, integrate, integrate_ensemble, step, InitialCondition, IntegratorConfig, LangevinModel,
    Mechanics, Scheme, BLOW_UP_THRESHOLD,
};
pub use noise::{noise_increments, trajectory_rng, BathOccupancies, NoiseSource};
pub use pdh::{pdh_average, PdhFilter};
pub use schedule::{drive_envelope, DriveSchedule};
pub use trajectory::Trajectory;

use crate::model::ModelError;
use crate::spectra::SpectraError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("invalid drive schedule: {0}")]
    InvalidSchedule(String),
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("non-finite state component `{component}` at t = {t:.6e} s")]
    NonFinite { component: &'static str, t: f64 },
    #[error("integration blew up at t = {t:.6e} s (|{component}| = {magnitude:.3e})")]
    BlowUp {
        component: &'static str,
        t: f64,
        magnitude: f64,
    },
    #[error(transparent)]
    Spectra(#[from] SpectraError),
}

/// Complex amplitudes of the four modes.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Modes {
    pub a: Complex64,
    pub m_p: Complex64,
    pub m_c: Complex64,
    pub b: Complex64,
}

impl Modes {
    pub const ZERO: Modes = Modes {
        a: Complex64::new(0.0, 0.0),
        m_p: Complex64::new(0.0, 0.0),
        m_c: Complex64::new(0.0, 0.0),
        b: Complex64::new(0.0, 0.0),
    };

    pub fn components(&self) -> [(&'static str, Complex64); 4] {
        [
            ("a", self.a),
            ("m_p", self.m_p),
            ("m_c", self.m_c),
            ("b", self.b),
        ]
    }

    /// Component-wise product with real per-mode factors.
    pub fn scaled(&self, f: &[f64; 4]) -> Modes {
        Modes {
            a: self.a * f[0],
            m_p: self.m_p * f[1],
            m_c: self.m_c * f[2],
            b: self.b * f[3],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.components().iter().all(|(_, z)| z.is_finite())
    }
}

impl Add for Modes {
    type Output = Modes;
    fn add(self, o: Modes) -> Modes {
        Modes {
            a: self.a + o.a,
            m_p: self.m_p + o.m_p,
            m_c: self.m_c + o.m_c,
            b: self.b + o.b,
        }
    }
}

impl Sub for Modes {
    type Output = Modes;
    fn sub(self, o: Modes) -> Modes {
        Modes {
            a: self.a - o.a,
            m_p: self.m_p - o.m_p,
            m_c: self.m_c - o.m_c,
            b: self.b - o.b,
        }
    }
}

impl AddAssign for Modes {
    fn add_assign(&mut self, o: Modes) {
        *self = *self + o;
    }
}

impl Mul<f64> for Modes {
    type Output = Modes;
    fn mul(self, k: f64) -> Modes {
        Modes {
            a: self.a * k,
            m_p: self.m_p * k,
            m_c: self.m_c * k,
            b: self.b * k,
        }
    }
}

/// Instantaneous state: mode amplitudes, the lock filter history and time.
#[derive(Debug, Clone)]
pub struct SystemState {
    pub modes: Modes,
    pub pdh: PdhFilter,
    pub t: f64,
}

impl SystemState {
    pub fn new(modes: Modes, tau_pdh: f64, dt: f64) -> Self {
        Self {
            modes,
            pdh: PdhFilter::new(tau_pdh, dt),
            t: 0.0,
        }
    }

    pub fn x_pdh(&self) -> f64 {
        self.pdh.average()
    }
}
