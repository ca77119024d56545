use serde::{Deserialize, Serialize};

use super::DynamicsError;

/// Drive amplitudes, detunings and stage times of the three-stage protocol:
/// cooling (`t < t_c`), pumping (`t_c ≤ t < t_p`) and free ringdown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveSchedule {
    /// Pump component on the weak-coupling cavity, rad/s.
    pub e1: f64,
    /// Cooling component on the weak-coupling cavity, rad/s.
    pub e2: f64,
    /// Calibration probe drive.
    pub ec: f64,
    /// Nonlinear probe drive.
    pub ep: f64,
    /// ω₁ − ω₂.
    pub delta1: f64,
    /// Δ′₂, cooling-drive detuning from the locked cavity frequency.
    pub delta2p: f64,
    #[serde(default)]
    pub delta_cp: f64,
    #[serde(default)]
    pub delta_ap: f64,
    /// Phase-modulation depth of the calibration drive, rad.
    pub phi0: f64,
    /// Phase-modulation frequency, rad/s.
    pub omega_c: f64,
    pub t_c: f64,
    pub t_p: f64,
    /// Averaging window of the cavity-lock position estimate, s.
    pub tau_pdh: f64,
}

impl DriveSchedule {
    /// Red-detuned cooling drive with the pump beat resonant with the
    /// oscillator; both probes on resonance.
    pub fn resonant_defaults(omega_b: f64) -> Self {
        Self {
            e1: 0.0,
            e2: 0.0,
            ec: 0.0,
            ep: 0.0,
            delta1: omega_b,
            delta2p: omega_b,
            delta_cp: 0.0,
            delta_ap: 0.0,
            phi0: 0.0,
            omega_c: omega_b,
            t_c: 0.0,
            t_p: 0.0,
            tau_pdh: 20.0 * std::f64::consts::TAU / omega_b,
        }
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        let fields = [
            ("e1", self.e1),
            ("e2", self.e2),
            ("ec", self.ec),
            ("ep", self.ep),
            ("delta1", self.delta1),
            ("delta2p", self.delta2p),
            ("delta_cp", self.delta_cp),
            ("delta_ap", self.delta_ap),
            ("phi0", self.phi0),
            ("omega_c", self.omega_c),
            ("t_c", self.t_c),
            ("t_p", self.t_p),
            ("tau_pdh", self.tau_pdh),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(DynamicsError::InvalidSchedule(format!(
                    "{name} is not finite"
                )));
            }
        }
        if !(0.0 <= self.t_c && self.t_c <= self.t_p) {
            return Err(DynamicsError::InvalidSchedule(format!(
                "stage times must satisfy 0 <= t_c <= t_p (t_c = {}, t_p = {})",
                self.t_c, self.t_p
            )));
        }
        if self.tau_pdh <= 0.0 {
            return Err(DynamicsError::InvalidSchedule(
                "tau_pdh must be positive".into(),
            ));
        }
        if self.phi0 < 0.0 {
            return Err(DynamicsError::InvalidSchedule("phi0 must be >= 0".into()));
        }
        if self.omega_c <= 0.0 {
            return Err(DynamicsError::InvalidSchedule("omega_c must be > 0".into()));
        }
        Ok(())
    }

    /// Recommendations that do not invalidate the schedule.
    pub fn warnings(&self) -> Vec<String> {
        let strong = self.e1.abs().max(self.e2.abs());
        let probe = self.ec.abs().max(self.ep.abs());
        let mut out = Vec::new();
        if strong > 0.0 && probe >= 0.1 * strong {
            out.push(format!(
                "probe drives ({probe:.3e}) are not much weaker than the pump/cooling drives ({strong:.3e})"
            ));
        }
        out
    }
}

/// `(E₁(t), E₂(t))` for the three stages.
pub fn drive_envelope(t: f64, sched: &DriveSchedule) -> (f64, f64) {
    if t < sched.t_c {
        (0.0, sched.e2)
    } else if t < sched.t_p {
        (sched.e1, sched.e2)
    } else {
        (0.0, 0.0)
    }
}
