use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::Modes;

/// Mean thermal occupancy of each input bath.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BathOccupancies {
    pub a: f64,
    pub m_p: f64,
    pub m_c: f64,
    pub b: f64,
}

/// Per-trajectory random stream: stream `index` of the ChaCha generator
/// keyed by `master_seed`, so ensemble members never share draws and the
/// result does not depend on which worker runs which member.
pub fn trajectory_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Complex Gaussian with independent parts of variance `var_part` each.
pub(crate) fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, var_part: f64) -> Complex64 {
    let sd = var_part.sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(sd * re, sd * im)
}

/// Wiener increments of the four input baths over one step.
///
/// Each increment has ⟨|dW|²⟩ = (n̄ + ½)·dt split evenly between the real and
/// imaginary parts. The caller scales them by √(2κ) or √(2γ).
#[derive(Debug, Clone)]
pub struct NoiseSource {
    rng: ChaCha8Rng,
    enabled: bool,
    part_var: [f64; 4],
}

impl NoiseSource {
    pub fn new(rng: ChaCha8Rng, enabled: bool, dt: f64, occ: BathOccupancies) -> Self {
        let v = |n: f64| (n + 0.5) * dt / 2.0;
        Self {
            rng,
            enabled,
            part_var: [v(occ.a), v(occ.m_p), v(occ.m_c), v(occ.b)],
        }
    }

    pub fn enabled(&self) -> bool {
        self.enabled
    }

    pub fn rng_mut(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn increments(&mut self) -> Modes {
        if !self.enabled {
            return Modes::ZERO;
        }
        let [va, vp, vc, vb] = self.part_var;
        Modes {
            a: complex_gaussian(&mut self.rng, va),
            m_p: complex_gaussian(&mut self.rng, vp),
            m_c: complex_gaussian(&mut self.rng, vc),
            b: complex_gaussian(&mut self.rng, vb),
        }
    }
}

/// Free-function form: independent increments for `dt` given bath
/// occupancies, drawn from `rng` in the fixed order a, m_p, m_c, b.
pub fn noise_increments<R: Rng + ?Sized>(
    rng: &mut R,
    dt: f64,
    occ: &BathOccupancies,
    enabled: bool,
) -> Modes {
    if !enabled {
        return Modes::ZERO;
    }
    let v = |n: f64| (n + 0.5) * dt / 2.0;
    Modes {
        a: complex_gaussian(rng, v(occ.a)),
        m_p: complex_gaussian(rng, v(occ.m_p)),
        m_c: complex_gaussian(rng, v(occ.m_c)),
        b: complex_gaussian(rng, v(occ.b)),
    }
}
