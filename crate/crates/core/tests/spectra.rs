use std::f64::consts::TAU;

use gup_core::dynamics::{integrate, DriveSchedule, IntegratorConfig, Mechanics, Scheme};
use gup_core::estimation::find_peak_with;
use gup_core::model::{Preset, SystemParams};
use gup_core::spectra::{
    analytic_sideband_spectrum, effective_force, periodogram_with, steady_amplitude, SeriesForm,
    WindowFn,
};

struct Probe {
    params: SystemParams,
    sched: DriveSchedule,
    config: IntegratorConfig,
    amplitude: f64,
}

fn prescribed_probe(xi_a: f64, periods: f64) -> Probe {
    let mut params = Preset::Com.params().with_q(1e5);
    let amplitude = 100.0;
    params.g_a = xi_a * params.omega_b / (2.0 * amplitude);
    let mut sched = DriveSchedule::resonant_defaults(params.omega_b);
    sched.ep = 4.0 * params.kappa_a;
    let period = TAU / params.omega_b;
    let dt = TAU / (40.0 * params.kappa_a);
    let mut config = IntegratorConfig::new(dt, (periods + 20.0) * period, 2);
    config.scheme = Scheme::Rk4;
    config.noise_enabled = false;
    config.mechanics = Mechanics::Prescribed {
        amplitude,
        omega: params.omega_b,
    };
    Probe {
        params,
        sched,
        config,
        amplitude,
    }
}

#[test]
fn prescribed_motion_reproduces_analytic_ladder() {
    for xi_a in [1.0, 3.0] {
        let periods = 400.0;
        let p = prescribed_probe(xi_a, periods);
        let tr = integrate(&p.params, &p.sched, &p.config).unwrap();
        let w = p.params.omega_b;
        let period = TAU / w;
        let spec = periodogram_with(
            &tr.alpha_series(),
            20.0 * period,
            periods * period,
            WindowFn::Hann,
        )
        .unwrap();
        let table = analytic_sideband_spectrum(
            &p.params,
            p.amplitude,
            w,
            p.sched.ep,
            1.0,
            9,
            32,
            SeriesForm::Corrected,
        )
        .unwrap();

        let res = spec.resolution();
        let line = |u: u32| {
            let c = u as f64 * w;
            find_peak_with(&spec, c - 4.0 * res, c + 4.0 * res, 0.0).unwrap()
        };
        let p1 = line(1);
        let pow1 = spec.band_power(p1.bin, 2);
        for u in (1..=9).step_by(2) {
            let pk = line(u);
            assert!(
                (pk.omega - u as f64 * w).abs() <= res,
                "xi {xi_a} u {u}: {} vs {}",
                pk.omega,
                u as f64 * w
            );
            if u <= 7 {
                let sim = spec.band_power(pk.bin, 2) / pow1;
                let want = table.weight(u as i32) / table.weight(1);
                assert!(
                    (sim / want - 1.0).abs() < 0.1,
                    "xi {xi_a} u {u}: ratio {sim:.4e} vs {want:.4e}"
                );
            }
        }
        for u in (2..=8).step_by(2) {
            let k = spec.bin_of(u as f64 * w);
            let even = spec.band_power(k, 2);
            assert!(
                even < 1e-2 * pow1,
                "xi {xi_a} u {u}: {even:.3e} vs {pow1:.3e}"
            );
        }
    }
}

#[test]
fn pumped_steady_state_matches_effective_force() {
    let mut params = Preset::Com.params().with_q(1e3);
    params.g_a = 0.0;
    let w = params.omega_b;
    let period = TAU / w;
    let mut sched = DriveSchedule::resonant_defaults(w);
    sched.e1 = 100.0 * params.kappa_m;
    sched.e2 = 100.0 * params.kappa_m;
    sched.t_p = 1.0;
    let mut xi_m = 0.0;
    let mut a_sq = 0.0;
    for _ in 0..3 {
        let f = effective_force(
            sched.e1,
            sched.e2,
            xi_m,
            sched.delta1,
            sched.delta2p,
            params.kappa_m,
            w,
            32,
        )
        .unwrap();
        a_sq = steady_amplitude(f * params.g_m, sched.delta1, w, 0.0, params.gamma).unwrap();
        xi_m = 2.0 * params.g_m * a_sq.sqrt() / w;
    }
    assert!(xi_m < 0.05 && a_sq > 1e3, "xi_m {xi_m}, |A|² {a_sq}");

    let t_end = 12.0 / params.gamma;
    let mut cfg = IntegratorConfig::new(TAU / (20.0 * params.kappa_m), t_end, 5);
    cfg.noise_enabled = false;
    cfg.record_start = t_end - 50.0 * period;
    let tr = integrate(&params, &sched, &cfg).unwrap();
    let n = tr.len() as f64;
    let mean_b = tr.b_samples.iter().sum::<num_complex::Complex64>() / n;
    let sim = tr
        .b_samples
        .iter()
        .map(|b| (b - mean_b).norm_sqr())
        .sum::<f64>()
        / n;
    assert!(
        (sim / a_sq - 1.0).abs() < 0.05,
        "simulated {sim:.4e} vs steady {a_sq:.4e}"
    );
}

proptest::proptest! {
    #[test]
    fn resonant_ladder_has_no_even_orders(xi in 0.01f64..6.0, amp in 1.0f64..1e3) {
        let mut params = Preset::Com.params();
        params.g_a = xi * params.omega_b / (2.0 * amp);
        let table = analytic_sideband_spectrum(&params, amp, params.omega_b, 1e6, 1.0, 8, 32, SeriesForm::Corrected).unwrap();
        for u in 1..=8 {
            let wgt = table.weight(u);
            proptest::prop_assert!(wgt >= 0.0);
            if u % 2 == 0 {
                proptest::prop_assert_eq!(wgt, 0.0);
            }
        }
    }
}
