use std::f64::consts::TAU;

use gup_core::dynamics::{integrate, DriveSchedule, IntegratorConfig, Mechanics};
use gup_core::estimation::{
    calibrate_amplitude, calibrate_from_powers, find_peak, regress_beta, regress_beta_with,
    CalibrationForm, CalibrationOptions, FitWeighting, SidebandPeak, WindowObservation,
};
use gup_core::model::{Preset, SystemParams};
use gup_core::spectra::{
    analytic_calibration_spectrum, periodogram_with, Line, TimeSeries, WindowFn,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn com() -> SystemParams {
    Preset::Com.params().with_q(1e5)
}

#[test]
fn calibration_recovers_prescribed_amplitude() {
    let mut params = com();
    let w = params.omega_b;
    let period = TAU / w;
    let amplitude = 150.0;
    params.g_m = 0.04 * w / (2.0 * amplitude);
    let mut sched = DriveSchedule::resonant_defaults(w);
    sched.ec = 50.0 * params.kappa_m;
    sched.phi0 = 0.02;
    sched.omega_c = w * (1.0 - 0.0075);
    let window = 1000.0 * period;
    let mut cfg = IntegratorConfig::new(
        TAU / (20.0 * params.kappa_m),
        10.0 * window + 20.0 * period,
        4,
    );
    cfg.noise_enabled = false;
    cfg.mechanics = Mechanics::Prescribed {
        amplitude,
        omega: w,
    };
    let tr = integrate(&params, &sched, &cfg).unwrap();
    let mc = tr.mc_series();
    for k in 0..10 {
        let t = 20.0 * period + k as f64 * window;
        let spec = periodogram_with(&mc, t, window, WindowFn::Hann).unwrap();
        let cal = calibrate_amplitude(
            &spec,
            &params,
            sched.phi0,
            sched.omega_c,
            w,
            &CalibrationOptions::default(),
        )
        .unwrap();
        let ratio = cal.a_sq / (amplitude * amplitude);
        assert!((ratio - 1.0).abs() < 0.05, "window {k}: ratio {ratio:.4}");
        assert!((cal.omega_mech - w).abs() < spec.resolution());
    }
}

fn observations(
    rng: &mut ChaCha8Rng,
    params: &SystemParams,
    orders: &[u32],
    sigma: f64,
) -> Vec<WindowObservation> {
    let w = params.omega_b;
    (0..12)
        .map(|k| {
            let x = 1e4 * (-0.1 * k as f64).exp();
            let sidebands = orders
                .iter()
                .map(|&u| {
                    let noise: f64 = rng.sample(StandardNormal);
                    SidebandPeak {
                        u,
                        omega: u as f64 * w * (1.0 + params.beta_nl * x) + sigma * noise,
                        snr: 100.0,
                    }
                })
                .collect();
            WindowObservation {
                t: k as f64,
                a_sq_cal: x,
                sidebands,
            }
        })
        .collect()
}

fn slope_stats(orders: &[u32], sigma: f64, reps: usize, seed: u64) -> (f64, f64) {
    let params = com().with_beta_nl(1e-6);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let est: Vec<f64> = (0..reps)
        .map(|_| {
            regress_beta(&observations(&mut rng, &params, orders, sigma), &params)
                .unwrap()
                .beta_nl_est
        })
        .collect();
    let n = est.len() as f64;
    let mean = est.iter().sum::<f64>() / n;
    let var = est.iter().map(|b| (b - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

#[test]
fn slope_is_unbiased_under_position_noise() {
    let sigma = 0.5 * com().omega_b * 1e-6 * 1e4;
    let (mean, var) = slope_stats(&[1, 3, 5], sigma, 2000, 3);
    let se = (var / 2000.0).sqrt();
    assert!((mean - 1e-6).abs() < 4.0 * se, "mean {mean:.4e} ± {se:.2e}");
}

#[test]
fn high_orders_tighten_the_slope() {
    let sigma = 0.5 * com().omega_b * 1e-6 * 1e4;
    let (_, v1) = slope_stats(&[1], sigma, 1000, 5);
    let (_, v11) = slope_stats(&[11, 13, 15, 17, 19], sigma, 1000, 6);
    assert!(v1 / v11 > 50.0, "variance ratio {:.1}", v1 / v11);
}

#[test]
fn order_weighting_matches_unweighted_on_exact_data() {
    let params = com().with_beta_nl(3e-6);
    let obs = observations(
        &mut ChaCha8Rng::seed_from_u64(0),
        &params,
        &[1, 3, 5, 7],
        0.0,
    );
    let a = regress_beta(&obs, &params).unwrap();
    let b = regress_beta_with(&obs, &params, FitWeighting::OrderSnr).unwrap();
    assert!((a.beta_nl_est / 3e-6 - 1.0).abs() < 1e-9);
    assert!((b.beta_nl_est / 3e-6 - 1.0).abs() < 1e-9);
    assert!(a.r_squared > 1.0 - 1e-12);
}

proptest! {
    #[test]
    fn exact_lines_recover_beta(log_beta in -9.0f64..-3.0, c in 0.9f64..1.1, spread in 0.1f64..0.9) {
        let params = com();
        let beta = 10f64.powf(log_beta);
        let w = params.omega_b;
        let obs: Vec<WindowObservation> = (0..6)
            .map(|k| {
                let x = 1e3 * (1.0 - spread * k as f64 / 6.0);
                WindowObservation {
                    t: k as f64,
                    a_sq_cal: x,
                    sidebands: [1u32, 3, 5]
                        .iter()
                        .map(|&u| SidebandPeak { u, omega: u as f64 * (c * w + w * beta * x), snr: 50.0 })
                        .collect(),
                }
            })
            .collect();
        let fit = regress_beta(&obs, &params).unwrap();
        prop_assert!((fit.beta_nl_est / beta - 1.0).abs() < 1e-6);
        prop_assert!((fit.intercept / (c * w) - 1.0).abs() < 1e-9);
        prop_assert_eq!(fit.intercept_flagged, (c - 1.0).abs() > 0.01);
    }

    #[test]
    fn tone_peak_within_tenth_of_a_bin(cycles in 40.0f64..400.0, phase in 0.0f64..TAU) {
        let n = 4096usize;
        let dt = 1e-3;
        let omega = TAU * cycles / (n as f64 * dt);
        let values = (0..n).map(|k| (omega * k as f64 * dt + phase).cos()).collect();
        let series = TimeSeries::new(0.0, dt, values).unwrap();
        let spec = periodogram_with(&series, 0.0, n as f64 * dt, WindowFn::Hann).unwrap();
        let res = spec.resolution();
        let pk = find_peak(&spec, omega - 5.0 * res, omega + 5.0 * res).unwrap();
        prop_assert!((pk.omega - omega).abs() < 0.1 * res);
    }

    #[test]
    fn calibration_inverts_line_weights(a in 1.0f64..500.0, phi0 in 0.005f64..0.05) {
        let mut params = com();
        params.g_m = 0.02 * params.omega_b / (2.0 * 500.0);
        let w = params.omega_b;
        let table = analytic_calibration_spectrum(&params, a, w, phi0, 0.99 * w, 1e6, 1.0);
        let mech = table.get(Line::Mechanical, 1).unwrap().weight;
        let modl = table.get(Line::Modulation, 1).unwrap().weight;
        let a_sq = calibrate_from_powers(mech, modl, &params, phi0, CalibrationForm::SquareRoot).unwrap();
        prop_assert!((a_sq / (a * a) - 1.0).abs() < 1e-10);
    }
}
