use std::path::{Path, PathBuf};
use std::time::Instant;

use gup_core::dynamics::{integrate, DynamicsError, Trajectory};
use gup_core::estimation::{
    aggregate_er, analyze, error_metric, purity_from_samples, EnsembleStats, EstimationError,
    FitResult, RunAnalysis, WindowFailure, WindowObservation, MIN_TRAJECTORIES,
};
use gup_core::model::{convert_beta, resolution_bound, BetaDirection, Preset, ResolutionBound};
use gup_core::spectra::{
    analytic_calibration_spectrum, analytic_sideband_spectrum, effective_force, steady_amplitude,
    SeriesForm, DEFAULT_N_MAX,
};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{content_hash, derive_seed, ConfigError, ResolvedRun, RunConfig};
use crate::output::{self, OutputError, SCHEMA_VERSION};
use crate::profiles::{DeskTargets, Profile};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("integration failed: {0}")]
    Integration(String),
    #[error("estimation failed: {0}")]
    Estimation(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Integration(_) => 3,
            CliError::Estimation(_) => 4,
            CliError::Io(_) => 5,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Read { .. } => CliError::Io(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<OutputError> for CliError {
    fn from(e: OutputError) -> Self {
        match e {
            OutputError::MissingChannel { .. } | OutputError::Format { .. } => {
                CliError::Validation(e.to_string())
            }
            OutputError::Io { .. } => CliError::Io(e.to_string()),
        }
    }
}

impl From<DynamicsError> for CliError {
    fn from(e: DynamicsError) -> Self {
        match e {
            DynamicsError::InvalidSchedule(_)
            | DynamicsError::InvalidConfig(_)
            | DynamicsError::Model(_) => CliError::Validation(e.to_string()),
            _ => CliError::Integration(e.to_string()),
        }
    }
}

impl From<EstimationError> for CliError {
    fn from(e: EstimationError) -> Self {
        match e {
            EstimationError::InvalidPlan(_) | EstimationError::Model(_) => {
                CliError::Validation(e.to_string())
            }
            _ => CliError::Estimation(e.to_string()),
        }
    }
}

fn report_runtime(what: &str, start: Instant) {
    eprintln!("{what}: {:.2} s wall-clock", start.elapsed().as_secs_f64());
}

fn out_dir(cfg: &RunConfig, default: &str) -> PathBuf {
    cfg.out.clone().unwrap_or_else(|| PathBuf::from(default))
}

fn write_snapshot(dir: &Path, run: &ResolvedRun) -> Result<String, CliError> {
    output::create_dir(dir)?;
    let snap = run.snapshot();
    output::write_text(&dir.join("config.snapshot"), &snap)?;
    Ok(content_hash(&snap))
}

fn run_trajectory(run: &ResolvedRun, stream: u64) -> Result<Trajectory, CliError> {
    let sc = &run.scenario;
    let mut cfg = sc.integrator.clone();
    cfg.seed = run.seed;
    cfg.stream = stream;
    Ok(integrate(&sc.params, &sc.schedule, &cfg)?)
}

/// Record indices at which the ensemble purity is sampled.
fn purity_indices(len: usize) -> Vec<usize> {
    let n = len.min(64);
    if n == 0 {
        return Vec::new();
    }
    (0..n).map(|k| k * (len - 1) / (n.max(2) - 1)).collect()
}

#[derive(Debug, Serialize)]
pub struct SimulateSummary {
    pub trajectories: usize,
    pub steps: u64,
    pub samples: usize,
    pub final_amplitude: f64,
}

/// steps, samples, final |b| and the purity samples of one trajectory
type TrajectorySummary = (u64, usize, f64, Vec<(f64, Complex64)>);

pub fn simulate(cfg: &RunConfig, csv: bool) -> Result<SimulateSummary, CliError> {
    let run = cfg.resolve()?;
    let dir = out_dir(cfg, "run");
    let start = Instant::now();
    write_snapshot(&dir, &run)?;

    let summary = if run.trajectories == 1 {
        let tr = run_trajectory(&run, 0)?;
        output::write_trajectory(&dir.join("trajectory.bin"), &tr)?;
        if csv {
            output::write_trajectory_csv(&dir.join("trajectory.csv"), &tr)?;
        }
        SimulateSummary {
            trajectories: 1,
            steps: tr.steps,
            samples: tr.len(),
            final_amplitude: tr.final_b().map_or(0.0, |b| b.norm()),
        }
    } else {
        let tdir = dir.join("trajectories");
        output::create_dir(&tdir)?;
        // trajectories are written as they finish; only the purity samples stay in memory
        let per: Vec<TrajectorySummary> = (0..run.trajectories)
            .into_par_iter()
            .map(|i| -> Result<_, CliError> {
                let tr = run_trajectory(&run, i as u64)?;
                output::write_trajectory(&tdir.join(format!("traj_{i:04}.bin")), &tr)?;
                if csv {
                    output::write_trajectory_csv(&tdir.join(format!("traj_{i:04}.csv")), &tr)?;
                }
                let samples = purity_indices(tr.len())
                    .into_iter()
                    .map(|k| (tr.times[k], tr.b_samples[k]))
                    .collect();
                Ok((
                    tr.steps,
                    tr.len(),
                    tr.final_b().map_or(0.0, |b| b.norm()),
                    samples,
                ))
            })
            .collect::<Result<_, _>>()?;
        if run.trajectories >= MIN_TRAJECTORIES {
            let n_times = per[0].3.len();
            let mut series = Vec::with_capacity(n_times);
            for k in 0..n_times {
                let t = per[0].3[k].0;
                let b: Vec<Complex64> = per.iter().map(|p| p.3[k].1).collect();
                if let Ok(p) = purity_from_samples(t, &b) {
                    series.push((t, p.purity));
                }
            }
            output::write_purity_csv(&dir.join("purity.csv"), &series)?;
        } else {
            log::info!(
                "purity needs at least {MIN_TRAJECTORIES} trajectories; purity.csv not written"
            );
        }
        SimulateSummary {
            trajectories: run.trajectories,
            steps: per.iter().map(|p| p.0).sum(),
            samples: per[0].1,
            final_amplitude: per.iter().map(|p| p.2).sum::<f64>() / per.len() as f64,
        }
    };
    println!(
        "simulated {} trajector{} into {}: {} steps, {} samples each, final |A| = {:.6e}",
        summary.trajectories,
        if summary.trajectories == 1 {
            "y"
        } else {
            "ies"
        },
        dir.display(),
        summary.steps,
        summary.samples,
        summary.final_amplitude
    );
    report_runtime("simulate", start);
    Ok(summary)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub stream: u64,
    pub status: String,
    pub error: Option<String>,
    pub fit: Option<FitResult>,
    pub observations: Vec<WindowObservation>,
    pub failures: Vec<WindowFailure>,
    pub steps: u64,
}

impl RunRecord {
    fn from_analysis(stream: u64, steps: u64, an: &RunAnalysis) -> Self {
        let (status, error, fit) = match &an.fit {
            Ok(f) => ("ok".to_string(), None, Some(f.clone())),
            Err(e) => ("failed".to_string(), Some(e.to_string()), None),
        };
        Self {
            stream,
            status,
            error,
            fit,
            observations: an.observations.clone(),
            failures: an.failures.clone(),
            steps,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct NullTest {
    /// 1/(Q·max|A′|²).
    pub bound: f64,
    pub estimate_abs: f64,
    pub below_bound: bool,
}

#[derive(Debug, Serialize)]
pub struct FitRecord {
    pub schema_version: u32,
    pub config_hash: String,
    pub profile: Profile,
    pub preset: Preset,
    pub seed: u64,
    pub beta_nl_true: f64,
    pub beta0_true: f64,
    pub status: String,
    pub error: Option<String>,
    pub resolution_bound: Option<ResolutionBound>,
    pub null_test: Option<NullTest>,
    pub runs: Vec<RunRecord>,
    pub ensemble: Option<EnsembleStats>,
}

fn analyze_one(run: &ResolvedRun, tr: &Trajectory, keep: bool) -> Result<RunAnalysis, CliError> {
    let mut plan = run.scenario.plan.clone();
    plan.keep_spectra = keep;
    let mut an = analyze(tr, &plan)?;
    if let Ok(f) = an.fit.as_mut() {
        f.er = error_metric(f.beta_nl_est, run.beta_nl);
    }
    Ok(an)
}

/// Runs the pipeline on fresh simulations, or on the trajectories of a
/// previous `simulate` when `input` is given.
pub fn estimate(cfg: &RunConfig, input: Option<&Path>) -> Result<FitRecord, CliError> {
    let start = Instant::now();
    let (run, source) = match input {
        Some(dir) => {
            let mut base = RunConfig::load(&dir.join("config.snapshot"))?;
            // the flags and document given now take precedence over the snapshot
            merge_into(&mut base, cfg);
            (base.resolve()?, Some(dir.to_path_buf()))
        }
        None => (cfg.resolve()?, None),
    };
    let dir = out_dir(cfg, "run");
    let hash = write_snapshot(&dir, &run)?;
    let sc = &run.scenario;

    let load = |i: usize| -> Result<Trajectory, CliError> {
        match &source {
            Some(src) => {
                let path = if run.trajectories == 1 {
                    src.join("trajectory.bin")
                } else {
                    src.join("trajectories").join(format!("traj_{i:04}.bin"))
                };
                let mut ic = sc.integrator.clone();
                ic.seed = run.seed;
                ic.stream = i as u64;
                Ok(output::read_trajectory(
                    &path,
                    &sc.params,
                    &sc.schedule,
                    &ic,
                )?)
            }
            None => run_trajectory(&run, i as u64),
        }
    };
    let outcomes: Vec<(RunRecord, Option<RunAnalysis>)> = (0..run.trajectories)
        .into_par_iter()
        .map(|i| -> Result<_, CliError> {
            let tr = load(i)?;
            let an = analyze_one(&run, &tr, i == 0)?;
            let rec = RunRecord::from_analysis(i as u64, tr.steps, &an);
            Ok((rec, (i == 0).then_some(an)))
        })
        .collect::<Result<_, _>>()?;

    let mut runs = Vec::with_capacity(outcomes.len());
    for (rec, an) in outcomes {
        if let Some(an) = an {
            output::write_spectra(&dir.join("spectra"), &an)?;
        }
        runs.push(rec);
    }
    let fits: Vec<(usize, &FitResult)> = runs
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.fit.as_ref().map(|f| (i, f)))
        .collect();
    output::write_text(&dir.join("points.csv"), &output::points_csv(&fits))?;
    for (i, f) in &fits {
        let b0 = convert_beta(
            f.beta_nl_est.max(0.0),
            BetaDirection::BetaNlToBeta0,
            &sc.params,
        )
        .unwrap_or(f64::NAN);
        let er = f.er.map_or("undefined".to_string(), |e| format!("{e:+.4}"));
        println!(
            "run {i}: beta_nl' = {:+.4e}  beta0' = {:.4e}  R^2 = {:.4}  Er = {er}  ({} points)",
            f.beta_nl_est,
            if f.beta_nl_est > 0.0 { b0 } else { f.beta0_est },
            f.r_squared,
            f.points.len()
        );
    }

    let ensemble = if run.trajectories > 1 && run.beta_nl > 0.0 {
        let ers: Vec<Option<f64>> = runs
            .iter()
            .map(|r| r.fit.as_ref().and_then(|f| f.er))
            .collect();
        aggregate_er(&ers).ok()
    } else {
        None
    };
    let first_fit = runs[0].fit.as_ref();
    let max_x = first_fit.map(|f| f.max_x());
    let bound = max_x
        .filter(|&x| x > 0.0)
        .and_then(|x| resolution_bound(&sc.params, x).ok());
    let null_test = match (run.beta_nl == 0.0, first_fit) {
        (true, Some(f)) => {
            let b = f.resolution_limit(&sc.params);
            Some(NullTest {
                bound: b,
                estimate_abs: f.beta_nl_est.abs(),
                below_bound: f.beta_nl_est.abs() < b,
            })
        }
        _ => None,
    };
    let failed: Vec<&RunRecord> = runs.iter().filter(|r| r.fit.is_none()).collect();
    let (status, error) = if failed.len() == runs.len() {
        ("failed", failed[0].error.clone())
    } else if failed.is_empty() {
        ("ok", None)
    } else {
        (
            "partial",
            Some(format!("{} of {} runs failed", failed.len(), runs.len())),
        )
    };
    let record = FitRecord {
        schema_version: SCHEMA_VERSION,
        config_hash: hash,
        profile: run.profile,
        preset: run.preset,
        seed: run.seed,
        beta_nl_true: run.beta_nl,
        beta0_true: run.beta0,
        status: status.to_string(),
        error: error.clone(),
        resolution_bound: bound,
        null_test,
        runs,
        ensemble,
    };
    output::write_json(&dir.join("fit.json"), &record)?;

    if let Some(n) = &record.null_test {
        println!(
            "null: |beta_nl'| = {:.3e} {} bound 1/(Q max|A'|^2) = {:.3e}",
            n.estimate_abs,
            if n.below_bound { "<" } else { ">=" },
            n.bound
        );
    }
    if let Some(e) = &record.ensemble {
        println!(
            "ensemble: mean Er = {:+.4}, 68% CI [{:+.4}, {:+.4}], {} runs, {} undefined",
            e.mean_er, e.ci68_low, e.ci68_high, e.n_runs, e.n_undefined
        );
    }
    report_runtime("estimate", start);
    if status == "failed" {
        return Err(CliError::Estimation(error.unwrap_or_default()));
    }
    Ok(record)
}

/// Copies every value set in `over` onto `base`.
fn merge_into(base: &mut RunConfig, over: &RunConfig) {
    macro_rules! take {
        ($($f:ident).+) => {
            if over.$($f).+.is_some() {
                base.$($f).+ = over.$($f).+.clone();
            }
        };
    }
    take!(profile);
    take!(preset);
    if over.beta_nl.is_some() || over.beta0.is_some() {
        base.beta_nl = over.beta_nl;
        base.beta0 = over.beta0;
    }
    take!(seed);
    take!(trajectories);
    take!(out);
    take!(integrator.dt);
    take!(analysis.window);
    take!(analysis.n_windows);
    take!(analysis.t_start);
    take!(analysis.spacing);
    take!(analysis.orders);
    take!(analysis.window_fn);
    take!(analysis.mode);
    take!(analysis.weighting);
    take!(analysis.calibration_form);
    take!(analysis.min_snr);
    take!(analysis.delta_search);
    take!(analysis.mech_band_below);
    take!(analysis.mech_band_above);
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RepRecord {
    pub schema_version: u32,
    pub config_hash: String,
    pub rep: usize,
    pub seed: u64,
    pub status: String,
    pub error: Option<String>,
    pub beta_nl_est: Option<f64>,
    pub r_squared: Option<f64>,
    pub er: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub preset: Preset,
    pub beta_nl: f64,
    pub beta0: f64,
    pub stats: Option<EnsembleStats>,
    pub n_valid: usize,
    pub n_undefined: usize,
    pub n_failed: usize,
}

fn run_rep(cell: &ResolvedRun, rep: usize, seed: u64, hash: &str) -> RepRecord {
    let mut run = cell.clone();
    run.seed = seed;
    let result = run_trajectory(&run, 0).and_then(|tr| analyze_one(&run, &tr, false));
    let (status, error, fit) = match result {
        Ok(an) => match an.fit {
            Ok(f) => ("ok", None, Some(f)),
            Err(e) => ("failed", Some(e.to_string()), None),
        },
        Err(e) => ("failed", Some(e.to_string()), None),
    };
    RepRecord {
        schema_version: SCHEMA_VERSION,
        config_hash: hash.to_string(),
        rep,
        seed,
        status: status.to_string(),
        error,
        beta_nl_est: fit.as_ref().map(|f| f.beta_nl_est),
        r_squared: fit.as_ref().map(|f| f.r_squared),
        er: fit.as_ref().and_then(|f| f.er),
    }
}

fn load_rep(path: &Path, hash: &str) -> Option<RepRecord> {
    let text = std::fs::read_to_string(path).ok()?;
    let rec: RepRecord = serde_json::from_str(&text).ok()?;
    (rec.config_hash == hash).then_some(rec)
}

/// Grid of presets × β values with seeded repetitions. Each repetition is
/// stored as it finishes, so an interrupted sweep resumes where it stopped.
pub fn sweep(cfg: &RunConfig) -> Result<Vec<SweepRow>, CliError> {
    let start = Instant::now();
    let spec = cfg.sweep.clone().unwrap_or_default();
    let presets: Vec<Preset> = if spec.presets.is_empty() {
        vec![cfg.preset()?]
    } else {
        spec.presets
            .iter()
            .map(|p| {
                p.parse::<Preset>()
                    .map_err(|e| CliError::Validation(e.to_string()))
            })
            .collect::<Result<_, _>>()?
    };
    #[derive(Clone, Copy)]
    enum Grid {
        Nl(f64),
        Zero(f64),
    }
    let grid: Vec<Grid> = match (spec.beta_nl.is_empty(), spec.beta0.is_empty()) {
        (false, false) => {
            return Err(CliError::Validation(
                "sweep: exactly one of beta_nl and beta0 grids may be set".into(),
            ))
        }
        (false, true) => spec.beta_nl.iter().map(|&b| Grid::Nl(b)).collect(),
        (true, false) => spec.beta0.iter().map(|&b| Grid::Zero(b)).collect(),
        (true, true) => match (cfg.beta_nl, cfg.beta0) {
            (Some(b), None) => vec![Grid::Nl(b)],
            (None, Some(b)) => vec![Grid::Zero(b)],
            _ => {
                return Err(CliError::Validation(
                    "sweep: give a beta_nl or beta0 grid in [sweep], or exactly one of beta_nl and beta0".into(),
                ))
            }
        },
    };
    let reps = cfg.trajectories.or(spec.repetitions).unwrap_or(15);
    if reps == 0 {
        return Err(CliError::Validation(
            "sweep: repetitions must be >= 1".into(),
        ));
    }
    let master = cfg.seed.unwrap_or(0);
    let dir = out_dir(cfg, "sweep");
    output::create_dir(&dir)?;

    let mut rows = Vec::new();
    for &preset in &presets {
        for (k, g) in grid.iter().enumerate() {
            let mut c = cfg.clone();
            c.preset = Some(preset.name().to_string());
            c.sweep = None;
            c.trajectories = Some(1);
            (c.beta_nl, c.beta0) = match *g {
                Grid::Nl(b) => (Some(b), None),
                Grid::Zero(b) => (None, Some(b)),
            };
            let cell = c.resolve()?;
            let cell_dir = dir.join("cells").join(format!("{}_{k:03}", preset.name()));
            let hash = write_snapshot(&cell_dir, &cell)?;
            let records: Vec<RepRecord> = (0..reps)
                .into_par_iter()
                .map(|rep| -> Result<RepRecord, CliError> {
                    let path = cell_dir.join(format!("rep_{rep:03}.json"));
                    if let Some(done) = load_rep(&path, &hash) {
                        return Ok(done);
                    }
                    let seed = derive_seed(master, preset, cell.beta_nl, rep);
                    let rec = run_rep(&cell, rep, seed, &hash);
                    output::write_json(&path, &rec)?;
                    Ok(rec)
                })
                .collect::<Result<_, _>>()?;
            let ers: Vec<Option<f64>> = records
                .iter()
                .filter(|r| r.status == "ok")
                .map(|r| r.er)
                .collect();
            let n_failed = records.len() - ers.len();
            let n_valid = ers.iter().filter(|e| e.is_some()).count();
            let stats = aggregate_er(&ers).ok();
            eprintln!(
                "cell {} beta_nl={:.3e}: {n_valid} valid, {} undefined, {n_failed} failed",
                preset.name(),
                cell.beta_nl,
                ers.len() - n_valid
            );
            rows.push(SweepRow {
                preset,
                beta_nl: cell.beta_nl,
                beta0: cell.beta0,
                stats,
                n_valid,
                n_undefined: ers.len() - n_valid,
                n_failed,
            });
        }
    }

    let mut csv = String::from("preset,beta0,mean_Er,ci_low,ci_high,n_valid,n_undefined\n");
    for r in &rows {
        let (m, lo, hi) = r
            .stats
            .as_ref()
            .map_or((f64::NAN, f64::NAN, f64::NAN), |s| {
                (s.mean_er, s.ci68_low, s.ci68_high)
            });
        csv.push_str(&format!(
            "{},{:e},{},{},{},{},{}\n",
            r.preset.name(),
            r.beta0,
            m,
            lo,
            hi,
            r.n_valid,
            r.n_undefined
        ));
    }
    output::write_text(&dir.join("summary.csv"), &csv)?;
    print!("{csv}");
    report_runtime("sweep", start);
    if rows.iter().all(|r| r.n_failed == reps) {
        return Err(CliError::Estimation("every sweep repetition failed".into()));
    }
    Ok(rows)
}

pub fn presets(cfg: &RunConfig) -> Result<(), CliError> {
    let profile = cfg.profile.unwrap_or_default();
    println!(
        "{:<5} {:>12} {:>12} {:>12} {:>8} {:>10} {:>10} {:>9} {:>11}",
        "name",
        "ω_b/2π [MHz]",
        "κ_a/2π [MHz]",
        "κ_m/2π [MHz]",
        "Q",
        "g_a/2π [Hz]",
        "g_m/2π [Hz]",
        "m [ng]",
        "β_NL/β₀"
    );
    let tau = std::f64::consts::TAU;
    for p in Preset::ALL {
        let s = p.params();
        println!(
            "{:<5} {:>12.4} {:>12.4} {:>12.4} {:>8.0e} {:>10.4} {:>10.4} {:>9.3} {:>11.3e}",
            p.name(),
            s.omega_b / tau / 1e6,
            s.kappa_a / tau / 1e6,
            s.kappa_m / tau / 1e6,
            s.q_factor,
            s.g_a / tau,
            s.g_m / tau,
            s.mass * 1e12,
            s.beta_ratio()
        );
    }
    println!();
    println!("profile {}:", profile.name());
    println!(
        "{:<5} {:>8} {:>10} {:>10} {:>10} {:>10} {:>11} {:>11} {:>8} {:>10}",
        "name",
        "Q",
        "E1/ω_b",
        "E2/ω_b",
        "Ec/ω_b",
        "Ep/ω_b",
        "t_p [s]",
        "Δt [s]",
        "windows",
        "steps"
    );
    for p in Preset::ALL {
        let mut c = cfg.clone();
        c.preset = Some(p.name().to_string());
        let sc = c.scenario_for(p)?;
        let w = sc.params.omega_b;
        println!(
            "{:<5} {:>8.0e} {:>10.3e} {:>10.3e} {:>10.3e} {:>10.3e} {:>11.4e} {:>11.4e} {:>8} {:>10.3e}",
            p.name(),
            sc.params.q_factor,
            sc.schedule.e1 / w,
            sc.schedule.e2 / w,
            sc.schedule.ec / w,
            sc.schedule.ep / w,
            sc.schedule.t_p,
            sc.plan.window,
            sc.plan.n_windows.map_or("all".to_string(), |n| n.to_string()),
            sc.integrator.n_steps() as f64
        );
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
pub struct OracleArgs {
    pub a_sq: Option<f64>,
    pub u_max: u32,
    pub form: SeriesForm,
}

/// Prints the analytic spectra and the effective pump force for a scenario.
pub fn oracle(cfg: &RunConfig, args: OracleArgs) -> Result<(), CliError> {
    let preset = cfg.preset()?;
    let sc = cfg.scenario_for(preset)?;
    let p = &sc.params;
    let s = &sc.schedule;
    let w = p.omega_b;
    let a_sq = args.a_sq.unwrap_or(DeskTargets::default().a_sq);
    if !(a_sq > 0.0 && a_sq.is_finite()) {
        return Err(CliError::Validation(format!(
            "--a-sq must be positive, got {a_sq}"
        )));
    }
    let amp = a_sq.sqrt();
    let beta_nl = match (cfg.beta_nl, cfg.beta0) {
        (None, None) => 0.0,
        _ => cfg.beta_nl_for(&sc)?,
    };
    let w_t = w * (1.0 + beta_nl * a_sq);
    let gain = sc.integrator.homodyne_gain;
    let xi_a = 2.0 * p.g_a * amp / w;
    let xi_m = 2.0 * p.g_m * amp / w;
    println!(
        "# preset={} |A|^2={a_sq:e} beta_nl={beta_nl:e} omega_b'={w_t:e} xi_a={xi_a:.4} xi_m={xi_m:.4} series={:?}",
        preset.name(),
        args.form
    );
    let table = analytic_sideband_spectrum(
        p,
        amp,
        w_t,
        s.ep,
        gain,
        args.u_max,
        DEFAULT_N_MAX,
        args.form,
    )
    .map_err(|e| CliError::Estimation(e.to_string()))?;
    let top = table.entries.iter().map(|e| e.weight).fold(0.0, f64::max);
    println!("[nonlinear probe sidebands]");
    println!("u,omega,omega_over_omega_b,weight,rel_db");
    for e in &table.entries {
        let db = if e.weight > 0.0 && top > 0.0 {
            10.0 * (e.weight / top).log10()
        } else {
            f64::NEG_INFINITY
        };
        println!(
            "{},{:e},{:.9},{:e},{:.2}",
            e.u,
            e.omega,
            e.omega / w,
            e.weight,
            db
        );
    }
    println!("[calibration probe lines]");
    println!("u,line,omega,weight");
    let cal = analytic_calibration_spectrum(p, amp, w_t, s.phi0, s.omega_c, s.ec, gain);
    for e in &cal.entries {
        println!("{},{:?},{:e},{:e}", e.u, e.line, e.omega, e.weight);
    }
    println!("[effective pump force]");
    let f = effective_force(
        s.e1,
        s.e2,
        xi_m,
        s.delta1,
        s.delta2p,
        p.kappa_m,
        w,
        DEFAULT_N_MAX,
    )
    .map_err(|e| CliError::Estimation(e.to_string()))?;
    // F carries no coupling; the force on b is g_m·F
    let steady = steady_amplitude(f * p.g_m, s.delta1, w, 0.0, p.gamma)
        .map_err(|e| CliError::Estimation(e.to_string()))?;
    println!("re_F,im_F,abs_F,steady_a_sq");
    println!("{:e},{:e},{:e},{:e}", f.re, f.im, f.norm(), steady);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_distinct() {
        let codes = [
            CliError::Validation(String::new()).exit_code(),
            CliError::Integration(String::new()).exit_code(),
            CliError::Estimation(String::new()).exit_code(),
            CliError::Io(String::new()).exit_code(),
        ];
        for (i, a) in codes.iter().enumerate() {
            assert_ne!(*a, 0);
            for b in &codes[i + 1..] {
                assert_ne!(a, b);
            }
        }
    }

    #[test]
    fn purity_indices_span_record() {
        let idx = purity_indices(1000);
        assert_eq!(idx.len(), 64);
        assert_eq!(idx[0], 0);
        assert_eq!(*idx.last().unwrap(), 999);
        assert_eq!(purity_indices(1), vec![0]);
    }
}
