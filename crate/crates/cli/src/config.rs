//! Run configuration: a TOML document of overrides applied on top of a
//! named profile, plus the flags that override the document.
//!
//! Quantities may be written as plain SI numbers or as strings with a unit
//! suffix. Times accept `s`, `ms`, `us`, `ns`, `periods` (mechanical) and
//! `/gamma`; rates accept `rad/s`, `Hz`, `kHz`, `MHz` (multiplied by 2π) and
//! `omega_b`; temperatures accept `K`, `mK`, `uK`.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use gup_core::dynamics::Scheme;
use gup_core::estimation::{AnalysisMode, CalibrationForm, FitWeighting};
use gup_core::model::{convert_beta, BetaDirection, Preset};
use gup_core::spectra::WindowFn;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::profiles::{scenario, Profile, Scenario};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse config: {0}")]
    Parse(String),
    #[error("{field}: {reason}")]
    Field { field: String, reason: String },
    #[error("{0}")]
    Invalid(String),
}

fn field_err(field: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Field {
        field: field.to_string(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Quantity {
    Value(f64),
    Text(String),
}

impl From<f64> for Quantity {
    fn from(v: f64) -> Self {
        Quantity::Value(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Time,
    Rate,
    Temperature,
}

/// Scales that unit suffixes refer to.
#[derive(Debug, Clone, Copy)]
pub struct UnitContext {
    pub omega_b: f64,
    pub gamma: f64,
}

impl Quantity {
    pub fn resolve(
        &self,
        field: &str,
        dim: Dimension,
        ctx: UnitContext,
    ) -> Result<f64, ConfigError> {
        let v = match self {
            Quantity::Value(v) => *v,
            Quantity::Text(s) => parse_quantity(s, dim, ctx).map_err(|r| field_err(field, r))?,
        };
        if !v.is_finite() {
            return Err(field_err(field, "value must be finite"));
        }
        Ok(v)
    }
}

/// Parses `"<number> <unit>"`; the space is optional.
pub fn parse_quantity(s: &str, dim: Dimension, ctx: UnitContext) -> Result<f64, String> {
    let s = s.trim();
    let split = s
        .char_indices()
        .find(|&(i, c)| {
            // the number ends at the first char that cannot continue it
            !(c.is_ascii_digit()
                || c == '.'
                || c == '+'
                || c == '-'
                || ((c == 'e' || c == 'E')
                    && i > 0
                    && s[i + 1..]
                        .starts_with(|n: char| n.is_ascii_digit() || n == '-' || n == '+')))
        })
        .map(|(i, _)| i)
        .unwrap_or(s.len());
    let (num, unit) = s.split_at(split);
    let x: f64 = num
        .trim()
        .parse()
        .map_err(|_| format!("cannot read a number from {s:?}"))?;
    let unit = unit.trim();
    let tau = std::f64::consts::TAU;
    let scale = match (dim, unit) {
        (_, "") => 1.0,
        (Dimension::Time, "s") => 1.0,
        (Dimension::Time, "ms") => 1e-3,
        (Dimension::Time, "us") | (Dimension::Time, "µs") => 1e-6,
        (Dimension::Time, "ns") => 1e-9,
        (Dimension::Time, "periods") | (Dimension::Time, "period") => tau / ctx.omega_b,
        (Dimension::Time, "/gamma") => 1.0 / ctx.gamma,
        (Dimension::Rate, "rad/s") => 1.0,
        (Dimension::Rate, "Hz") => tau,
        (Dimension::Rate, "kHz") => tau * 1e3,
        (Dimension::Rate, "MHz") => tau * 1e6,
        (Dimension::Rate, "omega_b") => ctx.omega_b,
        (Dimension::Temperature, "K") => 1.0,
        (Dimension::Temperature, "mK") => 1e-3,
        (Dimension::Temperature, "uK") | (Dimension::Temperature, "µK") => 1e-6,
        (d, u) => return Err(format!("unit {u:?} is not valid for a {d:?} quantity")),
    };
    Ok(x * scale)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamOverrides {
    pub omega_b: Option<Quantity>,
    pub kappa_a: Option<Quantity>,
    pub kappa_m: Option<Quantity>,
    pub q_factor: Option<f64>,
    pub g_a: Option<Quantity>,
    pub g_m: Option<Quantity>,
    /// kg.
    pub mass: Option<f64>,
    pub temperature: Option<Quantity>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleOverrides {
    pub e1: Option<Quantity>,
    pub e2: Option<Quantity>,
    pub ec: Option<Quantity>,
    pub ep: Option<Quantity>,
    pub delta1: Option<Quantity>,
    pub delta2p: Option<Quantity>,
    pub delta_cp: Option<Quantity>,
    pub delta_ap: Option<Quantity>,
    pub phi0: Option<f64>,
    pub omega_c: Option<Quantity>,
    pub t_c: Option<Quantity>,
    pub t_p: Option<Quantity>,
    pub tau_pdh: Option<Quantity>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorOverrides {
    pub dt: Option<Quantity>,
    pub t_end: Option<Quantity>,
    pub record_stride: Option<usize>,
    pub record_start: Option<Quantity>,
    pub scheme: Option<String>,
    pub noise: Option<bool>,
    pub thermal_initial: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisOverrides {
    pub window: Option<Quantity>,
    pub n_windows: Option<usize>,
    pub t_start: Option<Quantity>,
    pub spacing: Option<Quantity>,
    pub orders: Option<Vec<u32>>,
    pub window_fn: Option<String>,
    pub mode: Option<String>,
    pub weighting: Option<String>,
    pub calibration_form: Option<String>,
    pub min_snr: Option<f64>,
    pub delta_search: Option<f64>,
    pub mech_band_below: Option<f64>,
    pub mech_band_above: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default)]
    pub presets: Vec<String>,
    #[serde(default)]
    pub beta_nl: Vec<f64>,
    #[serde(default)]
    pub beta0: Vec<f64>,
    pub repetitions: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub profile: Option<Profile>,
    pub preset: Option<String>,
    pub beta_nl: Option<f64>,
    pub beta0: Option<f64>,
    pub seed: Option<u64>,
    pub trajectories: Option<usize>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub params: ParamOverrides,
    #[serde(default)]
    pub schedule: ScheduleOverrides,
    #[serde(default)]
    pub integrator: IntegratorOverrides,
    #[serde(default)]
    pub analysis: AnalysisOverrides,
    pub sweep: Option<SweepSpec>,
}

/// Command-line values that take precedence over the document.
#[derive(Debug, Clone, Default)]
pub struct FlagOverrides {
    pub profile: Option<Profile>,
    pub preset: Option<String>,
    pub beta_nl: Option<f64>,
    pub beta0: Option<f64>,
    pub seed: Option<u64>,
    pub trajectories: Option<usize>,
    pub out: Option<PathBuf>,
    pub dt: Option<String>,
    pub windows: Option<usize>,
    pub orders: Option<Vec<u32>>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn apply_flags(&mut self, f: &FlagOverrides) {
        if f.profile.is_some() {
            self.profile = f.profile;
        }
        if f.preset.is_some() {
            self.preset = f.preset.clone();
        }
        // a β flag replaces both document values
        if f.beta_nl.is_some() || f.beta0.is_some() {
            self.beta_nl = f.beta_nl;
            self.beta0 = f.beta0;
        }
        if f.seed.is_some() {
            self.seed = f.seed;
        }
        if f.trajectories.is_some() {
            self.trajectories = f.trajectories;
        }
        if f.out.is_some() {
            self.out = f.out.clone();
        }
        if let Some(dt) = &f.dt {
            self.integrator.dt = Some(match dt.parse::<f64>() {
                Ok(v) => Quantity::Value(v),
                Err(_) => Quantity::Text(dt.clone()),
            });
        }
        if f.windows.is_some() {
            self.analysis.n_windows = f.windows;
        }
        if f.orders.is_some() {
            self.analysis.orders = f.orders.clone();
        }
    }

    pub fn preset(&self) -> Result<Preset, ConfigError> {
        let name = self.preset.as_deref().unwrap_or("com");
        Preset::from_str(name).map_err(|e| field_err("preset", e.to_string()))
    }

    /// Profile scenario for `preset` with every override applied.
    pub fn scenario_for(&self, preset: Preset) -> Result<Scenario, ConfigError> {
        let profile = self.profile.unwrap_or_default();
        let mut sc = scenario(profile, preset);
        self.apply_params(&mut sc)?;
        self.apply_schedule(&mut sc)?;
        self.apply_analysis(&mut sc)?;
        self.apply_integrator(&mut sc)?;
        Ok(sc)
    }

    fn apply_params(&self, sc: &mut Scenario) -> Result<(), ConfigError> {
        let o = &self.params;
        let p = &mut sc.params;
        let ctx = UnitContext {
            omega_b: p.omega_b,
            gamma: p.gamma,
        };
        if let Some(q) = &o.omega_b {
            p.omega_b = q.resolve("params.omega_b", Dimension::Rate, ctx)?;
        }
        // ω_b-relative rates refer to the final ω_b
        let ctx = UnitContext {
            omega_b: p.omega_b,
            gamma: p.gamma,
        };
        let rate = |q: &Option<Quantity>, name: &str, slot: &mut f64| -> Result<(), ConfigError> {
            if let Some(q) = q {
                *slot = q.resolve(&format!("params.{name}"), Dimension::Rate, ctx)?;
            }
            Ok(())
        };
        rate(&o.kappa_a, "kappa_a", &mut p.kappa_a)?;
        rate(&o.kappa_m, "kappa_m", &mut p.kappa_m)?;
        rate(&o.g_a, "g_a", &mut p.g_a)?;
        rate(&o.g_m, "g_m", &mut p.g_m)?;
        if let Some(q) = o.q_factor {
            p.q_factor = q;
        }
        p.gamma = p.omega_b / p.q_factor;
        if let Some(m) = o.mass {
            p.mass = m;
        }
        if let Some(t) = &o.temperature {
            p.temperature = t.resolve("params.temperature", Dimension::Temperature, ctx)?;
        }
        p.validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    fn ctx(sc: &Scenario) -> UnitContext {
        UnitContext {
            omega_b: sc.params.omega_b,
            gamma: sc.params.gamma,
        }
    }

    fn apply_schedule(&self, sc: &mut Scenario) -> Result<(), ConfigError> {
        let ctx = Self::ctx(sc);
        let o = &self.schedule;
        let s = &mut sc.schedule;
        let t_p_before = s.t_p;
        let set = |q: &Option<Quantity>,
                   name: &str,
                   dim: Dimension,
                   slot: &mut f64|
         -> Result<(), ConfigError> {
            if let Some(q) = q {
                *slot = q.resolve(&format!("schedule.{name}"), dim, ctx)?;
            }
            Ok(())
        };
        set(&o.e1, "e1", Dimension::Rate, &mut s.e1)?;
        set(&o.e2, "e2", Dimension::Rate, &mut s.e2)?;
        set(&o.ec, "ec", Dimension::Rate, &mut s.ec)?;
        set(&o.ep, "ep", Dimension::Rate, &mut s.ep)?;
        set(&o.delta1, "delta1", Dimension::Rate, &mut s.delta1)?;
        set(&o.delta2p, "delta2p", Dimension::Rate, &mut s.delta2p)?;
        set(&o.delta_cp, "delta_cp", Dimension::Rate, &mut s.delta_cp)?;
        set(&o.delta_ap, "delta_ap", Dimension::Rate, &mut s.delta_ap)?;
        set(&o.omega_c, "omega_c", Dimension::Rate, &mut s.omega_c)?;
        set(&o.t_c, "t_c", Dimension::Time, &mut s.t_c)?;
        set(&o.t_p, "t_p", Dimension::Time, &mut s.t_p)?;
        set(&o.tau_pdh, "tau_pdh", Dimension::Time, &mut s.tau_pdh)?;
        if let Some(phi) = o.phi0 {
            s.phi0 = phi;
        }
        s.validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        // keep the profile's settling delay after a moved pump end
        let shift = s.t_p - t_p_before;
        sc.plan.t_start += shift;
        sc.integrator.record_start += shift;
        Ok(())
    }

    fn apply_analysis(&self, sc: &mut Scenario) -> Result<(), ConfigError> {
        let ctx = Self::ctx(sc);
        let o = &self.analysis;
        let plan = &mut sc.plan;
        if let Some(q) = &o.window {
            plan.window = q.resolve("analysis.window", Dimension::Time, ctx)?;
        }
        if let Some(n) = o.n_windows {
            plan.n_windows = Some(n);
        }
        if let Some(q) = &o.t_start {
            plan.t_start = q.resolve("analysis.t_start", Dimension::Time, ctx)?;
        }
        if let Some(q) = &o.spacing {
            plan.spacing = Some(q.resolve("analysis.spacing", Dimension::Time, ctx)?);
        }
        if let Some(orders) = &o.orders {
            if orders.contains(&0) {
                return Err(field_err("analysis.orders", "orders must be >= 1"));
            }
            plan.orders = orders.clone();
        }
        if let Some(w) = &o.window_fn {
            plan.window_fn = match w.to_ascii_lowercase().as_str() {
                "hann" => WindowFn::Hann,
                "rectangular" | "rect" => WindowFn::Rectangular,
                _ => {
                    return Err(field_err(
                        "analysis.window_fn",
                        format!("unknown window {w:?} (hann, rectangular)"),
                    ))
                }
            };
        }
        if let Some(m) = &o.mode {
            plan.mode = match m.to_ascii_lowercase().as_str() {
                "sideband" => AnalysisMode::Sideband,
                "baseline" => AnalysisMode::Baseline,
                _ => {
                    return Err(field_err(
                        "analysis.mode",
                        format!("unknown mode {m:?} (sideband, baseline)"),
                    ))
                }
            };
        }
        if let Some(w) = &o.weighting {
            plan.weighting = match w.to_ascii_lowercase().as_str() {
                "unweighted" | "none" => FitWeighting::Unweighted,
                "order_snr" => FitWeighting::OrderSnr,
                _ => {
                    return Err(field_err(
                        "analysis.weighting",
                        format!("unknown weighting {w:?} (unweighted, order_snr)"),
                    ))
                }
            };
        }
        if let Some(f) = &o.calibration_form {
            plan.calibration.form = match f.to_ascii_lowercase().as_str() {
                "square_root" | "sqrt" => CalibrationForm::SquareRoot,
                "as_written" => CalibrationForm::AsWritten,
                _ => {
                    return Err(field_err(
                        "analysis.calibration_form",
                        format!("unknown form {f:?} (square_root, as_written)"),
                    ))
                }
            };
        }
        if let Some(s) = o.min_snr {
            if !(s > 0.0) {
                return Err(field_err("analysis.min_snr", "must be > 0"));
            }
            plan.calibration.min_snr = s;
            plan.sidebands.min_snr = s;
        }
        if let Some(d) = o.delta_search {
            if !(d > 0.0) {
                return Err(field_err("analysis.delta_search", "must be > 0"));
            }
            plan.sidebands.delta_search = d;
        }
        if let Some(v) = o.mech_band_below {
            plan.mech_band_below = v;
        }
        if let Some(v) = o.mech_band_above {
            plan.mech_band_above = v;
        }
        plan.validate(&sc.params)
            .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    fn apply_integrator(&self, sc: &mut Scenario) -> Result<(), ConfigError> {
        let ctx = Self::ctx(sc);
        let o = &self.integrator;
        let cfg = &mut sc.integrator;
        if let Some(q) = &o.dt {
            cfg.dt = q.resolve("integrator.dt", Dimension::Time, ctx)?;
        }
        if let Some(n) = o.record_stride {
            cfg.record_stride = n;
        }
        if let Some(q) = &o.record_start {
            cfg.record_start = q.resolve("integrator.record_start", Dimension::Time, ctx)?;
        }
        if let Some(s) = &o.scheme {
            cfg.scheme = match s.to_ascii_lowercase().as_str() {
                "rk4" => Scheme::Rk4,
                "heun" => Scheme::StochasticHeun,
                "euler" | "euler_maruyama" => Scheme::EulerMaruyama,
                _ => {
                    return Err(field_err(
                        "integrator.scheme",
                        format!("unknown scheme {s:?} (rk4, heun, euler)"),
                    ))
                }
            };
        }
        if let Some(n) = o.noise {
            cfg.noise_enabled = n;
        }
        if let Some(t) = o.thermal_initial {
            cfg.initial.thermal = t;
        }
        // the record must cover the last analysis window
        let plan = &sc.plan;
        let needed = match plan.n_windows {
            Some(n) => {
                let step = plan.spacing.unwrap_or(plan.window);
                plan.t_start
                    + (n.max(1) - 1) as f64 * step
                    + plan.window
                    + std::f64::consts::TAU / sc.params.omega_b
            }
            None => cfg.t_end,
        };
        cfg.t_end = match &o.t_end {
            Some(q) => q.resolve("integrator.t_end", Dimension::Time, ctx)?,
            None => needed,
        };
        if !(sc.schedule.t_p < cfg.t_end) {
            return Err(ConfigError::Invalid(format!(
                "t_p < t_end is violated: t_p = {:.6e} s, t_end = {:.6e} s",
                sc.schedule.t_p, cfg.t_end
            )));
        }
        cfg.validate_for(&sc.params, &sc.schedule)
            .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    /// Resolves β, requiring exactly one of `beta_nl` and `beta0`.
    pub fn beta_nl_for(&self, sc: &Scenario) -> Result<f64, ConfigError> {
        match (self.beta_nl, self.beta0) {
            (Some(_), Some(_)) => Err(ConfigError::Invalid(
                "exactly one of beta_nl and beta0 may be set, got both".into(),
            )),
            (None, None) => Err(ConfigError::Invalid(
                "exactly one of beta_nl and beta0 must be set".into(),
            )),
            (Some(b), None) => check_beta("beta_nl", b),
            (None, Some(b0)) => {
                check_beta("beta0", b0)?;
                convert_beta(b0, BetaDirection::Beta0ToBetaNl, &sc.params)
                    .map_err(|e| field_err("beta0", e.to_string()))
            }
        }
    }

    /// Fully resolved scenario for a single-run command.
    pub fn resolve(&self) -> Result<ResolvedRun, ConfigError> {
        let preset = self.preset()?;
        let mut sc = self.scenario_for(preset)?;
        let beta_nl = self.beta_nl_for(&sc)?;
        sc.params.beta_nl = beta_nl;
        let trajectories = self.trajectories.unwrap_or(1);
        if trajectories == 0 {
            return Err(field_err("trajectories", "must be >= 1"));
        }
        let seed = self.seed.unwrap_or(0);
        sc.integrator.seed = seed;
        for w in sc.schedule.warnings() {
            log::warn!("{w}");
        }
        Ok(ResolvedRun {
            profile: self.profile.unwrap_or_default(),
            preset,
            beta_nl,
            beta0: convert_beta(beta_nl, BetaDirection::BetaNlToBeta0, &sc.params)
                .map_err(|e| ConfigError::Invalid(e.to_string()))?,
            seed,
            trajectories,
            scenario: sc,
        })
    }
}

fn check_beta(field: &str, b: f64) -> Result<f64, ConfigError> {
    if !(b.is_finite() && b >= 0.0) {
        return Err(field_err(
            field,
            format!("must be finite and >= 0, got {b}"),
        ));
    }
    Ok(b)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedRun {
    pub profile: Profile,
    pub preset: Preset,
    pub beta_nl: f64,
    pub beta0: f64,
    pub seed: u64,
    pub trajectories: usize,
    pub scenario: Scenario,
}

impl ResolvedRun {
    /// A config document that pins every resolved value in SI units, so
    /// feeding it back reproduces this run exactly.
    pub fn to_config(&self) -> RunConfig {
        let sc = &self.scenario;
        let (p, s, c, a) = (&sc.params, &sc.schedule, &sc.integrator, &sc.plan);
        let q = |v: f64| Some(Quantity::Value(v));
        RunConfig {
            profile: Some(self.profile),
            preset: Some(self.preset.name().to_string()),
            beta_nl: Some(self.beta_nl),
            beta0: None,
            seed: Some(self.seed),
            trajectories: Some(self.trajectories),
            out: None,
            params: ParamOverrides {
                omega_b: q(p.omega_b),
                kappa_a: q(p.kappa_a),
                kappa_m: q(p.kappa_m),
                q_factor: Some(p.q_factor),
                g_a: q(p.g_a),
                g_m: q(p.g_m),
                mass: Some(p.mass),
                temperature: q(p.temperature),
            },
            schedule: ScheduleOverrides {
                e1: q(s.e1),
                e2: q(s.e2),
                ec: q(s.ec),
                ep: q(s.ep),
                delta1: q(s.delta1),
                delta2p: q(s.delta2p),
                delta_cp: q(s.delta_cp),
                delta_ap: q(s.delta_ap),
                phi0: Some(s.phi0),
                omega_c: q(s.omega_c),
                t_c: q(s.t_c),
                t_p: q(s.t_p),
                tau_pdh: q(s.tau_pdh),
            },
            integrator: IntegratorOverrides {
                dt: q(c.dt),
                t_end: q(c.t_end),
                record_stride: Some(c.record_stride),
                record_start: q(c.record_start),
                scheme: Some(
                    match c.scheme {
                        Scheme::Rk4 => "rk4",
                        Scheme::StochasticHeun => "heun",
                        Scheme::EulerMaruyama => "euler",
                    }
                    .into(),
                ),
                noise: Some(c.noise_enabled),
                thermal_initial: Some(c.initial.thermal),
            },
            analysis: AnalysisOverrides {
                window: q(a.window),
                n_windows: a.n_windows,
                t_start: q(a.t_start),
                spacing: a.spacing.map(Quantity::Value),
                orders: Some(a.orders.clone()),
                window_fn: Some(
                    match a.window_fn {
                        WindowFn::Hann => "hann",
                        WindowFn::Rectangular => "rectangular",
                    }
                    .into(),
                ),
                mode: Some(
                    match a.mode {
                        AnalysisMode::Sideband => "sideband",
                        AnalysisMode::Baseline => "baseline",
                    }
                    .into(),
                ),
                weighting: Some(
                    match a.weighting {
                        FitWeighting::Unweighted => "unweighted",
                        FitWeighting::OrderSnr => "order_snr",
                    }
                    .into(),
                ),
                calibration_form: Some(
                    match a.calibration.form {
                        CalibrationForm::SquareRoot => "square_root",
                        CalibrationForm::AsWritten => "as_written",
                    }
                    .into(),
                ),
                min_snr: Some(a.sidebands.min_snr),
                delta_search: Some(a.sidebands.delta_search),
                mech_band_below: Some(a.mech_band_below),
                mech_band_above: Some(a.mech_band_above),
            },
            sweep: None,
        }
    }

    pub fn snapshot(&self) -> String {
        toml::to_string(&self.to_config()).expect("config serializes")
    }
}

/// Short content hash of a snapshot.
pub fn content_hash(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Seed of one sweep repetition, derived from the master seed and the cell.
pub fn derive_seed(master: u64, preset: Preset, beta_nl: f64, rep: usize) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update(preset.name().as_bytes());
    h.update(beta_nl.to_bits().to_le_bytes());
    h.update((rep as u64).to_le_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
}

#[cfg(test)]
mod tests {
    use super::*;

    const CTX: UnitContext = UnitContext {
        omega_b: 2.0e6,
        gamma: 4.0,
    };

    #[test]
    fn units() {
        let t = |s| parse_quantity(s, Dimension::Time, CTX).unwrap();
        assert_eq!(t("2.5 ms"), 2.5e-3);
        assert_eq!(t("3us"), 3e-6);
        assert_eq!(t("1e-3 s"), 1e-3);
        assert!((t("5.25e-4 /gamma") - 5.25e-4 / 4.0).abs() < 1e-18);
        assert!((t("10 periods") - 10.0 * std::f64::consts::TAU / 2.0e6).abs() < 1e-18);
        let r = |s| parse_quantity(s, Dimension::Rate, CTX).unwrap();
        assert!((r("0.525 MHz") - std::f64::consts::TAU * 0.525e6).abs() < 1e-6);
        assert_eq!(r("124 omega_b"), 124.0 * 2.0e6);
        assert_eq!(
            parse_quantity("10 mK", Dimension::Temperature, CTX).unwrap(),
            1e-2
        );
        assert!(parse_quantity("3 furlongs", Dimension::Time, CTX).is_err());
        assert!(parse_quantity("3 Hz", Dimension::Time, CTX).is_err());
    }

    #[test]
    fn exactly_one_beta() {
        let base = RunConfig::default();
        let sc = base.scenario_for(Preset::Com).unwrap();
        assert!(base.beta_nl_for(&sc).is_err());
        let both = RunConfig {
            beta_nl: Some(1e-5),
            beta0: Some(1.0),
            ..Default::default()
        };
        assert!(both
            .beta_nl_for(&sc)
            .unwrap_err()
            .to_string()
            .contains("exactly one"));
        let b0 = RunConfig {
            beta0: Some(1e20),
            ..Default::default()
        };
        let expect = 1e20 * sc.params.beta_ratio();
        assert!((b0.beta_nl_for(&sc).unwrap() / expect - 1.0).abs() < 1e-12);
    }

    #[test]
    fn window_constraint_named() {
        let cfg =
            RunConfig::parse("beta_nl = 1e-9\n[analysis]\nwindow = \"10 periods\"\n").unwrap();
        let msg = cfg.resolve().unwrap_err().to_string();
        assert!(msg.contains("ω_b⁻¹ ≪ Δt ≪ γ⁻¹"), "{msg}");
    }

    #[test]
    fn unknown_field_rejected() {
        assert!(RunConfig::parse("[params]\nomega = 3\n").is_err());
    }

    #[test]
    fn snapshot_round_trip() {
        let cfg = RunConfig::parse(
            "preset = \"com\"\nbeta_nl = 1e-5\nseed = 9\n[schedule]\nphi0 = 0.03\n[analysis]\nn_windows = 6\n",
        )
        .unwrap();
        let run = cfg.resolve().unwrap();
        let again = RunConfig::parse(&run.snapshot())
            .unwrap()
            .resolve()
            .unwrap();
        assert_eq!(run, again);
        assert_eq!(run.snapshot(), again.snapshot());
    }

    #[test]
    fn flags_override_document() {
        let mut cfg = RunConfig::parse("beta0 = 1e30\nseed = 1\n").unwrap();
        cfg.apply_flags(&FlagOverrides {
            beta_nl: Some(1e-6),
            seed: Some(4),
            windows: Some(5),
            orders: Some(vec![1, 3, 5]),
            dt: Some("1e-8".into()),
            ..Default::default()
        });
        let run = cfg.resolve().unwrap();
        assert_eq!(run.beta_nl, 1e-6);
        assert_eq!(run.seed, 4);
        assert_eq!(run.scenario.plan.n_windows, Some(5));
        assert_eq!(run.scenario.plan.orders, vec![1, 3, 5]);
        assert_eq!(run.scenario.integrator.dt, 1e-8);
    }

    #[test]
    fn derived_seeds_differ() {
        let a = derive_seed(1, Preset::Com, 1e-5, 0);
        assert_eq!(a, derive_seed(1, Preset::Com, 1e-5, 0));
        assert_ne!(a, derive_seed(1, Preset::Com, 1e-5, 1));
        assert_ne!(a, derive_seed(1, Preset::Omm, 1e-5, 0));
        assert_ne!(a, derive_seed(2, Preset::Com, 1e-5, 0));
    }
}
