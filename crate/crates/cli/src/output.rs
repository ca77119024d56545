//! On-disk formats.
//!
//! `trajectory.bin` is little-endian: the magic `GUPTRJ01`, then `u64` row
//! count, `f64` first sample time, `f64` sample spacing, `u32` column count,
//! each column name as `u16` length plus UTF-8 bytes, and finally the columns
//! one after another as `f64`. CSV files start with `#`-prefixed metadata
//! lines followed by a header row.

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use gup_core::dynamics::{DriveSchedule, IntegratorConfig, Trajectory};
use gup_core::estimation::{FitResult, RunAnalysis};
use gup_core::model::SystemParams;
use gup_core::spectra::SpectrumWindow;
use num_complex::Complex64;
use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;
const MAGIC: &[u8; 8] = b"GUPTRJ01";

pub const CHANNEL_ALPHA: &str = "homodyne_alpha";
pub const CHANNEL_MC: &str = "homodyne_mc";

const COLUMNS: [&str; 8] = [
    "b_re",
    "b_im",
    "a_re",
    "a_im",
    "mc_re",
    "mc_im",
    CHANNEL_ALPHA,
    CHANNEL_MC,
];

#[derive(Debug, thiserror::Error)]
pub enum OutputError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {reason}")]
    Format { path: PathBuf, reason: String },
    #[error("{path}: trajectory has no `{channel}` channel ({what})")]
    MissingChannel {
        path: PathBuf,
        channel: String,
        what: &'static str,
    },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> OutputError + '_ {
    move |source| OutputError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn create_dir(path: &Path) -> Result<(), OutputError> {
    fs::create_dir_all(path).map_err(io_err(path))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), OutputError> {
    fs::write(path, text).map_err(io_err(path))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), OutputError> {
    let text = serde_json::to_string_pretty(value).expect("record serializes");
    write_text(path, &(text + "\n"))
}

pub fn write_trajectory(path: &Path, traj: &Trajectory) -> Result<(), OutputError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    let mut put = |bytes: &[u8]| w.write_all(bytes).map_err(io_err(path));
    put(MAGIC)?;
    put(&(traj.len() as u64).to_le_bytes())?;
    put(&traj.t0().to_le_bytes())?;
    put(&traj.record_dt.to_le_bytes())?;
    put(&(COLUMNS.len() as u32).to_le_bytes())?;
    for name in COLUMNS {
        put(&(name.len() as u16).to_le_bytes())?;
        put(name.as_bytes())?;
    }
    let complex = |v: &[Complex64], f: fn(&Complex64) -> f64| v.iter().map(f).collect::<Vec<_>>();
    let cols: [Vec<f64>; 8] = [
        complex(&traj.b_samples, |z| z.re),
        complex(&traj.b_samples, |z| z.im),
        complex(&traj.a_samples, |z| z.re),
        complex(&traj.a_samples, |z| z.im),
        complex(&traj.m_c_samples, |z| z.re),
        complex(&traj.m_c_samples, |z| z.im),
        traj.homodyne_alpha.clone(),
        traj.homodyne_mc.clone(),
    ];
    for col in &cols {
        let mut buf = Vec::with_capacity(col.len() * 8);
        for v in col {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        put(&buf)?;
    }
    w.flush().map_err(io_err(path))
}

/// Columns of a trajectory file, by name.
#[derive(Debug, Clone)]
pub struct TrajectoryFile {
    pub t0: f64,
    pub record_dt: f64,
    pub columns: Vec<(String, Vec<f64>)>,
}

impl TrajectoryFile {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, |(_, v)| v.len())
    }
}

pub fn read_trajectory_file(path: &Path) -> Result<TrajectoryFile, OutputError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut r = BufReader::new(file);
    let bad = |reason: &str| OutputError::Format {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    };
    let mut take = |n: usize| -> Result<Vec<u8>, OutputError> {
        let mut buf = vec![0u8; n];
        r.read_exact(&mut buf).map_err(io_err(path))?;
        Ok(buf)
    };
    if take(8)? != MAGIC {
        return Err(bad("not a trajectory file (bad magic)"));
    }
    let u64_at = |b: Vec<u8>| u64::from_le_bytes(b.try_into().expect("8 bytes"));
    let rows = u64_at(take(8)?) as usize;
    let t0 = f64::from_bits(u64_at(take(8)?));
    let record_dt = f64::from_bits(u64_at(take(8)?));
    let ncols = u32::from_le_bytes(take(4)?.try_into().expect("4 bytes")) as usize;
    if ncols > 64 {
        return Err(bad("implausible column count"));
    }
    let mut names = Vec::with_capacity(ncols);
    for _ in 0..ncols {
        let len = u16::from_le_bytes(take(2)?.try_into().expect("2 bytes")) as usize;
        let name = String::from_utf8(take(len)?).map_err(|_| bad("column name is not UTF-8"))?;
        names.push(name);
    }
    let mut columns = Vec::with_capacity(ncols);
    for name in names {
        let bytes = take(rows * 8)?;
        let v = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        columns.push((name, v));
    }
    Ok(TrajectoryFile {
        t0,
        record_dt,
        columns,
    })
}

/// Rebuilds a trajectory from a file and the run's configuration. Both
/// homodyne channels must be present; intracavity columns are optional.
pub fn read_trajectory(
    path: &Path,
    params: &SystemParams,
    schedule: &DriveSchedule,
    config: &IntegratorConfig,
) -> Result<Trajectory, OutputError> {
    let f = read_trajectory_file(path)?;
    let need = |name: &str, what: &'static str| {
        f.column(name)
            .map(<[f64]>::to_vec)
            .ok_or_else(|| OutputError::MissingChannel {
                path: path.to_path_buf(),
                channel: name.to_string(),
                what,
            })
    };
    let homodyne_alpha = need(CHANNEL_ALPHA, "nonlinear probe output")?;
    let homodyne_mc = need(CHANNEL_MC, "calibration probe output")?;
    let n = f.rows();
    let pair = |re: &str, im: &str| match (f.column(re), f.column(im)) {
        (Some(r), Some(i)) => r
            .iter()
            .zip(i)
            .map(|(&r, &i)| Complex64::new(r, i))
            .collect(),
        _ => vec![Complex64::new(0.0, 0.0); n],
    };
    Ok(Trajectory {
        times: (0..n).map(|k| f.t0 + k as f64 * f.record_dt).collect(),
        b_samples: pair("b_re", "b_im"),
        a_samples: pair("a_re", "a_im"),
        m_c_samples: pair("mc_re", "mc_im"),
        homodyne_alpha,
        homodyne_mc,
        record_dt: f.record_dt,
        steps: 0,
        params: params.clone(),
        schedule: schedule.clone(),
        config: config.clone(),
    })
}

pub fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> Result<(), OutputError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    let mut body = String::new();
    body.push_str(&format!("# record_dt={:e}\n", traj.record_dt));
    body.push_str("t,b_re,b_im,homodyne_alpha,homodyne_mc\n");
    w.write_all(body.as_bytes()).map_err(io_err(path))?;
    for k in 0..traj.len() {
        let b = traj.b_samples[k];
        writeln!(
            w,
            "{:e},{:e},{:e},{:e},{:e}",
            traj.times[k], b.re, b.im, traj.homodyne_alpha[k], traj.homodyne_mc[k]
        )
        .map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn write_spectrum_csv(
    path: &Path,
    spec: &SpectrumWindow,
    channel: &str,
) -> Result<(), OutputError> {
    let mut s = String::new();
    s.push_str(&format!("# channel={channel}\n"));
    s.push_str(&format!("# t_start={:e}\n", spec.t_start));
    s.push_str(&format!("# delta_t={:e}\n", spec.delta_t));
    s.push_str(&format!("# window={:?}\n", spec.window));
    s.push_str(&format!("# resolution={:e}\n", spec.resolution()));
    s.push_str("omega,psd\n");
    for (f, p) in spec.freqs.iter().zip(&spec.psd) {
        s.push_str(&format!("{f:e},{p:e}\n"));
    }
    write_text(path, &s)
}

pub fn write_spectra(dir: &Path, analysis: &RunAnalysis) -> Result<(), OutputError> {
    create_dir(dir)?;
    for (k, (mc, a)) in analysis.spectra.iter().enumerate() {
        write_spectrum_csv(&dir.join(format!("window_{k:03}_mc.csv")), mc, CHANNEL_MC)?;
        if let Some(a) = a {
            write_spectrum_csv(
                &dir.join(format!("window_{k:03}_alpha.csv")),
                a,
                CHANNEL_ALPHA,
            )?;
        }
    }
    Ok(())
}

/// One row per (window, order) point; `run` distinguishes repetitions.
pub fn points_csv(fits: &[(usize, &FitResult)]) -> String {
    let mut s = String::from("run,t,u,x,y,snr\n");
    for (run, fit) in fits {
        for p in &fit.points {
            s.push_str(&format!(
                "{run},{:e},{},{:e},{:e},{:e}\n",
                p.t, p.u, p.x, p.y, p.snr
            ));
        }
    }
    s
}

pub fn write_purity_csv(path: &Path, series: &[(f64, f64)]) -> Result<(), OutputError> {
    let mut s = String::from("t,purity\n");
    for (t, p) in series {
        s.push_str(&format!("{t:e},{p:e}\n"));
    }
    write_text(path, &s)
}
