//! Command-line front end: layered configuration, a sized worker pool, and
//! the CSV/JSON products of every command.
//!
//! Values resolve as flag, then config file, then default. The config file is
//! flat `key = value` text; `#` starts a comment line; keys are the long flag
//! names (`eps-min` or `eps_min`).

mod run;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::PathBuf;
use std::str::FromStr;

use clap::Parser;
use serde::Serialize;

use crate::criticality::CouplingUnits;
use crate::error::Error;

pub use run::{main_with_args, run, Outcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Trace,
    Spectrum,
    Critical,
    SizeScan,
    Heatmap,
}

impl FromStr for Command {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "trace" => Command::Trace,
            "spectrum" => Command::Spectrum,
            "critical" => Command::Critical,
            "size-scan" => Command::SizeScan,
            "heatmap" => Command::Heatmap,
            _ => return Err("expected one of trace, spectrum, critical, size-scan, heatmap".into()),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackendChoice {
    Exact,
    Trajectory,
}

impl FromStr for BackendChoice {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "exact" => Ok(BackendChoice::Exact),
            "trajectory" => Ok(BackendChoice::Trajectory),
            _ => Err("expected exact or trajectory".into()),
        }
    }
}

fn parse_units(s: &str) -> Result<CouplingUnits, String> {
    match s {
        "rzz" => Ok(CouplingUnits::RzzAngle),
        "phase" => Ok(CouplingUnits::Phase),
        _ => Err("expected rzz or phase".into()),
    }
}

/// An inclusive grid request.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

/// Fully resolved run configuration. Everything except the worker count and
/// output prefix is echoed into the summary JSON.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub n: usize,
    pub n_list: Vec<usize>,
    pub eps: f64,
    pub eps_grid: GridSpec,
    pub p: f64,
    pub p_grid: GridSpec,
    #[serde(rename = "K")]
    pub steps: usize,
    pub realizations: usize,
    pub j_min: f64,
    pub j_max: f64,
    pub seed: u64,
    pub backend: BackendChoice,
    pub trajectories: usize,
    pub batches: usize,
    pub units: CouplingUnits,
    #[serde(skip)]
    pub workers: usize,
    #[serde(skip)]
    pub out: PathBuf,
    /// where each echoed value came from: `default`, `file` or `flag`
    pub sources: BTreeMap<String, &'static str>,
    /// keys set in the file and overridden by a flag
    pub overridden: Vec<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Usage(#[from] clap::Error),
    #[error("config error: {key}: {message}")]
    Config { key: String, message: String },
    #[error("{} error: {source}", source.category())]
    Sim {
        #[from]
        source: Error,
    },
    #[error("io error: {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    fn config(key: &str, message: impl ToString) -> Self {
        CliError::Config {
            key: key.to_string(),
            message: message.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(e) => e.exit_code(),
            CliError::Config { .. } => 2,
            CliError::Sim { source } => match source.category() {
                "capacity" => 3,
                "numeric" => 4,
                _ => 2,
            },
            CliError::Io { .. } => 5,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "dtc", version, about = "Disordered discrete time crystal under dephasing")]
struct Args {
    /// trace | spectrum | critical | size-scan | heatmap
    command: Option<String>,
    /// flat key=value file; flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<String>,
    /// comma-separated chain lengths for size-scan
    #[arg(long = "n-list")]
    n_list: Option<String>,
    #[arg(long)]
    eps: Option<String>,
    #[arg(long = "eps-min")]
    eps_min: Option<String>,
    #[arg(long = "eps-max")]
    eps_max: Option<String>,
    #[arg(long = "eps-points")]
    eps_points: Option<String>,
    #[arg(long)]
    p: Option<String>,
    #[arg(long = "p-min")]
    p_min: Option<String>,
    #[arg(long = "p-max")]
    p_max: Option<String>,
    #[arg(long = "p-points")]
    p_points: Option<String>,
    /// number of drive periods (even)
    #[arg(long = "K")]
    k: Option<String>,
    #[arg(long)]
    realizations: Option<String>,
    #[arg(long = "j-min")]
    j_min: Option<String>,
    #[arg(long = "j-max")]
    j_max: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// exact | trajectory
    #[arg(long)]
    backend: Option<String>,
    #[arg(long)]
    trajectories: Option<String>,
    #[arg(long)]
    batches: Option<String>,
    /// rzz (coupling is an RZZ angle, phase J/2) | phase (coupling is the ZZ phase)
    #[arg(long)]
    units: Option<String>,
    #[arg(long)]
    workers: Option<String>,
    #[arg(long)]
    out: Option<String>,
}

const KEYS: &[&str] = &[
    "command",
    "n",
    "n-list",
    "eps",
    "eps-min",
    "eps-max",
    "eps-points",
    "p",
    "p-min",
    "p-max",
    "p-points",
    "K",
    "realizations",
    "j-min",
    "j-max",
    "seed",
    "backend",
    "trajectories",
    "batches",
    "units",
    "workers",
    "out",
];

/// Keys left out of the JSON echo so that output bytes do not depend on them.
const UNECHOED: &[&str] = &["workers", "out"];

impl Args {
    fn flags(self) -> BTreeMap<&'static str, String> {
        let values = [
            self.command,
            self.n,
            self.n_list,
            self.eps,
            self.eps_min,
            self.eps_max,
            self.eps_points,
            self.p,
            self.p_min,
            self.p_max,
            self.p_points,
            self.k,
            self.realizations,
            self.j_min,
            self.j_max,
            self.seed,
            self.backend,
            self.trajectories,
            self.batches,
            self.units,
            self.workers,
            self.out,
        ];
        KEYS.iter()
            .zip(values)
            .filter_map(|(k, v)| v.map(|v| (*k, v)))
            .collect()
    }
}

fn canonical_key(raw: &str) -> Option<&'static str> {
    let key = raw.trim().replace('_', "-");
    KEYS.iter().copied().find(|k| *k == key || (*k == "K" && key == "k"))
}

/// Parses the flat `key = value` format.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<&'static str, String>, CliError> {
    let mut values = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::config(line, format!("line {}: expected key = value", i + 1)))?;
        let canonical = canonical_key(key)
            .ok_or_else(|| CliError::config(key.trim(), format!("line {}: unknown key", i + 1)))?;
        if values.insert(canonical, value.trim().to_string()).is_some() {
            return Err(CliError::config(canonical, format!("line {}: duplicate key", i + 1)));
        }
    }
    Ok(values)
}

struct Layers {
    flags: BTreeMap<&'static str, String>,
    file: BTreeMap<&'static str, String>,
    sources: BTreeMap<String, &'static str>,
    overridden: Vec<String>,
}

impl Layers {
    fn raw(&mut self, key: &'static str) -> Option<String> {
        let echoed = !UNECHOED.contains(&key);
        let (value, source) = match (self.flags.get(key), self.file.get(key)) {
            (Some(flag), file) => {
                if file.is_some() && echoed {
                    self.overridden.push(key.to_string());
                }
                (Some(flag.clone()), "flag")
            }
            (None, Some(file)) => (Some(file.clone()), "file"),
            (None, None) => (None, "default"),
        };
        if echoed {
            self.sources.insert(key.to_string(), source);
        }
        value
    }

    fn get<T>(&mut self, key: &'static str, default: T, parse: impl Fn(&str) -> Result<T, String>) -> Result<T, CliError> {
        match self.raw(key) {
            None => Ok(default),
            Some(s) => parse(s.trim()).map_err(|e| CliError::config(key, format!("cannot parse {s:?}: {e}"))),
        }
    }

    fn num<T: FromStr>(&mut self, key: &'static str, default: T) -> Result<T, CliError>
    where
        T::Err: ToString,
    {
        self.get(key, default, |s| s.parse::<T>().map_err(|e| e.to_string()))
    }
}

fn in_range(key: &str, value: f64, lo: f64, hi: f64) -> Result<f64, CliError> {
    if !(lo..=hi).contains(&value) {
        return Err(CliError::config(key, format!("{value} is outside [{lo}, {hi}]")));
    }
    Ok(value)
}

fn at_least(key: &str, value: usize, min: usize) -> Result<usize, CliError> {
    if value < min {
        return Err(CliError::config(key, format!("{value} is below the minimum {min}")));
    }
    Ok(value)
}

fn grid(layers: &mut Layers, prefix: [&'static str; 3], default: GridSpec, lo: f64, hi: f64) -> Result<GridSpec, CliError> {
    let g = GridSpec {
        min: in_range(prefix[0], layers.num(prefix[0], default.min)?, lo, hi)?,
        max: in_range(prefix[1], layers.num(prefix[1], default.max)?, lo, hi)?,
        points: at_least(prefix[2], layers.num(prefix[2], default.points)?, 1)?,
    };
    if g.points > 1 && g.max <= g.min {
        return Err(CliError::config(prefix[1], format!("{} must exceed {} = {}", g.max, prefix[0], g.min)));
    }
    Ok(g)
}

/// Resolves flags and the optional config file into a [`RunConfig`].
pub fn parse_config<I, T>(args: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = Args::try_parse_from(args)?;
    let file = match &args.config {
        None => BTreeMap::new(),
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            parse_config_file(&text)?
        }
    };
    let mut l = Layers {
        flags: args.flags(),
        file,
        sources: BTreeMap::new(),
        overridden: Vec::new(),
    };

    let command = match l.raw("command") {
        None => return Err(CliError::config("command", "missing; expected one of trace, spectrum, critical, size-scan, heatmap")),
        Some(s) => s.parse::<Command>().map_err(|e| CliError::config("command", format!("{s:?}: {e}")))?,
    };
    let n = at_least("n", l.num("n", 8usize)?, 2)?;
    let n_list = l.get("n-list", vec![6, 8, 10], |s| {
        s.split(',')
            .map(|v| v.trim().parse::<usize>().map_err(|e| e.to_string()))
            .collect()
    })?;
    if n_list.is_empty() || n_list.iter().any(|&v| v < 2) {
        return Err(CliError::config("n-list", "need one or more chain lengths >= 2"));
    }
    let eps = in_range("eps", l.num("eps", 0.1)?, 0.0, 1.0)?;
    let eps_grid = grid(
        &mut l,
        ["eps-min", "eps-max", "eps-points"],
        GridSpec { min: 0.0, max: 0.5, points: 26 },
        0.0,
        1.0,
    )?;
    let p = in_range("p", l.num("p", 0.0)?, 0.0, 1.0)?;
    let p_grid = grid(
        &mut l,
        ["p-min", "p-max", "p-points"],
        GridSpec { min: 0.0, max: 0.1, points: 6 },
        0.0,
        1.0,
    )?;
    let steps = l.num("K", 50usize)?;
    if steps < 2 || steps % 2 != 0 {
        return Err(CliError::config("K", format!("{steps} must be even and >= 2")));
    }
    let realizations = at_least("realizations", l.num("realizations", 200usize)?, 1)?;
    let j_min: f64 = l.num("j-min", PI / 4.0)?;
    let j_max: f64 = l.num("j-max", 3.0 * PI / 4.0)?;
    if !(j_min.is_finite() && j_max.is_finite()) || j_min > j_max {
        return Err(CliError::config("j-max", format!("need finite j-min <= j-max, got [{j_min}, {j_max}]")));
    }
    let seed = l.num("seed", 0u64)?;
    let backend = l.get("backend", BackendChoice::Exact, BackendChoice::from_str)?;
    let trajectories = at_least("trajectories", l.num("trajectories", 100usize)?, 1)?;
    let batches = at_least("batches", l.num("batches", 20usize)?, 1)?;
    let units = l.get("units", CouplingUnits::RzzAngle, parse_units)?;
    let default_workers = std::thread::available_parallelism().map_or(1, usize::from);
    let workers = at_least("workers", l.num("workers", default_workers)?, 1)?;
    let out = PathBuf::from(l.get("out", "dtc".to_string(), |s| Ok(s.to_string()))?);

    Ok(RunConfig {
        command,
        n,
        n_list,
        eps,
        eps_grid,
        p,
        p_grid,
        steps,
        realizations,
        j_min,
        j_max,
        seed,
        backend,
        trajectories,
        batches,
        units,
        workers,
        out,
        sources: l.sources,
        overridden: l.overridden,
    })
}
