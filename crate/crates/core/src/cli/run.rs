use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use super::{parse_config, BackendChoice, CliError, Command, GridSpec, RunConfig};
use crate::criticality::{
    batched_peak_estimate, heatmap_sweep, linspace, size_scan, size_scan_table, variance_curve, EvolutionBackend,
    PeakEstimate, Protocol,
};
use crate::floquet::{evolve_exact, trajectory_average, DisorderSpec, FloquetParams, MagnetizationTrace};
use crate::seed::{SeedDerivation, StreamPurpose};
use crate::spectral::{dft_spectrum, order_parameter};
use crate::table::{fmt12, Table};

/// What a successful run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub summary: String,
    pub files: Vec<PathBuf>,
}

fn with_suffix(out: &Path, suffix: &str) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn grid(g: GridSpec) -> crate::Result<Vec<f64>> {
    linspace(g.min, g.max, g.points)
}

fn protocol(config: &RunConfig) -> crate::Result<Protocol> {
    Ok(Protocol {
        n: config.n,
        steps: config.steps,
        disorder: DisorderSpec::new(config.realizations, config.j_min, config.j_max, config.seed)?,
        backend: match config.backend {
            BackendChoice::Exact => EvolutionBackend::Exact,
            BackendChoice::Trajectory => EvolutionBackend::Trajectory {
                count: config.trajectories,
            },
        },
        units: config.units,
    })
}

/// Rounds every float to the 12 significant digits used in the CSV files.
/// The config echo is left exact so it can be replayed.
fn round_floats(v: &mut Value) {
    match v {
        Value::Number(num) if num.is_f64() => {
            let x = num.as_f64().expect("f64");
            let rounded: f64 = fmt12(x).parse().expect("round trip");
            *v = json!(rounded);
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

fn trace_table(trace: &MagnetizationTrace) -> Table {
    let mut t = Table::new(&["k", "m_k"]);
    for (k, m) in trace.values.iter().enumerate() {
        t.push(vec![(k + 1).to_string(), fmt12(*m)]);
    }
    t
}

fn peak_text(e: &PeakEstimate) -> String {
    let mut s = format!("{:.4} ± {:.4}", e.mean, e.sigma);
    if e.boundary_peak {
        s.push_str(" (boundary)");
    }
    s
}

type Products = (Vec<(&'static str, String)>, Value, String);

fn single_trace(config: &RunConfig, protocol: &Protocol) -> Result<Products, CliError> {
    protocol.validate()?;
    let couplings = protocol.couplings(0);
    let params = FloquetParams::new(config.eps, couplings.clone(), config.p, config.steps)?;
    let trace = match protocol.backend {
        EvolutionBackend::Exact => evolve_exact(&params)?,
        EvolutionBackend::Trajectory { count } => {
            let stream = SeedDerivation::new(config.seed, StreamPurpose::Noise);
            trajectory_average(&params, count, stream)?.mean
        }
    };
    let h = order_parameter(&trace)?.value();
    let couplings: Vec<f64> = couplings.iter().map(|j| j.value()).collect();
    let mut files = Vec::new();
    let mut results = json!({ "h": h, "couplings": couplings, "trace": trace.values });
    let summary;
    if config.command == Command::Spectrum {
        let spectrum = dft_spectrum(&trace)?;
        files.push((".spectrum.csv", spectrum.to_table().to_csv()));
        results["spectrum"] = to_value(&spectrum);
        summary = format!("h={h:.3} spectrum: {}", with_suffix(&config.out, ".spectrum.csv").display());
    } else {
        summary = format!("h={h:.3} trace: {}", with_suffix(&config.out, ".trace.csv").display());
    }
    files.insert(0, (".trace.csv", trace_table(&trace).to_csv()));
    Ok((files, results, summary))
}

fn critical(config: &RunConfig, protocol: &Protocol) -> Result<Products, CliError> {
    let eps_grid = grid(config.eps_grid)?;
    let (curve, samples) = variance_curve(protocol, &eps_grid, config.p)?;
    let estimate = batched_peak_estimate(&samples, config.batches)?;
    let summary = format!(
        "p={} peak eps={} over {} batches",
        config.p,
        peak_text(&estimate),
        config.batches
    );
    let results = json!({ "p": config.p, "peak": to_value(&estimate), "variance": to_value(&curve) });
    Ok((vec![(".variance.csv", curve.to_table().to_csv())], results, summary))
}

fn heatmap(config: &RunConfig, protocol: &Protocol) -> Result<Products, CliError> {
    let eps_grid = grid(config.eps_grid)?;
    let p_grid = grid(config.p_grid)?;
    let (grid, rows) = heatmap_sweep(protocol, &eps_grid, &p_grid)?;
    let peaks: Vec<PeakEstimate> = rows
        .iter()
        .map(|r| batched_peak_estimate(r, config.batches))
        .collect::<crate::Result<_>>()?;
    let summary = format!(
        "peaks: {}",
        p_grid
            .iter()
            .zip(&peaks)
            .map(|(p, e)| format!("p={p}: {}", peak_text(e)))
            .collect::<Vec<_>>()
            .join(", ")
    );
    let rows: Vec<Value> = p_grid
        .iter()
        .zip(&peaks)
        .map(|(p, e)| json!({ "p": p, "peak": to_value(e) }))
        .collect();
    let results = json!({ "rows": rows, "heatmap": to_value(&grid) });
    Ok((vec![(".heatmap.csv", grid.to_table().to_csv())], results, summary))
}

fn scan(config: &RunConfig, protocol: &Protocol) -> Result<Products, CliError> {
    let eps_grid = grid(config.eps_grid)?;
    let rows = size_scan(&config.n_list, protocol, &eps_grid, config.p, config.batches)?;
    let summary = format!(
        "p={} peaks: {}",
        config.p,
        rows.iter()
            .map(|r| format!("n={}: {}", r.n, peak_text(&r.estimate)))
            .collect::<Vec<_>>()
            .join(", ")
    );
    let results = json!({ "p": config.p, "rows": to_value(&rows) });
    Ok((vec![(".size-scan.csv", size_scan_table(&rows).to_csv())], results, summary))
}

fn compute(config: &RunConfig) -> Result<Products, CliError> {
    let protocol = protocol(config)?;
    match config.command {
        Command::Trace | Command::Spectrum => single_trace(config, &protocol),
        Command::Critical => critical(config, &protocol),
        Command::Heatmap => heatmap(config, &protocol),
        Command::SizeScan => scan(config, &protocol),
    }
}

/// Runs `config` on a pool of `config.workers` threads and writes its files.
/// On failure no output file is left behind.
pub fn run(config: &RunConfig) -> Result<Outcome, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| CliError::config("workers", e))?;
    let (mut products, mut results, summary) = pool.install(|| compute(config))?;
    round_floats(&mut results);

    let doc = json!({
        "command": config.command,
        "version": env!("CARGO_PKG_VERSION"),
        "seed": config.seed,
        "config": to_value(config),
        "results": results,
    });
    let json = serde_json::to_string_pretty(&doc).expect("serializable") + "\n";
    products.push((".summary.json", json));

    let mut written = Vec::new();
    for (suffix, contents) in products {
        let path = with_suffix(&config.out, suffix);
        if let Err(source) = std::fs::write(&path, contents) {
            for p in written.iter().chain(std::iter::once(&path)) {
                let _ = std::fs::remove_file(p);
            }
            return Err(CliError::Io { path, source });
        }
        written.push(path);
    }
    Ok(Outcome {
        summary,
        files: written,
    })
}

/// Parses, runs and reports; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let result = parse_config(args).and_then(|config| run(&config));
    match result {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            0
        }
        Err(CliError::Usage(e)) => {
            let _ = e.print();
            e.exit_code()
        }
        Err(e) => {
            eprintln!("dtc: {e}");
            e.exit_code()
        }
    }
}
