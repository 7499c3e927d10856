//! `hcf` — command-line driver for the curvature-flow laboratory.
//!
//! Exit codes: 0 all checks pass, 1 a scientific check failed (identity or
//! positivity violation), 2 usage/config error, 3 numerical blowup.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use hcf_core::flow::{run_flow, write_monitor_csv, write_snapshot, FlowConfig};
use hcf_core::linalg::CVector;
use hcf_core::positivity::{min_griffiths, GriffithsOptions};
use hcf_core::transport::{transport_pair, Curve, TransportOptions};
use hcf_core::{compute_frame, metric_catalog, CurvatureTensor, HcfError};

const EXIT_PASS: u8 = 0;
const EXIT_SCIENTIFIC: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_BLOWUP: u8 = 3;

#[derive(Parser)]
#[command(name = "hcf", version, about = "Hermitian curvature flow laboratory")]
struct Cli {
    /// TOML config file; required by every command except list-metrics
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the config seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for artifacts (reports, CSV, snapshots, manifests)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override the command's main tolerance
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Suppress progress output on stdout
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the curvature identity suite on a metric and report residuals
    Verify,
    /// Integrate a flow and write the monitor CSV and final snapshot
    Flow,
    /// Minimize the Griffiths curvature form and report a positivity verdict
    Certify,
    /// Parallel-transport a vector pair along a curve
    Transport,
    /// List the metric catalog
    ListMetrics,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct MetricSpec {
    metric: String,
    #[serde(default)]
    params: HashMap<String, f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct VerifyConfig {
    #[serde(flatten)]
    metric: MetricSpec,
    #[serde(default = "default_points")]
    points: usize,
    /// tolerance for the Bianchi residuals
    #[serde(default = "default_bianchi_tol")]
    tol: f64,
    /// tolerance for the curvature-type symmetry residual
    #[serde(default = "default_symmetry_tol")]
    symmetry_tol: f64,
    #[serde(default = "default_seed")]
    seed: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct CertifyConfig {
    #[serde(flatten)]
    metric: MetricSpec,
    #[serde(default = "default_certify_points")]
    points: usize,
    /// verdict threshold: non-negative iff min value >= -tol everywhere
    #[serde(default = "default_certify_tol")]
    tol: f64,
    #[serde(default = "default_seed")]
    seed: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct CurveSpec {
    kind: String,
    #[serde(default)]
    from: Vec<[f64; 2]>,
    #[serde(default)]
    to: Vec<[f64; 2]>,
    #[serde(default)]
    center: Vec<[f64; 2]>,
    #[serde(default)]
    base: Vec<[f64; 2]>,
    #[serde(default)]
    radius: f64,
    #[serde(default)]
    axis: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct TransportConfig {
    #[serde(flatten)]
    metric: MetricSpec,
    curve: CurveSpec,
    xi: Vec<[f64; 2]>,
    eta: Vec<[f64; 2]>,
    #[serde(default = "default_steps")]
    steps: usize,
    #[serde(default = "default_twisted")]
    twisted: bool,
    /// pairing-drift tolerance for the pass verdict
    #[serde(default = "default_drift_tol")]
    tol: f64,
    #[serde(default = "default_seed")]
    seed: u64,
}

fn default_points() -> usize {
    100
}
fn default_bianchi_tol() -> f64 {
    1e-9
}
fn default_symmetry_tol() -> f64 {
    1e-12
}
fn default_certify_points() -> usize {
    32
}
fn default_certify_tol() -> f64 {
    1e-8
}
fn default_steps() -> usize {
    512
}
fn default_twisted() -> bool {
    true
}
fn default_drift_tol() -> f64 {
    1e-8
}
fn default_seed() -> u64 {
    20260826
}

fn cvector(entries: &[[f64; 2]]) -> CVector {
    CVector::from_iterator(entries.len(), entries.iter().map(|&[r, i]| Complex64::new(r, i)))
}

fn cpoint(entries: &[[f64; 2]]) -> Vec<Complex64> {
    entries.iter().map(|&[r, i]| Complex64::new(r, i)).collect()
}

fn load_config<T: for<'de> Deserialize<'de>>(path: Option<&PathBuf>) -> Result<T, String> {
    let path = path.ok_or("this command needs --config <path>")?;
    let text = fs::read_to_string(path).map_err(|e| format!("reading {}: {e}", path.display()))?;
    toml::from_str(&text).map_err(|e| format!("parsing {}: {e}", path.display()))
}

/// Write the run manifest next to the artifacts: config echo, tool version,
/// effective seed.
fn write_manifest(
    out: &Path,
    command: &str,
    config: &impl Serialize,
    seed: u64,
) -> std::io::Result<()> {
    let manifest = json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "seed": seed,
        "config": serde_json::to_value(config).expect("config serializes"),
    });
    fs::write(out.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)
}

fn ensure_out(out: &Option<PathBuf>) -> Result<PathBuf, String> {
    let dir = out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).map_err(|e| format!("creating {}: {e}", dir.display()))?;
    Ok(dir)
}

fn error_exit(e: &HcfError) -> u8 {
    match e {
        HcfError::Blowup { .. } => EXIT_BLOWUP,
        HcfError::Config(_)
        | HcfError::BadParams(_)
        | HcfError::UnknownMetric(_)
        | HcfError::Io(_) => EXIT_CONFIG,
        _ => EXIT_SCIENTIFIC,
    }
}

fn cmd_verify(cli: &Cli) -> Result<u8, String> {
    let mut cfg: VerifyConfig = load_config(cli.config.as_ref())?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(t) = cli.tol {
        cfg.tol = t;
    }
    let started = Instant::now();
    let m = metric_catalog(&cfg.metric.metric, &cfg.metric.params).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut symmetry: f64 = 0.0;
    let mut bianchi = [0.0f64; 4];
    for _ in 0..cfg.points {
        let z = m.chart.random_point(&mut rng);
        let f = compute_frame(&m, &z, 2).map_err(|e| e.to_string())?;
        symmetry = symmetry.max(CurvatureTensor::from_frame(&f).symmetry_residual());
        let b = f.bianchi_residuals();
        for (slot, r) in bianchi.iter_mut().zip([b.first, b.second, b.third, b.fourth]) {
            *slot = slot.max(r);
        }
    }
    let pass = symmetry < cfg.symmetry_tol && bianchi.iter().all(|&r| r < cfg.tol);
    let report = json!({
        "metric": cfg.metric.metric,
        "points": cfg.points,
        "residuals": {
            "curvature_symmetry": symmetry,
            "bianchi_first": bianchi[0],
            "bianchi_second": bianchi[1],
            "bianchi_third": bianchi[2],
            "bianchi_fourth": bianchi[3],
        },
        "tolerances": { "bianchi": cfg.tol, "curvature_symmetry": cfg.symmetry_tol },
        "pass": pass,
        "wall_seconds": started.elapsed().as_secs_f64(),
    });
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    if cli.out.is_some() {
        let dir = ensure_out(&cli.out)?;
        fs::write(dir.join("verify.json"), &text).map_err(|e| e.to_string())?;
        write_manifest(&dir, "verify", &cfg, cfg.seed).map_err(|e| e.to_string())?;
    }
    if !cli.quiet {
        println!("{text}");
    }
    Ok(if pass { EXIT_PASS } else { EXIT_SCIENTIFIC })
}

fn cmd_flow(cli: &Cli) -> Result<u8, String> {
    let mut cfg: FlowConfig = load_config(cli.config.as_ref())?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let run = match run_flow(&cfg) {
        Ok(r) => r,
        Err(e) => return Ok(error_exit(&e)),
    };
    let dir = ensure_out(&cli.out)?;
    let mut csv = Vec::new();
    write_monitor_csv(&run.records, &mut csv).map_err(|e| e.to_string())?;
    fs::write(dir.join("monitor.csv"), &csv).map_err(|e| e.to_string())?;
    let mut snap = Vec::new();
    write_snapshot(&run.final_state, &mut snap).map_err(|e| e.to_string())?;
    fs::write(dir.join("final.snapshot"), &snap).map_err(|e| e.to_string())?;
    write_manifest(&dir, "flow", &cfg, cfg.seed).map_err(|e| e.to_string())?;
    if !cli.quiet {
        println!(
            "flow {} to t = {:.6}: {} records",
            cfg.metric,
            run.final_state.t,
            run.records.len()
        );
    }
    if let Some(reason) = run.blowup {
        if !cli.quiet {
            eprintln!("blowup: {reason}");
        }
        return Ok(EXIT_BLOWUP);
    }
    Ok(EXIT_PASS)
}

fn cmd_certify(cli: &Cli) -> Result<u8, String> {
    let mut cfg: CertifyConfig = load_config(cli.config.as_ref())?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(t) = cli.tol {
        cfg.tol = t;
    }
    let m = metric_catalog(&cfg.metric.metric, &cfg.metric.params).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let opts = GriffithsOptions { seed: cfg.seed, ..GriffithsOptions::default() };
    let mut worst = f64::INFINITY;
    let mut worst_point = Vec::new();
    for _ in 0..cfg.points {
        let z = m.chart.random_point(&mut rng);
        let f = compute_frame(&m, &z, 0).map_err(|e| e.to_string())?;
        let u = CurvatureTensor::from_frame(&f);
        let rep = min_griffiths(&u, &f.metric_value(), &opts).map_err(|e| e.to_string())?;
        if rep.min_value < worst {
            worst = rep.min_value;
            worst_point = z.iter().map(|c| [c.re, c.im]).collect();
        }
    }
    let nonnegative = worst >= -cfg.tol;
    let report = json!({
        "metric": cfg.metric.metric,
        "points": cfg.points,
        "min_griffiths": worst,
        "argmin_point": worst_point,
        "tolerance": cfg.tol,
        "verdict": if nonnegative { "nonnegative" } else { "negative" },
    });
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    if cli.out.is_some() {
        let dir = ensure_out(&cli.out)?;
        fs::write(dir.join("certify.json"), &text).map_err(|e| e.to_string())?;
        write_manifest(&dir, "certify", &cfg, cfg.seed).map_err(|e| e.to_string())?;
    }
    if !cli.quiet {
        println!("{text}");
    }
    Ok(if nonnegative { EXIT_PASS } else { EXIT_SCIENTIFIC })
}

fn cmd_transport(cli: &Cli) -> Result<u8, String> {
    let mut cfg: TransportConfig = load_config(cli.config.as_ref())?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(t) = cli.tol {
        cfg.tol = t;
    }
    let m = metric_catalog(&cfg.metric.metric, &cfg.metric.params).map_err(|e| e.to_string())?;
    let curve = match cfg.curve.kind.as_str() {
        "segment" => Curve::Segment { from: cpoint(&cfg.curve.from), to: cpoint(&cfg.curve.to) },
        "coordinate_loop" => Curve::CoordinateLoop {
            center: cpoint(&cfg.curve.center),
            radius: cfg.curve.radius,
            axis: cfg.curve.axis,
        },
        "phase_loop" => {
            Curve::PhaseLoop { base: cpoint(&cfg.curve.base), axis: cfg.curve.axis }
        }
        other => return Err(format!("unknown curve kind '{other}'")),
    };
    let opts = TransportOptions { steps: cfg.steps, twisted: cfg.twisted };
    let state = match transport_pair(&m, &curve, &cvector(&cfg.xi), &cvector(&cfg.eta), &opts) {
        Ok(s) => s,
        Err(e) => {
            if !cli.quiet {
                eprintln!("transport failed: {e}");
            }
            return Ok(error_exit(&e));
        }
    };
    let drift = state.pairing_drift();
    if cli.out.is_some() {
        let dir = ensure_out(&cli.out)?;
        let mut csv = String::from("s,pairing_re,pairing_im");
        let n = state.xi[0].len();
        for i in 0..n {
            csv.push_str(&format!(",xi{i}_re,xi{i}_im"));
        }
        for i in 0..n {
            csv.push_str(&format!(",eta{i}_re,eta{i}_im"));
        }
        csv.push('\n');
        for (k, s) in state.s.iter().enumerate() {
            csv.push_str(&format!(
                "{s:.12e},{:.12e},{:.12e}",
                state.pairing[k].re, state.pairing[k].im
            ));
            for v in state.xi[k].iter().chain(state.eta[k].iter()) {
                csv.push_str(&format!(",{:.12e},{:.12e}", v.re, v.im));
            }
            csv.push('\n');
        }
        fs::write(dir.join("transport.csv"), csv).map_err(|e| e.to_string())?;
        write_manifest(&dir, "transport", &cfg, cfg.seed).map_err(|e| e.to_string())?;
    }
    if !cli.quiet {
        println!("pairing drift {drift:.3e} over {} steps", cfg.steps);
    }
    Ok(if drift < cfg.tol { EXIT_PASS } else { EXIT_SCIENTIFIC })
}

fn cmd_list_metrics(cli: &Cli) -> Result<u8, String> {
    for entry in hcf_core::metrics::catalog_entries() {
        if cli.quiet {
            println!("{}", entry.name);
        } else {
            println!("{:<20} params: {:<18} {}", entry.name, entry.parameters.join(", "), entry.description);
        }
    }
    Ok(EXIT_PASS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify => cmd_verify(&cli),
        Command::Flow => cmd_flow(&cli),
        Command::Certify => cmd_certify(&cli),
        Command::Transport => cmd_transport(&cli),
        Command::ListMetrics => cmd_list_metrics(&cli),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}
