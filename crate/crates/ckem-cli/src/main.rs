//! CLI for the momentum-construction library: loads a model config, builds
//! profiles, runs the verification and classification suites, and emits CSV
//! and JSON artifacts.
//!
//! Exit codes: 0 all checks pass, 1 a verification check failed or a verdict
//! is unresolved (the report is still written), 2 invalid input.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use ckem::completeness::EndpointKind;
use ckem::corollary::corollary_table;
use ckem::geometry::{BaseKind, BaseModel};
use ckem::par::ExecutionMode;
use ckem::params::{ModelParams, ModelSpec};
use ckem::profiles::{profile_csv, ClosedFormExtra, MomentumProfile};
use ckem::reconstruction::{reconstruction_csv, Reconstruction};
use ckem::verify::{run_classify, run_verify, Tolerances};

#[derive(Parser)]
#[command(
    name = "ckem",
    version,
    about = "Momentum profiles, Einstein certification and completeness classification for conformally Kähler models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Model config JSON: {case, d, r, lambda, nu, a, b, mu, x0, x1, base}
    #[arg(long)]
    config: PathBuf,
    /// Output directory for reports and tables
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Seed for the sampled point suites
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Grid size for tables and residual sweeps
    #[arg(long, default_value_t = 200)]
    grid: usize,
    /// Tolerance override, repeatable: --tol name=value
    #[arg(long = "tol", value_name = "NAME=VAL")]
    tol: Vec<String>,
    /// Run the pointwise suites on one thread
    #[arg(long)]
    sequential: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Materialize the momentum profile and reconstruction tables as CSV
    Profile(CommonArgs),
    /// Run the full verification suite and write a JSON report
    Verify(CommonArgs),
    /// Classify endpoints and the underlying domain
    Classify(CommonArgs),
    /// Compare a printed special-case display against the quadrature route
    Corollary {
        #[command(flatten)]
        common: CommonArgsOptionalConfig,
        /// Display id: 1.6 … 1.15 or 1.19
        #[arg(long)]
        id: String,
        /// Base dimension d
        #[arg(long, default_value_t = 1)]
        d: u32,
        #[arg(long, allow_negative_numbers = true)]
        mu: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        x0: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        x1: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        a: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        b: Option<f64>,
        #[arg(long)]
        r: Option<u32>,
    },
}

#[derive(Args, Clone)]
struct CommonArgsOptionalConfig {
    /// Output directory
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Grid size of the comparison table
    #[arg(long, default_value_t = 100)]
    grid: usize,
}

#[derive(Deserialize)]
struct BaseDescriptor {
    kind: BaseKind,
    #[serde(default = "default_scale")]
    scale: f64,
}

fn default_scale() -> f64 {
    1.0
}

#[derive(Deserialize)]
struct ConfigFile {
    #[serde(flatten)]
    model: ModelSpec,
    #[serde(default)]
    base: Option<BaseDescriptor>,
    #[serde(default)]
    tolerances: Option<std::collections::BTreeMap<String, f64>>,
}

struct Loaded {
    params: ModelParams,
    base: Option<BaseModel>,
    tols: Tolerances,
}

fn load(common: &CommonArgs) -> Result<Loaded> {
    if common.grid < 16 {
        return Err(anyhow!("--grid must be at least 16"));
    }
    let text = fs::read_to_string(&common.config)
        .with_context(|| format!("reading config {:?}", common.config))?;
    let cfg: ConfigFile = serde_json::from_str(&text).context("parsing config JSON")?;
    let params = match ModelParams::from_spec(&cfg.model) {
        Ok(p) => p,
        Err(ckem::CkemError::Inadmissible(violations)) => {
            return Err(anyhow!(
                "inadmissible model:\n  {}",
                violations.join("\n  ")
            ));
        }
        Err(e) => return Err(e.into()),
    };
    let base = cfg
        .base
        .map(|b| BaseModel::new(b.kind, b.scale, params.d))
        .transpose()?;
    let mut tols = Tolerances::default();
    if let Some(map) = cfg.tolerances {
        for (k, v) in map {
            tols.set(&k, v)?;
        }
    }
    for t in &common.tol {
        let (name, value) = t
            .split_once('=')
            .ok_or_else(|| anyhow!("bad --tol argument `{t}`, expected name=value"))?;
        tols.set(
            name,
            value.parse::<f64>().context("parsing tolerance value")?,
        )?;
    }
    Ok(Loaded { params, base, tols })
}

fn write_out(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {path:?}"))?;
    Ok(path)
}

/// Table grid: ascending in the working coordinate, including a finite
/// reference endpoint (where φ has an exact limit) and insetting the other
/// end, where the conformal factor vanishes.
fn table_grid(params: &ModelParams, count: usize) -> Vec<f64> {
    let chart = params.chart();
    let (wlo, whi) = params.working_interval();
    let margin = 1e-6 * (whi - wlo);
    let ref_lower = params.case.reference_is_lower();
    let a = if ref_lower && params.x0.is_finite() {
        wlo
    } else {
        wlo + margin
    };
    let b = if !ref_lower && params.x1.is_finite() {
        whi
    } else {
        whi - margin
    };
    let n = count.max(2);
    (0..n)
        .map(|k| chart.x_of_w(a + (b - a) * k as f64 / (n - 1) as f64))
        .collect()
}

fn cmd_profile(common: &CommonArgs) -> Result<()> {
    let loaded = load(common)?;
    let params = loaded.params;
    let profile = MomentumProfile::quadrature(&params)?;
    let recon = Reconstruction::build(&profile)?;

    let grid = table_grid(&params, common.grid);
    let csv = profile_csv(&profile, &grid)?;
    let path = write_out(&common.out, "profile.csv", &csv)?;
    eprintln!("wrote {path:?}");

    // reconstruction rows only where t is finite: strictly interior grid
    let interior = params.interior_grid(common.grid);
    let rcsv = reconstruction_csv(&recon, &interior)?;
    let rpath = write_out(&common.out, "reconstruction.csv", &rcsv)?;
    eprintln!("wrote {rpath:?}");
    Ok(())
}

fn cmd_verify(common: &CommonArgs) -> Result<bool> {
    let loaded = load(common)?;
    let base = loaded
        .base
        .ok_or_else(|| anyhow!("verify needs a `base` entry in the config"))?;
    let mode = if common.sequential {
        ExecutionMode::Sequential
    } else {
        ExecutionMode::auto()
    };
    let started = std::time::Instant::now();
    let report = run_verify(
        &loaded.params,
        &base,
        common.grid,
        common.seed,
        &loaded.tols,
        mode,
    )?;
    let json = serde_json::to_string_pretty(&report)?;
    let path = write_out(&common.out, "report.json", &json)?;
    eprintln!(
        "wrote {path:?} in {} ms (timing kept out of the report for determinism)",
        started.elapsed().as_millis()
    );
    for c in &report.checks {
        eprintln!(
            "  {:24} max {:>12.4e}  tol {:>8.1e}  {}",
            c.name,
            c.max_abs,
            c.tolerance,
            if c.pass { "pass" } else { "FAIL" }
        );
    }
    Ok(report.passed())
}

fn cmd_classify(common: &CommonArgs) -> Result<bool> {
    let loaded = load(common)?;
    let report = run_classify(&loaded.params)?;
    let json = serde_json::to_string_pretty(&report)?;
    let path = write_out(&common.out, "classification.json", &json)?;
    eprintln!("wrote {path:?}");
    eprintln!(
        "  case {}: lower {:?}, upper {:?} -> {}",
        report.case, report.lower.kind, report.upper.kind, report.domain_label
    );
    let resolved = report.lower.kind != EndpointKind::Unresolved
        && report.upper.kind != EndpointKind::Unresolved
        && report.domain_label != "Unresolved";
    Ok(resolved)
}

fn run() -> Result<bool> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Profile(common) => {
            cmd_profile(common)?;
            Ok(true)
        }
        Command::Verify(common) => cmd_verify(common),
        Command::Classify(common) => cmd_classify(common),
        Command::Corollary {
            common,
            id,
            d,
            mu,
            x0,
            x1,
            a,
            b,
            r,
        } => {
            let extra = ClosedFormExtra {
                mu: *mu,
                x0: *x0,
                x1: *x1,
                a: *a,
                b: *b,
                r: *r,
            };
            let table = corollary_table(id, *d, &extra, common.grid)?;
            let json = serde_json::to_string_pretty(&table)?;
            let name = format!("corollary_{}.json", id.replace('.', "_"));
            let path = write_out(&common.out, &name, &json)?;
            eprintln!(
                "wrote {path:?} (max relative delta {:.3e})",
                table.max_delta_rel
            );
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
