//! The `parawave` command line: basis and estimate certification suites and the Picard
//! solver, with JSON reports and CSV series written to the output directory.

pub mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimates::{EstimateId, FitShape};
use crate::io::{num, write_csv, write_json};
use crate::meyer::MeyerBasis;
use crate::solver::{picard_solve, preset_data, scaling_check, Preset, ScalingReport, SolverState, SolverStatus};
use crate::suites::{
    basis_report, certify_decay, certify_experiment, shape_of, BasisReport, DecayCertificate, ExperimentCertificate,
    ExperimentOptions, SuiteOptions,
};

pub use config::RunConfig;

pub const GRAM_TOL: f64 = 1e-8;
pub const PARTITION_TOL: f64 = 1e-10;
pub const ROUND_TRIP_TOL: f64 = 1e-10;
pub const SCALING_TOL: f64 = 0.01;
pub const BESOV_SCALING_TOL: f64 = 1e-10;

#[derive(Debug, Parser)]
#[command(name = "parawave", version, about = "Time-adapted Meyer wavelet certification suites and Navier-Stokes Picard solver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// TOML file overriding the bundled defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Lattice size per axis.
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Output directory for report.json and CSV files.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Orthonormality, partition of unity, round trip and Parseval of the wavelet frames.
    VerifyBasis(CommonArgs),
    /// Decay-bound certification and norm experiments.
    VerifyEstimates {
        #[command(flatten)]
        common: CommonArgs,
        /// Estimate to run; repeat for several. Defaults to all.
        #[arg(long = "estimate", value_parser = parse_estimate)]
        estimates: Vec<EstimateId>,
    },
    /// Picard iteration for preset initial data.
    Solve {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_parser = parse_preset)]
        preset: Option<Preset>,
        /// Critical Besov norm of the data.
        #[arg(long)]
        scale: Option<f64>,
        /// Also solve for the data rescaled by this factor and compare.
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(["2", "4"]))]
        lambda: Option<String>,
    },
}

fn parse_estimate(s: &str) -> std::result::Result<EstimateId, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_preset(s: &str) -> std::result::Result<Preset, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn load(common: &CommonArgs) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::defaults(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(r) = common.resolution {
        cfg.resolution = r;
    }
    if let Some(o) = &common.out {
        cfg.out = o.clone();
    }
    Ok(cfg)
}

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    command: &'static str,
    version: &'static str,
    config: &'a RunConfig,
    passed: bool,
    result: T,
}

fn write_report<T: Serialize>(cfg: &RunConfig, command: &'static str, passed: bool, result: T) -> Result<()> {
    let report = Report { command, version: env!("CARGO_PKG_VERSION"), config: cfg, passed, result };
    write_json(&cfg.out.join("report.json"), &report)
}

fn prepare_out(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Config(format!("cannot create {}: {e}", dir.display())))
}

/// Runs the parsed command; `Ok(true)` iff every suite met its tolerance.
pub fn execute(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::VerifyBasis(common) => {
            let cfg = load(&common)?;
            cfg.validate()?;
            verify_basis(&cfg)
        }
        Command::VerifyEstimates { common, estimates } => {
            let mut cfg = load(&common)?;
            if !estimates.is_empty() {
                cfg.estimates = estimates.iter().map(|e| e.as_str().to_string()).collect();
            }
            cfg.validate()?;
            verify_estimates(&cfg)
        }
        Command::Solve { common, preset, scale, lambda } => {
            let mut cfg = load(&common)?;
            if let Some(p) = preset {
                cfg.preset = p.as_str().to_string();
            }
            if let Some(s) = scale {
                cfg.scale = s;
            }
            if let Some(l) = lambda {
                cfg.lambda = l.parse().map_err(|_| Error::Config(format!("bad lambda {l}")))?;
            }
            cfg.validate()?;
            solve(&cfg)
        }
    }
}

/// Entry point for the binary: 0 on success, 1 on a tolerance breach, 2 on bad input.
pub fn main_with(args: impl IntoIterator<Item = std::ffi::OsString>) -> ExitCode {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

pub fn verify_basis(cfg: &RunConfig) -> Result<bool> {
    prepare_out(&cfg.out)?;
    let lat = cfg.lattice()?;
    let window = cfg.window()?;
    let jm = lat.max_atom_level();
    let frames: Vec<u32> = (1..=jm.min(5)).collect();
    let report: BasisReport = basis_report(lat, &window, &frames, cfg.seed)?;
    let passed = report.worst_gram() < GRAM_TOL
        && report.worst_partition() < PARTITION_TOL
        && report.worst_round_trip() < ROUND_TRIP_TOL;
    println!("{:>6} {:>12} {:>12} {:>12} {:>12}", "j_min", "gram", "partition", "round-trip", "parseval");
    for f in &report.frames {
        println!("{:>6} {:>12.3e} {:>12.3e} {:>12.3e} {:>12.3e}", f.j_min, f.gram, f.partition, f.round_trip, f.parseval);
    }
    println!("max Gram deviation {:.3e}; {} in {:.1} s", report.worst_gram(), verdict(passed), report.seconds);
    write_csv(
        &cfg.out.join("basis.csv"),
        &["j_min", "gram", "partition", "round_trip", "parseval"],
        report.frames.iter().map(|f| [f.j_min.to_string(), num(f.gram), num(f.partition), num(f.round_trip), num(f.parseval)]),
    )?;
    #[derive(Serialize)]
    struct Out<'a> {
        tolerances: [(&'static str, f64); 3],
        report: &'a BasisReport,
    }
    let tolerances = [("gram", GRAM_TOL), ("partition", PARTITION_TOL), ("round_trip", ROUND_TRIP_TOL)];
    write_report(cfg, "verify-basis", passed, Out { tolerances, report: &report })?;
    Ok(passed)
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EstimateRow {
    Decay { certified: bool, certificate: DecayCertificate, shape: FitShape },
    Experiment { certified: bool, certificate: ExperimentCertificate },
    Failed { id: EstimateId, message: String },
}

impl EstimateRow {
    pub fn certified(&self) -> bool {
        match self {
            Self::Decay { certified, .. } | Self::Experiment { certified, .. } => *certified,
            Self::Failed { .. } => false,
        }
    }
}

/// Suite options for `cfg`, shared by the CLI and the acceptance target.
pub fn suite_options(cfg: &RunConfig) -> Result<SuiteOptions> {
    let lat = cfg.lattice()?;
    let mut opts = SuiteOptions::for_lattice(lat);
    opts.configs = cfg.configs;
    opts.seed = cfg.seed;
    opts.p = cfg.p;
    if cfg.grid > 0 {
        opts.grid = cfg.grid;
    }
    Ok(opts)
}

pub fn experiment_options(cfg: &RunConfig, id: EstimateId) -> Result<ExperimentOptions> {
    let lat = cfg.lattice()?;
    let jm = lat.max_atom_level();
    Ok(ExperimentOptions {
        p: cfg.p,
        m: cfg.m,
        ensemble: if id == EstimateId::BilinearBound { 2 * cfg.pairs } else { cfg.ensemble },
        top: jm.saturating_sub(2),
        shells: cfg.shells(jm),
        per_shell: cfg.experiment_samples,
    })
}

pub fn run_estimate(cfg: &RunConfig, id: EstimateId) -> Result<EstimateRow> {
    let lat = cfg.lattice()?;
    let lattices = [lat, lat.doubled()];
    let outcome = if let Some(shape) = shape_of(id) {
        certify_decay(id, &lattices, &suite_options(cfg)?)
            .map(|c| EstimateRow::Decay { certified: c.stable(), certificate: c, shape })
    } else {
        let seeds: Vec<u64> =
            if id == EstimateId::BilinearBound { vec![cfg.seed] } else { vec![cfg.seed, cfg.seed.wrapping_add(1)] };
        certify_experiment(id, &lattices, &seeds, &experiment_options(cfg, id)?)
            .map(|c| EstimateRow::Experiment { certified: c.consistent(), certificate: c })
    };
    match outcome {
        Ok(row) => Ok(row),
        Err(Error::Certification(message)) => Ok(EstimateRow::Failed { id, message }),
        Err(e) => Err(e),
    }
}

pub fn verify_estimates(cfg: &RunConfig) -> Result<bool> {
    prepare_out(&cfg.out)?;
    let mut rows = Vec::new();
    println!("{:<20} {:>8} {:>12} {:>12} {:>8} {:>4} {:>10}  verdict", "estimate", "configs", "C(M)", "C(2M)", "c", "N", "spread");
    for id in cfg.estimate_ids()? {
        let row = run_estimate(cfg, id)?;
        match &row {
            EstimateRow::Decay { certified, certificate: c, .. } => println!(
                "{:<20} {:>8} {:>12.4e} {:>12.4e} {:>8} {:>4} {:>10.3e}  {}",
                id.as_str(),
                c.configurations,
                c.constants[0],
                c.constants[1],
                c.common_c.map_or("-".into(), |v| format!("{v:.3}")),
                c.common_exponent,
                c.spread,
                verdict(*certified)
            ),
            EstimateRow::Experiment { certified, certificate: c } => {
                let lo = c.runs.iter().map(|r| r.constant).fold(f64::INFINITY, f64::min);
                let hi = c.runs.iter().map(|r| r.constant).fold(0.0, f64::max);
                println!(
                    "{:<20} {:>8} {:>12.4e} {:>12.4e} {:>8} {:>4} {:>10.3e}  {}",
                    id.as_str(),
                    c.runs.iter().map(|r| r.samples).sum::<usize>(),
                    lo,
                    hi,
                    "-",
                    "-",
                    c.factor,
                    verdict(*certified)
                )
            }
            EstimateRow::Failed { message, .. } => println!("{:<20} {message}  FAIL", id.as_str()),
        }
        rows.push(row);
    }
    let passed = rows.iter().all(EstimateRow::certified);
    let csv_rows = rows.iter().map(|r| match r {
        EstimateRow::Decay { certified, certificate: c, .. } => vec![
            c.id.as_str().to_string(),
            "decay".into(),
            c.configurations.to_string(),
            num(c.constants[0]),
            num(c.constants[1]),
            c.common_c.map_or(String::new(), num),
            num(c.common_exponent),
            num(c.spread),
            certified.to_string(),
        ],
        EstimateRow::Experiment { certified, certificate: c } => {
            let lo = c.runs.iter().map(|r| r.constant).fold(f64::INFINITY, f64::min);
            let hi = c.runs.iter().map(|r| r.constant).fold(0.0, f64::max);
            vec![
                c.id.as_str().to_string(),
                "experiment".into(),
                c.runs.iter().map(|r| r.samples).sum::<usize>().to_string(),
                num(lo),
                num(hi),
                String::new(),
                String::new(),
                num(c.factor),
                certified.to_string(),
            ]
        }
        EstimateRow::Failed { id, .. } => {
            vec![id.as_str().to_string(), "failed".into(), String::new(), String::new(), String::new(), String::new(), String::new(), String::new(), "false".into()]
        }
    });
    write_csv(
        &cfg.out.join("estimates.csv"),
        &["estimate", "kind", "configurations", "constant_low", "constant_high", "c", "exponent", "spread", "certified"],
        csv_rows,
    )?;
    write_report(cfg, "verify-estimates", passed, &rows)?;
    Ok(passed)
}

#[derive(Serialize)]
struct SolveResult<'a> {
    state: &'a SolverState,
    scaling: Option<&'a ScalingReport>,
}

pub fn solve(cfg: &RunConfig) -> Result<bool> {
    prepare_out(&cfg.out)?;
    let lat = cfg.lattice()?;
    let basis = MeyerBasis::new(lat, cfg.window()?);
    let preset: Preset = cfg.preset.parse()?;
    let a = preset_data(&basis, preset, cfg.scale, cfg.p, cfg.seed)?;
    let solver = cfg.solver();
    let state = picard_solve(&basis, &a, &solver)?;
    for (k, inc) in state.increments.iter().enumerate() {
        let ratio = if k == 0 { String::from("-") } else { format!("{:.3e}", state.ratios[k - 1]) };
        println!("iteration {:>2}: increment {:.3e}  ratio {ratio}", k + 1, inc);
    }
    println!(
        "{:?} after {} iterations; residual {:.3e}, divergence {:.3e}, H0 {:.4e}, Hm {:.4e}",
        state.status, state.iterations, state.residual, state.divergence, state.norm.h0, state.norm.hm
    );
    for n in &state.notes {
        println!("note: {n}");
    }
    let scaling = if cfg.lambda > 0 && state.status == SolverStatus::Converged {
        let s = scaling_check(&basis, &a, cfg.lambda, &solver)?;
        println!("scaling lambda = {}: deviation {:.3e}, Besov deviation {:.3e}", s.lambda, s.deviation, s.besov_deviation);
        Some(s)
    } else {
        None
    };
    let passed = state.status == SolverStatus::Converged
        && scaling.as_ref().is_none_or(|s| s.deviation <= SCALING_TOL && s.besov_deviation <= BESOV_SCALING_TOL);
    write_csv(
        &cfg.out.join("increments.csv"),
        &["iteration", "increment", "ratio"],
        state.increments.iter().enumerate().map(|(k, inc)| {
            let ratio = if k == 0 { String::new() } else { num(state.ratios[k - 1]) };
            [(k + 1).to_string(), num(*inc), ratio]
        }),
    )?;
    write_csv(
        &cfg.out.join("blocks.csv"),
        &["shell", "j_t", "samples", "scaling", "detail", "leakage"],
        state.norm.blocks.iter().map(|b| {
            let detail: f64 = b.detail.iter().filter(|(j, _)| *j >= b.shell).map(|(_, v)| *v).sum();
            [b.shell.to_string(), b.j_t.to_string(), b.samples.to_string(), num(b.scaling), num(detail), num(b.leakage)]
        }),
    )?;
    write_csv(
        &cfg.out.join("detail_levels.csv"),
        &["shell", "level", "value"],
        state.norm.blocks.iter().flat_map(|b| b.detail.iter().map(move |(j, v)| [b.shell.to_string(), j.to_string(), num(*v)])),
    )?;
    write_report(cfg, "solve", passed, SolveResult { state: &state, scaling: scaling.as_ref() })?;
    Ok(passed)
}
