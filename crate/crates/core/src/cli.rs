//! Command-line front end. `main.rs` only forwards to [`run`].
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical error,
//! 4 unidentifiable tomography dataset.
//!
//! Every command derives its random streams from `--seed` plus a fixed
//! per-command offset ([`CYCLE_SEED_OFFSET`], [`SWEEP_SEED_OFFSET`],
//! [`TOMOGRAPHY_SEED_OFFSET`]), so runs are byte-for-byte reproducible.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::channel::{ideal_cycle_map, process_fidelity, ProcessMap};
use crate::cluster::{self, SampleOptions, WitnessSet};
use crate::cycle::{BuiltMap, CycleResult, CycleTensors, DEFAULT_TIME_STEPS};
use crate::error::{Error, Result};
use crate::indist::IndTable;
use crate::params::PhysicalParams;
use crate::state::{SpinVector, StokesVector};
use crate::tomography::{self, TomographyDataset, TomographyMeta};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IDENTIFIABILITY: i32 = 4;

pub const CYCLE_SEED_OFFSET: u64 = 0;
pub const SWEEP_SEED_OFFSET: u64 = 1_000;
pub const TOMOGRAPHY_SEED_OFFSET: u64 = 2_000;

#[derive(Debug, Parser)]
#[command(name = "qd-cluster", version, about = "Quantum-dot cluster-state protocol simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Physical parameter file (key = value). Not needed to reconstruct,
    /// where the dataset carries its own parameters.
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Nuclear-field samples.
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    /// Gauss-Legendre nodes for the emission-time integral.
    #[arg(long = "time-steps", default_value_t = DEFAULT_TIME_STEPS)]
    pub time_steps: usize,
    /// Output file.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Generate,
    Reconstruct,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the one-cycle process map; writes the map and `<out>.summary.json`.
    Cycle {
        #[command(flatten)]
        common: Common,
        /// Also report the cycle conditioned on a photon projection, for this
        /// input spin ("x,y,z").
        #[arg(long = "input-spin")]
        input_spin: Option<String>,
        /// Photon projection label (+X, -X, +Y, -Y, +Z, -Z) for `--input-spin`.
        #[arg(long, default_value = "+Z")]
        photon: String,
    },
    /// Field sweep; writes CSV to `--out` and a JSON mirror next to it.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long = "b-min")]
        b_min: Option<f64>,
        #[arg(long = "b-max")]
        b_max: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        /// Explicit comma-separated fields in Tesla, instead of a range.
        #[arg(long, value_delimiter = ',')]
        fields: Option<Vec<f64>>,
        /// Measured indistinguishability table (CSV `b_tesla,i_nd`).
        #[arg(long = "ind-table")]
        ind_table: Option<PathBuf>,
    },
    /// Synthetic polarization tomography.
    Tomography {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        mode: Mode,
        /// Process map JSON (generate).
        #[arg(long)]
        map: Option<PathBuf>,
        /// Dataset JSON lines (reconstruct).
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// Heralding trials per trace; omit for exact traces.
        #[arg(long)]
        shots: Option<u64>,
    },
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_)
        | Error::Io(_)
        | Error::InvalidParameter(_)
        | Error::InvalidState(_)
        | Error::InvalidChannel(_)
        | Error::EmptyRequest(_) => EXIT_CONFIG,
        Error::Identifiability { .. } => EXIT_IDENTIFIABILITY,
        Error::DimensionMismatch { .. }
        | Error::NoConvergence { .. }
        | Error::DegenerateConditioning(_)
        | Error::InfinitePeriod(_)
        | Error::Domain(_) => EXIT_NUMERICAL,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn execute(cmd: &Command) -> Result<()> {
    match cmd {
        Command::Cycle { common, input_spin, photon } => cmd_cycle(common, input_spin.as_deref(), photon),
        Command::Sweep { common, b_min, b_max, points, fields, ind_table } => {
            let fields = match fields {
                Some(f) => f.clone(),
                None => {
                    let (lo, hi, n) = match (b_min, b_max, points) {
                        (Some(lo), Some(hi), Some(n)) => (*lo, *hi, *n),
                        _ => {
                            return Err(Error::Config(
                                "sweep needs --fields or all of --b-min, --b-max, --points".into(),
                            ))
                        }
                    };
                    linear_fields(lo, hi, n)?
                }
            };
            cmd_sweep(common, &fields, ind_table.as_deref())
        }
        Command::Tomography { common, mode, map, dataset, shots } => {
            cmd_tomography(common, *mode, map.as_deref(), dataset.as_deref(), *shots)
        }
    }
}

/// `n >= 2` evenly spaced fields in `[lo, hi]`, `lo > 0`.
pub fn linear_fields(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0) || !(hi >= lo) || !hi.is_finite() {
        return Err(Error::Config(format!("need 0 < b-min <= b-max, got {lo}, {hi}")));
    }
    if n < 2 {
        return Err(Error::Config(format!("need at least 2 points, got {n}")));
    }
    Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect())
}

fn load_params(common: &Common) -> Result<PhysicalParams> {
    if common.samples == 0 {
        return Err(Error::Config("--samples must be at least 1".into()));
    }
    if common.time_steps == 0 {
        return Err(Error::Config("--time-steps must be at least 1".into()));
    }
    if common.out.as_os_str().is_empty() {
        return Err(Error::Config("--out must not be empty".into()));
    }
    let path = common
        .params
        .as_deref()
        .ok_or_else(|| Error::Config("--params is required for this command".into()))?;
    PhysicalParams::load(path)
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn sibling(path: &Path, ext: &str) -> PathBuf {
    path.with_extension(ext)
}

#[derive(Serialize)]
struct Conditioned {
    input_spin: [f64; 3],
    photon: String,
    prob: f64,
    prob_std_error: f64,
    spin_out: [f64; 3],
}

#[derive(Serialize)]
struct CycleSummary {
    witnesses: WitnessSet,
    fidelity_to_ideal: f64,
    zeta_le: String,
    projection_displacement: f64,
    max_std_error: f64,
    n_samples: usize,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    conditioned: Option<Conditioned>,
}

fn parse_spin(text: &str) -> Result<SpinVector> {
    let v: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Config(format!("--input-spin: {e}")))?;
    if v.len() != 3 {
        return Err(Error::Config("--input-spin needs three components".into()));
    }
    SpinVector::new(v[0], v[1], v[2]).map_err(|e| Error::Config(e.to_string()))
}

pub fn cmd_cycle(common: &Common, input_spin: Option<&str>, photon: &str) -> Result<()> {
    let params = load_params(common)?;
    let conditioned_input = match input_spin {
        Some(s) => {
            let m = StokesVector::cardinal(photon)
                .ok_or_else(|| Error::Config(format!("unknown photon label {photon:?}")))?;
            Some((parse_spin(s)?, m))
        }
        None => None,
    };
    let seed = common.seed.wrapping_add(CYCLE_SEED_OFFSET);
    let tensors = CycleTensors::compute(&params, common.samples, seed, common.time_steps)?;
    let built = BuiltMap::from_tensors(&tensors)?;
    let w = cluster::witnesses(&built.map)?;
    let conditioned = match conditioned_input {
        Some((s, m)) => {
            let r: CycleResult = tensors.given_photon(&s, &m)?;
            Some(Conditioned {
                input_spin: [s.x(), s.y(), s.z()],
                photon: photon.to_string(),
                prob: r.prob,
                prob_std_error: r.prob_std_error,
                spin_out: [r.spin_out.x(), r.spin_out.y(), r.spin_out.z()],
            })
        }
        None => None,
    };
    let summary = CycleSummary {
        witnesses: w,
        fidelity_to_ideal: process_fidelity(&built.map, &ideal_cycle_map())?,
        zeta_le: format_zeta(cluster::sweep_zeta(&w)),
        projection_displacement: built.displacement,
        max_std_error: built.max_std_error(),
        n_samples: common.samples,
        seed: common.seed,
        conditioned,
    };
    write(&common.out, &serde_json::to_string_pretty(&built.map)?)?;
    write(&sibling(&common.out, "summary.json"), &serde_json::to_string_pretty(&summary)?)?;
    eprintln!(
        "fidelity to ideal {:.3}, witnesses ({:.3}, {:.3}, {:.3}, {:.3})",
        summary.fidelity_to_ideal, w.w1, w.w2, w.w3, w.w4
    );
    Ok(())
}

fn format_zeta(z: f64) -> String {
    if z.is_infinite() {
        "inf".into()
    } else {
        z.to_string()
    }
}

pub fn cmd_sweep(common: &Common, fields: &[f64], ind_table: Option<&Path>) -> Result<()> {
    let params = load_params(common)?;
    if fields.iter().any(|b| !b.is_finite() || *b < 0.0) {
        return Err(Error::Config("fields must be finite and non-negative".into()));
    }
    let table = ind_table.map(IndTable::load).transpose()?;
    let mut opts = SampleOptions::new(common.samples, common.seed.wrapping_add(SWEEP_SEED_OFFSET));
    opts.n_time_steps = common.time_steps;
    let rows = cluster::sweep_field(&params, fields, &opts, table.as_ref())?;
    write(&common.out, &cluster::sweep_csv(fields, &rows)?)?;
    write(&sibling(&common.out, "json"), &cluster::sweep_json(fields, &rows)?)?;
    let failed = rows.iter().filter(|r| r.is_err()).count();
    eprintln!("{} rows, {failed} flagged", rows.len());
    Ok(())
}

pub fn cmd_tomography(
    common: &Common,
    mode: Mode,
    map: Option<&Path>,
    dataset: Option<&Path>,
    shots: Option<u64>,
) -> Result<()> {
    match mode {
        Mode::Generate => {
            let params = load_params(common)?;
            let path = map.ok_or_else(|| Error::Config("generate needs --map".into()))?;
            let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            let map: ProcessMap = serde_json::from_str(&text)?;
            let mut meta = TomographyMeta::new(params, common.seed.wrapping_add(TOMOGRAPHY_SEED_OFFSET));
            meta.n_samples = common.samples;
            meta.shots = shots;
            let data = tomography::generate_dataset(&map, &meta)?;
            data.save(&common.out)?;
            eprintln!("{} traces written", data.traces.len());
        }
        Mode::Reconstruct => {
            let path = dataset.ok_or_else(|| Error::Config("reconstruct needs --dataset".into()))?;
            let data = TomographyDataset::load(path)?;
            let report = tomography::reconstruct_map(&data)?;
            let fidelity = process_fidelity(&report.map, &ideal_cycle_map())?;
            #[derive(Serialize)]
            struct Out<'a> {
                #[serde(flatten)]
                report: &'a tomography::ReconstructionReport,
                fidelity_to_ideal: f64,
            }
            write(&common.out, &serde_json::to_string_pretty(&Out { report: &report, fidelity_to_ideal: fidelity })?)?;
            eprintln!("residual {:.3e}, fidelity to ideal {fidelity:.4}", report.residual);
        }
    }
    Ok(())
}
