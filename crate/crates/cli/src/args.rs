use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "delta-tunnel",
    version,
    about = "Gaussian wave packets through a repulsive delta barrier"
)]
pub struct Cli {
    /// Flat JSON object of defaults, keyed by long flag name. Flags given on
    /// the command line win.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample the exact wavefunction at one or more times.
    Evolve(EvolveArgs),
    /// Asymptotic transmission coefficient for one parameter point.
    Transmit(TransmitArgs),
    /// Transmission coefficient over a grid of B values.
    Sweep(SweepArgs),
    /// Compare the closed form with the numerical oracles.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Output file; standard output when absent.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Relative tolerance of the transmission quadrature.
    #[arg(long, default_value_t = 1e-10)]
    pub rel_tol: f64,
    /// Reserved. Every computation is deterministic.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

/// Physical packet and barrier parameters.
#[derive(Debug, Args)]
pub struct PhysicalArgs {
    /// Initial width parameter.
    #[arg(long)]
    pub s: Option<f64>,
    /// Initial position-momentum correlation parameter.
    #[arg(long, allow_hyphen_values = true)]
    pub rho: Option<f64>,
    /// Initial packet centre, to the right of the barrier.
    #[arg(long)]
    pub xc: Option<f64>,
    /// Mean momentum magnitude; the packet moves towards the barrier.
    #[arg(long)]
    pub p0: Option<f64>,
    /// Barrier strength.
    #[arg(long = "Z")]
    pub z: Option<f64>,
    /// Particle mass; with --hbar switches to dimensional input.
    #[arg(long)]
    pub mass: Option<f64>,
    #[arg(long)]
    pub hbar: Option<f64>,
    /// Accept packets that start closer than 8 widths to the barrier.
    #[arg(long)]
    pub allow_overlap: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Layout {
    /// One file with a leading `t` column.
    Long,
    /// One file per time, suffixed `_t<index>`.
    PerTime,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub physical: PhysicalArgs,
    /// Sample times, comma separated or repeated.
    #[arg(long, num_args = 1.., value_delimiter = ',', required = true)]
    pub t: Vec<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub x_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub x_max: Option<f64>,
    /// Number of sample points; chosen from the packet scales when absent.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_enum, default_value_t = Layout::Long)]
    pub layout: Layout,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct TransmitArgs {
    #[arg(long = "A")]
    pub a: Option<f64>,
    #[arg(long = "B")]
    pub b: Option<f64>,
    #[command(flatten)]
    pub physical: PhysicalArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepMode {
    /// Columns A, B, T, abs_err.
    Fig1,
    /// Columns A, B, T, T_apr, ratio.
    Fig2,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum, default_value_t = SweepMode::Fig1)]
    pub mode: SweepMode,
    /// A values, comma separated or repeated.
    #[arg(long = "A", num_args = 1.., value_delimiter = ',')]
    pub a: Vec<f64>,
    #[arg(long)]
    pub b_min: Option<f64>,
    #[arg(long)]
    pub b_max: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    /// Linear instead of logarithmic B spacing.
    #[arg(long)]
    pub linear: bool,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub physical: PhysicalArgs,
    /// Grid points of both solver runs; overrides --dx and --coarse-dx.
    #[arg(long)]
    pub n: Option<usize>,
    /// Grid spacing of the wavefunction comparison run.
    #[arg(long, default_value_t = 3e-3)]
    pub dx: f64,
    #[arg(long, default_value_t = 1.5e-3)]
    pub dt: f64,
    /// Grid spacing of the long transmission run.
    #[arg(long, default_value_t = 0.02)]
    pub coarse_dx: f64,
    #[arg(long, default_value_t = 0.02)]
    pub coarse_dt: f64,
    /// Probability allowed to lag behind at the end of the transmission run.
    #[arg(long, default_value_t = 1e-4)]
    pub lag_tol: f64,
    #[command(flatten)]
    pub common: CommonArgs,
}

/// Splices the `--config` file into `argv` as flags for every key not
/// already given on the command line.
pub fn merge_config(argv: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let mut path = None;
    for (i, arg) in argv.iter().enumerate() {
        let arg = arg.to_string_lossy();
        if arg == "--config" {
            path = argv.get(i + 1).cloned();
        } else if let Some(p) = arg.strip_prefix("--config=") {
            path = Some(p.into());
        }
    }
    let Some(path) = path else { return Ok(argv) };
    let text = fs::read_to_string(&path).map_err(|e| {
        CliError::Validation(format!(
            "cannot read config {}: {e}",
            path.to_string_lossy()
        ))
    })?;
    let Value::Object(map) = serde_json::from_str::<Value>(&text)
        .map_err(|e| CliError::Validation(format!("config is not valid JSON: {e}")))?
    else {
        return Err(CliError::Validation(
            "config must be a flat JSON object".into(),
        ));
    };

    let given = |key: &str| {
        let flag = format!("--{key}");
        let prefix = format!("--{key}=");
        argv.iter().any(|a| {
            let a = a.to_string_lossy();
            a == flag || a.starts_with(&prefix)
        })
    };
    let mut merged = argv.clone();
    for (key, value) in &map {
        if key == "config" || given(key) {
            continue;
        }
        let flag = OsString::from(format!("--{key}"));
        let scalar = |v: &Value| match v {
            Value::Number(n) => Ok(n.to_string()),
            Value::String(s) => Ok(s.clone()),
            _ => Err(CliError::Validation(format!(
                "config key `{key}` must hold a number or string"
            ))),
        };
        match value {
            Value::Bool(true) => merged.push(flag),
            Value::Bool(false) | Value::Null => {}
            Value::Array(items) => {
                for item in items {
                    merged.push(flag.clone());
                    merged.push(scalar(item)?.into());
                }
            }
            v => {
                merged.push(flag);
                merged.push(scalar(v)?.into());
            }
        }
    }
    Ok(merged)
}
