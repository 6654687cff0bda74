//! Command-line flags and the optional TOML config file.
//!
//! Every option is optional on the command line so that a value missing
//! there can come from the config file; flags win over the file, and
//! built-in defaults apply last.

use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

#[derive(Debug, Parser)]
#[command(name = "cheeger", version, about = "Cheeger constants of tubes and spherical shells")]
pub struct Cli {
    /// TOML file with default values for any flag (flags take precedence).
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Directory for reports and artifacts.
    #[arg(long, global = true, env = "CHEEGER_OUT_DIR", value_name = "DIR")]
    pub out_dir: Option<PathBuf>,

    /// Report path (default: <out-dir>/<command>.toml when an output directory is set).
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,

    /// Record wall-clock timings in the report (makes it non-reproducible).
    #[arg(long, global = true)]
    pub timings: bool,

    /// Do not print the report on stdout.
    #[arg(short, long, global = true)]
    pub quiet: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form Cheeger constant, geometry and overlap check of a tube.
    #[command(allow_negative_numbers = true)]
    Tube(TubeArgs),
    /// Closed-form Cheeger constant and field profile checks of a spherical shell.
    #[command(allow_negative_numbers = true)]
    Shell(ShellArgs),
    /// Sample the test-field inequalities on a tube or shell.
    #[command(allow_negative_numbers = true)]
    Certify(CertifyArgs),
    /// Discrete Cheeger constant of a voxelized domain.
    #[command(allow_negative_numbers = true)]
    Oracle(OracleArgs),
    /// Join earlier reports on the same geometry into one comparison.
    Report(ReportArgs),
}

macro_rules! merge_fields {
    ($into:expr, $from:expr; $($f:ident),* $(,)?) => {
        $( if $into.$f.is_none() { $into.$f = $from.$f.clone(); } )*
    };
}

/// Geometry shared by all computing commands.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct Geometry {
    /// Curve preset: circle, ellipse or trefoil.
    #[arg(long)]
    pub preset: Option<String>,
    /// Circle radius.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Ellipse semi-axis along x.
    #[arg(long)]
    pub semi_x: Option<f64>,
    /// Ellipse semi-axis along y.
    #[arg(long)]
    pub semi_y: Option<f64>,
    /// Trefoil scale.
    #[arg(long)]
    pub scale: Option<f64>,
    /// Tabulated closed curve (rows `u x_1 … x_d`), instead of a preset.
    #[arg(long, value_name = "FILE")]
    pub curve_file: Option<PathBuf>,
    /// Tube radius.
    #[arg(long)]
    pub a: Option<f64>,
    /// Inner shell radius (ball or disk radius for the oracle).
    #[arg(long)]
    pub r: Option<f64>,
    /// Outer shell radius.
    #[arg(long = "R", id = "outer")]
    #[serde(rename = "R")]
    pub outer: Option<f64>,
    /// Side of the square domain.
    #[arg(long)]
    pub side: Option<f64>,
    /// Ambient dimension.
    #[arg(long)]
    pub d: Option<usize>,
    /// Frame integration steps for tubes.
    #[arg(long)]
    pub steps: Option<usize>,
}

impl Geometry {
    fn merge(&mut self, file: &Geometry) {
        merge_fields!(self, file; preset, rho, semi_x, semi_y, scale, curve_file, a, r, outer, side, d, steps);
    }
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct TubeOpts {
    /// Monte Carlo volume samples (0 skips the estimate).
    #[arg(long)]
    pub mc_samples: Option<usize>,
    /// Seed of the Monte Carlo volume estimate.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Samples of the overlap check.
    #[arg(long)]
    pub overlap_samples: Option<usize>,
    /// Write the frame samples as CSV.
    #[arg(long, value_name = "FILE")]
    pub frame_csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct ShellOpts {
    /// Grid points of the profile check.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Points of the finite-difference divergence check.
    #[arg(long)]
    pub fd_points: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct CertifyOpts {
    /// Domain: tube or shell.
    #[arg(long)]
    pub domain: Option<String>,
    /// Claimed lower bound (default: the closed form).
    #[arg(long)]
    pub claim: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// halton or uniform.
    #[arg(long)]
    pub sampler: Option<String>,
    /// Finite-difference step (default 1e-4 × thickness).
    #[arg(long)]
    pub h_fd: Option<f64>,
    #[arg(long)]
    pub eps_norm: Option<f64>,
    /// Divergence tolerance (default 1e-3 × |claim|).
    #[arg(long)]
    pub eps_div: Option<f64>,
    /// Tabulated vector field to certify instead of the built-in one.
    #[arg(long, value_name = "FILE")]
    pub field_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct OracleOpts {
    /// ball (disk), shell (annulus), square or tube.
    #[arg(long)]
    pub shape: Option<String>,
    /// Cells along the longest side of the bounding box.
    #[arg(long)]
    pub n: Option<usize>,
    /// Neighbours per cell: 4/8/16 in 2D, 6/18/26 in 3D.
    #[arg(long)]
    pub stencil: Option<usize>,
    /// Relative Dinkelbach tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Largest n accepted in 3D.
    #[arg(long)]
    pub max_n_3d: Option<usize>,
    /// Read the domain from a mask file instead of rasterizing a shape.
    #[arg(long, value_name = "FILE")]
    pub mask_in: Option<PathBuf>,
    /// Write the Cheeger-set mask.
    #[arg(long, value_name = "FILE")]
    pub mask_out: Option<PathBuf>,
    /// Write the voxelized domain mask.
    #[arg(long, value_name = "FILE")]
    pub domain_out: Option<PathBuf>,
    /// Write an SVG of the Cheeger set (2D only).
    #[arg(long, value_name = "FILE")]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TubeArgs {
    #[command(flatten)]
    pub geometry: Geometry,
    #[command(flatten)]
    pub opts: TubeOpts,
}

#[derive(Debug, Args)]
pub struct ShellArgs {
    #[command(flatten)]
    pub geometry: Geometry,
    #[command(flatten)]
    pub opts: ShellOpts,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub geometry: Geometry,
    #[command(flatten)]
    pub opts: CertifyOpts,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub geometry: Geometry,
    #[command(flatten)]
    pub opts: OracleOpts,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Reports written by tube, shell, certify or oracle.
    #[arg(required = true, value_name = "REPORT")]
    pub inputs: Vec<PathBuf>,
}

/// Config file layout: geometry keys at top level, one table per command.
#[derive(Debug, Default)]
pub struct FileConfig {
    pub geometry: Geometry,
    pub tube: TubeOpts,
    pub shell: ShellOpts,
    pub certify: CertifyOpts,
    pub oracle: OracleOpts,
}

fn section<T: for<'de> Deserialize<'de> + Default>(table: &mut toml::Table, key: &str) -> anyhow::Result<T> {
    match table.remove(key) {
        Some(v) => v.try_into().with_context(|| format!("in [{key}]")),
        None => Ok(T::default()),
    }
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let mut table: toml::Table = toml::from_str(text)?;
        let tube = section(&mut table, "tube")?;
        let shell = section(&mut table, "shell")?;
        let certify = section(&mut table, "certify")?;
        let oracle = section(&mut table, "oracle")?;
        let geometry = toml::Value::Table(table).try_into()?;
        Ok(Self { geometry, tube, shell, certify, oracle })
    }
}

impl Command {
    /// Fills unset flags from the config file.
    pub fn merge(&mut self, file: &FileConfig) {
        match self {
            Command::Tube(a) => {
                a.geometry.merge(&file.geometry);
                merge_fields!(a.opts, file.tube; mc_samples, seed, overlap_samples, frame_csv);
            }
            Command::Shell(a) => {
                a.geometry.merge(&file.geometry);
                merge_fields!(a.opts, file.shell; grid, fd_points);
            }
            Command::Certify(a) => {
                a.geometry.merge(&file.geometry);
                merge_fields!(a.opts, file.certify; domain, claim, samples, seed, sampler, h_fd, eps_norm, eps_div, field_file);
            }
            Command::Oracle(a) => {
                a.geometry.merge(&file.geometry);
                merge_fields!(a.opts, file.oracle; shape, n, stencil, tol, max_n_3d, mask_in, mask_out, domain_out, svg);
            }
            Command::Report(_) => {}
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::Tube(_) => "tube",
            Command::Shell(_) => "shell",
            Command::Certify(_) => "certify",
            Command::Oracle(_) => "oracle",
            Command::Report(_) => "report",
        }
    }
}
