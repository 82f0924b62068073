//! Command-line front end.
//!
//! Every option resolves in the order flag, environment (`SPECTRAL_SEED`,
//! `SPECTRAL_OUT`), config file, built-in default. Config files are TOML:
//! top-level keys mirror the global flags and one table per subcommand
//! mirrors its flags, e.g.
//!
//! ```toml
//! seed = 7
//! phi = [1.0, 0.85]
//!
//! [rmt-sample]
//! class = "gue"
//! dim = 300
//! ```
//!
//! Each run writes into its own directory: `manifest.toml`, `inputs/`,
//! `curves/` and, where levels are produced, `levels/`.

mod commands;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rmt::Sampler;
use crate::spectra::io::{self, fmt_f64};
use crate::spectra::{CurveWithErrors, LevelSequence};
use crate::theory::{EnsembleClass, Measure};

pub use commands::execute;

pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "missing-levels",
    version,
    about = "Spectral statistics of complete and incomplete chaotic spectra"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct GlobalArgs {
    /// TOML file with defaults for the global flags and per-command tables.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, env = "SPECTRAL_SEED")]
    pub seed: Option<u64>,
    /// Run directory.
    #[arg(long, global = true, env = "SPECTRAL_OUT")]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Observed fractions, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub phi: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Sample a GUE or GSE ensemble and write unfolded spectra.
    RmtSample(RmtSampleArgs),
    /// Solve a quantum graph (by default a random doubled GSE graph) over a sweep.
    GraphSolve(GraphSolveArgs),
    /// Remove levels from every member of an ensemble.
    Decimate(DecimateArgs),
    /// Spacing, number-variance, rigidity and power-spectrum estimates.
    Stats(StatsArgs),
    /// Theory curves for complete and incomplete spectra.
    TheoryCurve(TheoryArgs),
    /// Fit the observed fraction to a measured curve.
    FitPhi(FitPhiArgs),
    /// Data and theory bundle for one of fig3, fig4, fig5.
    Figure(FigureArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::RmtSample(_) => "rmt-sample",
            Command::GraphSolve(_) => "graph-solve",
            Command::Decimate(_) => "decimate",
            Command::Stats(_) => "stats",
            Command::TheoryCurve(_) => "theory-curve",
            Command::FitPhi(_) => "fit-phi",
            Command::Figure(_) => "figure",
        }
    }
}

const COMMANDS: [&str; 7] = [
    "rmt-sample",
    "graph-solve",
    "decimate",
    "stats",
    "theory-curve",
    "fit-phi",
    "figure",
];

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct RmtSampleArgs {
    /// gue or gse [default: gse]
    #[arg(long)]
    pub class: Option<EnsembleClass>,
    /// Distinct levels per member [default: 200]
    #[arg(long)]
    pub dim: Option<usize>,
    /// Members [default: 300]
    #[arg(long)]
    pub count: Option<usize>,
    /// dense or tridiagonal [default: dense]
    #[arg(long)]
    pub sampler: Option<Sampler>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct GraphSolveArgs {
    /// Graph JSON; without it a random doubled GSE graph is generated.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Total length of the random graph in metres [default: 6.68]
    #[arg(long)]
    pub total_length: Option<f64>,
    /// Lower band edge in 1/m [default: 20]
    #[arg(long)]
    pub k_min: Option<f64>,
    /// Upper band edge; otherwise sized by Weyl for `--levels`.
    #[arg(long)]
    pub k_max: Option<f64>,
    /// Target level count when `--k-max` is absent [default: 178]
    #[arg(long)]
    pub levels: Option<usize>,
    /// Sweep realizations [default: 1]
    #[arg(long)]
    pub steps: Option<usize>,
    /// Sweep increment in metres [default: 0.00084]
    #[arg(long)]
    pub delta_l: Option<f64>,
    /// Bonds lengthened by the sweep (required with `--graph` and steps > 1).
    #[arg(long, value_delimiter = ',')]
    pub plus: Option<Vec<usize>>,
    /// Bonds shortened by the sweep.
    #[arg(long, value_delimiter = ',')]
    pub minus: Option<Vec<usize>>,
    /// Merge Kramers pairs [default: true for the random graph, else false]
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub dedup: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecimateMode {
    Bernoulli,
    Fixed,
    Systematic,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct DecimateArgs {
    /// Level file or directory of level files.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// bernoulli, fixed or systematic [default: bernoulli]
    #[arg(long)]
    pub mode: Option<DecimateMode>,
    /// Indices removed from every member in systematic mode, whitespace or comma separated.
    #[arg(long)]
    pub remove_indices: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StatMeasure {
    Pspacing,
    Cumulative,
    Sigma2,
    Delta3,
    Power,
}

impl StatMeasure {
    pub const ALL: [StatMeasure; 5] = [
        StatMeasure::Pspacing,
        StatMeasure::Cumulative,
        StatMeasure::Sigma2,
        StatMeasure::Delta3,
        StatMeasure::Power,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StatMeasure::Pspacing => "pspacing",
            StatMeasure::Cumulative => "cumulative",
            StatMeasure::Sigma2 => "sigma2",
            StatMeasure::Delta3 => "delta3",
            StatMeasure::Power => "power",
        }
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct StatsArgs {
    /// Level file or directory of unfolded level files.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Measures to compute [default: all]
    #[arg(long, value_delimiter = ',')]
    pub measure: Option<Vec<StatMeasure>>,
    /// Spacing order for pspacing/cumulative [default: 0]
    #[arg(long)]
    pub order: Option<usize>,
    #[arg(long)]
    pub bin_width: Option<f64>,
    #[arg(long)]
    pub s_max: Option<f64>,
    /// Largest window length for sigma2/delta3 [default: 5]
    #[arg(long)]
    pub l_max: Option<f64>,
    #[arg(long)]
    pub l_step: Option<f64>,
    /// Fraction of levels dropped at each end [default: 0.05]
    #[arg(long)]
    pub edge_trim: Option<f64>,
    /// Window start spacing for sigma2/delta3 [default: 0.25]
    #[arg(long)]
    pub stride: Option<f64>,
    /// Cut members to the shortest length before the power spectrum [default: true]
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub truncate: Option<bool>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct TheoryArgs {
    /// gue or gse [default: gse]
    #[arg(long)]
    pub class: Option<EnsembleClass>,
    /// Curves to evaluate [default: pspacing,cumulative,sigma2,delta3,power]
    #[arg(long, value_delimiter = ',')]
    pub measure: Option<Vec<StatMeasure>>,
    /// Grid end; power curves stop at 0.5 [default: 5]
    #[arg(long)]
    pub x_max: Option<f64>,
    #[arg(long)]
    pub x_step: Option<f64>,
    /// TOML file with `[[fits]]` entries replacing the reference spacing fits.
    #[arg(long)]
    pub fits: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct FitPhiArgs {
    /// Curve CSV with x,y,err columns.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub class: Option<EnsembleClass>,
    /// power, sigma2 or pspacing [default: from the file's `measure` line]
    #[arg(long)]
    pub measure: Option<Measure>,
    /// Ignore points above this x.
    #[arg(long)]
    pub x_max: Option<f64>,
    #[arg(long)]
    pub fits: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Figure {
    Fig3,
    Fig4,
    Fig5,
}

impl Figure {
    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
        }
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct FigureArgs {
    pub name: Option<Figure>,
    /// Overrides the figure's class (fig3 and fig5: gse, fig4: gue).
    #[arg(long)]
    pub class: Option<EnsembleClass>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub sampler: Option<Sampler>,
    #[arg(long)]
    pub bin_width: Option<f64>,
    #[arg(long)]
    pub l_max: Option<f64>,
}

/// Overlay the config table on `args`: a key fills a field only where the
/// command line left it empty.
pub fn overlay<T: Serialize + DeserializeOwned>(
    args: &T,
    table: Option<&toml::Value>,
    what: &str,
) -> Result<T> {
    let mut value = serde_json::to_value(args).map_err(|e| Error::Config(e.to_string()))?;
    if let Some(table) = table {
        let table = serde_json::to_value(table).map_err(|e| Error::Config(e.to_string()))?;
        let (Some(dst), Some(src)) = (value.as_object_mut(), table.as_object()) else {
            return Err(Error::Config(format!("[{what}] must be a table")));
        };
        for (k, v) in src {
            if dst.get(k).is_none_or(|cur| cur.is_null()) {
                dst.insert(k.clone(), v.clone());
            }
        }
    }
    serde_json::from_value(value).map_err(|e| Error::Config(format!("[{what}]: {e}")))
}

fn load_config(path: Option<&Path>) -> Result<toml::Table> {
    let Some(path) = path else {
        return Ok(toml::Table::new());
    };
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.parse::<toml::Table>()
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

/// Command with every option resolved against the config file.
pub fn resolve(cli: Cli) -> Result<(GlobalArgs, Command)> {
    let config = load_config(cli.global.config.as_deref())?;
    let mut globals = toml::Table::new();
    for (k, v) in &config {
        if COMMANDS.contains(&k.as_str()) {
            continue;
        }
        if v.is_table() {
            return Err(Error::Config(format!("unknown command table [{k}]")));
        }
        globals.insert(k.clone(), v.clone());
    }
    let mut global: GlobalArgs =
        overlay(&cli.global, Some(&toml::Value::Table(globals)), "global")?;
    global.config = cli.global.config.clone();
    let table = config.get(cli.command.name());
    let name = cli.command.name();
    let command = match &cli.command {
        Command::RmtSample(a) => Command::RmtSample(overlay(a, table, name)?),
        Command::GraphSolve(a) => Command::GraphSolve(overlay(a, table, name)?),
        Command::Decimate(a) => Command::Decimate(overlay(a, table, name)?),
        Command::Stats(a) => Command::Stats(overlay(a, table, name)?),
        Command::TheoryCurve(a) => Command::TheoryCurve(overlay(a, table, name)?),
        Command::FitPhi(a) => Command::FitPhi(overlay(a, table, name)?),
        Command::Figure(a) => Command::Figure(overlay(a, table, name)?),
    };
    Ok((global, command))
}

/// `0.95`, `1.00`: the Φ tag used in file names.
pub fn fmt_phi(phi: f64) -> String {
    format!("{phi:.2}")
}

/// Independent seed for stream `(a, b)` under `seed` (SplitMix64 finalizer).
pub fn derive_seed(seed: u64, a: u64, b: u64) -> u64 {
    let mut z =
        seed ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ b.wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Output directory of one run and the files written into it.
#[derive(Debug)]
pub struct RunDir {
    root: PathBuf,
    outputs: Vec<String>,
    meta: toml::Table,
}

impl RunDir {
    pub fn create(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| Error::io(&root, e))?;
        Ok(RunDir {
            root,
            outputs: Vec::new(),
            meta: toml::Table::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn outputs(&self) -> &[String] {
        &self.outputs
    }

    fn record(&mut self, rel: &str) -> PathBuf {
        self.outputs.push(rel.to_string());
        self.root.join(rel)
    }

    pub fn curve(
        &mut self,
        rel: &str,
        curve: &CurveWithErrors,
        meta: &[(&str, String)],
    ) -> Result<()> {
        let p = self.record(rel);
        io::write_curve(p, curve, meta)
    }

    pub fn levels(
        &mut self,
        rel: &str,
        seq: &LevelSequence,
        extra: &[(&str, String)],
    ) -> Result<()> {
        let p = self.record(rel);
        io::write_levels(p, seq, extra)
    }

    pub fn text(&mut self, rel: &str, text: &str) -> Result<()> {
        let p = self.record(rel);
        if let Some(dir) = p.parent() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        fs::write(&p, text).map_err(|e| Error::io(&p, e))
    }

    /// Extra entries for the manifest's `[meta]` table.
    pub fn meta(&mut self, key: &str, value: impl Into<toml::Value>) {
        self.meta.insert(key.to_string(), value.into());
    }

    fn finish<A: Serialize>(
        self,
        command: &str,
        global: &GlobalArgs,
        threads: usize,
        args: &A,
    ) -> Result<PathBuf> {
        #[derive(Serialize)]
        struct Manifest<'a, A> {
            tool: &'a str,
            version: &'a str,
            command: &'a str,
            created_unix: u64,
            threads: usize,
            global: &'a GlobalArgs,
            args: &'a A,
            outputs: &'a [String],
            meta: &'a toml::Table,
        }
        let created_unix = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        let m = Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            created_unix,
            threads,
            global,
            args,
            outputs: &self.outputs,
            meta: &self.meta,
        };
        let text = toml::to_string(&m).map_err(|e| Error::Config(e.to_string()))?;
        let p = self.root.join("manifest.toml");
        fs::write(&p, text).map_err(|e| Error::io(&p, e))?;
        Ok(p)
    }
}

/// Fit table written by `figure` and read by `--fits`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitsFile {
    pub class: EnsembleClass,
    pub fits: Vec<crate::rmt::SpacingFit>,
}

impl FitsFile {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }
}

pub(crate) fn meta_list(phis: &[f64]) -> String {
    phis.iter()
        .map(|p| fmt_phi(*p))
        .collect::<Vec<_>>()
        .join(",")
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match resolve(cli).and_then(|(g, c)| execute(&g, &c)) {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numeric() {
                3
            } else {
                2
            }
        }
    }
}
