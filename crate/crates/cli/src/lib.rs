//! Command-line front end: `emit`, `scatter`, `analyze`, `verify`, `sweep`
//! and `transition`.

// `!(x > 0.0)` also rejects NaN, which is the point
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod sweep;
pub mod synth;
pub mod verify;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use optomech_core::{analyze, parse_spectrum_csv, AnalysisOptions, ModelParams, TransitionMatrix};

use crate::config::{ConfigFile, RunConfig};
use crate::error::{CliError, CliResult};
use crate::sweep::{run_sweep, worker_count, SweepSpec};
use crate::synth::{read_sidecar, synthesize, write_outputs, Synthesis};
use crate::verify::{run_verify, VerifyOptions};

#[derive(Debug, Parser)]
#[command(name = "optomech", version, about = "Single-photon emission and scattering spectra of a linearly and quadratically coupled optomechanical cavity")]
pub struct Cli {
    /// TOML file with default settings; flags override it
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

/// Model and grid settings. Rates are ratios to the mechanical frequency.
#[derive(Debug, Clone, Default, Args)]
pub struct ModelArgs {
    /// linear coupling g1/omega_M
    #[arg(long, allow_hyphen_values = true)]
    pub g1: Option<f64>,
    /// quadratic coupling g2/omega_M
    #[arg(long, allow_hyphen_values = true)]
    pub g2: Option<f64>,
    /// cavity decay rate kappa/omega_M
    #[arg(long)]
    pub kappa: Option<f64>,
    /// initial mechanical state: number:M0 | sdground | coherent:RE,IM | thermal:NBAR [default: number:0]
    #[arg(long, allow_hyphen_values = true)]
    pub state: Option<String>,
    /// detuning grid MIN,MAX,STEP in units of omega_M [default: -8,4,0.002]
    #[arg(long, allow_hyphen_values = true, value_name = "MIN,MAX,STEP")]
    pub grid: Option<String>,
    /// phonon-number truncation of the Franck-Condon sums
    #[arg(long)]
    pub n_max: Option<usize>,
    /// how far the geometric tails used for the unit-integral check reach
    #[arg(long)]
    pub tail_outer: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct PacketArgs {
    /// packet centre detuning [default: the zero-phonon line]
    #[arg(long, allow_hyphen_values = true)]
    pub delta0: Option<f64>,
    /// packet half width epsilon/omega_M
    #[arg(long)]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Emission spectrum of an initially excited cavity
    Emit {
        #[command(flatten)]
        model: ModelArgs,
        /// output CSV; a JSON sidecar is written next to it. Stdout if omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scattering spectrum of a Lorentzian single-photon wavepacket
    Scatter {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        packet: PacketArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Find peaks and dips in a spectrum CSV and infer the couplings
    Analyze {
        /// spectrum CSV as written by `emit`
        input: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        omega_m: f64,
        /// decay rate; read from the sidecar when omitted
        #[arg(long)]
        kappa: Option<f64>,
        /// minimum peak prominence as a fraction of the maximum
        #[arg(long, default_value_t = optomech_core::analysis::DEFAULT_PROMINENCE)]
        prominence: f64,
        /// JSON report path. Stdout if omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the closed forms against brute-force oracles
    Verify {
        #[arg(long, default_value_t = 0.8, allow_hyphen_values = true)]
        g1: f64,
        #[arg(long, default_value_t = 0.05, allow_hyphen_values = true)]
        g2: f64,
        #[arg(long, default_value_t = 0.02)]
        kappa: f64,
        /// skip the bath propagation
        #[arg(long)]
        quick: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One spectrum per value of a swept parameter, plus summary.json
    Sweep {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        packet: PacketArgs,
        /// NAME=V1,V2,... with NAME one of g1, g2, kappa, epsilon
        #[arg(long, value_name = "NAME=VALUES")]
        sweep: String,
        /// scattering instead of emission spectra
        #[arg(long)]
        scatter: bool,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// parallel workers [env: OPTOMECH_WORKERS]
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Dump the Franck-Condon matrix T[m][n] as CSV
    Transition {
        #[arg(long, allow_hyphen_values = true)]
        g1: f64,
        #[arg(long, allow_hyphen_values = true)]
        g2: f64,
        #[arg(long, default_value_t = 30)]
        n_max: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

impl ModelArgs {
    fn to_config(&self, packet: Option<&PacketArgs>) -> ConfigFile {
        ConfigFile {
            g1: self.g1,
            g2: self.g2,
            kappa: self.kappa,
            state: self.state.clone(),
            grid: self.grid.clone(),
            n_max: self.n_max,
            delta0: packet.and_then(|p| p.delta0),
            epsilon: packet.and_then(|p| p.epsilon),
            tail_outer: self.tail_outer,
            out: None,
        }
    }
}

fn file_config(path: Option<&Path>) -> CliResult<ConfigFile> {
    path.map(ConfigFile::load).transpose().map(Option::unwrap_or_default)
}

fn write_text(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io("<stdout>", e)),
    }
}

fn spectrum(cfg: ConfigFile, out: Option<PathBuf>, scattering: bool) -> CliResult<()> {
    let mut rc = RunConfig::resolve(&cfg, scattering)?;
    if out.is_some() {
        rc.out = out;
    }
    let s: Synthesis = synthesize(&rc)?;
    match &rc.out {
        Some(path) => {
            write_outputs(&s, path)?;
            log::info!("wrote {} ({} points, integral {:.6})", path.display(), s.record.points, s.record.integral);
        }
        None => write_text(None, &optomech_core::spectrum_to_csv(&s.spectrum))?,
    }
    s.check()
}

fn analyze_file(input: &Path, omega_m: f64, kappa: Option<f64>, prominence: f64, out: Option<&Path>) -> CliResult<()> {
    let text = std::fs::read_to_string(input).map_err(|e| CliError::io(input, e))?;
    let mut spec = parse_spectrum_csv(&text)?;
    let sidecar = read_sidecar(input);
    let kappa = match (kappa, &sidecar) {
        (Some(k), _) => k,
        (None, Some(r)) => r.meta.params.kappa,
        (None, None) => {
            return Err(CliError::Usage(format!(
                "--kappa is required: no sidecar found next to {}",
                input.display()
            )))
        }
    };
    spec.meta = sidecar.map(|r| r.meta);
    let opts = AnalysisOptions {
        omega_m,
        kappa,
        prominence,
    };
    let report = analyze(&spec, &opts)?;
    for w in &report.warnings {
        log::warn!("{w}");
    }
    let json = serde_json::to_string_pretty(&report)? + "\n";
    write_text(out, &json)
}

/// Runs one parsed command line.
pub fn run(cli: Cli) -> CliResult<()> {
    let file = file_config(cli.config.as_deref())?;
    match cli.command {
        Command::Emit { model, out } => spectrum(model.to_config(None).or(file), out, false),
        Command::Scatter { model, packet, out } => spectrum(model.to_config(Some(&packet)).or(file), out, true),
        Command::Analyze {
            input,
            omega_m,
            kappa,
            prominence,
            out,
        } => analyze_file(&input, omega_m, kappa, prominence, out.as_deref()),
        Command::Verify {
            g1,
            g2,
            kappa,
            quick,
            out,
        } => {
            let params = ModelParams::in_mechanical_units(g1, g2, kappa).map_err(|e| CliError::Usage(e.to_string()))?;
            let report = run_verify(&VerifyOptions {
                params,
                time_domain: !quick,
            })?;
            write_text(out.as_deref(), &(serde_json::to_string_pretty(&report)? + "\n"))?;
            if report.failed > 0 {
                let names: Vec<&str> = report.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
                return Err(CliError::Validation(format!("{} checks failed: {}", report.failed, names.join("; "))));
            }
            Ok(())
        }
        Command::Sweep {
            model,
            packet,
            sweep,
            scatter,
            out_dir,
            workers,
        } => {
            let spec: SweepSpec = sweep.parse()?;
            let base = model.to_config(Some(&packet)).or(file);
            let summary = run_sweep(&base, &spec, scatter, &out_dir, worker_count(workers)?)?;
            let failures = summary.failures();
            if failures > 0 {
                return Err(CliError::Validation(format!(
                    "{failures} of {} sweep values failed; see {}",
                    summary.entries.len(),
                    out_dir.join("summary.json").display()
                )));
            }
            Ok(())
        }
        Command::Transition { g1, g2, n_max, out } => {
            let params = ModelParams::in_mechanical_units(g1, g2, 1.0).map_err(|e| CliError::Usage(e.to_string()))?;
            let t = TransitionMatrix::new(&params, n_max)?;
            write_text(out.as_deref(), &t.to_csv())
        }
    }
}
