//! One-parameter sweeps: a spectrum per value plus a summary table.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use optomech_core::{analyze, AnalysisOptions, PeakReport};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ConfigFile, RunConfig};
use crate::error::{CliError, CliResult};
use crate::synth::{synthesize, write_json, write_outputs};

/// Environment variable capping the number of sweep workers.
pub const WORKERS_ENV: &str = "OPTOMECH_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    G1,
    G2,
    Kappa,
    Epsilon,
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepParam::G1 => "g1",
            SweepParam::G2 => "g2",
            SweepParam::Kappa => "kappa",
            SweepParam::Epsilon => "epsilon",
        })
    }
}

impl FromStr for SweepParam {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "g1" => Ok(SweepParam::G1),
            "g2" => Ok(SweepParam::G2),
            "kappa" => Ok(SweepParam::Kappa),
            "epsilon" => Ok(SweepParam::Epsilon),
            other => Err(CliError::Usage(format!(
                "cannot sweep `{other}`; choose one of g1, g2, kappa, epsilon"
            ))),
        }
    }
}

/// `NAME=V1,V2,...`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

impl FromStr for SweepSpec {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        let Some((name, list)) = s.split_once('=') else {
            return Err(CliError::Usage(format!("expected NAME=V1,V2,... in sweep spec `{s}`")));
        };
        let param = name.parse()?;
        let values = list
            .split(',')
            .map(str::trim)
            .filter(|v| !v.is_empty())
            .map(|v| {
                v.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| CliError::Usage(format!("sweep value `{v}` is not a finite number")))
            })
            .collect::<CliResult<Vec<f64>>>()?;
        if values.is_empty() {
            return Err(CliError::Usage(format!("sweep over {param} has no values")));
        }
        Ok(Self { param, values })
    }
}

impl SweepSpec {
    /// The base settings with the swept parameter set to `value`.
    pub fn apply(&self, base: &ConfigFile, value: f64) -> ConfigFile {
        let mut cfg = base.clone();
        match self.param {
            SweepParam::G1 => cfg.g1 = Some(value),
            SweepParam::G2 => cfg.g2 = Some(value),
            SweepParam::Kappa => cfg.kappa = Some(value),
            SweepParam::Epsilon => cfg.epsilon = Some(value),
        }
        cfg
    }

    fn file_name(&self, value: f64) -> String {
        format!("{}_{}.csv", self.param, value)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub value: f64,
    pub csv: Option<PathBuf>,
    pub integral: Option<f64>,
    pub unit_integral_ok: bool,
    pub report: Option<PeakReport>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub param: SweepParam,
    pub scattering: bool,
    pub entries: Vec<SweepEntry>,
}

impl SweepSummary {
    pub fn failures(&self) -> usize {
        self.entries.iter().filter(|e| !e.unit_integral_ok || e.error.is_some()).count()
    }
}

/// Worker count from the flag, then the environment, then rayon's default.
pub fn worker_count(flag: Option<usize>) -> CliResult<usize> {
    if let Some(n) = flag {
        return if n > 0 {
            Ok(n)
        } else {
            Err(CliError::Usage("--workers must be positive".into()))
        };
    }
    match std::env::var(WORKERS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| CliError::Usage(format!("{WORKERS_ENV}=`{v}` is not a positive integer"))),
        Err(_) => Ok(rayon::current_num_threads()),
    }
}

fn run_one(spec: &SweepSpec, base: &ConfigFile, scattering: bool, value: f64, dir: &Path) -> SweepEntry {
    let mut entry = SweepEntry {
        value,
        csv: None,
        integral: None,
        unit_integral_ok: false,
        report: None,
        error: None,
    };
    let result = (|| -> CliResult<()> {
        let cfg = RunConfig::resolve(&spec.apply(base, value), scattering)?;
        let s = synthesize(&cfg)?;
        let csv = dir.join(spec.file_name(value));
        write_outputs(&s, &csv)?;
        entry.csv = Some(csv);
        entry.integral = Some(s.record.integral);
        entry.unit_integral_ok = s.record.unit_integral_ok;
        let opts = AnalysisOptions::new(cfg.params.omega_m, cfg.params.kappa);
        match analyze(&s.spectrum, &opts) {
            Ok(r) => entry.report = Some(r),
            Err(e) => entry.error = Some(format!("analysis: {e}")),
        }
        Ok(())
    })();
    if let Err(e) = result {
        log::error!("{}={value}: {e}", spec.param);
        entry.error = Some(e.to_string());
    }
    entry
}

/// Runs every value on its own (failures are recorded, not fatal) and writes
/// `summary.json` into `dir`.
pub fn run_sweep(
    base: &ConfigFile,
    spec: &SweepSpec,
    scattering: bool,
    dir: &Path,
    workers: usize,
) -> CliResult<SweepSummary> {
    if spec.param == SweepParam::Epsilon && !scattering {
        return Err(CliError::Usage("epsilon sweeps need --scatter".into()));
    }
    // surface usage errors in the shared settings once, before fanning out
    RunConfig::resolve(&spec.apply(base, spec.values[0]), scattering)?;
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {workers} workers: {e}")))?;
    let entries = pool.install(|| {
        spec.values
            .par_iter()
            .map(|&v| run_one(spec, base, scattering, v, dir))
            .collect()
    });
    let summary = SweepSummary {
        param: spec.param,
        scattering,
        entries,
    };
    write_json(&dir.join("summary.json"), &summary)?;
    Ok(summary)
}
