//! Run configuration: an optional TOML file overlaid by command-line flags.

use std::path::{Path, PathBuf};

use optomech_core::{GridSpec, InitKind, ModelParams, WavepacketParams};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const DEFAULT_GRID: GridSpec = GridSpec {
    min: -8.0,
    max: 4.0,
    step: 0.002,
};

/// Geometric tails reach this far when checking the unit integral.
pub const DEFAULT_TAIL_OUTER: f64 = 1e5;

/// Truncation used when neither the flags nor the state ask for more.
pub const DEFAULT_N_MAX: usize = 60;

/// Keys accepted in a `--config` file. Every key is optional and flags win.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub g1: Option<f64>,
    pub g2: Option<f64>,
    pub kappa: Option<f64>,
    pub state: Option<String>,
    pub grid: Option<String>,
    pub n_max: Option<usize>,
    pub delta0: Option<f64>,
    pub epsilon: Option<f64>,
    pub tail_outer: Option<f64>,
    pub out: Option<PathBuf>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    /// Fills every unset field of `self` from `base`.
    pub fn or(self, base: ConfigFile) -> ConfigFile {
        ConfigFile {
            g1: self.g1.or(base.g1),
            g2: self.g2.or(base.g2),
            kappa: self.kappa.or(base.kappa),
            state: self.state.or(base.state),
            grid: self.grid.or(base.grid),
            n_max: self.n_max.or(base.n_max),
            delta0: self.delta0.or(base.delta0),
            epsilon: self.epsilon.or(base.epsilon),
            tail_outer: self.tail_outer.or(base.tail_outer),
            out: self.out.or(base.out),
        }
    }
}

/// Validated settings for one spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams,
    pub state: InitKind,
    pub grid: GridSpec,
    /// `None` picks a truncation from the state
    pub n_max: Option<usize>,
    /// present for scattering runs
    pub wavepacket: Option<WavepacketParams>,
    pub tail_outer: f64,
    pub out: Option<PathBuf>,
}

fn usage(e: optomech_core::Error) -> CliError {
    CliError::Usage(e.to_string())
}

impl RunConfig {
    /// Resolves merged settings. `scattering` requires a packet width and
    /// defaults the packet centre to the zero-phonon line.
    pub fn resolve(cfg: &ConfigFile, scattering: bool) -> CliResult<Self> {
        let mut missing = Vec::new();
        for (name, value) in [("--g1", cfg.g1), ("--g2", cfg.g2), ("--kappa", cfg.kappa)] {
            if value.is_none() {
                missing.push(name);
            }
        }
        if scattering && cfg.epsilon.is_none() {
            missing.push("--epsilon");
        }
        if !missing.is_empty() {
            return Err(CliError::Usage(format!(
                "missing required settings: {} (pass them as flags or in a --config file)",
                missing.join(", ")
            )));
        }
        let params = ModelParams::in_mechanical_units(cfg.g1.unwrap(), cfg.g2.unwrap(), cfg.kappa.unwrap())
            .map_err(usage)?;
        let state = match &cfg.state {
            Some(s) => s.parse().map_err(usage)?,
            None => InitKind::Number { m0: 0 },
        };
        let grid = match &cfg.grid {
            Some(g) => g.parse().map_err(usage)?,
            None => DEFAULT_GRID,
        };
        if cfg.n_max == Some(0) {
            return Err(CliError::Usage("--n-max must be positive".into()));
        }
        let tail_outer = cfg.tail_outer.unwrap_or(DEFAULT_TAIL_OUTER);
        if !(tail_outer > grid.min.abs().max(grid.max.abs())) || !tail_outer.is_finite() {
            return Err(CliError::Usage(format!(
                "--tail-outer {tail_outer} must lie beyond the grid [{}, {}]",
                grid.min, grid.max
            )));
        }
        let wavepacket = if scattering {
            let delta0 = cfg.delta0.unwrap_or(-params.energy_shift_c());
            Some(WavepacketParams::new(delta0, cfg.epsilon.unwrap()).map_err(usage)?)
        } else {
            None
        };
        Ok(Self {
            params,
            state,
            grid,
            n_max: cfg.n_max,
            wavepacket,
            tail_outer,
            out: cfg.out.clone(),
        })
    }

    /// Explicit truncation, or the larger of the default and what the state
    /// needs plus room for the dressed-state spread.
    pub fn truncation(&self) -> usize {
        self.n_max.unwrap_or_else(|| {
            let needed = optomech_core::MechanicalInitState::minimal_truncation(self.state, 10_000).unwrap_or(0);
            DEFAULT_N_MAX.max(needed + 40)
        })
    }
}
