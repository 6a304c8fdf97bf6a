//! Spectrum synthesis shared by `emit`, `scatter` and `sweep`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use optomech_core::emission::weighted_transitions;
use optomech_core::grid::UNIT_INTEGRAL_TOLERANCE;
use optomech_core::{
    emission_spectrum, scattering_spectrum, write_spectrum_csv, DetuningGrid, GridSpec, MechanicalInitState, SpectrumGrid,
    SpectrumMeta, TransitionMatrix,
};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

/// JSON sidecar written next to every spectrum CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRecord {
    #[serde(flatten)]
    pub meta: SpectrumMeta,
    pub grid: GridSpec,
    pub points: usize,
    /// trapezoid integral over the written samples only
    pub integral_on_grid: f64,
    /// integral over `check_grid` plus geometric tails out to `±tail_outer`
    pub integral: f64,
    pub check_grid: GridSpec,
    pub tail_outer: f64,
    pub tolerance: f64,
    pub unit_integral_ok: bool,
}

#[derive(Debug, Clone)]
pub struct Synthesis {
    pub spectrum: SpectrumGrid,
    pub record: SpectrumRecord,
}

impl Synthesis {
    pub fn check(&self) -> CliResult<()> {
        if self.record.unit_integral_ok {
            Ok(())
        } else {
            Err(CliError::Validation(format!(
                "spectrum integrates to {:.6}, outside 1 +/- {}",
                self.record.integral, self.record.tolerance
            )))
        }
    }
}

/// Most points the unit-integral check grid may use.
const CHECK_POINTS: f64 = 2e5;

/// Uniform core wide enough to hold every line carrying more than `1e-12`
/// of the weight (and the packet for scattering), fine enough to resolve
/// the narrowest feature, padded with geometric tails.
fn check_grid(cfg: &RunConfig, init: &MechanicalInitState, t: &TransitionMatrix) -> CliResult<GridSpec> {
    let lines = weighted_transitions(init, t, 1e-12);
    let (mut lo, mut hi) = lines
        .iter()
        .fold((cfg.grid.min, cfg.grid.max), |(lo, hi), (e, _)| (lo.min(e - 1.0), hi.max(e + 1.0)));
    let mut narrowest = cfg.params.kappa;
    if let Some(wp) = cfg.wavepacket {
        // the packet reappears shifted by every phonon energy the lines span
        let span = hi - lo;
        lo = lo.min(wp.delta0 - span);
        hi = hi.max(wp.delta0 + 1.0);
        narrowest = narrowest.min(wp.epsilon);
    }
    let step = (narrowest / 10.0).min(cfg.grid.step).max((hi - lo) / CHECK_POINTS);
    Ok(GridSpec::new(lo, hi, step)?)
}

/// Computes the spectrum on the requested grid, and separately on a grid
/// covering the whole spectrum for the unit-integral check.
pub fn synthesize(cfg: &RunConfig) -> CliResult<Synthesis> {
    let n_max = cfg.truncation();
    let t = TransitionMatrix::new(&cfg.params, n_max)?;
    let init = MechanicalInitState::new(cfg.state, n_max, &t)?;
    let compute = |grid: &DetuningGrid| match cfg.wavepacket {
        Some(wp) => scattering_spectrum(&init, wp, grid, &t),
        None => emission_spectrum(&init, grid, &t),
    };
    let spectrum = compute(&cfg.grid.build()?)?;
    let check = check_grid(cfg, &init, &t)?;
    let outer = cfg.tail_outer.max(2.0 * check.min.abs().max(check.max.abs()));
    let integral = compute(&check.build_with_tails(outer)?)?.integral();
    let record = SpectrumRecord {
        meta: spectrum.meta.clone().expect("synthesized spectra carry metadata"),
        grid: cfg.grid,
        points: spectrum.len(),
        integral_on_grid: spectrum.integral(),
        integral,
        check_grid: check,
        tail_outer: outer,
        tolerance: UNIT_INTEGRAL_TOLERANCE,
        unit_integral_ok: (integral - 1.0).abs() <= UNIT_INTEGRAL_TOLERANCE,
    };
    Ok(Synthesis { spectrum, record })
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
}

/// Writes `csv` and its sidecar.
pub fn write_outputs(s: &Synthesis, csv: &Path) -> CliResult<()> {
    let file = File::create(csv).map_err(|e| CliError::io(csv, e))?;
    write_spectrum_csv(&s.spectrum, BufWriter::new(file)).map_err(|e| CliError::io(csv, e))?;
    write_json(&sidecar_path(csv), &s.record)
}

/// Sidecar next to `csv`, if one exists and parses.
pub fn read_sidecar(csv: &Path) -> Option<SpectrumRecord> {
    let text = std::fs::read_to_string(sidecar_path(csv)).ok()?;
    match serde_json::from_str(&text) {
        Ok(r) => Some(r),
        Err(e) => {
            log::warn!("ignoring unreadable sidecar for {}: {e}", csv.display());
            None
        }
    }
}
