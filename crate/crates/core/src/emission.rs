//! Long-time single-photon emission spectra.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::franck_condon::TransitionMatrix;
use crate::grid::{DetuningGrid, SpectrumGrid, SpectrumMeta, SpectrumSource};
use crate::model::ModelParams;
use crate::state::{MechanicalInitState, Populations};

/// Summands whose Franck-Condon numerator falls below this are skipped.
pub const NUMERATOR_CUTOFF: f64 = 1e-14;

/// Tail estimates above this are logged.
pub const TAIL_WARNING: f64 = 1e-10;

/// Energies and couplings shared by the emission and scattering amplitudes,
/// with the bath density set to one.
#[derive(Debug, Clone)]
pub struct Resonances<'a> {
    pub t: &'a TransitionMatrix,
    /// `E'_{0,m}`
    pub e0: Vec<f64>,
    /// `E'_{1,n}`
    pub e1: Vec<f64>,
    /// `ξ = √(κ/2π)`
    pub xi: f64,
    pub kappa: f64,
}

impl<'a> Resonances<'a> {
    pub fn new(t: &'a TransitionMatrix) -> Self {
        let p = t.params();
        let n = t.n_max();
        let vacuum = p.vacuum_ladder();
        let dressed = p.single_photon_ladder();
        Self {
            t,
            e0: vacuum.energies(n),
            e1: dressed.energies(n),
            xi: (p.kappa / (2.0 * PI)).sqrt(),
            kappa: p.kappa,
        }
    }

    pub fn params(&self) -> &ModelParams {
        self.t.params()
    }

    /// `1/(Δ + E'_{0,m} - E'_{1,n} + iκ/2)`
    #[inline]
    pub fn cavity_pole(&self, delta: f64, m: usize, n: usize) -> Complex64 {
        Complex64::new(delta + self.e0[m] - self.e1[n], 0.5 * self.kappa).inv()
    }
}

/// `B_{m0,m}(Δ) = Σ_n ξ T[m][n] T[m0][n] / (Δ + E'_{0,m} - E'_{1,n} + iκ/2)`,
/// dropping the overall phase.
pub fn emission_amplitude(m0: usize, m: usize, delta: f64, t: &TransitionMatrix) -> Result<Complex64> {
    check_index(m0, t)?;
    check_index(m, t)?;
    let r = Resonances::new(t);
    Ok(amplitude(&r, m0, m, delta))
}

fn check_index(i: usize, t: &TransitionMatrix) -> Result<()> {
    if i >= t.n_max() {
        return Err(invalid("m", format!("index {i} outside the truncation {}", t.n_max())));
    }
    Ok(())
}

fn amplitude(r: &Resonances<'_>, m0: usize, m: usize, delta: f64) -> Complex64 {
    let t = r.t;
    let mut sum = Complex64::new(0.0, 0.0);
    for n in 0..t.n_max() {
        let numerator = t.get(m, n) * t.get(m0, n);
        if numerator.abs() < NUMERATOR_CUTOFF {
            continue;
        }
        sum += r.cavity_pole(delta, m, n) * numerator;
    }
    sum * r.xi
}

/// Probability the truncated transition matrix fails to carry for this
/// initial state: `1 - Σ_n |Σ_{m0} c_{m0} T[m0][n]|² Σ_m T[m][n]²` for pure
/// states, the weighted analogue for mixtures.
pub fn truncation_tail(init: &MechanicalInitState, t: &TransitionMatrix) -> f64 {
    let n_max = t.n_max();
    let column_norms: Vec<f64> = (0..n_max).map(|n| 1.0 - t.column_deficit(n)).collect();
    let carried = match &init.populations {
        Populations::Pure(c) => (0..n_max)
            .map(|n| {
                let proj: Complex64 = c.iter().enumerate().map(|(m0, cm)| cm * t.get(m0, n)).sum();
                proj.norm_sqr() * column_norms[n]
            })
            .sum::<f64>(),
        Populations::Mixed(p) => p
            .iter()
            .enumerate()
            .map(|(m0, w)| w * (0..n_max).map(|n| t.get(m0, n).powi(2) * column_norms[n]).sum::<f64>())
            .sum(),
    };
    (1.0 - carried).max(0.0)
}

/// Nonzero Franck-Condon products `T[m][n] T[m0][n]` for a fixed `m0`.
struct Channel {
    m0: usize,
    weight: f64,
    terms: Vec<(usize, usize, f64)>,
}

fn channels(init: &MechanicalInitState, t: &TransitionMatrix) -> Vec<Channel> {
    let Populations::Mixed(p) = &init.populations else {
        unreachable!("channels are built for mixtures only");
    };
    p.iter()
        .enumerate()
        .filter(|(_, w)| **w > 0.0)
        .map(|(m0, &weight)| {
            let mut terms = Vec::new();
            for m in 0..t.n_max() {
                for n in 0..t.n_max() {
                    let numerator = t.get(m, n) * t.get(m0, n);
                    if numerator.abs() >= NUMERATOR_CUTOFF {
                        terms.push((m, n, numerator));
                    }
                }
            }
            Channel { m0, weight, terms }
        })
        .collect()
}

/// `S(Δ)` for a pure state, `Σ_m |Σ_{m0} C_{m0} B_{m0,m}|²`, or a mixture,
/// `Σ_{m0} P_{m0} Σ_m |B_{m0,m}|²`.
pub fn emission_spectrum(init: &MechanicalInitState, grid: &DetuningGrid, t: &TransitionMatrix) -> Result<SpectrumGrid> {
    if init.n_max > t.n_max() {
        return Err(invalid("n_max", "initial state is larger than the transition matrix"));
    }
    let r = Resonances::new(t);
    let n_max = t.n_max();
    let values: Vec<f64> = match &init.populations {
        Populations::Pure(c) => {
            // Σ_{m0} C_{m0} T[m0][n] collapses the initial state onto the dressed basis
            let projected: Vec<Complex64> = (0..n_max)
                .map(|n| c.iter().enumerate().map(|(m0, cm)| cm * t.get(m0, n)).sum())
                .collect();
            grid.points()
                .par_iter()
                .map(|&delta| {
                    let mut total = 0.0;
                    for m in 0..n_max {
                        let mut amp = Complex64::new(0.0, 0.0);
                        for (n, proj) in projected.iter().enumerate() {
                            let tm = t.get(m, n);
                            if (tm * proj.norm()).abs() < NUMERATOR_CUTOFF {
                                continue;
                            }
                            amp += r.cavity_pole(delta, m, n) * proj * tm;
                        }
                        total += amp.norm_sqr();
                    }
                    total * r.xi * r.xi
                })
                .collect()
        }
        Populations::Mixed(_) => {
            let chans = channels(init, t);
            grid.points()
                .par_iter()
                .map(|&delta| {
                    let mut total = 0.0;
                    let mut amps = vec![Complex64::new(0.0, 0.0); n_max];
                    for ch in &chans {
                        amps.iter_mut().for_each(|a| *a = Complex64::new(0.0, 0.0));
                        for &(m, n, numerator) in &ch.terms {
                            amps[m] += r.cavity_pole(delta, m, n) * numerator;
                        }
                        debug_assert!(ch.m0 < n_max);
                        total += ch.weight * amps.iter().map(|a| a.norm_sqr()).sum::<f64>();
                    }
                    total * r.xi * r.xi
                })
                .collect()
        }
    };
    let tail = truncation_tail(init, t);
    if tail > TAIL_WARNING {
        log::warn!("emission sums leave out {tail:e} of the probability at n_max = {n_max}");
    }
    let meta = SpectrumMeta {
        params: *t.params(),
        state: init.kind.to_string(),
        source: SpectrumSource::Emission,
        n_max,
        tail,
    };
    SpectrumGrid::new(grid.points().to_vec(), values, Some(meta))
}

/// The emission frequencies `E'_{1,n} - E'_{0,m}` with weight above
/// `threshold`, paired with their weight `|⟨ψ|ñ(1)⟩|² T[m][n]²`. Useful for
/// placing bath windows and for checking peak locations.
pub fn weighted_transitions(init: &MechanicalInitState, t: &TransitionMatrix, threshold: f64) -> Vec<(f64, f64)> {
    let r = Resonances::new(t);
    let n_max = t.n_max();
    let dressed: Vec<f64> = match &init.populations {
        Populations::Pure(c) => (0..n_max)
            .map(|n| {
                c.iter()
                    .enumerate()
                    .map(|(m0, cm)| cm * t.get(m0, n))
                    .sum::<Complex64>()
                    .norm_sqr()
            })
            .collect(),
        Populations::Mixed(p) => (0..n_max)
            .map(|n| p.iter().enumerate().map(|(m0, w)| w * t.get(m0, n).powi(2)).sum())
            .collect(),
    };
    let mut out = Vec::new();
    for (n, w_n) in dressed.iter().enumerate() {
        for m in 0..n_max {
            let w = w_n * t.get(m, n).powi(2);
            if w > threshold {
                out.push((r.e1[n] - r.e0[m], w));
            }
        }
    }
    out
}
