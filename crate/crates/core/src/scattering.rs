//! Long-time scattering of a Lorentzian single-photon wavepacket.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::emission::{truncation_tail, Resonances, NUMERATOR_CUTOFF, TAIL_WARNING};
use crate::error::{invalid, Result};
use crate::franck_condon::TransitionMatrix;
use crate::grid::{DetuningGrid, SpectrumGrid, SpectrumMeta, SpectrumSource};
use crate::model::ModelParams;
use crate::state::{MechanicalInitState, Populations};

/// Incoming packet `√(ε/π) / (Δ - Δ0 + iε)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WavepacketParams {
    pub delta0: f64,
    pub epsilon: f64,
}

impl WavepacketParams {
    pub fn new(delta0: f64, epsilon: f64) -> Result<Self> {
        if !delta0.is_finite() {
            return Err(invalid("delta0", "must be finite"));
        }
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(invalid("epsilon", format!("{epsilon} must be positive")));
        }
        Ok(Self { delta0, epsilon })
    }

    /// Centered on the zero-phonon line, `Δ0 = -C`.
    pub fn on_zero_phonon_line(params: &ModelParams, epsilon: f64) -> Result<Self> {
        Self::new(-params.energy_shift_c(), epsilon)
    }

    /// `(ε/π) / ((Δ - Δ0)² + ε²)`
    pub fn input_density(&self, delta: f64) -> f64 {
        let x = delta - self.delta0;
        self.epsilon / PI / (x * x + self.epsilon * self.epsilon)
    }
}

struct Scatterer<'a> {
    r: Resonances<'a>,
    wp: WavepacketParams,
    prefactor: f64,
}

impl<'a> Scatterer<'a> {
    fn new(t: &'a TransitionMatrix, wp: WavepacketParams) -> Self {
        Self {
            r: Resonances::new(t),
            wp,
            prefactor: (wp.epsilon / PI).sqrt(),
        }
    }

    /// `B_{m0,m}(Δ)`, direct reflection plus the cavity-mediated channel.
    fn amplitude(&self, m0: usize, m: usize, delta: f64) -> Complex64 {
        let r = &self.r;
        let t = r.t;
        let packet = Complex64::new(delta - self.wp.delta0 + r.e0[m] - r.e0[m0], self.wp.epsilon).inv();
        let mut cavity = Complex64::new(0.0, 0.0);
        for n in 0..t.n_max() {
            let numerator = t.get(m, n) * t.get(m0, n);
            if numerator.abs() < NUMERATOR_CUTOFF {
                continue;
            }
            cavity += r.cavity_pole(delta, m, n) * numerator;
        }
        let mut amp = cavity * packet * Complex64::new(0.0, -r.kappa);
        if m == m0 {
            amp += Complex64::new(delta - self.wp.delta0, self.wp.epsilon).inv();
        }
        amp * self.prefactor
    }
}

/// `B_{m0,m}(Δ) = √(ε/π) [δ_{m,m0}/(Δ-Δ0+iε) - iκ Σ_n T[m][n]T[m0][n] /
/// ((Δ+E'_{0,m}-E'_{1,n}+iκ/2)(Δ-Δ0+E'_{0,m}-E'_{0,m0}+iε))]`
pub fn scattering_amplitude(
    m0: usize,
    m: usize,
    delta: f64,
    wp: WavepacketParams,
    t: &TransitionMatrix,
) -> Result<Complex64> {
    for i in [m0, m] {
        if i >= t.n_max() {
            return Err(invalid("m", format!("index {i} outside the truncation {}", t.n_max())));
        }
    }
    Ok(Scatterer::new(t, wp).amplitude(m0, m, delta))
}

/// Output spectrum `Σ_m |Σ_{m0} C_{m0} B_{m0,m}|²` (pure) or
/// `Σ_{m0} P_{m0} Σ_m |B_{m0,m}|²` (mixed).
pub fn scattering_spectrum(
    init: &MechanicalInitState,
    wp: WavepacketParams,
    grid: &DetuningGrid,
    t: &TransitionMatrix,
) -> Result<SpectrumGrid> {
    if init.n_max > t.n_max() {
        return Err(invalid("n_max", "initial state is larger than the transition matrix"));
    }
    let sc = Scatterer::new(t, wp);
    let n_max = t.n_max();
    let sources: Vec<(usize, Complex64)> = match &init.populations {
        Populations::Pure(c) => c.iter().copied().enumerate().filter(|(_, v)| v.norm() > 0.0).collect(),
        Populations::Mixed(p) => p
            .iter()
            .enumerate()
            .filter(|(_, w)| **w > 0.0)
            .map(|(m0, w)| (m0, Complex64::new(*w, 0.0)))
            .collect(),
    };
    let pure = init.is_pure();
    let values: Vec<f64> = grid
        .points()
        .par_iter()
        .map(|&delta| {
            let mut total = 0.0;
            for m in 0..n_max {
                if pure {
                    let amp: Complex64 = sources.iter().map(|(m0, c)| c * sc.amplitude(*m0, m, delta)).sum();
                    total += amp.norm_sqr();
                } else {
                    total += sources
                        .iter()
                        .map(|(m0, w)| w.re * sc.amplitude(*m0, m, delta).norm_sqr())
                        .sum::<f64>();
                }
            }
            total
        })
        .collect();
    let tail = truncation_tail(init, t);
    if tail > TAIL_WARNING {
        log::warn!("scattering sums leave out {tail:e} of the probability at n_max = {n_max}");
    }
    let meta = SpectrumMeta {
        params: *t.params(),
        state: init.kind.to_string(),
        source: SpectrumSource::Scattering {
            delta0: wp.delta0,
            epsilon: wp.epsilon,
        },
        n_max,
        tail,
    };
    SpectrumGrid::new(grid.points().to_vec(), values, Some(meta))
}
