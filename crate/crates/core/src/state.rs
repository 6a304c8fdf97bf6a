//! Initial mechanical states.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::franck_condon::TransitionMatrix;

/// Discarded probability allowed when truncating an initial state.
pub const TAIL_LIMIT: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitKind {
    /// `|m0⟩`
    Number { m0: usize },
    /// the single-photon dressed ground state `Ŝ(r_1)D̂(α_1)|0⟩`
    SdGround,
    Coherent { beta: Complex64 },
    Thermal { nbar: f64 },
}

impl fmt::Display for InitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitKind::Number { m0 } => write!(f, "number:{m0}"),
            InitKind::SdGround => write!(f, "sdground"),
            InitKind::Coherent { beta } => write!(f, "coherent:{},{}", beta.re, beta.im),
            InitKind::Thermal { nbar } => write!(f, "thermal:{nbar}"),
        }
    }
}

impl FromStr for InitKind {
    type Err = Error;

    /// `number:M0 | sdground | coherent:RE,IM | thermal:NBAR`
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h.trim(), Some(a.trim())),
            None => (s, None),
        };
        let number = |text: &str| -> Result<f64> {
            let v: f64 = text
                .trim()
                .parse()
                .map_err(|_| invalid("state", format!("`{text}` is not a number")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(invalid("state", format!("`{text}` is not finite")))
            }
        };
        match (head.to_ascii_lowercase().as_str(), arg) {
            ("number", Some(a)) => {
                let m0 = a
                    .parse()
                    .map_err(|_| invalid("state", format!("phonon number `{a}` is not a non-negative integer")))?;
                Ok(InitKind::Number { m0 })
            }
            ("sdground" | "sd_ground", None) => Ok(InitKind::SdGround),
            ("coherent", Some(a)) => {
                let (re, im) = match a.split_once(',') {
                    Some((re, im)) => (number(re)?, number(im)?),
                    None => (number(a)?, 0.0),
                };
                Ok(InitKind::Coherent {
                    beta: Complex64::new(re, im),
                })
            }
            ("thermal", Some(a)) => {
                let nbar = number(a)?;
                if nbar < 0.0 {
                    return Err(invalid("state", "thermal occupation must be non-negative"));
                }
                Ok(InitKind::Thermal { nbar })
            }
            _ => Err(invalid(
                "state",
                format!("`{s}` is not one of number:M0, sdground, coherent:RE,IM, thermal:NBAR"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Populations {
    /// amplitudes `C_{m0}`
    Pure(Vec<Complex64>),
    /// weights `P_{m0}`
    Mixed(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MechanicalInitState {
    pub kind: InitKind,
    pub populations: Populations,
    pub n_max: usize,
    /// probability discarded before renormalization
    pub tail: f64,
}

impl MechanicalInitState {
    /// Builds the state on `n_max` number states. `t` supplies the dressed
    /// ground state and must have at least `n_max` rows.
    pub fn new(kind: InitKind, n_max: usize, t: &TransitionMatrix) -> Result<Self> {
        if n_max == 0 {
            return Err(invalid("n_max", "must be positive"));
        }
        if n_max > t.n_max() {
            return Err(invalid(
                "n_max",
                format!("{n_max} exceeds the transition matrix size {}", t.n_max()),
            ));
        }
        let (populations, tail) = match kind {
            InitKind::Number { m0 } => {
                if m0 >= n_max {
                    return Err(invalid("state", format!("phonon number {m0} needs n_max > {m0}")));
                }
                let mut c = vec![Complex64::new(0.0, 0.0); n_max];
                c[m0] = Complex64::new(1.0, 0.0);
                (Populations::Pure(c), 0.0)
            }
            InitKind::SdGround => {
                let c: Vec<Complex64> = (0..n_max).map(|m| Complex64::new(t.get(m, 0), 0.0)).collect();
                let kept: f64 = c.iter().map(|v| v.norm_sqr()).sum();
                (Populations::Pure(c), (1.0 - kept).max(0.0))
            }
            InitKind::Coherent { beta } => {
                let c = coherent_amplitudes(beta, n_max);
                let kept: f64 = c.iter().map(|v| v.norm_sqr()).sum();
                (Populations::Pure(c), (1.0 - kept).max(0.0))
            }
            InitKind::Thermal { nbar } => {
                let p = thermal_weights(nbar, n_max);
                let ratio = nbar / (nbar + 1.0);
                (Populations::Mixed(p), ratio.powi(n_max as i32))
            }
        };
        if tail > TAIL_LIMIT {
            return Err(Error::Truncation {
                kept: 1.0 - tail,
                tail,
                limit: TAIL_LIMIT,
            });
        }
        let populations = match populations {
            Populations::Pure(c) => {
                let norm = c.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
                Populations::Pure(c.into_iter().map(|v| v / norm).collect())
            }
            Populations::Mixed(p) => {
                let total: f64 = p.iter().sum();
                Populations::Mixed(p.into_iter().map(|v| v / total).collect())
            }
        };
        Ok(Self {
            kind,
            populations,
            n_max,
            tail,
        })
    }

    /// Smallest truncation (up to `limit`) meeting the tail bound.
    pub fn minimal_truncation(kind: InitKind, limit: usize) -> Option<usize> {
        match kind {
            InitKind::Number { m0 } => Some(m0 + 1).filter(|&n| n <= limit),
            InitKind::SdGround => None,
            InitKind::Coherent { beta } => {
                let mut kept = 0.0;
                let amplitudes = coherent_amplitudes(beta, limit);
                for (n, c) in amplitudes.iter().enumerate() {
                    kept += c.norm_sqr();
                    if 1.0 - kept <= TAIL_LIMIT {
                        return Some(n + 1);
                    }
                }
                None
            }
            InitKind::Thermal { nbar } => {
                if nbar == 0.0 {
                    return Some(1);
                }
                let ratio = nbar / (nbar + 1.0);
                let n = (TAIL_LIMIT.ln() / ratio.ln()).ceil() as usize;
                Some(n.max(1)).filter(|&n| n <= limit)
            }
        }
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.populations, Populations::Pure(_))
    }

    /// Occupation probability of each number state.
    pub fn probabilities(&self) -> Vec<f64> {
        match &self.populations {
            Populations::Pure(c) => c.iter().map(|v| v.norm_sqr()).collect(),
            Populations::Mixed(p) => p.clone(),
        }
    }
}

/// `e^{-|β|²/2} β^n / √n!`, evaluated in log space.
pub fn coherent_amplitudes(beta: Complex64, n_max: usize) -> Vec<Complex64> {
    let modulus = beta.norm();
    let phase = beta.arg();
    let mut log_factorial = 0.0;
    (0..n_max)
        .map(|n| {
            if n > 0 {
                log_factorial += (n as f64).ln();
            }
            if modulus == 0.0 {
                return Complex64::new(if n == 0 { 1.0 } else { 0.0 }, 0.0);
            }
            let log_mag = -0.5 * modulus * modulus + n as f64 * modulus.ln() - 0.5 * log_factorial;
            Complex64::from_polar(log_mag.exp(), n as f64 * phase)
        })
        .collect()
}

/// `n̄ⁿ/(n̄+1)^{n+1}` for `n < n_max`.
pub fn thermal_weights(nbar: f64, n_max: usize) -> Vec<f64> {
    let ratio = nbar / (nbar + 1.0);
    let mut w = 1.0 / (nbar + 1.0);
    (0..n_max)
        .map(|_| {
            let current = w;
            w *= ratio;
            current
        })
        .collect()
}
