//! Detuning axes and sampled spectra.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::ModelParams;

/// Strictly increasing detuning samples, in units of `ω_M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetuningGrid {
    points: Vec<f64>,
}

impl DetuningGrid {
    /// `min, min + step, ...` with `round((max - min)/step) + 1` points.
    pub fn uniform(min: f64, max: f64, step: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && step.is_finite()) {
            return Err(invalid("grid", "bounds and step must be finite"));
        }
        if min >= max {
            return Err(invalid("grid", format!("min {min} must be below max {max}")));
        }
        if step <= 0.0 {
            return Err(invalid("grid", format!("step {step} must be positive")));
        }
        let intervals = ((max - min) / step).round();
        if intervals > 5e7 {
            return Err(invalid("grid", format!("{intervals} intervals is too many")));
        }
        let count = intervals as usize + 1;
        Ok(Self {
            points: (0..count).map(|i| min + i as f64 * step).collect(),
        })
    }

    /// A uniform core on `[min, max]` extended on both sides by steps that
    /// grow geometrically by `growth` until `outer` is reached. Lorentzian
    /// tails decay like `1/Δ²`, so this captures the far wings at a few
    /// hundred extra points.
    pub fn with_tails(min: f64, max: f64, step: f64, outer: f64, growth: f64) -> Result<Self> {
        if !(growth > 1.0 && growth.is_finite()) {
            return Err(invalid("growth", "must exceed 1"));
        }
        if !(outer > min.abs().max(max.abs())) || !outer.is_finite() {
            return Err(invalid("outer", "must lie beyond the core window"));
        }
        let core = Self::uniform(min, max, step)?;
        let mut left = Vec::new();
        let (mut x, mut h) = (min, step);
        while x > -outer {
            h *= growth;
            x -= h;
            left.push(x.max(-outer));
        }
        left.reverse();
        let mut points = left;
        points.extend_from_slice(&core.points);
        let (mut x, mut h) = (*core.points.last().unwrap(), step);
        while x < outer {
            h *= growth;
            x += h;
            points.push(x.min(outer));
        }
        Self::from_points(points)
    }

    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(invalid("grid", "needs at least two points"));
        }
        if points.iter().any(|x| !x.is_finite()) {
            return Err(invalid("grid", "points must be finite"));
        }
        if let Some(i) = points.windows(2).position(|w| w[1] <= w[0]) {
            return Err(invalid("grid", format!("points not increasing at index {}", i + 1)));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Widest gap between neighbours inside `[lo, hi]`.
    pub fn max_spacing_within(&self, lo: f64, hi: f64) -> f64 {
        self.points
            .windows(2)
            .filter(|w| w[0] >= lo && w[1] <= hi)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }
}

/// Which formula produced a spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpectrumSource {
    Emission,
    Scattering { delta0: f64, epsilon: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumMeta {
    pub params: ModelParams,
    /// initial-state descriptor, e.g. `number:0`
    pub state: String,
    pub source: SpectrumSource,
    pub n_max: usize,
    /// probability the truncated sums leave out
    pub tail: f64,
}

/// Spectral density `S(Δ_k)` on a detuning axis (units `1/ω_M`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumGrid {
    pub deltas: Vec<f64>,
    pub values: Vec<f64>,
    pub meta: Option<SpectrumMeta>,
}

/// Default tolerance on `∫S dΔ = 1`.
pub const UNIT_INTEGRAL_TOLERANCE: f64 = 5e-3;

impl SpectrumGrid {
    pub fn new(deltas: Vec<f64>, values: Vec<f64>, meta: Option<SpectrumMeta>) -> Result<Self> {
        if deltas.len() != values.len() {
            return Err(invalid(
                "values",
                format!("{} values for {} detunings", values.len(), deltas.len()),
            ));
        }
        DetuningGrid::from_points(deltas.clone())?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("values", "spectrum contains non-finite samples"));
        }
        Ok(Self { deltas, values, meta })
    }

    /// Trapezoid rule over the whole axis.
    pub fn integral(&self) -> f64 {
        self.deltas
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(d, v)| 0.5 * (d[1] - d[0]) * (v[0] + v[1]))
            .sum()
    }

    /// Integral over the samples with `lo < Δ`.
    pub fn integral_above(&self, lo: f64) -> f64 {
        self.deltas
            .windows(2)
            .zip(self.values.windows(2))
            .filter(|(d, _)| d[0] >= lo)
            .map(|(d, v)| 0.5 * (d[1] - d[0]) * (v[0] + v[1]))
            .sum()
    }

    /// The integral, or a normalization error if it misses 1 by more than
    /// `tolerance`.
    pub fn check_unit_integral(&self, tolerance: f64) -> Result<f64> {
        let integral = self.integral();
        if (integral - 1.0).abs() > tolerance || !integral.is_finite() {
            return Err(Error::Normalization { integral, tolerance });
        }
        Ok(integral)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Samples with `lo <= Δ <= hi`.
    pub fn window(&self, lo: f64, hi: f64) -> Self {
        let (deltas, values) = self
            .deltas
            .iter()
            .zip(&self.values)
            .filter(|(d, _)| **d >= lo && **d <= hi)
            .map(|(d, v)| (*d, *v))
            .unzip();
        Self {
            deltas,
            values,
            meta: self.meta.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.deltas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deltas.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn uniform_point_count() {
        let g = DetuningGrid::uniform(-8.0, 4.0, 0.002).unwrap();
        assert_eq!(g.len(), 6001);
        assert_relative_eq!(*g.points().last().unwrap(), 4.0, epsilon = 1e-9);
        assert!(DetuningGrid::uniform(1.0, 1.0, 0.1).is_err());
        assert!(DetuningGrid::uniform(0.0, 1.0, -0.1).is_err());
        assert!(DetuningGrid::uniform(0.0, f64::NAN, 0.1).is_err());
    }

    #[test]
    fn tails_extend_monotonically() {
        let g = DetuningGrid::with_tails(-2.0, 2.0, 0.01, 1000.0, 1.05).unwrap();
        assert_eq!(g.points()[0], -1000.0);
        assert_eq!(*g.points().last().unwrap(), 1000.0);
        assert!(g.len() < 401 + 400);
        assert_relative_eq!(g.max_spacing_within(-2.0, 2.0), 0.01, epsilon = 1e-9);
    }

    #[test]
    fn lorentzian_integral_with_tails() {
        let g = DetuningGrid::with_tails(-1.0, 1.0, 0.001, 1e5, 1.05).unwrap();
        let k = 0.15;
        let values: Vec<f64> = g
            .points()
            .iter()
            .map(|d| (k / (2.0 * std::f64::consts::PI)) / (d * d + k * k / 4.0))
            .collect();
        let s = SpectrumGrid::new(g.points().to_vec(), values, None).unwrap();
        assert_relative_eq!(s.integral(), 1.0, epsilon = 1e-4);
        assert!(s.check_unit_integral(UNIT_INTEGRAL_TOLERANCE).is_ok());
    }

    #[test]
    fn normalization_error_reports_integral() {
        let s = SpectrumGrid::new(vec![0.0, 1.0], vec![0.5, 0.5], None).unwrap();
        assert_eq!(s.integral(), 0.5);
        assert!(matches!(
            s.check_unit_integral(5e-3),
            Err(Error::Normalization { integral, .. }) if integral == 0.5
        ));
    }

    #[test]
    fn rejects_mismatched_lengths() {
        assert!(SpectrumGrid::new(vec![0.0, 1.0], vec![1.0], None).is_err());
        assert!(SpectrumGrid::new(vec![1.0, 0.0], vec![1.0, 1.0], None).is_err());
    }
}
