//! Peak and dip detection, classification against the resonance lattice,
//! and inference of `C`, `g2`, `g1` from emission spectra.
//!
//! Emission peaks sit at `e^{2r_1} n - m - C` (units of `ω_M`). Folding the
//! peak positions modulo `ω_M` sends every peak with the same dressed index
//! `n` to one point, `n s - C mod ω_M` with `s = e^{2r_1} - 1` the sub-peak
//! spacing. The heaviest folded family is `n = 0`; its rightmost member is the
//! zero-phonon line, and the offset of the next family gives `s`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::SpectrumGrid;

/// Default prominence threshold as a fraction of the global maximum.
pub const DEFAULT_PROMINENCE: f64 = 0.005;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    /// refined position
    pub location: f64,
    /// refined value
    pub value: f64,
    pub prominence: f64,
    /// sample index nearest the extremum
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Extrema {
    pub peaks: Vec<Extremum>,
    pub dips: Vec<Extremum>,
}

/// Largest sample spacing, relative to `κ`, that [`find_extrema`] accepts.
pub const MAX_SPACING_OVER_KAPPA: f64 = 0.2;

/// Local maxima and minima with prominence at least
/// `prominence_frac · max(S)`, positions refined by the vertex of the parabola
/// through the three samples around each one.
///
/// Only the part of the axis where the spectrum exceeds the threshold has to
/// be sampled at `κ/5` or finer; sparse far tails are allowed.
pub fn find_extrema(spec: &SpectrumGrid, kappa: f64, prominence_frac: f64) -> Result<Extrema> {
    if !(kappa > 0.0) {
        return Err(invalid("kappa", "must be positive"));
    }
    if !(prominence_frac > 0.0 && prominence_frac < 1.0) {
        return Err(invalid("prominence", "must lie in (0, 1)"));
    }
    let x = &spec.deltas;
    let y = &spec.values;
    let peak = spec.max_value();
    if x.len() < 3 || peak <= 0.0 {
        return Ok(Extrema::default());
    }
    let threshold = prominence_frac * peak;
    let limit = MAX_SPACING_OVER_KAPPA * kappa;
    for i in 0..x.len() - 1 {
        let spacing = x[i + 1] - x[i];
        if spacing > limit * (1.0 + 1e-9) && y[i].max(y[i + 1]) >= threshold {
            return Err(Error::GridTooCoarse { spacing, limit });
        }
    }
    let negated: Vec<f64> = y.iter().map(|v| -v).collect();
    Ok(Extrema {
        peaks: maxima(x, y, threshold),
        dips: maxima(x, &negated, threshold)
            .into_iter()
            .map(|e| Extremum { value: -e.value, ..e })
            .collect(),
    })
}

fn maxima(x: &[f64], y: &[f64], threshold: f64) -> Vec<Extremum> {
    let n = y.len();
    let mut out = Vec::new();
    let mut i = 1;
    while i < n - 1 {
        if !(y[i] > y[i - 1]) {
            i += 1;
            continue;
        }
        // walk across a flat top
        let mut j = i;
        while j + 1 < n && y[j + 1] == y[i] {
            j += 1;
        }
        if j + 1 < n && y[j + 1] < y[i] {
            let centre = (i + j) / 2;
            let prominence = prominence(y, centre);
            if prominence >= threshold {
                let (location, value) = if i == j {
                    parabola_vertex(x[i - 1], y[i - 1], x[i], y[i], x[i + 1], y[i + 1])
                } else {
                    (0.5 * (x[i] + x[j]), y[i])
                };
                out.push(Extremum {
                    location,
                    value,
                    prominence,
                    index: centre,
                });
            }
        }
        i = j + 1;
    }
    out
}

/// Height above the higher of the two lowest points separating `i` from
/// taller samples (or the ends of the axis).
fn prominence(y: &[f64], i: usize) -> f64 {
    let top = y[i];
    let mut left_min = top;
    for k in (0..i).rev() {
        if y[k] > top {
            break;
        }
        left_min = left_min.min(y[k]);
    }
    let mut right_min = top;
    for &v in &y[i + 1..] {
        if v > top {
            break;
        }
        right_min = right_min.min(v);
    }
    top - left_min.max(right_min)
}

fn parabola_vertex(x0: f64, y0: f64, x1: f64, y1: f64, x2: f64, y2: f64) -> (f64, f64) {
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let a = (d12 - d01) / (x2 - x0);
    if a == 0.0 || !a.is_finite() {
        return (x1, y1);
    }
    let b = d01 - a * (x0 + x1);
    let xv = (-b / (2.0 * a)).clamp(x0, x2);
    let yv = y1 + (xv - x1) * (d01 + a * (xv - x0));
    (xv, yv)
}

/// Exact inversion of `s = ω_M (√(1 + 4 g2/ω_M) - 1)`, with the small-coupling
/// estimate `s/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct G2Estimate {
    pub exact: f64,
    pub small_coupling: f64,
}

pub fn infer_g2(spacing: f64, omega_m: f64) -> Result<G2Estimate> {
    if !(spacing >= 0.0) || !spacing.is_finite() {
        return Err(invalid("spacing", "must be finite and non-negative"));
    }
    if !(omega_m > 0.0) {
        return Err(invalid("omega_m", "must be positive"));
    }
    let ratio = 1.0 + spacing / omega_m;
    Ok(G2Estimate {
        exact: omega_m * (ratio * ratio - 1.0) / 4.0,
        small_coupling: spacing / 2.0,
    })
}

/// `(Ĉ, ĝ1)` from the zero-phonon line and `ĝ2`:
/// `Ĉ = -Δ_zp`, `ĝ1 = √(ω_M e^{4r̂} (Ĉ + ĝ2 e^{-2r̂} + ω_M sinh² r̂))`.
pub fn infer_c_and_g1(zero_phonon: f64, g2_hat: f64, omega_m: f64) -> Result<(f64, f64)> {
    if !(omega_m > 0.0) {
        return Err(invalid("omega_m", "must be positive"));
    }
    let arg = 4.0 * g2_hat / omega_m + 1.0;
    if !(arg > 0.0) {
        return Err(Error::Domain { photons: 1, argument: arg });
    }
    let r = arg.ln() / 4.0;
    let c = -zero_phonon;
    let radicand = c + g2_hat * (-2.0 * r).exp() + omega_m * r.sinh().powi(2);
    // g1 = 0 lands on zero up to rounding
    if radicand < -1e-12 * omega_m {
        return Err(Error::Inconsistent { radicand });
    }
    Ok((c, (omega_m * (4.0 * r).exp() * radicand.max(0.0)).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeakClass {
    MainSideband,
    SubPeak,
    ZeroPhonon,
    Unclassified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub location: f64,
    pub height: f64,
    pub prominence: f64,
    pub class: PeakClass,
    /// dressed index `n` of the matched transition
    pub n: Option<usize>,
    /// final phonon number `m` of the matched transition
    pub m: Option<i64>,
}

impl Peak {
    /// `m - n`: peaks sharing it form one main-sideband cluster.
    pub fn ladder_index(&self) -> Option<i64> {
        Some(self.m? - self.n? as i64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dip {
    pub location: f64,
    pub depth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakReport {
    pub peaks: Vec<Peak>,
    pub dips: Vec<Dip>,
    pub inferred_c: Option<f64>,
    pub inferred_g2: Option<f64>,
    pub inferred_g2_small_coupling: Option<f64>,
    pub inferred_g1: Option<f64>,
    pub sub_peak_spacing: Option<f64>,
    /// sub peaks were found next to a main peak, with `ω_M` and the spacing above `κ`
    pub resolution_ok: bool,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisOptions {
    pub omega_m: f64,
    pub kappa: f64,
    pub prominence: f64,
}

impl AnalysisOptions {
    pub fn new(omega_m: f64, kappa: f64) -> Self {
        Self {
            omega_m,
            kappa,
            prominence: DEFAULT_PROMINENCE,
        }
    }
}

/// Peaks folded to the same point modulo `ω_M`.
#[derive(Debug, Clone)]
struct Family {
    phase: f64,
    weight: f64,
    members: Vec<usize>,
}

/// Groups folded phases that lie within `tol` of a neighbour, treating the
/// fold as a circle.
fn fold_families(positions: &[f64], weights: &[f64], period: f64, tol: f64) -> Vec<Family> {
    let mut order: Vec<(f64, usize)> = positions
        .iter()
        .enumerate()
        .map(|(i, x)| (x.rem_euclid(period), i))
        .collect();
    if order.is_empty() {
        return Vec::new();
    }
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    let count = order.len();
    // cut the circle at its widest gap so no family straddles the cut
    let gap = |i: usize| {
        if i + 1 == count {
            order[0].0 + period - order[i].0
        } else {
            order[i + 1].0 - order[i].0
        }
    };
    let widest = (0..count).max_by(|&a, &b| gap(a).total_cmp(&gap(b))).unwrap();
    let mut groups: Vec<Vec<(f64, usize)>> = Vec::new();
    for step in 0..count {
        let i = (widest + 1 + step) % count;
        let wrapped = i <= widest && widest + 1 < count;
        let item = (order[i].0 + if wrapped { period } else { 0.0 }, order[i].1);
        match groups.last_mut() {
            Some(g) if item.0 - g.last().unwrap().0 <= tol => g.push(item),
            _ => groups.push(vec![item]),
        }
    }
    groups
        .into_iter()
        .map(|g| {
            let weight: f64 = g.iter().map(|(_, i)| weights[*i]).sum();
            let phase = g.iter().map(|(p, i)| p * weights[*i]).sum::<f64>() / weight;
            Family {
                phase: phase.rem_euclid(period),
                weight,
                members: g.into_iter().map(|(_, i)| i).collect(),
            }
        })
        .collect()
}

/// Nearest lattice point `(n, m)` to `x` for shift `c` and spacing `s`, with
/// `n < n_limit`. Returns the index pair and the distance.
fn nearest_lattice(x: f64, c: f64, s: f64, omega: f64, n_limit: usize) -> (usize, i64, f64) {
    let mut best = (0, 0, f64::INFINITY);
    for n in 0..n_limit {
        let base = -c + n as f64 * (omega + s);
        let m = ((base - x) / omega).round();
        let d = (base - m * omega - x).abs();
        if d < best.2 - 1e-12 {
            best = (n, m as i64, d);
        }
    }
    best
}

/// Detects extrema and, for ground-state emission spectra, infers `C`, `g2`
/// and `g1`. Spectra from other initial states are analysed but flagged.
pub fn analyze(spec: &SpectrumGrid, opts: &AnalysisOptions) -> Result<PeakReport> {
    let omega = opts.omega_m;
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(invalid("omega_m", "must be positive"));
    }
    let extrema = find_extrema(spec, opts.kappa, opts.prominence)?;
    let mut warnings = Vec::new();
    if let Some(meta) = &spec.meta {
        if meta.state != "number:0" {
            warnings.push(format!(
                "initial state {} is not the mechanical ground state; blue-side peaks compete with the zero-phonon line and the inferred couplings are unreliable",
                meta.state
            ));
        }
        if !matches!(meta.source, crate::grid::SpectrumSource::Emission) {
            warnings.push("coupling inference assumes an emission spectrum".to_string());
        }
    }
    let dips = extrema
        .dips
        .iter()
        .map(|d| Dip {
            location: d.location,
            depth: d.prominence,
        })
        .collect();
    let positions: Vec<f64> = extrema.peaks.iter().map(|p| p.location).collect();
    let heights: Vec<f64> = extrema.peaks.iter().map(|p| p.value).collect();
    let mut report = PeakReport {
        peaks: extrema
            .peaks
            .iter()
            .map(|p| Peak {
                location: p.location,
                height: p.value,
                prominence: p.prominence,
                class: PeakClass::Unclassified,
                n: None,
                m: None,
            })
            .collect(),
        dips,
        inferred_c: None,
        inferred_g2: None,
        inferred_g2_small_coupling: None,
        inferred_g1: None,
        sub_peak_spacing: None,
        resolution_ok: false,
        warnings,
    };
    if positions.is_empty() {
        report.warnings.push("no peaks above the prominence threshold".to_string());
        return Ok(report);
    }
    let step = spec
        .deltas
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    let tol = (0.5 * opts.kappa).max(2.0 * step);
    let mut families = fold_families(&positions, &heights, omega, tol);
    families.sort_by(|a, b| b.weight.total_cmp(&a.weight));
    let main = &families[0];
    if families.len() > 1 && families[1].weight > 0.8 * main.weight {
        report
            .warnings
            .push("the two heaviest peak families carry similar weight; the zero-phonon family may be misidentified".to_string());
    }
    let zp_index = *main
        .members
        .iter()
        .max_by(|&&a, &&b| positions[a].total_cmp(&positions[b]))
        .unwrap();
    let mut c_hat = -positions[zp_index];
    let mut s_hat = families.get(1).map(|f| (f.phase - main.phase).rem_euclid(omega));
    let n_limit = families.len().max(1) + 1;

    // weighted least squares for (C, s) over peaks matched to the lattice
    if let Some(s0) = s_hat {
        let mut s = s0;
        for _ in 0..3 {
            let (mut sw, mut swn, mut swnn, mut swy, mut swny) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for (i, &x) in positions.iter().enumerate() {
                let (n, m, d) = nearest_lattice(x, c_hat, s, omega, n_limit);
                if d > tol {
                    continue;
                }
                // x + m ω - n ω = -C + n s
                let yv = x + m as f64 * omega - n as f64 * omega;
                let nf = n as f64;
                let w = heights[i];
                sw += w;
                swn += w * nf;
                swnn += w * nf * nf;
                swy += w * yv;
                swny += w * nf * yv;
            }
            let det = sw * swnn - swn * swn;
            if det.abs() <= 1e-300 * sw.max(1.0) {
                break;
            }
            let intercept = (swnn * swy - swn * swny) / det;
            s = (sw * swny - swn * swy) / det;
            c_hat = -intercept;
        }
        s_hat = Some(s);
    }

    report.inferred_c = Some(c_hat);
    match s_hat {
        Some(s) if s > 0.0 => {
            let g2 = infer_g2(s, omega)?;
            report.sub_peak_spacing = Some(s);
            report.inferred_g2 = Some(g2.exact);
            report.inferred_g2_small_coupling = Some(g2.small_coupling);
            match infer_c_and_g1(-c_hat, g2.exact, omega) {
                Ok((_, g1)) => report.inferred_g1 = Some(g1),
                Err(e) => report.warnings.push(e.to_string()),
            }
        }
        _ => {
            report
                .warnings
                .push("no sub-peak family resolved; g1 inferred with g2 = 0".to_string());
            match infer_c_and_g1(-c_hat, 0.0, omega) {
                Ok((_, g1)) => report.inferred_g1 = Some(g1),
                Err(e) => report.warnings.push(e.to_string()),
            }
        }
    }

    let s = report.sub_peak_spacing.unwrap_or(0.0);
    let n_limit = if s > 0.0 { n_limit } else { 1 };
    let mut unmatched = 0;
    for peak in report.peaks.iter_mut() {
        let (n, m, d) = nearest_lattice(peak.location, c_hat, s, omega, n_limit);
        if d > 0.5 * opts.kappa {
            unmatched += 1;
            continue;
        }
        peak.n = Some(n);
        peak.m = Some(m);
        peak.class = match (n, m) {
            (0, 0) => PeakClass::ZeroPhonon,
            (0, _) => PeakClass::MainSideband,
            _ => PeakClass::SubPeak,
        };
    }
    // resolved only if some main peak actually has a sub peak beside it
    let has_main = |k: i64| report.peaks.iter().any(|p| p.n == Some(0) && p.ladder_index() == Some(k));
    let resolved = report
        .peaks
        .iter()
        .filter(|p| p.class == PeakClass::SubPeak)
        .any(|p| has_main(p.ladder_index().unwrap()));
    report.resolution_ok = resolved && omega > opts.kappa && s > opts.kappa;
    if unmatched > 0 {
        report
            .warnings
            .push(format!("{unmatched} peaks do not match the inferred resonance lattice"));
    }
    Ok(report)
}
