//! Overlaps between number states and squeezed displaced number states.
//!
//! `⟨m|Ŝ(ζ)D̂(β)|n⟩` is evaluated with the closed-form Hermite expansion
//!
//! ```text
//! (m! n! μ)^{-1/2} (ν/2μ)^{m/2} exp(-|β|²/2 + ν* β²/2μ)
//!   × Σ_k C(n,k) 2^k m!/(m-k)! (2μν)^{-k/2} H_{m-k}(β/√(2μν))
//!         × (-ν*/2μ)^{(n-k)/2} H_{n-k}((βν* - β*μ)/√(-2μν*))
//! ```
//!
//! with `μ = cosh s`, `ν = e^{-iθ} sinh s`. Every half-integer power pairs with
//! a Hermite polynomial whose argument carries the same root, so we fold them
//! into `t^j H_j(x/t)`, which only depends on `t²`. That product has its own
//! three-term recurrence, needs no branch choice and stays finite as `s → 0`.
//! Magnitudes are carried as (mantissa, log-scale) pairs so indices of a few
//! hundred do not overflow.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::ModelParams;

/// Physicists' Hermite polynomial `H_k(z)` by the three-term recurrence.
pub fn hermite(k: usize, z: Complex64) -> Complex64 {
    let mut prev = Complex64::new(1.0, 0.0);
    if k == 0 {
        return prev;
    }
    let mut cur = 2.0 * z;
    for j in 1..k {
        let next = 2.0 * z * cur - 2.0 * j as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `value = mantissa · e^{log_scale}`
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Scaled {
    pub mantissa: Complex64,
    pub log_scale: f64,
}

impl Scaled {
    fn to_complex(self) -> Complex64 {
        self.mantissa * self.log_scale.exp()
    }
}

const RESCALE_ABOVE: f64 = 1e100;

/// Overlaps whose rounding-error estimate exceeds this are rejected.
pub const PRECISION_LIMIT: f64 = 1e-8;

/// `t^j H_j(x/t)` for `j = 0..count`, given `t²`.
///
/// Satisfies `S_{j+1} = 2x S_j - 2j t² S_{j-1}`; at `t = 0` it reduces to
/// `(2x)^j`.
pub(crate) fn scaled_hermite_sequence(count: usize, x: Complex64, t_sq: Complex64) -> Vec<Scaled> {
    let mut out = Vec::with_capacity(count);
    let mut log_scale = 0.0;
    let mut prev = Complex64::new(0.0, 0.0);
    let mut cur = Complex64::new(1.0, 0.0);
    for j in 0..count {
        out.push(Scaled {
            mantissa: cur,
            log_scale,
        });
        let next = 2.0 * x * cur - 2.0 * j as f64 * t_sq * prev;
        prev = cur;
        cur = next;
        let size = cur.norm().max(prev.norm());
        if size > RESCALE_ABOVE {
            prev /= size;
            cur /= size;
            log_scale += size.ln();
        }
    }
    out
}

fn ln_factorials(count: usize) -> Vec<f64> {
    let mut table = Vec::with_capacity(count.max(1));
    let mut acc = 0.0;
    table.push(0.0);
    for i in 1..count {
        acc += (i as f64).ln();
        table.push(acc);
    }
    table
}

/// Squeeze `ζ = s e^{iθ}` and displacement `β` of `Ŝ(ζ) D̂(β)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezeDisplaceSpec {
    pub s: f64,
    pub theta: f64,
    pub beta: Complex64,
}

impl SqueezeDisplaceSpec {
    pub fn new(s: f64, theta: f64, beta: Complex64) -> Result<Self> {
        if !(s.is_finite() && s >= 0.0) {
            return Err(invalid("s", format!("squeeze magnitude {s} must be finite and >= 0")));
        }
        if !theta.is_finite() || !beta.re.is_finite() || !beta.im.is_finite() {
            return Err(invalid("beta", "squeeze phase and displacement must be finite"));
        }
        Ok(Self { s, theta, beta })
    }

    /// Real squeeze and real displacement, the only case the model needs.
    pub fn real(s: f64, beta: f64) -> Result<Self> {
        Self::new(s, 0.0, Complex64::new(beta, 0.0))
    }

    /// Single-photon transformation `Ŝ(r_1) D̂(α_1)` of the model.
    pub fn single_photon(params: &ModelParams) -> Self {
        Self {
            s: params.r1(),
            theta: 0.0,
            beta: Complex64::new(params.alpha1(), 0.0),
        }
    }

    pub fn mu(&self) -> f64 {
        self.s.cosh()
    }

    pub fn nu(&self) -> Complex64 {
        Complex64::from_polar(self.s.sinh(), -self.theta)
    }
}

/// Precomputed pieces of the overlap formula for one `(ζ, β)`, valid for
/// indices below `size`.
struct OverlapKernel {
    spec: SqueezeDisplaceSpec,
    mu: f64,
    ln_fact: Vec<f64>,
    /// `q^j H_j(β / 2μq)`, `q² = ν/2μ`
    first: Vec<Scaled>,
    /// `p^j H_j((βν* - β*μ) / 2μp)`, `p² = -ν*/2μ`
    second: Vec<Scaled>,
    /// `-|β|²/2 + ν* β²/2μ`
    exponent: Complex64,
}

impl OverlapKernel {
    fn new(spec: SqueezeDisplaceSpec, size: usize) -> Self {
        let mu = spec.mu();
        let nu = spec.nu();
        let beta = spec.beta;
        let two_mu = 2.0 * mu;
        let first = scaled_hermite_sequence(size, beta / two_mu, nu / two_mu);
        let w = beta * nu.conj() - beta.conj() * mu;
        let second = scaled_hermite_sequence(size, w / two_mu, -nu.conj() / two_mu);
        Self {
            spec,
            mu,
            ln_fact: ln_factorials(size + 1),
            first,
            second,
            exponent: -0.5 * beta.norm_sqr() + nu.conj() * beta * beta / two_mu,
        }
    }

    fn overlap(&self, m: usize, n: usize) -> Result<Complex64> {
        self.overlap_with_error(m, n).map(|(value, _)| value)
    }

    /// The overlap and a rounding-error estimate for the alternating k-sum,
    /// `ε (1 + m + n) Σ_k |term_k|` in the same units as the value.
    fn overlap_with_error(&self, m: usize, n: usize) -> Result<(Complex64, f64)> {
        if self.spec.s == 0.0 {
            return displaced_number_overlap(m, n, self.spec.beta, &self.ln_fact).map(|v| (v, 0.0));
        }
        let lf = &self.ln_fact;
        let ln_mu = self.mu.ln();
        let terms: Vec<Scaled> = (0..=m.min(n))
            .filter_map(|k| {
                let g = self.first[m - k];
                let f = self.second[n - k];
                let mantissa = g.mantissa * f.mantissa;
                if mantissa == Complex64::new(0.0, 0.0) {
                    return None;
                }
                let ln_coeff = lf[n] - lf[k] - lf[n - k] + lf[m] - lf[m - k] - k as f64 * ln_mu;
                Some(Scaled {
                    mantissa,
                    log_scale: ln_coeff + g.log_scale + f.log_scale,
                })
            })
            .collect();
        let Some(top) = terms.iter().map(|t| t.log_scale).reduce(f64::max) else {
            return Ok((Complex64::new(0.0, 0.0), 0.0));
        };
        let mut sum = Complex64::new(0.0, 0.0);
        let mut magnitude = 0.0;
        for t in &terms {
            let term = t.mantissa * (t.log_scale - top).exp();
            sum += term;
            magnitude += term.norm();
        }
        let log_scale = top + self.exponent.re - 0.5 * (lf[m] + lf[n] + ln_mu);
        let value = Scaled {
            mantissa: sum * Complex64::from_polar(1.0, self.exponent.im),
            log_scale,
        }
        .to_complex();
        let error = f64::EPSILON * (1 + m + n) as f64 * magnitude * log_scale.exp();
        if !(value.re.is_finite() && value.im.is_finite()) {
            return Err(Error::Overflow { m, n });
        }
        if error > PRECISION_LIMIT {
            return Err(Error::PrecisionLoss { m, n, estimate: error });
        }
        Ok((value, error))
    }
}

/// `⟨m|D̂(β)|n⟩` through the associated Laguerre closed form.
fn displaced_number_overlap(m: usize, n: usize, beta: Complex64, ln_fact: &[f64]) -> Result<Complex64> {
    let x = beta.norm_sqr();
    let (lo, hi, base) = if m >= n {
        (n, m, beta)
    } else {
        (m, n, -beta.conj())
    };
    let order = hi - lo;
    if x == 0.0 {
        return Ok(Complex64::new(if order == 0 { 1.0 } else { 0.0 }, 0.0));
    }
    // L_lo^{(order)}(x) by upward recurrence
    let a = order as f64;
    let mut prev = 1.0;
    let mut cur = 1.0 + a - x;
    let mut log_scale = 0.0;
    if lo == 0 {
        cur = 1.0;
    } else {
        for k in 1..lo {
            let kf = k as f64;
            let next = ((2.0 * kf + 1.0 + a - x) * cur - (kf + a) * prev) / (kf + 1.0);
            prev = cur;
            cur = next;
            let size = cur.abs().max(prev.abs());
            if size > RESCALE_ABOVE {
                prev /= size;
                cur /= size;
                log_scale += size.ln();
            }
        }
    }
    let ln_prefactor = 0.5 * (ln_fact[lo] - ln_fact[hi]) + order as f64 * base.norm().ln() - 0.5 * x;
    let phase = Complex64::from_polar(1.0, order as f64 * base.arg());
    let value = phase * cur * (ln_prefactor + log_scale).exp();
    if value.re.is_finite() && value.im.is_finite() {
        Ok(value)
    } else {
        Err(Error::Overflow { m, n })
    }
}

/// `⟨m|Ŝ(ζ) D̂(β)|n⟩`.
pub fn overlap_sd(m: usize, n: usize, spec: &SqueezeDisplaceSpec) -> Result<Complex64> {
    overlap_sd_with_error(m, n, spec).map(|(value, _)| value)
}

/// `⟨m|Ŝ(ζ) D̂(β)|n⟩` with an estimate of the absolute rounding error. The
/// k-sum alternates in sign, and for large indices or strong squeezing the
/// cancellation eats most of the available digits.
pub fn overlap_sd_with_error(m: usize, n: usize, spec: &SqueezeDisplaceSpec) -> Result<(Complex64, f64)> {
    OverlapKernel::new(*spec, m.max(n) + 1).overlap_with_error(m, n)
}

/// Table `T[m][n] = ⟨m|ñ(1)⟩` of single-photon Franck–Condon overlaps.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    n_max: usize,
    /// row-major, `entries[m * n_max + n]`
    entries: Vec<f64>,
    params: ModelParams,
}

/// Largest imaginary residue accepted before dropping it.
const IMAGINARY_RESIDUE: f64 = 1e-12;

impl TransitionMatrix {
    pub fn new(params: &ModelParams, n_max: usize) -> Result<Self> {
        params.validate()?;
        if n_max == 0 {
            return Err(invalid("n_max", "transition matrix needs at least one state"));
        }
        let kernel = OverlapKernel::new(SqueezeDisplaceSpec::single_photon(params), n_max);
        let columns: Vec<Vec<f64>> = (0..n_max)
            .into_par_iter()
            .map(|n| {
                (0..n_max)
                    .map(|m| {
                        let value = kernel.overlap(m, n)?;
                        debug_assert!(value.im.abs() < IMAGINARY_RESIDUE);
                        if value.im.abs() >= IMAGINARY_RESIDUE {
                            return Err(Error::Overflow { m, n });
                        }
                        Ok(value.re)
                    })
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<_>>()?;
        let mut entries = vec![0.0; n_max * n_max];
        for (n, column) in columns.iter().enumerate() {
            for (m, value) in column.iter().enumerate() {
                entries[m * n_max + n] = *value;
            }
        }
        Ok(Self {
            n_max,
            entries,
            params: *params,
        })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// `⟨m|ñ(1)⟩`
    #[inline]
    pub fn get(&self, m: usize, n: usize) -> f64 {
        self.entries[m * self.n_max + n]
    }

    pub fn row(&self, m: usize) -> &[f64] {
        &self.entries[m * self.n_max..(m + 1) * self.n_max]
    }

    pub fn column(&self, n: usize) -> Vec<f64> {
        (0..self.n_max).map(|m| self.get(m, n)).collect()
    }

    /// `Σ_m T[m][n] T[m][n']`, one when both columns are untruncated.
    pub fn column_overlap(&self, n: usize, n_prime: usize) -> f64 {
        (0..self.n_max).map(|m| self.get(m, n) * self.get(m, n_prime)).sum()
    }

    /// Probability missing from column `n` because of the truncation.
    pub fn column_deficit(&self, n: usize) -> f64 {
        1.0 - self.column_overlap(n, n)
    }

    /// Comma-separated dump, one row per bare index `m`, one column per
    /// dressed index `n`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("m\\n");
        for n in 0..self.n_max {
            out.push_str(&format!(",{n}"));
        }
        out.push('\n');
        for m in 0..self.n_max {
            out.push_str(&m.to_string());
            for value in self.row(m) {
                out.push_str(&format!(",{value:.11e}"));
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn hermite_low_orders() {
        assert_eq!(hermite(0, Complex64::new(3.0, -1.0)), c(1.0));
        assert_eq!(hermite(1, c(2.0)), c(4.0));
        assert_eq!(hermite(3, c(2.0)), c(40.0));
        // H_4(i) = 16 i^4 - 48 i^2 + 12 = 76
        assert_relative_eq!(hermite(4, Complex64::new(0.0, 1.0)).re, 76.0);
    }

    #[test]
    fn scaled_sequence_matches_plain_hermite() {
        let x = Complex64::new(0.3, 0.2);
        let t = Complex64::new(0.7, -0.1);
        let seq = scaled_hermite_sequence(12, x, t * t);
        for (j, s) in seq.iter().enumerate() {
            let direct = t.powu(j as u32) * hermite(j, x / t);
            assert!((s.to_complex() - direct).norm() < 1e-12 * (1.0 + direct.norm()));
        }
    }

    #[test]
    fn scaled_sequence_rescales_without_overflow() {
        let seq = scaled_hermite_sequence(400, c(50.0), c(0.0));
        let last = seq[399];
        assert!(last.mantissa.norm().is_finite());
        assert_relative_eq!(last.log_scale + last.mantissa.norm().ln(), 399.0 * 100f64.ln(), max_relative = 1e-12);
    }

    #[test]
    fn squeezed_vacuum_overlap() {
        let spec = SqueezeDisplaceSpec::real(0.0841, 0.0).unwrap();
        let v = overlap_sd(0, 0, &spec).unwrap();
        assert_relative_eq!(v.re, 0.0841_f64.cosh().powf(-0.5), epsilon = 1e-15);
        assert!((v.re - 0.99824).abs() < 5e-6);
        // ⟨2|Ŝ(s)|0⟩ = -tanh(s) / √(2 cosh s)
        let s = 0.4;
        let v = overlap_sd(2, 0, &SqueezeDisplaceSpec::real(s, 0.0).unwrap()).unwrap();
        assert_relative_eq!(v.re, -s.tanh() / (2.0 * s.cosh()).sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn identity_when_nothing_applied() {
        let spec = SqueezeDisplaceSpec::real(0.0, 0.0).unwrap();
        for m in 0..6 {
            for n in 0..6 {
                let expected = if m == n { 1.0 } else { 0.0 };
                assert_eq!(overlap_sd(m, n, &spec).unwrap(), c(expected));
            }
        }
    }

    #[test]
    fn displaced_vacuum_closed_form() {
        let alpha: f64 = -0.8;
        let spec = SqueezeDisplaceSpec::real(0.0, alpha).unwrap();
        let v = overlap_sd(0, 1, &spec).unwrap();
        assert_relative_eq!(v.re, -alpha * (-alpha * alpha / 2.0).exp(), epsilon = 1e-15);
        // coherent-state amplitudes ⟨m|α⟩ = e^{-α²/2} α^m / √m!
        let mut fact = 1.0;
        for m in 0..10 {
            if m > 0 {
                fact *= m as f64;
            }
            let v = overlap_sd(m, 0, &spec).unwrap();
            assert_relative_eq!(v.re, (-alpha * alpha / 2.0).exp() * alpha.powi(m as i32) / fact.sqrt(), epsilon = 1e-14);
        }
    }

    #[test]
    fn continuity_at_zero_squeeze() {
        let beta = Complex64::new(-0.62, 0.0);
        let at_zero = SqueezeDisplaceSpec::new(0.0, 0.0, beta).unwrap();
        let nearby = SqueezeDisplaceSpec::new(1e-6, 0.0, beta).unwrap();
        for m in 0..20 {
            for n in 0..20 {
                let a = overlap_sd(m, n, &at_zero).unwrap();
                let b = overlap_sd(m, n, &nearby).unwrap();
                assert!((a - b).norm() < 1e-5, "m={m} n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn cancellation_is_detected() {
        let spec = SqueezeDisplaceSpec::real(0.3, -1.2).unwrap();
        assert!(matches!(overlap_sd(150, 140, &spec), Err(Error::PrecisionLoss { .. })));
        let (v, err) = overlap_sd_with_error(40, 30, &spec).unwrap();
        assert!(v.norm() <= 1.0 && err < 1e-10);
        // squeezed-vacuum tail falls like tanh(s)^(m/2)
        let v = overlap_sd(300, 0, &spec).unwrap();
        assert!(v.norm() > 0.0 && v.norm() < 1e-70, "{v}");
    }

    #[test]
    fn transition_matrix_identity_without_coupling() {
        let p = ModelParams::in_mechanical_units(0.0, 0.0, 0.02).unwrap();
        let t = TransitionMatrix::new(&p, 8).unwrap();
        for m in 0..8 {
            for n in 0..8 {
                assert_eq!(t.get(m, n), if m == n { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn transition_matrix_columns_are_orthonormal() {
        let p = ModelParams::in_mechanical_units(0.8, 0.1, 0.02).unwrap();
        let t = TransitionMatrix::new(&p, 60).unwrap();
        for n in 0..=30 {
            for n2 in 0..=30 {
                let expected = if n == n2 { 1.0 } else { 0.0 };
                let got = t.column_overlap(n, n2);
                assert!((got - expected).abs() < 1e-8, "({n},{n2}): {got}");
            }
        }
    }

    #[test]
    fn transition_matrix_ridge_near_diagonal() {
        let p = ModelParams::in_mechanical_units(0.8, 0.1, 0.02).unwrap();
        let t = TransitionMatrix::new(&p, 60).unwrap();
        for n in 0..30 {
            let column = t.column(n);
            let argmax = (0..60)
                .max_by(|&a, &b| column[a].abs().total_cmp(&column[b].abs()))
                .unwrap();
            // the distribution of a displaced number state peaks near its
            // classical turning points (√n ± |α|)²
            let alpha = p.alpha1().abs();
            let band = 2.0 * alpha * ((n + 1) as f64).sqrt() + alpha * alpha + 1.0;
            assert!((argmax.abs_diff(n) as f64) <= band, "n={n}: dominant m={argmax}");
            // beyond the ridge the envelope (max over the next few rows) falls off
            let envelope = |from: usize| (from..(from + 4).min(60)).map(|m| column[m].abs()).fold(0.0, f64::max);
            for m in ((n + 6)..(n + 24).min(52)).step_by(4) {
                assert!(envelope(m + 4) < envelope(m), "n={n} m={m}");
            }
        }
        // both signs occur
        assert!(t.row(1).iter().any(|&v| v < 0.0) && t.row(1).iter().any(|&v| v > 0.0));
    }

    #[test]
    fn csv_dump_shape() {
        let p = ModelParams::in_mechanical_units(0.8, 0.1, 0.02).unwrap();
        let csv = TransitionMatrix::new(&p, 4).unwrap().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 5);
        assert!(lines.iter().all(|l| l.split(',').count() == 5));
    }

    fn within_precision(m: usize, n: usize, spec: &SqueezeDisplaceSpec) -> Option<(Complex64, f64)> {
        match overlap_sd_with_error(m, n, spec) {
            Ok(v) => Some(v),
            Err(Error::PrecisionLoss { .. }) => None,
            Err(e) => panic!("{e}"),
        }
    }

    proptest! {
        #[test]
        fn displacement_parity(s in 0.0..0.8f64, beta in -2.0..2.0f64, m in 0usize..25, n in 0usize..25) {
            let plus = within_precision(m, n, &SqueezeDisplaceSpec::real(s, beta).unwrap());
            let minus = within_precision(m, n, &SqueezeDisplaceSpec::real(s, -beta).unwrap());
            prop_assume!(plus.is_some() && minus.is_some());
            let ((plus, e1), (minus, e2)) = (plus.unwrap(), minus.unwrap());
            let sign = if (m + n) % 2 == 0 { 1.0 } else { -1.0 };
            prop_assert!((minus - sign * plus).norm() < 1e-12 + e1 + e2);
        }

        #[test]
        fn real_case_has_no_imaginary_part(s in 0.0..0.8f64, beta in -2.0..2.0f64, m in 0usize..30, n in 0usize..30) {
            let v = within_precision(m, n, &SqueezeDisplaceSpec::real(s, beta).unwrap());
            prop_assume!(v.is_some());
            prop_assert!(v.unwrap().0.im.abs() < 1e-12);
        }

        #[test]
        fn bounded_by_one(s in 0.0..0.8f64, beta in -2.0..2.0f64, m in 0usize..60, n in 0usize..60) {
            if let Some((v, err)) = within_precision(m, n, &SqueezeDisplaceSpec::real(s, beta).unwrap()) {
                prop_assert!(v.norm() <= 1.0 + err);
            }
        }
    }
}
