//! Dense truncated Fock-space operators.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::franck_condon::SqueezeDisplaceSpec;
use crate::model::ModelParams;

/// An operator on the first `dim` number states.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedOperator {
    pub dim: usize,
    pub matrix: DMatrix<Complex64>,
}

impl TruncatedOperator {
    /// `b` with `b[m][m+1] = √(m+1)`.
    pub fn annihilation(dim: usize) -> Self {
        let mut matrix = DMatrix::zeros(dim, dim);
        for m in 0..dim.saturating_sub(1) {
            matrix[(m, m + 1)] = Complex64::new(((m + 1) as f64).sqrt(), 0.0);
        }
        Self { dim, matrix }
    }

    pub fn creation(dim: usize) -> Self {
        Self::annihilation(dim).adjoint()
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            matrix: DMatrix::identity(dim, dim),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            dim: self.dim,
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self {
            dim: self.dim,
            matrix: &self.matrix * &other.matrix,
        }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            dim: self.dim,
            matrix: self.matrix.map(|v| v * factor),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            dim: self.dim,
            matrix: &self.matrix + &other.matrix,
        }
    }

    /// `max |([b, b†] - I)_{ij}|` over the first `dim - 1` rows; the last row
    /// carries the truncation artifact `-dim`.
    pub fn commutator_defect(dim: usize) -> f64 {
        let b = Self::annihilation(dim);
        let bd = b.adjoint();
        let comm = &b.matrix * &bd.matrix - &bd.matrix * &b.matrix;
        let mut worst: f64 = 0.0;
        for i in 0..dim.saturating_sub(1) {
            for j in 0..dim {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((comm[(i, j)] - Complex64::new(target, 0.0)).norm());
            }
        }
        worst
    }

    /// `exp(G)` for anti-Hermitian `G`, through the eigensystem of the
    /// Hermitian `iG`.
    pub fn exp_anti_hermitian(&self) -> Result<Self> {
        let i = Complex64::new(0.0, 1.0);
        let hermitian = self.matrix.map(|v| v * i);
        let eigen = SymmetricEigen::try_new(hermitian, f64::EPSILON, 0)
            .ok_or(Error::Diagonalization { dim: self.dim })?;
        let phases = eigen
            .eigenvalues
            .map(|lambda| Complex64::from_polar(1.0, -lambda));
        let v = &eigen.eigenvectors;
        let mut scaled = v.clone();
        for (j, phase) in phases.iter().enumerate() {
            for row in 0..self.dim {
                scaled[(row, j)] *= *phase;
            }
        }
        Ok(Self {
            dim: self.dim,
            matrix: scaled * v.adjoint(),
        })
    }
}

/// `Ŝ(ζ) D̂(β)` built from dense exponentials of the truncated generators
/// `(ζ* b² - ζ b†²)/2` and `β b† - β* b`.
pub fn squeeze_displace_operator(spec: &SqueezeDisplaceSpec, dim: usize) -> Result<TruncatedOperator> {
    let b = TruncatedOperator::annihilation(dim);
    let bd = b.adjoint();
    let zeta = Complex64::from_polar(spec.s, spec.theta);
    let squeeze_gen = b
        .compose(&b)
        .scale(zeta.conj() * 0.5)
        .add(&bd.compose(&bd).scale(-zeta * 0.5));
    let displace_gen = bd.scale(spec.beta).add(&b.scale(-spec.beta.conj()));
    let squeeze = squeeze_gen.exp_anti_hermitian()?;
    let displace = displace_gen.exp_anti_hermitian()?;
    Ok(squeeze.compose(&displace))
}

/// Brute-force overlaps `⟨m|Ŝ(ζ) D̂(β)|n⟩` that survived an N-doubling
/// stability test.
#[derive(Debug, Clone)]
pub struct OracleOverlaps {
    dim: usize,
    max_index: usize,
    matrix: DMatrix<Complex64>,
    /// largest change seen between `dim` and `2 dim`
    pub doubling_change: f64,
}

/// Doubling must move no entry by more than this.
pub const DOUBLING_TOLERANCE: f64 = 1e-10;

impl OracleOverlaps {
    /// Overlaps for all `m, n <= max_index`, starting at truncation `dim` and
    /// doubling until two successive truncations agree, up to `max_dim`.
    pub fn converged(spec: &SqueezeDisplaceSpec, dim: usize, max_index: usize, max_dim: usize) -> Result<Self> {
        if 4 * (max_index + 1) > dim {
            return Err(invalid(
                "trunc",
                format!("indices up to {max_index} need a truncation of at least {}", 4 * (max_index + 1)),
            ));
        }
        let mut current = squeeze_displace_operator(spec, dim)?;
        let mut dim = dim;
        loop {
            let doubled = squeeze_displace_operator(spec, 2 * dim)?;
            let mut change: f64 = 0.0;
            for m in 0..=max_index {
                for n in 0..=max_index {
                    change = change.max((current.matrix[(m, n)] - doubled.matrix[(m, n)]).norm());
                }
            }
            if change < DOUBLING_TOLERANCE {
                return Ok(Self {
                    dim,
                    max_index,
                    matrix: current.matrix,
                    doubling_change: change,
                });
            }
            if 2 * dim > max_dim {
                return Err(Error::Convergence { dim, change });
            }
            dim *= 2;
            current = doubled;
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, m: usize, n: usize) -> Complex64 {
        assert!(m <= self.max_index && n <= self.max_index, "index outside the verified block");
        self.matrix[(m, n)]
    }
}

/// Largest truncation the doubling test may escalate to.
pub const MAX_ORACLE_DIM: usize = 800;

/// `⟨m|Ŝ(r_1) D̂(α_1)|n⟩` by dense matrix exponentials at truncation `trunc`.
pub fn oracle_overlap(m: usize, n: usize, params: &ModelParams, trunc: usize) -> Result<Complex64> {
    let spec = SqueezeDisplaceSpec::single_photon(params);
    let oracle = OracleOverlaps::converged(&spec, trunc, m.max(n), MAX_ORACLE_DIM)?;
    Ok(oracle.get(m, n))
}

/// Real symmetric matrix of `ω_M b†b + g1 n (b† + b) + g2 n (b† + b)²`
/// restricted to `n_photon` photons.
pub fn sector_hamiltonian(n_photon: u32, params: &ModelParams, trunc: usize) -> DMatrix<f64> {
    let n = f64::from(n_photon);
    let mut h = DMatrix::zeros(trunc, trunc);
    for m in 0..trunc {
        let mf = m as f64;
        // (b† + b)² = b² + b†² + 2 b†b + 1
        h[(m, m)] = params.omega_m * mf + params.g2 * n * (2.0 * mf + 1.0);
        if m + 1 < trunc {
            let x = (mf + 1.0).sqrt();
            h[(m, m + 1)] = params.g1 * n * x;
            h[(m + 1, m)] = params.g1 * n * x;
        }
        if m + 2 < trunc {
            let x2 = ((mf + 1.0) * (mf + 2.0)).sqrt();
            h[(m, m + 2)] = params.g2 * n * x2;
            h[(m + 2, m)] = params.g2 * n * x2;
        }
    }
    h
}

/// Ascending eigenvalues of the truncated photon sector.
pub fn diagonalize_sector(n_photon: u32, params: &ModelParams, trunc: usize) -> Result<Vec<f64>> {
    params.validate()?;
    if trunc == 0 {
        return Err(invalid("trunc", "must be positive"));
    }
    let h = sector_hamiltonian(n_photon, params, trunc);
    let eigen = SymmetricEigen::try_new(h, f64::EPSILON, 0).ok_or(Error::Diagonalization { dim: trunc })?;
    let mut values: Vec<f64> = eigen.eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ladder_operator_entries() {
        let b = TruncatedOperator::annihilation(5);
        assert_eq!(b.matrix[(2, 3)], Complex64::new(3f64.sqrt(), 0.0));
        assert_eq!(b.matrix[(3, 2)], Complex64::new(0.0, 0.0));
        assert!(TruncatedOperator::commutator_defect(40) < 1e-10);
    }

    #[test]
    fn exponential_is_unitary() {
        let spec = SqueezeDisplaceSpec::new(0.3, 0.7, Complex64::new(0.4, -0.2)).unwrap();
        let u = squeeze_displace_operator(&spec, 60).unwrap();
        let defect = (&u.matrix * u.matrix.adjoint() - DMatrix::<Complex64>::identity(60, 60)).camax();
        assert!(defect < 1e-11, "{defect}");
    }

    #[test]
    fn oracle_trivial_values() {
        let free = ModelParams::in_mechanical_units(0.0, 0.0, 0.02).unwrap();
        assert_relative_eq!(oracle_overlap(0, 0, &free, 40).unwrap().re, 1.0, epsilon = 1e-12);
        let lin = ModelParams::in_mechanical_units(0.8, 0.0, 0.02).unwrap();
        let v = oracle_overlap(0, 1, &lin, 40).unwrap();
        assert_relative_eq!(v.re, 0.8 * (-0.32f64).exp(), epsilon = 1e-11);
        assert!((v.re - 0.5809).abs() < 1e-4);
    }

    #[test]
    fn oracle_rejects_unsafe_truncation() {
        let p = ModelParams::in_mechanical_units(0.8, 0.1, 0.02).unwrap();
        assert!(oracle_overlap(10, 2, &p, 20).is_err());
    }

    #[test]
    fn free_sector_is_harmonic() {
        let p = ModelParams::in_mechanical_units(0.8, 0.05, 0.02).unwrap();
        let values = diagonalize_sector(0, &p, 30).unwrap();
        for (m, v) in values.iter().enumerate() {
            assert_relative_eq!(*v, m as f64, epsilon = 1e-10);
        }
    }

    #[test]
    fn polaron_shift() {
        let p = ModelParams::in_mechanical_units(0.8, 0.0, 0.02).unwrap();
        let values = diagonalize_sector(1, &p, 120).unwrap();
        assert_relative_eq!(values[0], -0.64, epsilon = 1e-9);
    }

    #[test]
    fn dressed_ladder_spacing() {
        let p = ModelParams::in_mechanical_units(0.8, 0.05, 0.02).unwrap();
        let values = diagonalize_sector(1, &p, 150).unwrap();
        for w in values[..8].windows(2) {
            assert_relative_eq!(w[1] - w[0], 1.2f64.sqrt(), epsilon = 1e-7);
        }
        assert!((1.2f64.sqrt() - 1.0954).abs() < 5e-5);
    }
}
