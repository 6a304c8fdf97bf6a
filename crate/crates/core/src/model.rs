//! Closed-form spectrum of the mixed optomechanical Hamiltonian
//!
//! `H = ω_M b†b + g1 a†a (b† + b) + g2 a†a (b† + b)²` conserves the photon
//! number `n`. In each photon sector the mechanics is a shifted, stiffened
//! oscillator, diagonalized by a squeeze `r_n` followed by a displacement
//! `α_n`. Everything here is in the frame rotating at the cavity frequency.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Physical rates of the model. All four share one unit; the CLI fixes
/// `omega_m = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub omega_m: f64,
    pub g1: f64,
    pub g2: f64,
    pub kappa: f64,
}

impl ModelParams {
    pub fn new(omega_m: f64, g1: f64, g2: f64, kappa: f64) -> Result<Self> {
        let params = Self {
            omega_m,
            g1,
            g2,
            kappa,
        };
        params.validate()?;
        Ok(params)
    }

    /// Parameters expressed as ratios to the mechanical frequency.
    pub fn in_mechanical_units(g1: f64, g2: f64, kappa: f64) -> Result<Self> {
        Self::new(1.0, g1, g2, kappa)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("omega_m", self.omega_m),
            ("g1", self.g1),
            ("g2", self.g2),
            ("kappa", self.kappa),
        ] {
            if !value.is_finite() {
                return Err(invalid(name, format!("{value} is not finite")));
            }
        }
        if self.omega_m <= 0.0 {
            return Err(invalid("omega_m", "must be positive"));
        }
        if self.kappa <= 0.0 {
            return Err(invalid("kappa", "must be positive"));
        }
        if 4.0 * self.g2 / self.omega_m + 1.0 <= 0.0 {
            return Err(invalid(
                "g2",
                format!("must exceed -omega_m/4 = {}", -self.omega_m / 4.0),
            ));
        }
        Ok(())
    }

    pub fn with_g1(self, g1: f64) -> Self {
        Self { g1, ..self }
    }

    pub fn with_g2(self, g2: f64) -> Self {
        Self { g2, ..self }
    }

    pub fn with_kappa(self, kappa: f64) -> Self {
        Self { kappa, ..self }
    }

    /// Squeeze parameter `r_n = ln(4 g2 n / ω_M + 1) / 4`.
    pub fn squeeze_param(&self, n: u32) -> Result<f64> {
        if n == 0 {
            return Ok(0.0);
        }
        if self.g2 < 0.0 && n > 1 {
            return Err(Error::NegativeQuadraticCoupling {
                photons: n,
                g2: self.g2,
            });
        }
        let argument = 4.0 * self.g2 * f64::from(n) / self.omega_m + 1.0;
        if argument <= 0.0 {
            return Err(Error::Domain {
                photons: n,
                argument,
            });
        }
        Ok(argument.ln() / 4.0)
    }

    /// Displacement `α_n = -g1 e^{-3 r_n} n / ω_M`.
    pub fn displace_param(&self, n: u32) -> Result<f64> {
        let r = self.squeeze_param(n)?;
        Ok(-self.g1 * (-3.0 * r).exp() * f64::from(n) / self.omega_m)
    }

    pub fn squeeze_displace(&self, n: u32) -> Result<SqueezeDisplaceParams> {
        Ok(SqueezeDisplaceParams {
            n,
            r_n: self.squeeze_param(n)?,
            alpha_n: self.displace_param(n)?,
        })
    }

    /// Equally spaced mechanical ladder of the `n`-photon sector.
    pub fn ladder(&self, n: u32) -> Result<Ladder> {
        let r = self.squeeze_param(n)?;
        let nf = f64::from(n);
        let offset = self.g2 * (-2.0 * r).exp() * nf + self.omega_m * r.sinh().powi(2)
            - self.g1 * self.g1 * (-4.0 * r).exp() / self.omega_m * nf * nf;
        Ok(Ladder {
            photons: n,
            offset,
            spacing: self.omega_m * (2.0 * r).exp(),
        })
    }

    /// Rotating-frame eigenvalue `E'_{n,m}`.
    pub fn eigen_energy(&self, n: u32, m: usize) -> Result<f64> {
        Ok(self.ladder(n)?.energy(m))
    }

    pub fn eigen_level(&self, n: u32, m: usize) -> Result<EigenLevel> {
        Ok(EigenLevel {
            n,
            m,
            energy: self.eigen_energy(n, m)?,
        })
    }

    pub fn vacuum_ladder(&self) -> Ladder {
        Ladder {
            photons: 0,
            offset: 0.0,
            spacing: self.omega_m,
        }
    }

    pub fn single_photon_ladder(&self) -> Ladder {
        self.ladder(1)
            .expect("validated parameters always admit the one-photon sector")
    }

    pub fn r1(&self) -> f64 {
        self.squeeze_param(1)
            .expect("validated parameters always admit the one-photon sector")
    }

    pub fn alpha1(&self) -> f64 {
        -self.g1 * (-3.0 * self.r1()).exp() / self.omega_m
    }

    /// Ground-level shift `C` induced by one photon: `C = -E'_{1,0}`.
    pub fn energy_shift_c(&self) -> f64 {
        let r = self.r1();
        self.g1 * self.g1 * (-4.0 * r).exp() / self.omega_m
            - self.g2 * (-2.0 * r).exp()
            - self.omega_m * r.sinh().powi(2)
    }

    /// Emission resonance `ω_M e^{2 r_1} n - ω_M m - C` for the transition
    /// `|1, ñ(1)⟩ → |0, m⟩`.
    pub fn sideband_location(&self, n: usize, m: usize) -> f64 {
        self.omega_m * (2.0 * self.r1()).exp() * n as f64
            - self.omega_m * m as f64
            - self.energy_shift_c()
    }

    pub fn sub_peak_spacing(&self) -> SubPeakSpacing {
        SubPeakSpacing {
            exact: self.omega_m * ((1.0 + 4.0 * self.g2 / self.omega_m).sqrt() - 1.0),
            small_coupling: 2.0 * self.g2,
        }
    }

    /// Whether the sidebands (`ω_M > κ`) and the sub peaks
    /// (`ω_M (e^{2 r_1} - 1) > κ`) are both resolvable.
    pub fn check_resolution(&self) -> Resolution {
        let spacing = self.sub_peak_spacing().exact;
        Resolution {
            ok: self.omega_m > self.kappa && spacing > self.kappa,
            margin: spacing / self.kappa,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezeDisplaceParams {
    pub n: u32,
    pub r_n: f64,
    pub alpha_n: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenLevel {
    pub n: u32,
    pub m: usize,
    pub energy: f64,
}

/// `E'_{n,m} = offset + spacing * m` for a fixed photon number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ladder {
    pub photons: u32,
    pub offset: f64,
    pub spacing: f64,
}

impl Ladder {
    #[inline]
    pub fn energy(&self, m: usize) -> f64 {
        self.offset + self.spacing * m as f64
    }

    pub fn energies(&self, count: usize) -> Vec<f64> {
        (0..count).map(|m| self.energy(m)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubPeakSpacing {
    /// `ω_M (√(1 + 4 g2/ω_M) - 1)`
    pub exact: f64,
    /// `2 g2`, valid for `g2 ≪ ω_M`
    pub small_coupling: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    pub ok: bool,
    /// sub-peak spacing over κ
    pub margin: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn params(g1: f64, g2: f64) -> ModelParams {
        ModelParams::in_mechanical_units(g1, g2, 0.02).unwrap()
    }

    #[test]
    fn squeeze_values() {
        assert_eq!(params(0.8, 0.1).squeeze_param(0).unwrap(), 0.0);
        assert_relative_eq!(
            params(0.8, 0.1).squeeze_param(1).unwrap(),
            1.4_f64.ln() / 4.0,
            epsilon = 1e-15
        );
        assert!((params(0.8, 0.1).squeeze_param(1).unwrap() - 0.0841).abs() < 5e-5);
        assert_eq!(params(0.8, 0.0).squeeze_param(1).unwrap(), 0.0);
    }

    #[test]
    fn displacement_values() {
        assert_relative_eq!(params(0.8, 0.0).displace_param(1).unwrap(), -0.8);
        assert_eq!(params(0.8, 0.1).displace_param(0).unwrap(), 0.0);
        let alpha = params(0.8, 0.1).displace_param(1).unwrap();
        assert_relative_eq!(alpha, -0.8 * (-3.0 * 1.4_f64.ln() / 4.0).exp(), epsilon = 1e-15);
        assert!((alpha + 0.6216).abs() < 5e-5);
    }

    #[test]
    fn eigen_energy_values() {
        let p = params(0.8, 0.0);
        assert_eq!(p.eigen_energy(0, 3).unwrap(), 3.0);
        assert_relative_eq!(p.eigen_energy(1, 0).unwrap(), -0.64, epsilon = 1e-15);
        let e = params(0.8, 0.01).eigen_energy(1, 0).unwrap();
        assert!((e + 0.6055).abs() < 5e-5, "{e}");
    }

    #[test]
    fn energy_shift_values() {
        assert_relative_eq!(params(0.8, 0.0).energy_shift_c(), 0.64, epsilon = 1e-15);
        assert!((params(0.8, 0.01).energy_shift_c() - 0.6055).abs() < 5e-5);
        assert_eq!(params(0.0, 0.0).energy_shift_c(), 0.0);
    }

    #[test]
    fn sideband_values() {
        let p = params(0.8, 0.01);
        assert_relative_eq!(p.sideband_location(0, 0), -p.energy_shift_c());
        let lin = params(0.8, 0.0);
        assert_relative_eq!(lin.sideband_location(0, 1), -1.64, epsilon = 1e-14);
        // sub peaks collapse onto the main peaks without quadratic coupling
        assert_relative_eq!(lin.sideband_location(1, 1), -0.64, epsilon = 1e-14);
    }

    #[test]
    fn sub_peak_spacing_values() {
        let s = params(0.8, 0.05).sub_peak_spacing();
        assert!((s.exact - 0.09545).abs() < 5e-6);
        assert_relative_eq!(s.small_coupling, 0.1);
        assert_eq!(params(0.8, 0.0).sub_peak_spacing().exact, 0.0);
        assert_relative_eq!(
            params(0.8, 0.1).sub_peak_spacing().exact,
            1.4_f64.sqrt() - 1.0,
            epsilon = 1e-15
        );
        assert!((params(0.8, 0.1).sub_peak_spacing().exact - 0.18322).abs() < 5e-6);
    }

    #[test]
    fn resolution_values() {
        let ok = params(0.8, 0.05).check_resolution();
        assert!(ok.ok);
        assert!((ok.margin - 4.77).abs() < 5e-3);
        assert!(!params(0.8, 0.05).with_kappa(0.15).check_resolution().ok);
        assert!(!params(0.8, 0.0).with_kappa(1e-4).check_resolution().ok);
    }

    #[test]
    fn negative_quadratic_coupling_window() {
        let p = params(0.8, -0.1);
        assert!(p.squeeze_param(1).unwrap() < 0.0);
        assert!(matches!(
            p.squeeze_param(2),
            Err(Error::NegativeQuadraticCoupling { photons: 2, .. })
        ));
        assert!(ModelParams::in_mechanical_units(0.8, -0.25, 0.02).is_err());
        assert!(ModelParams::in_mechanical_units(0.8, 0.1, 0.0).is_err());
        assert!(ModelParams::new(0.0, 0.8, 0.1, 0.02).is_err());
        assert!(ModelParams::in_mechanical_units(f64::NAN, 0.1, 0.02).is_err());
    }

    #[test]
    fn vacuum_ladder_is_free_oscillator() {
        let p = params(0.8, 0.05);
        assert_eq!(p.ladder(0).unwrap(), p.vacuum_ladder());
    }

    proptest! {
        #[test]
        fn shift_is_minus_single_photon_ground(g1 in -2.0..2.0f64, g2 in 0.0..0.5f64) {
            let p = params(g1, g2);
            let e10 = p.eigen_energy(1, 0).unwrap();
            prop_assert!((p.energy_shift_c() + e10).abs() <= 1e-12 * (1.0 + e10.abs()));
        }

        #[test]
        fn sideband_is_energy_difference(g1 in -2.0..2.0f64, g2 in 0.0..0.5f64, n in 0usize..=30, m in 0usize..=30) {
            let p = params(g1, g2);
            let direct = p.eigen_energy(1, n).unwrap() - p.eigen_energy(0, m).unwrap();
            prop_assert!((p.sideband_location(n, m) - direct).abs() <= 1e-12 * (1.0 + direct.abs()));
        }

        #[test]
        fn squeeze_grows_with_photon_number(g2 in 1e-4..1.0f64, n in 1u32..20) {
            let p = params(0.8, g2);
            prop_assert!(p.squeeze_param(n + 1).unwrap() > p.squeeze_param(n).unwrap());
            prop_assert!(p.single_photon_ladder().spacing > 1.0);
        }

        #[test]
        fn linear_limit_is_polaron_shift(g1 in -2.0..2.0f64, m in 0usize..50) {
            let p = params(g1, 0.0);
            let expected = m as f64 - g1 * g1;
            prop_assert!((p.eigen_energy(1, m).unwrap() - expected).abs() <= 1e-12 * (1.0 + expected.abs()));
        }

        #[test]
        fn vacuum_sector_is_exact(g1 in -2.0..2.0f64, g2 in 0.0..0.5f64, m in 0usize..100) {
            prop_assert_eq!(params(g1, g2).eigen_energy(0, m).unwrap(), m as f64);
        }
    }
}
