//! Closed-form results checked against brute-force oracles at one parameter
//! set, collected into a JSON report.

use num_complex::Complex64;
use optomech_core::emission::weighted_transitions;
use optomech_core::grid::UNIT_INTEGRAL_TOLERANCE;
use optomech_core::oracle::bath::l2_relative_error;
use optomech_core::oracle::fock::MAX_ORACLE_DIM;
use optomech_core::oracle::{
    diagonalize_sector, evolve_amplitudes, BathDiscretization, OracleOverlaps, PhotonStart, Propagator,
};
use optomech_core::{
    emission_spectrum, overlap_sd, scattering_spectrum, DetuningGrid, InitKind, MechanicalInitState, ModelParams,
    SqueezeDisplaceSpec, TransitionMatrix, WavepacketParams,
};
use serde::{Deserialize, Serialize};

use crate::error::CliResult;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub analytic: f64,
    pub oracle: f64,
    pub abs_error: f64,
    pub rel_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when the relative error is within `tolerance`.
    fn relative(name: impl Into<String>, analytic: f64, oracle: f64, tolerance: f64) -> Self {
        let abs_error = (analytic - oracle).abs();
        let rel_error = abs_error / oracle.abs().max(f64::MIN_POSITIVE);
        Self {
            name: name.into(),
            analytic,
            oracle,
            abs_error,
            rel_error,
            tolerance,
            pass: rel_error <= tolerance,
        }
    }

    /// Passes when the absolute error is within `tolerance`.
    fn absolute(name: impl Into<String>, analytic: f64, oracle: f64, tolerance: f64) -> Self {
        let mut c = Self::relative(name, analytic, oracle, tolerance);
        c.pass = c.abs_error <= tolerance;
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub params: ModelParams,
    pub checks: Vec<Check>,
    pub passed: usize,
    pub failed: usize,
}

pub struct VerifyOptions {
    pub params: ModelParams,
    /// include the bath propagation, the slowest check
    pub time_domain: bool,
}

fn eigen_checks(p: &ModelParams, out: &mut Vec<Check>) -> CliResult<()> {
    for n in [0u32, 1] {
        let numeric = diagonalize_sector(n, p, 200)?;
        for (m, e) in numeric.iter().enumerate().take(11) {
            out.push(Check::absolute(
                format!("eigen energy n={n} m={m}"),
                p.eigen_energy(n, m)?,
                *e,
                1e-6 * p.omega_m,
            ));
        }
    }
    Ok(())
}

fn overlap_check(p: &ModelParams, out: &mut Vec<Check>) -> CliResult<()> {
    let spec = SqueezeDisplaceSpec::single_photon(p);
    let oracle = OracleOverlaps::converged(&spec, 128, 15, MAX_ORACLE_DIM)?;
    let mut worst = (0.0, 0, 0, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    for m in 0..=15 {
        for n in 0..=15 {
            let closed = overlap_sd(m, n, &spec)?;
            let reference = oracle.get(m, n);
            let err = (closed - reference).norm();
            if err >= worst.0 {
                worst = (err, m, n, closed, reference);
            }
        }
    }
    let (_, m, n, closed, reference) = worst;
    let mut c = Check::absolute(
        format!("overlap, worst of m,n <= 15 (m={m} n={n})"),
        closed.re,
        reference.re,
        1e-8,
    );
    c.abs_error = worst.0;
    c.rel_error = worst.0 / reference.norm().max(f64::MIN_POSITIVE);
    c.pass = worst.0 <= 1e-8;
    out.push(c);
    Ok(())
}

fn integral_checks(p: &ModelParams, out: &mut Vec<Check>) -> CliResult<()> {
    let n_max = 60;
    let t = TransitionMatrix::new(p, n_max)?;
    let init = MechanicalInitState::new(InitKind::Number { m0: 0 }, n_max, &t)?;
    let grid = DetuningGrid::with_tails(-12.0, 10.0, (p.kappa / 10.0).min(0.002), 1e5, 1.05)?;
    let s = emission_spectrum(&init, &grid, &t)?;
    out.push(Check::absolute("emission unit integral", s.integral(), 1.0, UNIT_INTEGRAL_TOLERANCE));
    let wp = WavepacketParams::on_zero_phonon_line(p, 2.0)?;
    let s = scattering_spectrum(&init, wp, &grid, &t)?;
    out.push(Check::absolute("scattering unit integral", s.integral(), 1.0, UNIT_INTEGRAL_TOLERANCE));
    Ok(())
}

fn elastic_check(p: &ModelParams, out: &mut Vec<Check>) -> CliResult<()> {
    let free = ModelParams::new(p.omega_m, 0.0, 0.0, p.kappa)?;
    let t = TransitionMatrix::new(&free, 8)?;
    let init = MechanicalInitState::new(InitKind::Number { m0: 0 }, 8, &t)?;
    let wp = WavepacketParams::new(-0.3, 0.5)?;
    let grid = DetuningGrid::uniform(-20.0, 20.0, 0.01)?;
    let s = scattering_spectrum(&init, wp, &grid, &t)?;
    let (mut worst, mut at) = (0.0, 0);
    for (i, (d, v)) in s.deltas.iter().zip(&s.values).enumerate() {
        let rel = (v / wp.input_density(*d) - 1.0).abs();
        if rel > worst {
            worst = rel;
            at = i;
        }
    }
    out.push(Check::relative(
        "scattering elastic limit, worst point",
        s.values[at],
        wp.input_density(s.deltas[at]),
        1e-10,
    ));
    Ok(())
}

fn time_domain_check(p: &ModelParams, out: &mut Vec<Check>) -> CliResult<()> {
    let n_max = 60;
    let t = TransitionMatrix::new(p, n_max)?;
    let init = MechanicalInitState::new(InitKind::Number { m0: 0 }, n_max, &t)?;
    let lines = weighted_transitions(&init, &t, 0.0);
    let centroid = lines.iter().map(|(e, w)| e * w).sum::<f64>() / lines.iter().map(|l| l.1).sum::<f64>();
    let t_final = 8.0 / p.kappa;
    let bath = BathDiscretization::for_observation(centroid, 8.0 * p.omega_m, t_final, p.kappa)?;
    let snap = evolve_amplitudes(&t, &bath, &init, PhotonStart::Cavity, t_final, 16, Propagator::default())?;
    let bin = 3;
    let numeric: Vec<f64> = snap.binned_spectrum(&bath, bin).iter().map(|b| b.1).collect();
    let analytic = emission_spectrum(&init, &DetuningGrid::from_points(bath.detunings.clone())?, &t)?;
    let reference: Vec<f64> = analytic
        .values
        .chunks(bin)
        .take(numeric.len())
        .map(|c| c.iter().sum::<f64>() / bin as f64)
        .collect();
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let err = l2_relative_error(&numeric, &reference);
    out.push(Check {
        name: format!("time-domain bath spectrum, L2 over {} modes", bath.n_modes),
        analytic: norm(&reference),
        oracle: norm(&numeric),
        abs_error: err * norm(&reference),
        rel_error: err,
        tolerance: 1e-2,
        pass: err < 1e-2,
    });
    Ok(())
}

pub fn run_verify(opts: &VerifyOptions) -> CliResult<VerifyReport> {
    let p = &opts.params;
    let mut checks = Vec::new();
    eigen_checks(p, &mut checks)?;
    overlap_check(p, &mut checks)?;
    integral_checks(p, &mut checks)?;
    elastic_check(p, &mut checks)?;
    if opts.time_domain {
        time_domain_check(p, &mut checks)?;
    }
    let passed = checks.iter().filter(|c| c.pass).count();
    Ok(VerifyReport {
        params: *p,
        failed: checks.len() - passed,
        passed,
        checks,
    })
}
