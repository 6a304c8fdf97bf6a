use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("logarithm argument 4*g2*n/omega_m + 1 = {argument} is not positive (n = {photons})")]
    Domain { photons: u32, argument: f64 },

    #[error("quadratic coupling g2 = {g2} < 0 is only supported for photon numbers n <= 1 (requested n = {photons})")]
    NegativeQuadraticCoupling { photons: u32, g2: f64 },

    #[error("overlap <{m}|S D|{n}> is not finite")]
    Overflow { m: usize, n: usize },

    #[error("overlap <{m}|S D|{n}> lost precision to cancellation (error estimate {estimate:e})")]
    PrecisionLoss { m: usize, n: usize, estimate: f64 },

    #[error("truncation N = {dim} did not converge: doubling changed the result by {change:e}")]
    Convergence { dim: usize, change: f64 },

    #[error("diagonalization failed for a {dim}x{dim} sector")]
    Diagonalization { dim: usize },

    #[error("norm drifted to {norm} at t = {time}")]
    NormDrift { time: f64, norm: f64 },

    #[error("step size underflow at t = {time} (h = {step:e})")]
    StepSize { time: f64, step: f64 },

    #[error("spectrum integrates to {integral}, outside 1 +/- {tolerance}")]
    Normalization { integral: f64, tolerance: f64 },

    #[error("truncated state keeps only {kept} of the probability (tail {tail:e} above {limit:e})")]
    Truncation { kept: f64, tail: f64, limit: f64 },

    #[error("grid spacing {spacing} exceeds kappa/5 = {limit}")]
    GridTooCoarse { spacing: f64, limit: f64 },

    #[error("no real g1 solves the energy-shift relation (radicand {radicand}); zero-phonon line likely misidentified")]
    Inconsistent { radicand: f64 },

    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
