//! Brute-force reference computations: dense Fock-space operators and
//! time-domain bath evolution.

pub mod bath;
pub mod fock;

pub use bath::{evolve_amplitudes, BathDiscretization, PhotonStart, Propagator, Snapshot};
pub use fock::{diagonalize_sector, oracle_overlap, squeeze_displace_operator, OracleOverlaps, TruncatedOperator};
