//! Single-photon emission and scattering spectra of a cavity optomechanical
//! system with linear and quadratic coupling, with brute-force oracles and
//! inference of the couplings from spectral features.
//!
//! All energies are in units of the mechanical frequency `ω_M`.

// `!(x > 0.0)` also rejects NaN, which is the point
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod emission;
pub mod error;
pub mod franck_condon;
pub mod grid;
pub mod io;
pub mod model;
pub mod oracle;
pub mod scattering;
pub mod state;

pub use emission::{emission_amplitude, emission_spectrum};
pub use error::{Error, Result};
pub use franck_condon::{hermite, overlap_sd, overlap_sd_with_error, SqueezeDisplaceSpec, TransitionMatrix};
pub use grid::{DetuningGrid, SpectrumGrid, SpectrumMeta, SpectrumSource};
pub use io::{parse_spectrum_csv, spectrum_to_csv, write_spectrum_csv, GridSpec};
pub use model::{EigenLevel, ModelParams, Resolution, SqueezeDisplaceParams, SubPeakSpacing};
pub use scattering::{scattering_amplitude, scattering_spectrum, WavepacketParams};
pub use state::{InitKind, MechanicalInitState, Populations};
pub use analysis::{analyze, find_extrema, infer_c_and_g1, infer_g2, AnalysisOptions, PeakClass, PeakReport};
