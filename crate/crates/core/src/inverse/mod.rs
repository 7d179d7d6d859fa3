//! Structure recovery: spectra, pushforward densities, multiplicities, and Bohr-pair recovery.

mod density;
mod quotient;
mod recovery;
mod spectrum;

pub use density::{
    best_arc, default_window, estimate_multiplicity, estimate_sup, fit_arc, pushforward, ArcFit, DensityFunction,
    Multiplicity,
};
pub use quotient::{quotient_candidates, quotient_character};
pub use recovery::{
    recover_bohr_pair, transfer_structure, CandidateScore, Diagnostics, GrowthStep, RecoveryConfig, RecoveryResult,
    Transfer, TransferOptions,
};
pub use spectrum::{detect_character, fourier_coefficient, spectrum, Detection, Spectrum, SpectrumEntry, FLAT_THRESHOLD};
