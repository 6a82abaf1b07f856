//! Calibration fits and simulator-driven tune-up of the erasure check.

mod alignment;
mod chevron;
mod gaussian;
mod polynomial;
mod square;

pub use alignment::{spectroscopy_alignment, AlignmentReport};
pub use chevron::{chevron_model, fit_chevron, simulate_chevron, ChevronData, ChevronFitResult};
pub use gaussian::{tune_gaussian_erasure_check, GaussianTuneConfig, GaussianTuneReport};
pub use polynomial::{fit_amplitude_polynomial, AmplitudePolynomial};
pub use square::{
    transfer_infidelities, tune_square_erasure_check, CheckBounds, TuneOptions, TuneupResult,
};
