//! Numerical studies built on the protocol and tune-up layers. Each study
//! returns a serializable result that carries its own deviation from the
//! relevant closed form where one exists.

pub mod comparison;
pub mod experiment;
pub mod rabi;
pub mod scaling;
pub mod spectroscopy;

pub use comparison::{
    study_performance_projection, study_scheme_comparison, PerformanceProjection, ProjectionSettings, ReadoutAddendum,
    ReadoutResonator, Scheme, SchemeRow, TransmonCouplings,
};
pub use experiment::{
    leakage_channel, single_check_report, study_repeated_checks, tuned_square_check, RepeatedChecksStudy, SingleCheckReport,
    SingleCheckRow, TunedCheck,
};
pub use rabi::{fit_rabi, predicted_rabi_rate, study_power_rabi, PowerRabiPoint, PowerRabiSettings, PowerRabiStudy, RabiFit};
pub use scaling::{
    shared_exponent_fit, study_error_scaling, ChannelExponents, ScalingPoint, ScalingSettings, ScalingStudy, ScalingTune, TransmonChannel,
};
pub use spectroscopy::{
    spectroscopy_input, study_nonsymmetric_spectrum, study_spectroscopy_map, Probe, Ridge, SpectroscopyMap,
    MIN_RIDGE_HEIGHT,
};
