//! Scalar-wave simulation of a two-grating electron Talbot interferometer.
//!
//! Fields are one-dimensional complex amplitudes on a periodic grid. A
//! partially coherent beam is an ensemble of tilted Gaussian members, each
//! propagated coherently and summed in intensity.

// `!(x > 0.0)` is the validation idiom here because it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coherence;
pub mod error;
mod fft;
pub mod grating;
pub mod interferometer;
pub mod physics;
pub mod presets;
pub mod wavefield;

pub use coherence::{gsm_ensemble, incoherent_intensity, Ensemble, EnsembleMember, GsmBeam};
pub use error::{Error, Result};
pub use grating::{
    build_transmission, fourier_orders, open_mask, FourierOrders, GratingSpec, SlitPhaseModel,
};
pub use interferometer::{
    align_carpet_rows, demagnified_period, demagnified_revival_plane, fit_wavefront_curvature,
    frame_objective, moire_beat_period, null_positions, transmitted_field, CarpetImage,
    CarpetMetadata, CarpetSetup, DemagSeries, FitResult, Interferometer, RowFundamental,
    SimContext, TransmissionCurve,
};
pub use physics::{
    de_broglie_wavelength, de_broglie_wavelength_nonrelativistic, talbot_distance, BeamEnergy,
    ScanSpec, SetupGeometry, Wavelength,
};
pub use presets::Preset;
pub use wavefield::{FarFieldFrame, FresnelPropagator, TransverseGrid, WaveField};
