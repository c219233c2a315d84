//! Simulation of polarization-qubit tomography through dispersive
//! multi-order wave plates.
//!
//! The crate models wave plates with a wavelength-dependent retardance,
//! builds polyhedral measurement protocols with both the ideal (design
//! wavelength) and spectrally averaged ("fuzzy") operators, simulates count
//! data, reconstructs states by maximum likelihood and predicts the
//! resulting infidelity from the Fisher information.

pub mod analysis;
pub mod error;
pub mod measurement;
pub mod optics;
pub mod presets;
pub mod quantum;
pub mod tomography;

pub use analysis::{compare_models, run_campaign, CampaignResult, Comparison, ExperimentConfig};
pub use error::{Error, Result};
pub use measurement::{build_protocol, MeasurementProtocol, OperatorModel, Symmetry};
pub use quantum::{DensityMatrix, Operator, StateVector};
