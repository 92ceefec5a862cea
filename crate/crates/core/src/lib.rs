//! Frequency-domain quantum noise model of a detuned optomechanical
//! Fabry-Perot cavity.
//!
//! The crate covers the static cavity quantities and optical spring
//! ([`cavity`]), the radiation-pressure dynamics of the mirror
//! ([`dynamics`]), a two-photon quadrature input-output solve
//! ([`quantum_noise`]), displacement noise budgets for transmission and
//! reflection readout ([`noise_budget`]), split-detector cross-correlation
//! with an in-loop servo ([`cross_correlation`]) and optical-spring based
//! calibration ([`calibration`]).

pub mod calibration;
pub mod cavity;
pub mod constants;
pub mod cross_correlation;
pub mod dynamics;
pub mod error;
pub mod noise_budget;
pub mod presets;
pub mod quantum_noise;
pub mod spectrum;

pub use cavity::{CavityConfig, Damping, InjectionSide, MechanicalMode};
pub use error::{Error, Result};
pub use quantum_noise::{build_io_model, IoModel, Port};
pub use spectrum::{NoiseSpectrum, SpectrumUnits};
