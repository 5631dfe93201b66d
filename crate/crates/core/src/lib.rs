//! Analysis of translation-invariant rings and chains of linear quantum
//! stochastic systems.
//!
//! The numerical core is generic over the floating-point type (`f32` or
//! `f64`); the aliases at the crate root fix it to `f64`.

pub mod ensemble;
pub mod entanglement;
pub mod error;
pub mod io;
pub mod linalg;
pub mod lmi;
pub mod model;
pub mod performance;
pub mod scalar;
pub mod spectral;

pub use error::{Error, Result};
pub use scalar::{unit_root, Element, Real};

pub type RealMatrix = linalg::Matrix<f64>;
pub type ComplexMatrix = linalg::CMatrix<f64>;
pub type Network = model::NetworkSpec<f64>;
pub type ValidNetwork = model::ValidatedNetworkSpec<f64>;
pub type Blocks = model::NodeBlocks<f64>;
pub type Spectrum = spectral::SpatialSpectrum<f64>;
pub type Weights = performance::WeightingSequence<f64>;
