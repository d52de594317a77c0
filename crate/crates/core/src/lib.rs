//! Numerical toolkit for a symmetry-tunable non-Hermitian spin-1 model:
//! exceptional-point detection and classification via polynomial resultants,
//! Riemann-sheet sweeps, non-unitary dynamics, a Hermitian dilation with
//! pulse-schedule compilation against an NV-center level ladder, a
//! fluorescence-readout model, and parameter retrieval with Monte-Carlo
//! eigenvalue error bars.

pub mod cubic;
pub mod dilation;
pub mod dynamics;
pub mod ep;
pub mod error;
pub mod linalg;
pub mod model;
pub mod nv;
pub mod readout;
pub mod retrieval;

pub use error::CoreError;
pub use model::{ModelParams, NHMatrix, Symmetry};
