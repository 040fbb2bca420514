//! Fluorescence spectra of strongly driven, strongly dipole-dipole-coupled
//! two-level emitters.
//!
//! The crate builds the Lindblad master equation for N emitters, solves for
//! the steady state, evaluates the one-photon spectrum through the quantum
//! regression theorem (by windowed Fourier transform or by exact Liouvillian
//! eigenmode expansion), and explains every sideband as a transition between
//! collective dressed energy levels.
//!
//! Units: the single-emitter decay rate is 1, distances are `k r`
//! (dimensionless), and spectra are plotted against `omega - omega_L`.
//!
//! The numerical core is generic over the scalar type through [`Real`];
//! the `*64` aliases below fix `f64`, which is what the documented
//! tolerances assume.

// Negated float comparisons are deliberate where they appear: unlike the
// suggested rewrite they also reject NaN. Indexed loops mirror the matrix
// notation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod dressed;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub(crate) mod linalg;
pub mod qops;
pub mod scalar;
pub mod spectrum;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Layout64 = geometry::EmitterLayout<f64>;
pub type Couplings64 = geometry::PairCouplings<f64>;
pub type StrongRegimeReport64 = geometry::StrongRegimeReport<f64>;
pub type Operator64 = qops::QuantumOperator<f64>;
pub type Density64 = qops::DensityMatrix<f64>;
pub type Drive64 = dynamics::DriveParameters<f64>;
pub type Liouvillian64 = dynamics::Liouvillian<f64>;
pub type Steady64 = dynamics::SteadyState<f64>;
pub type FieldOperator64 = spectrum::FieldOperator<f64>;
pub type Trace64 = spectrum::CorrelationTrace<f64>;
pub type Spectrum64 = spectrum::Spectrum<f64>;
pub type PeakSet64 = spectrum::PeakSet<f64>;
pub type DressedLevels64 = dressed::DressedLevels<f64>;
pub type TransitionTable64 = dressed::TransitionTable<f64>;
pub type CouplingBlocks64 = dressed::CouplingBlocks<f64>;
pub type PeakAssignment64 = dressed::PeakAssignment<f64>;
pub type CollectiveBasis64 = dressed::CollectiveBasis<f64>;
pub type ManifoldReport64 = dressed::ManifoldReport<f64>;
