//! Gaussian wave packets scattering on a repulsive delta barrier: exact
//! closed-form evolution, the asymptotic transmission coefficient `T(A, B)`,
//! and grid and propagator-quadrature references to check both.
//!
//! Everything is generic over [`Real`] (`f32` or `f64`); the aliases below fix
//! the scalar to `f64`. Natural units `ħ = m = 1` throughout.

// `!(a < b)` is used on purpose so that NaN inputs are rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod delta_closed_form;
pub mod error;
pub mod gaussian_packet;
pub mod quadrature;
pub mod scalar;
pub mod special_functions;
pub mod tdse_oracle;
pub mod transmission;

pub use error::{Error, Result};
pub use scalar::{Cplx, Real};

pub type C64 = Cplx<f64>;
pub type PacketSpecF64 = gaussian_packet::PacketSpec<f64>;
pub type MomentSetF64 = gaussian_packet::MomentSet<f64>;
pub type UnitSystemF64 = gaussian_packet::UnitSystem<f64>;
pub type BarrierSpecF64 = delta_closed_form::BarrierSpec<f64>;
pub type GuardsF64 = delta_closed_form::Guards<f64>;
pub type WavefunctionGridF64 = delta_closed_form::WavefunctionGrid<f64>;
pub type DimensionlessPointF64 = transmission::DimensionlessPoint<f64>;
pub type TransmissionResultF64 = transmission::TransmissionResult<f64>;
pub type SweepRowF64 = transmission::SweepRow<f64>;
pub type SolverConfigF64 = tdse_oracle::SolverConfig<f64>;
pub type ScatteringOutcomeF64 = tdse_oracle::ScatteringOutcome<f64>;
pub type ConvergenceReportF64 = tdse_oracle::ConvergenceReport<f64>;
