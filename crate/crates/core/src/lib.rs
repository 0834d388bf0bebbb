//! Numerical model of momentum-entangled biphoton pairs subject to
//! dissipative interactions (ionization, inelastic scattering) on the idler
//! arm.
//!
//! The crate builds decoherence kernels for the idler photon, applies them to
//! discretized joint states, evaluates entanglement diagnostics (Schmidt
//! spectrum, PPT negativity, purity), and evaluates the operational survival
//! threshold `N σ_q² < σ_p² − σ_c²` for physical scenarios.
//!
//! All numerical routines are generic over the scalar type through the
//! [`Real`] trait (`f32` or `f64`); concrete `f64` aliases are exported at the
//! crate root.

pub mod amplitude;
pub mod bound;
pub mod constants;
pub mod decoherence;
pub mod density;
pub mod error;
pub mod grid;
pub mod linalg;
pub mod metrics;
pub mod scalar;
pub mod scenario;

pub use amplitude::BiphotonAmplitude;
pub use bound::BoundState;
pub use decoherence::{DecoherenceKernel, MatrixElementParams};
pub use density::{JointDensityMatrix, ReducedDensityMatrix, StateDiagnostics};
pub use error::{Error, Result};
pub use grid::MomentumGrid;
pub use metrics::SchmidtSpectrum;
pub use scalar::Real;
pub use scenario::{Recoil, Scenario, SweepAxis, SweepResult, ThresholdVerdict};

/// `f64` aliases for the main domain types.
pub type MomentumGrid64 = MomentumGrid<f64>;
pub type BiphotonAmplitude64 = BiphotonAmplitude<f64>;
pub type BoundState64 = BoundState<f64>;
pub type DecoherenceKernel64 = DecoherenceKernel<f64>;
pub type JointDensityMatrix64 = JointDensityMatrix<f64>;
pub type SchmidtSpectrum64 = SchmidtSpectrum<f64>;
pub type Scenario64 = Scenario<f64>;
pub type ThresholdVerdict64 = ThresholdVerdict<f64>;
