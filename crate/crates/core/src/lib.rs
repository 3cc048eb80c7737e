//! Resource theory of athermal states at finite, exactly checkable sizes.
//!
//! The crate covers interconversion rates between states under thermal
//! operations, explicit distillation and formation protocols built from the
//! method of types, d-level work extraction, reference-frame constructions
//! for coherent targets, and simulators that execute protocols exactly.
//!
//! State-level code is generic over [`scalar::Real`] (`f32`, `f64`);
//! counting is exact with big integers and switches to log-gamma at large
//! sizes.

pub mod coherent;
pub mod counting;
pub mod distill;
pub mod error;
pub mod form;
pub mod linalg;
pub mod monotone;
pub mod multilevel;
pub mod random;
pub mod scalar;
pub mod simulate;
pub mod state;
pub mod strings;
pub mod typeclass;

pub use error::{Error, Result};
pub use scalar::{Probability, Real};
pub use state::{gibbs_state, DensityMatrix, GibbsState, Hamiltonian, QuasiclassicalState};

pub type Hamiltonian64 = Hamiltonian<f64>;
pub type Hamiltonian32 = Hamiltonian<f32>;
pub type DensityMatrix64 = DensityMatrix<f64>;
pub type DensityMatrix32 = DensityMatrix<f32>;
pub type GibbsState64 = GibbsState<f64>;
pub type GibbsState32 = GibbsState<f32>;
pub type QuasiclassicalState64 = QuasiclassicalState<f64>;
pub type QuasiclassicalState32 = QuasiclassicalState<f32>;
/// Exact probability weights for audits.
pub type ExactProbability = num_rational::BigRational;
