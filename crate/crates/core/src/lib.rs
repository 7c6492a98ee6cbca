//! Benchmarking homodyne against heterodyne quantum state tomography for
//! continuous-variable states truncated to a finite Fock basis.
//!
//! The crate computes classical Fisher information and Cramér-Rao bounds for
//! binned quadrature and coherent-state measurements, simulates measurement
//! records, and reconstructs states by maximum likelihood.

pub mod campaign;
pub mod error;
pub mod fisher;
pub mod fock;
pub mod ggm;
pub mod grid;
pub mod mle;
pub mod povm;
pub mod sim;
pub mod state;

pub use error::{Error, Result};
pub use grid::{GridSpec, Modality};
pub use state::{make_state, DensityMatrix, StateKind, StateSpec};
