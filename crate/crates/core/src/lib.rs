//! Reduced dynamics of a quantum impurity coupled to a Markovian (Lindblad)
//! environment and a non-Markovian fermionic bath, computed with the
//! non-crossing approximation of the real-time hybridization expansion.
//!
//! Module map:
//!
//! - [`liouville`]: vectorized operators, superoperators, Lindblad generators.
//! - [`hybridization`]: bath hybridization functions and contour components.
//! - [`nca`]: NCA self-energy and the Dyson equation stepper.
//! - [`diagrams`]: brute-force first-order diagram used as an oracle.
//! - [`analysis`]: states, observables and spectral diagnostics.
//! - [`model`]: the single-level impurity used throughout.

pub mod analysis;
pub mod diagrams;
pub mod error;
pub mod hybridization;
pub mod liouville;
pub mod model;
pub mod nca;

pub use error::{NcaError, Result};
pub use liouville::{OperatorMatrix, SuperOp, VectorizedOperator, C64};
pub use nca::{solve_dyson, NcaProblem, PropagatorHistory};
