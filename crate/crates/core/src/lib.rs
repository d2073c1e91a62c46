//! Numerical toolkit for continuous-time quantum walks on a line and the
//! constructions built on top of them: Bessel-function propagators,
//! Johnson-graph clock encodings, circuit-to-Hamiltonian reductions (time
//! independent and piecewise constant), permutation and twisted hash
//! chains with query-depth accounting, and the sparse-oracle view of the
//! permutation-chain walk graph.
//!
//! Every closed-form fast path is paired with an independent dense or
//! brute-force oracle in the tests, and the `acceptance` module bundles
//! the full verification suite.

pub mod acceptance;
pub mod bessel;
pub mod chains;
pub mod clock;
pub mod error;
pub mod feynman;
pub mod linalg;
pub mod sparse_oracle;
pub mod timedep;
pub mod walk;

pub use error::{Error, Result};
