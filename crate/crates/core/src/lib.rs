//! Negatively dependent batch designs for sample-average approximation.
//!
//! The crate generates families of scenario batches (independent and sliced
//! Latin hypercubes, sliced orthogonal-array Latin hypercubes and their
//! variants), evaluates stochastic programs on them, and estimates the
//! lower bound `L = mean_r v_n(D_r)` together with its sampling variance.

pub mod error;
pub mod estimator;
pub mod io;
pub mod lhs;
pub mod lp;
pub mod oa;
pub mod problems;
pub mod rng;
pub mod scheme;
pub mod solh;

pub use error::{Error, Result};
pub use lhs::{DesignFamily, DesignMatrix, LatinHypercube, Scheme};
pub use oa::OrthogonalArray;
pub use rng::{SeedSpec, Stream};
