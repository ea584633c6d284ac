//! Sparse linear classification with a combined l0/l1/l2 penalty.
//!
//! The library fits classifiers minimizing
//!
//! ```text
//! P(beta) = (1/n) sum_i f(<x_i, beta>, y_i)
//!           + lambda0 * ||beta||_0 + lambda1 * ||beta||_1 + lambda2 * ||beta||_2^2
//! ```
//!
//! for the logistic, squared-hinge, and smoothed-hinge losses, using three
//! families of algorithms of increasing solution quality:
//!
//! - [`cd`]: cyclic coordinate descent with a closed-form per-coordinate
//!   thresholding step, active sets, and incremental score caching;
//! - [`local_search`]: coordinate descent interleaved with single-coordinate
//!   support swaps (exhaustive or restricted-gradient heuristic);
//! - [`mip`]: a big-M mixed-integer formulation solved by a built-in
//!   branch-and-bound routine, scaled up by integrality generation, which
//!   certifies global optimality via matching upper/lower bounds.
//!
//! [`iht`] provides hard-thresholding solvers for the cardinality-constrained
//! variant, [`path`] computes regularization paths with warm starts over a
//! dynamic lambda0 grid, [`data`] handles file ingestion and the synthetic
//! Gaussian designs used in benchmarks, and [`metrics`] implements AUC and
//! support-recovery measures.

pub mod cd;
pub mod data;
pub mod iht;
pub mod local_search;
pub mod loss;
pub mod metrics;
pub mod mip;
pub mod path;

mod error;

pub use error::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[cfg(test)]
pub(crate) mod test_util {
    use crate::data::Dataset;
    use crate::loss::LossKind;

    pub(crate) fn oracle_cols(d: &Dataset) -> Vec<Vec<f64>> {
        (0..d.p()).map(|j| d.column(j).to_dense(d.n())).collect()
    }

    pub(crate) fn oracle_loss(kind: LossKind) -> l0class_oracles::Loss {
        match kind {
            LossKind::Logistic => l0class_oracles::Loss::Logistic,
            LossKind::SquaredHinge => l0class_oracles::Loss::SquaredHinge,
            LossKind::SmoothedHinge { mu } => l0class_oracles::Loss::SmoothedHinge(mu),
        }
    }
}
