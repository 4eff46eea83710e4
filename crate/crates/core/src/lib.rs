//! Extreme joint distributions of multivariate Poisson (and general discrete)
//! random vectors.
//!
//! The crate is organised as a pipeline:
//!
//! 1. [`marginals`] builds truncated discrete marginals with a controlled tail
//!    error.
//! 2. [`ejd`] enumerates monotonicity structures and computes the extreme joint
//!    measure for each one with the staircase sweep, alongside a closed-form
//!    density used as a cross-check.
//! 3. [`moments`] turns measures into correlation matrices.
//! 4. [`calibration`] finds convex weights over the extreme measures that match
//!    a target correlation matrix.
//! 5. [`simulation`] draws sample paths by backward simulation on `[0, T]` and
//!    extends them forward with independent increments.
//!
//! Data-parallel loops (one task per structure, replication or batch) run on
//! rayon when the `parallel` feature is enabled and fall back to plain
//! iterators otherwise. Results do not depend on the thread count.

pub mod calibration;
pub mod ejd;
mod error;
pub mod gof;
pub mod marginals;
pub mod moments;
mod par;
pub mod simulation;

pub use calibration::{
    admissible_bounds, build_mixture, calibrate, calibrate_target, calibrate_with_threshold,
    check_admissible,
    Admissibility, CalibrationProblem, CalibrationResult, CorrelationBounds, MixtureMeasure,
};
pub use ejd::{
    closed_form_density, compute_all_extreme_measures, compute_extreme_measure,
    enumerate_structures, frechet_2d, signed_cdf, ExtremeMeasure, FrechetDirection,
    MonotonicityVector,
};
pub use error::{Error, Result};
pub use marginals::{cdf, poisson_pmf, truncate, DiscreteMarginal, TruncatedMarginal};
pub use moments::{
    correlation_matrix, csm_correlation, mixture_correlation, pairwise_correlation,
    CorrelationMatrix, JointMeasure,
};
pub use simulation::{
    backward_simulate, correlation_curve, empirical_correlation, empirical_correlation_with_se,
    forward_continue, theoretical_corr, CorrelationCurve, CorrelationEstimate, EventPaths,
};
