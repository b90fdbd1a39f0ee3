//! Fixed points of a hard-core activity operator on Cayley trees.
//!
//! The central object is the map `F` acting on summable sequences of
//! nonnegative activities: given a branching order `k ≥ 2`, an activity
//! sequence `λ`, and a 0/1 compatibility kernel `a` whose first row is all
//! ones,
//!
//! ```text
//! (F x)_i = λ_i · ( (1 + Σ_j a_ij x_j) / (1 + ‖x‖) )^k .
//! ```
//!
//! Fixed points of `F` are in bijection with boundary laws of a hard-core
//! model on the (k+1)-regular tree, and therefore with splitting Gibbs
//! measures. This crate provides:
//!
//! * [`sequence`] — activity sequences with geometric tails, truncation, and
//!   the invariant norm slab that contains every fixed point;
//! * [`cubic`] — robust cubic root extraction plus the closed-form fixed
//!   points of the star and co-star kernels at `k = 2`;
//! * [`operator`] — kernels, the map `F` itself, fixed-point iteration, and
//!   the contraction threshold `λ̂(k)` with a Monte-Carlo certificate;
//! * [`parity`] — the two-block (parity) kernel at `k = 2`: closed-form
//!   solution sets, a region classification of the parameter plane by
//!   fixed-point count, and a brute-force enumeration oracle;
//! * [`gibbs`] — boundary laws, transfer operators, and finite-volume
//!   marginals on Cayley-tree balls, with a consistency check across nested
//!   volumes.

pub mod cubic;
pub mod error;
pub mod gibbs;
pub mod operator;
pub mod parity;
pub mod sequence;

pub use cubic::{
    closed_form_real_roots, closed_form_unique_positive, costar_fixed_norm, costar_fixed_point,
    costar_norm_cubic, positive_roots, real_roots, star_fixed_norm, star_fixed_point,
    star_norm_cubic, unique_positive_root, ClosedFormRoot, Cubic,
};
pub use error::{Error, Result};
pub use gibbs::{
    gibbs_marginal, linear_sum, normalisable, specification_consistency, BoundaryLaw, CayleyBall,
    GibbsMarginal, Region, TransferMatrix, FIXED_POINT_TOL, STORED_TABLE_CAP,
    STREAMED_ENUMERATION_CAP,
};
pub use operator::{
    apply_f, certify, iterate, lambda_hat, lambda_hat_radical, phi, phi_cubic, sample_in_slab,
    AdjacencyKernel, ContractionCertificate, IterationOutcome, Verdict, DEFAULT_MAX_ITER,
    DEFAULT_TOL,
};
pub use parity::{
    analytic_solutions, asymmetric_solutions, boundary_curves, boundary_distance,
    brute_force_enumerate, classify, critical_points, discrepancy_zone, expand_to_full,
    factorization_residual, oracle_sweep, region_sweep, symmetric_cubic, symmetric_solutions,
    CriticalPair, CurveSample, DiscrepancyZone, OracleRow, ReducedParams, ReducedSolution,
    RegionLabel, SolutionKind, SweepRow,
};
pub use sequence::{
    in_invariant_set, ActivitySpec, InvariantSetBounds, TruncatedPoint,
};
