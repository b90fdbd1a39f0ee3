//! Shared fixtures for the benchmark targets: one geometric activity
//! sequence, one reduced parameter point with the full solution multiplicity,
//! and one small boundary law.

use hctree::{
    iterate, ActivitySpec, AdjacencyKernel, BoundaryLaw, ReducedParams, TruncatedPoint,
};

/// Geometric activities with equal parity-block masses and a contractive norm.
pub fn geometric_spec() -> ActivitySpec {
    ActivitySpec::new(vec![0.1, 0.08, 0.12], 0.5).unwrap()
}

/// A contractive iteration start of dimension `n`.
pub fn truncated_start(n: usize) -> (ActivitySpec, TruncatedPoint) {
    let spec = geometric_spec();
    let (x, _) = spec.truncate(n).unwrap();
    (spec, x)
}

/// Parameter point carrying three symmetric solutions plus an asymmetric pair.
pub fn rich_point() -> ReducedParams {
    ReducedParams::new(126.5, 19.0).unwrap()
}

/// Boundary law over `spins` values built from the truncated fixed point.
pub fn parity_law(spins: usize) -> BoundaryLaw {
    let spec = geometric_spec();
    let (x0, _) = spec.truncate(spins - 1).unwrap();
    let out = iterate(&x0, &spec, &AdjacencyKernel::Parity, 2, 1e-15, 10_000).unwrap();
    assert!(out.converged);
    BoundaryLaw::from_fixed_point(&out.point, &spec, &AdjacencyKernel::Parity, 2, spins).unwrap()
}
