//! The hard-core activity operator `F`, fixed-point iteration, and the
//! contraction threshold `λ̂(k)`.
//!
//! For a branching order `k ≥ 1`, an activity sequence `λ`, and a 0/1
//! compatibility kernel `a` with an all-ones first row,
//!
//! ```text
//! (F x)_i = λ_i · ( (1 + Σ_j a_ij x_j) / (1 + ‖x‖) )^k .
//! ```
//!
//! Because `a_1j ≡ 1`, the first output coordinate is `λ₁` *bit-exactly* (the
//! ratio is the same float divided by itself), and every coordinate satisfies
//! `0 < (Fx)_i ≤ λ_i`. Consequently `F` maps the whole positive cone into the
//! norm slab `A_k` (see [`crate::sequence::InvariantSetBounds`]).
//!
//! # Contraction threshold
//!
//! On `A_k`, `F` is a contraction whenever `‖λ‖ < λ̂(k)`, where `λ̂(k)` is the
//! unique positive root of
//!
//! ```text
//! φ(t) = 2k·t³ + (3k−1)·t² + (k−2)·t − 2 ,
//! ```
//!
//! bracketed by `φ(0) = −2 < 0` and `φ(2) = 30k − 10 > 0`. The root is found
//! numerically; a radical expression exists but its inner square root turns
//! negative for k ≥ 11, so it serves only as a cross-check where real
//! ([`lambda_hat_radical`]). The condition is sufficient, not necessary —
//! [`certify`] reports `Inconclusive`, never "not a contraction".

use crate::cubic::{unique_positive_root, Cubic};
use crate::error::{Error, Result};
use crate::sequence::{ActivitySpec, InvariantSetBounds, TruncatedPoint};
use rand::Rng;

/// A 0/1 compatibility kernel with an all-ones first row.
///
/// The four built-in rules have O(1) row sums given the parity aggregates of
/// the state; `Custom` stores an explicit finite matrix and delegates to a
/// built-in rule outside it.
#[derive(Debug, Clone, PartialEq)]
pub enum AdjacencyKernel {
    /// `a_ij = 1` everywhere: `F` collapses to the constant map `x ↦ λ`.
    AllOnes,
    /// First row and first column ones, zero elsewhere.
    Star,
    /// First column zero below row one, every other entry one.
    CoStar,
    /// First column zero below row one; for i, j ≥ 2, `a_ij = 1` iff `i + j`
    /// is even (coordinates interact within their parity class).
    Parity,
    /// Explicit rectangular 0/1 matrix for indices inside it; entries with a
    /// row *or* column index beyond the matrix follow the fallback rule.
    Custom {
        rows: Vec<Vec<u8>>,
        fallback: Box<AdjacencyKernel>,
    },
}

impl AdjacencyKernel {
    /// Build a custom kernel, enforcing a rectangular 0/1 matrix whose first
    /// row (if present) is all ones.
    pub fn custom(rows: Vec<Vec<u8>>, fallback: AdjacencyKernel) -> Result<Self> {
        if let AdjacencyKernel::Custom { .. } = fallback {
            return Err(Error::InvalidKernel {
                reason: "fallback must be a built-in rule".into(),
            });
        }
        if let Some(first) = rows.first() {
            let width = first.len();
            if width == 0 {
                return Err(Error::InvalidKernel {
                    reason: "matrix rows must be non-empty".into(),
                });
            }
            for (i, row) in rows.iter().enumerate() {
                if row.len() != width {
                    return Err(Error::InvalidKernel {
                        reason: format!("row {} has length {}, expected {width}", i + 1, row.len()),
                    });
                }
                for (j, &e) in row.iter().enumerate() {
                    if e > 1 {
                        return Err(Error::InvalidKernel {
                            reason: format!("entry ({}, {}) is {e}; entries must be 0 or 1", i + 1, j + 1),
                        });
                    }
                }
            }
            if first.iter().any(|&e| e != 1) {
                return Err(Error::InvalidKernel {
                    reason: "first row must be all ones".into(),
                });
            }
        }
        Ok(AdjacencyKernel::Custom {
            rows,
            fallback: Box::new(fallback),
        })
    }

    /// Kernel entry `a_ij` with 1-based indices.
    pub fn entry(&self, i: usize, j: usize) -> u8 {
        debug_assert!(i >= 1 && j >= 1);
        match self {
            AdjacencyKernel::AllOnes => 1,
            AdjacencyKernel::Star => u8::from(i == 1 || j == 1),
            AdjacencyKernel::CoStar => u8::from(!(i >= 2 && j == 1)),
            AdjacencyKernel::Parity => {
                if i == 1 {
                    1
                } else if j == 1 {
                    0
                } else {
                    u8::from((i + j) % 2 == 0)
                }
            }
            AdjacencyKernel::Custom { rows, fallback } => {
                let width = rows.first().map_or(0, Vec::len);
                if i <= rows.len() && j <= width {
                    rows[i - 1][j - 1]
                } else {
                    fallback.entry(i, j)
                }
            }
        }
    }
}

/// Sums of the state grouped the way the built-in kernels consume them.
struct Aggregates {
    /// `‖x‖`
    total: f64,
    /// `x₁`
    first: f64,
    /// `x₃ + x₅ + …` (odd coordinates above the first)
    odd: f64,
    /// `x₂ + x₄ + …`
    even: f64,
}

impl Aggregates {
    fn of(x: &TruncatedPoint) -> Self {
        let mut odd = 0.0;
        let mut even = 0.0;
        for (pos, &v) in x.values().iter().enumerate().skip(1) {
            // 1-based coordinate index is pos + 1
            if (pos + 1) % 2 == 0 {
                even += v;
            } else {
                odd += v;
            }
        }
        Aggregates {
            total: x.norm(),
            first: x.values().first().copied().unwrap_or(0.0),
            odd,
            even,
        }
    }
}

/// `Σ_j a_ij x_j` for a 1-based row index, in O(1) for built-in kernels.
fn row_sum(kernel: &AdjacencyKernel, i: usize, x: &TruncatedPoint, agg: &Aggregates) -> f64 {
    if i == 1 {
        return agg.total; // first row is all ones for every kernel
    }
    match kernel {
        AdjacencyKernel::AllOnes => agg.total,
        AdjacencyKernel::Star => agg.first,
        AdjacencyKernel::CoStar => agg.total - agg.first,
        AdjacencyKernel::Parity => {
            if i % 2 == 0 {
                agg.even
            } else {
                agg.odd
            }
        }
        AdjacencyKernel::Custom { .. } => x
            .values()
            .iter()
            .enumerate()
            .map(|(pos, &v)| f64::from(kernel.entry(i, pos + 1)) * v)
            .sum(),
    }
}

/// One application of `F`.
///
/// The state dimension must not exceed the activity support; `k ≥ 1`.
pub fn apply_f(
    x: &TruncatedPoint,
    spec: &ActivitySpec,
    kernel: &AdjacencyKernel,
    k: u32,
) -> Result<TruncatedPoint> {
    let n = x.dim();
    if n == 0 {
        return Err(Error::InvalidTruncation { n: 0 });
    }
    if n > spec.support() {
        return Err(Error::DimensionMismatch {
            dim: n,
            support: spec.support(),
        });
    }
    if k == 0 {
        return Err(Error::InvalidBranchingOrder { k });
    }
    let agg = Aggregates::of(x);
    let den = 1.0 + agg.total;
    let mut out = Vec::with_capacity(n);
    for i in 1..=n {
        let ratio = (1.0 + row_sum(kernel, i, x, &agg)) / den;
        out.push(spec.entry(i) * ratio.powi(k as i32));
    }
    TruncatedPoint::new(out)
}

/// Result of a fixed-point iteration run.
#[derive(Debug, Clone)]
pub struct IterationOutcome {
    /// Last iterate produced (one application of `F` past `point`'s
    /// predecessor, so it always lies inside the invariant slab).
    pub point: TruncatedPoint,
    /// Number of accepted update steps (0 when the start was already fixed).
    pub iterations: usize,
    /// `‖F(x) − x‖₁` at the returned iterate's predecessor.
    pub residual: f64,
    /// Whether `residual ≤ tol` was reached before `max_iter`.
    pub converged: bool,
    /// Whether the starting point's norm already lay in the invariant slab
    /// (iteration works regardless; the flag aids diagnostics).
    pub started_in_slab: bool,
}

/// Iterate `x ↦ F(x)` until the update is below `tol` in ℓ¹ or `max_iter`
/// update steps have been taken. Exhaustion is reported via
/// [`IterationOutcome::converged`], not an error.
pub fn iterate(
    x0: &TruncatedPoint,
    spec: &ActivitySpec,
    kernel: &AdjacencyKernel,
    k: u32,
    tol: f64,
    max_iter: usize,
) -> Result<IterationOutcome> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidTolerance { value: tol });
    }
    let bounds = InvariantSetBounds::new(spec, k);
    let started_in_slab = bounds.contains_norm(x0.norm());
    let mut cur = x0.clone();
    let mut iterations = 0usize;
    loop {
        let next = apply_f(&cur, spec, kernel, k)?;
        let residual = next.l1_distance(&cur);
        if residual <= tol {
            return Ok(IterationOutcome {
                point: next,
                iterations,
                residual,
                converged: true,
                started_in_slab,
            });
        }
        if iterations >= max_iter {
            return Ok(IterationOutcome {
                point: next,
                iterations,
                residual,
                converged: false,
                started_in_slab,
            });
        }
        cur = next;
        iterations += 1;
    }
}

/// Default iteration tolerance.
pub const DEFAULT_TOL: f64 = 1e-12;
/// Default iteration cap.
pub const DEFAULT_MAX_ITER: usize = 10_000;

/// The threshold cubic `φ(t) = 2k·t³ + (3k−1)·t² + (k−2)·t − 2`.
pub fn phi_cubic(k: u32) -> Result<Cubic> {
    if k < 2 {
        return Err(Error::InvalidBranchingOrder { k });
    }
    let kf = f64::from(k);
    Cubic::new(2.0 * kf, 3.0 * kf - 1.0, kf - 2.0, -2.0)
}

/// `φ(t)` evaluated directly.
pub fn phi(k: u32, t: f64) -> Result<f64> {
    Ok(phi_cubic(k)?.eval(t))
}

/// Contraction threshold `λ̂(k)`: the unique positive root of `φ`.
pub fn lambda_hat(k: u32) -> Result<f64> {
    unique_positive_root(&phi_cubic(k)?)
}

/// The radical expression for `λ̂(k)`,
///
/// ```text
/// λ̂(k) = (1 − 3k + ∛(A + √R) + ∛(A − √R)) / (6k),
/// A = 1 + 9k + 72k²,  R = A² − (1 + 6k + 3k²)³,
/// ```
///
/// which is real only while `R ≥ 0` (k ≤ 10); `None` otherwise.
pub fn lambda_hat_radical(k: u32) -> Result<Option<f64>> {
    if k < 2 {
        return Err(Error::InvalidBranchingOrder { k });
    }
    let kf = f64::from(k);
    let a = 1.0 + 9.0 * kf + 72.0 * kf * kf;
    let inner = 1.0 + 6.0 * kf + 3.0 * kf * kf;
    let r = a * a - inner.powi(3);
    if r < 0.0 {
        return Ok(None);
    }
    let s = r.sqrt();
    Ok(Some(
        (1.0 - 3.0 * kf + (a + s).cbrt() + (a - s).cbrt()) / (6.0 * kf),
    ))
}

/// Analytic verdict of the sufficient contraction condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// `‖λ‖ < λ̂(k)`: `F` is a contraction on the slab.
    Contraction,
    /// The sufficient condition fails; nothing is concluded.
    Inconclusive,
}

/// Outcome of [`certify`].
#[derive(Debug, Clone)]
pub struct ContractionCertificate {
    pub k: u32,
    pub lambda_hat: f64,
    pub norm_lambda: f64,
    /// `φ(‖λ‖)`; negative exactly when the verdict is `Contraction`.
    pub phi_value: f64,
    pub verdict: Verdict,
    /// Largest sampled ratio `‖F(x)−F(y)‖₁ / ‖x−y‖₁` over random pairs in the
    /// slab and all built-in kernels; `None` when `samples == 0`.
    pub empirical_kappa: Option<f64>,
}

/// Draw a point of the slab: target norm uniform in `[lower, upper]`, mass
/// split over `n` coordinates proportionally to positive uniform weights.
pub fn sample_in_slab<R: Rng + ?Sized>(
    bounds: &InvariantSetBounds,
    n: usize,
    rng: &mut R,
) -> TruncatedPoint {
    assert!(n >= 1, "need at least one coordinate");
    let target = rng.gen_range(bounds.lower()..=bounds.upper());
    let mut weights: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let sum: f64 = weights.iter().sum();
    for w in &mut weights {
        *w *= target / sum;
    }
    TruncatedPoint::new(weights).expect("positive weights produce a valid point")
}

/// Certify the sufficient contraction condition for `λ` at order `k`.
///
/// The analytic verdict compares `‖λ‖` against `λ̂(k)` (equivalently the sign
/// of `φ(‖λ‖)`; the two tests agree by construction of the root). When
/// `samples > 0`, random pairs in the slab are pushed through `F` under each
/// built-in kernel and the worst ℓ¹ expansion ratio is recorded; a
/// `Contraction` verdict with an empirical ratio ≥ 1 would be a
/// counterexample, so the certificate downgrades itself to `Inconclusive` in
/// that (never observed) event.
pub fn certify(spec: &ActivitySpec, k: u32, samples: usize, seed: u64) -> Result<ContractionCertificate> {
    use rand::SeedableRng;
    let hat = lambda_hat(k)?;
    let norm = spec.norm();
    let phi_value = phi(k, norm)?;
    let analytic = norm < hat;
    debug_assert_eq!(
        analytic,
        phi_value < 0.0 || (phi_value.abs() <= 1e-9 && analytic),
        "norm/φ sign tests disagree beyond root rounding"
    );

    let mut empirical_kappa = None;
    let mut verdict = if analytic {
        Verdict::Contraction
    } else {
        Verdict::Inconclusive
    };
    if samples > 0 {
        let n = spec.default_truncation().min(64).max(2.min(spec.support()));
        let bounds = InvariantSetBounds::new(spec, k);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        let kernels = [
            AdjacencyKernel::AllOnes,
            AdjacencyKernel::Star,
            AdjacencyKernel::CoStar,
            AdjacencyKernel::Parity,
        ];
        for _ in 0..samples {
            let x = sample_in_slab(&bounds, n, &mut rng);
            let y = sample_in_slab(&bounds, n, &mut rng);
            let dist = x.l1_distance(&y);
            if dist < 1e-14 {
                continue;
            }
            for kernel in &kernels {
                let fx = apply_f(&x, spec, kernel, k)?;
                let fy = apply_f(&y, spec, kernel, k)?;
                worst = worst.max(fx.l1_distance(&fy) / dist);
            }
        }
        empirical_kappa = Some(worst);
        if verdict == Verdict::Contraction && worst >= 1.0 {
            verdict = Verdict::Inconclusive;
        }
    }
    Ok(ContractionCertificate {
        k,
        lambda_hat: hat,
        norm_lambda: norm,
        phi_value,
        verdict,
        empirical_kappa,
    })
}
