//! Complete analysis of the parity kernel at branching order `k = 2` with
//! equal parity-class masses: solution sets, a region classification of the
//! `(L, λ₁)` plane by fixed-point count, and an independent brute-force
//! enumerator used as an oracle.
//!
//! # The reduced system
//!
//! Under the parity kernel, a fixed point is determined by the two block
//! masses `M₁ = x₃ + x₅ + …` and `M₂ = x₂ + x₄ + …` (the first coordinate is
//! pinned at `λ₁`). With `L₁ = λ₃ + λ₅ + …` and `L₂ = λ₂ + λ₄ + …` both equal
//! to a common `L`, the masses satisfy
//!
//! ```text
//! M_i = L · ( (1 + M_i) / (1 + λ₁ + M₁ + M₂) )² ,  i = 1, 2 .        (reduced)
//! ```
//!
//! Subtracting the two equations factorizes as
//!
//! ```text
//! (M₁ − M₂) · [ (1 + λ₁ + M₁ + M₂)² − L(2 + M₁ + M₂) ] = 0 ,
//! ```
//!
//! splitting the solution set into a *symmetric* family (`M₁ = M₂ = M`) and an
//! *asymmetric* family (`M₁ ≠ M₂`, second factor zero).
//!
//! **Symmetric:** `M = L((1+M)/(1+λ₁+2M))²`, equivalently `a = f(M)` with
//! `a = 4/L`, `b = (1+λ₁)/2`, `f(x) = (1/x)((1+x)/(b+x))²`. For `b ≤ 9` the
//! map `f` is strictly decreasing and there is exactly one root; for `b > 9`
//! it has a local minimum/maximum at `x_{1,2} = (b−3 ∓ √(b²−10b+9))/2` and the
//! root count is 1, 2, or 3 according to the position of `a` relative to
//! `[f(x₁), f(x₂)]`. Equivalently, `M` is a positive root of the cubic
//! `−4M³ + (L−4(1+λ₁))M² + (2L−(1+λ₁)²)M + L`.
//!
//! **Asymmetric:** with `t = M₁ + M₂`, the second factor gives
//! `t² + (2+2λ₁−L)t + (1+λ₁)² − 2L = 0`, so `t_{1,2} = ½(L−2−2λ₁ ± √D)` with
//! `D = L(L+4−4λ₁)`. Substituting back forces `M₁M₂ = 1`, hence
//! `M_{1,2} = ½(t ± √(t²−4))`, which is a genuine unordered pair exactly when
//! `t > 2` (at `t = 2` it degenerates to the symmetric point `M = 1`).
//!
//! # Counting convention and known discrepancy zones
//!
//! An unordered pair `{M₁, M₂}` is counted **once**: its two orderings are the
//! odd/even block assignments of one another, and the tabulated maximal count
//! 5 (three symmetric + the `t₁` pair + the `t₂` pair) is only consistent with
//! unordered counting. The printed region table is kept verbatim in
//! [`classify`]; measured against the unordered convention and the direct
//! `t > 2` test it mispredicts in two zones, surfaced by
//! [`discrepancy_zone`] and never silently reconciled:
//!
//! * [`DiscrepancyZone::PairConvention`] — the interior of the printed `B₁`,
//!   where the table says 3 but only the `t₁` pair exists (true count 2: the
//!   row counts the pair's two orderings separately).
//! * [`DiscrepancyZone::ExtraPair`] — points outside the printed `B₁ ∪ B₂`
//!   where `t₁ > 2` nonetheless (e.g. `L = 4, λ₁ = 0.6`), so the true count
//!   exceeds the tabulated one by exactly one pair.

use crate::cubic::{positive_roots, Cubic};
use crate::error::{Error, Result};
use crate::operator::AdjacencyKernel;
use crate::sequence::{ActivitySpec, TruncatedPoint};
use rayon::prelude::*;

/// Relative tolerance for equality against the critical values `f(x₁)`,
/// `f(x₂)` (the two-solution tangency cases). `4/128` is exact in binary64
/// while `4/125` is off by one ulp, so exact comparison would misclassify
/// printed endpoint examples.
pub const CRITICAL_EQ_TOL: f64 = 1e-12;

/// Distance (in natural units, see [`boundary_distance`]) below which a point
/// is flagged as sitting on a region boundary.
pub const NEAR_BOUNDARY_EPS: f64 = 1e-9;

/// Relative tolerance for deduplicating enumerated solutions.
pub const DEDUP_TOL: f64 = 1e-6;

/// Parameters of the reduced two-block system: common block activity mass
/// `L > 0` and first activity `λ₁ > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedParams {
    pub l: f64,
    pub lambda1: f64,
}

impl ReducedParams {
    pub fn new(l: f64, lambda1: f64) -> Result<Self> {
        if !(l > 0.0 && l.is_finite() && lambda1 > 0.0 && lambda1.is_finite()) {
            return Err(Error::InvalidReducedParams { l, lambda1 });
        }
        Ok(Self { l, lambda1 })
    }

    /// `a = 4/L` — the level the symmetric scalar map must hit.
    pub fn a(&self) -> f64 {
        4.0 / self.l
    }

    /// `b = (1+λ₁)/2 > 1/2`.
    pub fn b(&self) -> f64 {
        (1.0 + self.lambda1) / 2.0
    }
}

/// Which family of the factorization a solution belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolutionKind {
    Symmetric,
    Asymmetric,
}

/// A solution `(M₁, M₂)` of the reduced system. Asymmetric solutions are
/// canonical unordered pairs stored with `m1 ≥ m2` and satisfy `M₁M₂ = 1`.
#[derive(Debug, Clone, Copy)]
pub struct ReducedSolution {
    pub m1: f64,
    pub m2: f64,
    pub kind: SolutionKind,
    /// `t = M₁ + M₂`.
    pub t: f64,
}

impl ReducedSolution {
    fn symmetric(m: f64) -> Self {
        ReducedSolution {
            m1: m,
            m2: m,
            kind: SolutionKind::Symmetric,
            t: 2.0 * m,
        }
    }

    fn asymmetric_from_t(t: f64) -> Self {
        // m1 from the stable (+) branch; m2 via the product law M₁M₂ = 1,
        // which avoids the cancellation in ½(t − √(t²−4)) for large t.
        let m1 = 0.5 * (t + (t * t - 4.0).sqrt());
        ReducedSolution {
            m1,
            m2: 1.0 / m1,
            kind: SolutionKind::Asymmetric,
            t,
        }
    }
}

/// Critical points of the symmetric scalar map `f(·, b)` (present iff `b > 9`).
#[derive(Debug, Clone, Copy)]
pub struct CriticalPair {
    /// Local-minimum location `x₁ = (b−3−√(b²−10b+9))/2`.
    pub x1: f64,
    /// Local-maximum location `x₂ = (b−3+√(b²−10b+9))/2`.
    pub x2: f64,
    /// `f(x₁)` (the smaller critical value).
    pub f_x1: f64,
    /// `f(x₂)` (the larger critical value).
    pub f_x2: f64,
}

/// The symmetric-case scalar map `f(x) = (1/x)((1+x)/(b+x))²`.
pub fn f(x: f64, b: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::NonPositiveArgument { value: x });
    }
    debug_assert!(b > 0.0);
    let r = (1.0 + x) / (b + x);
    Ok(r * r / x)
}

/// The two positive critical points of `f(·, b)`, or `None` when `b ≤ 9`
/// (where `f` is strictly decreasing; `b = 9` is the double-root boundary).
pub fn critical_points(b: f64) -> Option<CriticalPair> {
    if !(b > 9.0) {
        return None;
    }
    let disc = b * b - 10.0 * b + 9.0; // (b−1)(b−9) > 0 here
    let s = disc.sqrt();
    let x1 = 0.5 * (b - 3.0 - s);
    let x2 = 0.5 * (b - 3.0 + s);
    Some(CriticalPair {
        x1,
        x2,
        f_x1: f(x1, b).expect("x1 > 0 for b > 9"),
        f_x2: f(x2, b).expect("x2 > 0"),
    })
}

/// The cubic whose positive roots are the symmetric solutions:
/// `−4M³ + (L−4(1+λ₁))M² + (2L−(1+λ₁)²)M + L`
/// (polynomial form of `M(1+λ₁+2M)² = L(1+M)²`).
pub fn symmetric_cubic(p: &ReducedParams) -> Cubic {
    let u = 1.0 + p.lambda1;
    Cubic::new(-4.0, p.l - 4.0 * u, 2.0 * p.l - u * u, p.l)
        .expect("leading coefficient is -4")
}

/// All symmetric solutions `M₁ = M₂ = M`. The count follows the trichotomy:
/// 1 when `b ≤ 9` or `a ∉ [f(x₁), f(x₂)]`, 2 at the endpoints (tangencies),
/// 3 strictly inside.
pub fn symmetric_solutions(p: &ReducedParams) -> Vec<ReducedSolution> {
    let mut roots = positive_roots(&symmetric_cubic(p));
    // A tangent double root is reported twice by the cubic solver but is one
    // solution of the reduced system.
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * b.abs().max(1.0));
    roots.into_iter().map(ReducedSolution::symmetric).collect()
}

/// `true` when `(L, λ₁)` lies in the window `L > 8`, `√(2L)−1 < λ₁ < L/4+1`
/// inside which *both* quadratic roots `t₁, t₂` are positive. Diagnostic
/// only: positivity of `t` is neither necessary nor sufficient for an
/// asymmetric pair — the operative test is `t > 2`, applied per root in
/// [`asymmetric_solutions`].
pub fn both_roots_positive_window(p: &ReducedParams) -> bool {
    p.l > 8.0 && (2.0 * p.l).sqrt() - 1.0 < p.lambda1 && p.lambda1 < p.l / 4.0 + 1.0
}

/// All asymmetric solutions: for each real root `t ∈ {t₁, t₂}` of
/// `t² + (2+2λ₁−L)t + (1+λ₁)² − 2L` with `t > 2` strictly, the unordered pair
/// `{½(t+√(t²−4)), ½(t−√(t²−4))}` (product exactly 1). `t = 2` degenerates to
/// the symmetric point `M = 1` and is excluded here.
pub fn asymmetric_solutions(p: &ReducedParams) -> Vec<ReducedSolution> {
    let d = p.l * (p.l + 4.0 - 4.0 * p.lambda1);
    if d < 0.0 {
        return Vec::new();
    }
    let s = d.sqrt();
    let base = p.l - 2.0 - 2.0 * p.lambda1;
    let t1 = 0.5 * (base + s);
    let t2 = 0.5 * (base - s);
    let mut out = Vec::new();
    for t in [t2, t1] {
        if t > 2.0 {
            out.push(ReducedSolution::asymmetric_from_t(t));
        }
    }
    if d == 0.0 && out.len() == 2 {
        out.pop(); // t₁ = t₂: one pair, not two
    }
    out
}

/// Symmetric and asymmetric solutions together, sorted by `(t, m1)`.
pub fn analytic_solutions(p: &ReducedParams) -> Vec<ReducedSolution> {
    let mut all = symmetric_solutions(p);
    all.extend(asymmetric_solutions(p));
    sort_solutions(&mut all);
    all
}

fn sort_solutions(v: &mut [ReducedSolution]) {
    v.sort_by(|a, b| {
        (a.t, a.m1)
            .partial_cmp(&(b.t, b.m1))
            .expect("solution coordinates are finite")
    });
}

/// Residuals of the two reduced equations in polynomial form:
/// `R_i = L(1+M_i)² − M_i(1+λ₁+M₁+M₂)²`.
pub fn reduced_residuals(p: &ReducedParams, m1: f64, m2: f64) -> (f64, f64) {
    let c = 1.0 + p.lambda1 + m1 + m2;
    (
        p.l * (1.0 + m1) * (1.0 + m1) - m1 * c * c,
        p.l * (1.0 + m2) * (1.0 + m2) - m2 * c * c,
    )
}

/// Residual of the reduced equations in their direct (division) form:
/// `max_i |M_i − L((1+M_i)/(1+λ₁+M₁+M₂))²|`.
pub fn direct_residual(p: &ReducedParams, m1: f64, m2: f64) -> f64 {
    let c = 1.0 + p.lambda1 + m1 + m2;
    let r1 = m1 - p.l * ((1.0 + m1) / c).powi(2);
    let r2 = m2 - p.l * ((1.0 + m2) / c).powi(2);
    r1.abs().max(r2.abs())
}

/// The second factor of the factorization identity,
/// `(1+λ₁+t)² − L(2+t)`, which every asymmetric solution annihilates.
pub fn factorization_residual(p: &ReducedParams, t: f64) -> f64 {
    let c = 1.0 + p.lambda1 + t;
    c * c - p.l * (2.0 + t)
}

/// Region membership booleans plus the tabulated fixed-point count.
///
/// The membership inequalities reproduce the printed set definitions
/// *verbatim*, including their closed/open boundary choices:
///
/// ```text
/// A₁/A₂/A₃ : trichotomy position of a = 4/L vs [f(x₁), f(x₂)]  (b ≤ 9 ⇒ A₁)
/// B  : 8+4√3 ≤ L ≤ 16          and  √(2L)−1 < λ₁ ≤ L/2−3
/// C  : L > 6+4√2               and  max(L/2−3, √(2L)−1) < λ₁ ≤ 2√L−3
/// B₁ : B ∪ C
/// B₂ : L > 8                   and  2√L−3 ≤ λ₁ ≤ min(L/2−3, L/4+1)
/// ```
///
/// `predicted` applies the tabulated case rows in print order (first match):
/// `A₁∖(B₁∪B₂) → 1`, `A₂∖B₂ → 2`, `B₁ → 3`, `B₂∖(A₂∪A₃) → 3`, `A₃∖B₂ → 3`,
/// `A₁∩B₁ → 3`, `A₁∩B₂ → 3`, `A₂∩B₂ → 4`, `A₃∩B₂ → 5`; the rows cover the
/// whole quadrant, so `None` ("unclassified") is structurally unreachable but
/// kept honest rather than defaulted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegionLabel {
    pub in_a1: bool,
    pub in_a2: bool,
    pub in_a3: bool,
    pub in_b: bool,
    pub in_c: bool,
    pub in_b1: bool,
    pub in_b2: bool,
    /// Tabulated count; `None` would mean no case row matched.
    pub predicted: Option<u32>,
    /// Within [`NEAR_BOUNDARY_EPS`] of some region boundary curve.
    pub near_boundary: bool,
}

/// Evaluate the printed region memberships and tabulated count at `(L, λ₁)`.
pub fn classify(p: &ReducedParams) -> RegionLabel {
    let a = p.a();
    let b = p.b();
    let (in_a1, in_a2, in_a3) = match critical_points(b) {
        None => (true, false, false),
        Some(cp) => {
            let near1 = (a - cp.f_x1).abs() <= CRITICAL_EQ_TOL * a.max(cp.f_x1);
            let near2 = (a - cp.f_x2).abs() <= CRITICAL_EQ_TOL * a.max(cp.f_x2);
            if near1 || near2 {
                (false, true, false)
            } else if cp.f_x1 < a && a < cp.f_x2 {
                (false, false, true)
            } else {
                (true, false, false)
            }
        }
    };

    let (l, l1) = (p.l, p.lambda1);
    let sqrt2l = (2.0 * l).sqrt();
    let in_b = (8.0 + 4.0 * 3.0f64.sqrt()..=16.0).contains(&l)
        && sqrt2l - 1.0 < l1
        && l1 <= l / 2.0 - 3.0;
    let in_c = l > 6.0 + 4.0 * 2.0f64.sqrt()
        && (l / 2.0 - 3.0).max(sqrt2l - 1.0) < l1
        && l1 <= 2.0 * l.sqrt() - 3.0;
    let in_b1 = in_b || in_c;
    let in_b2 = l > 8.0
        && 2.0 * l.sqrt() - 3.0 <= l1
        && l1 <= (l / 2.0 - 3.0).min(l / 4.0 + 1.0);

    let rows: [(bool, u32); 9] = [
        (in_a1 && !(in_b1 || in_b2), 1),
        (in_a2 && !in_b2, 2),
        (in_b1, 3),
        (in_b2 && !(in_a2 || in_a3), 3),
        (in_a3 && !in_b2, 3),
        (in_a1 && in_b1, 3),
        (in_a1 && in_b2, 3),
        (in_a2 && in_b2, 4),
        (in_a3 && in_b2, 5),
    ];
    let predicted = rows.iter().find(|(hit, _)| *hit).map(|&(_, n)| n);

    RegionLabel {
        in_a1,
        in_a2,
        in_a3,
        in_b,
        in_c,
        in_b1,
        in_b2,
        predicted,
        near_boundary: boundary_distance(p) <= NEAR_BOUNDARY_EPS,
    }
}

/// The two values of `L` on the critical-value curves at a given `λ₁ ≥ 17`
/// (`b ≥ 9`): `(L_lower, L_upper)` with
/// `L_± = (2λ₁² + 76λ₁ − 142 ± (2λ₁−34)√(λ₁²−18λ₁+17)) / 16`.
/// The lens `A₃` is exactly `L_lower < L < L_upper`; its cusp is `(108, 17)`.
pub fn a2_curve_l(lambda1: f64) -> Option<(f64, f64)> {
    let radicand = lambda1 * lambda1 - 18.0 * lambda1 + 17.0; // (λ₁−1)(λ₁−17)
    if lambda1 < 17.0 || radicand < 0.0 {
        return None;
    }
    let s = radicand.sqrt();
    let base = 2.0 * lambda1 * lambda1 + 76.0 * lambda1 - 142.0;
    let w = (2.0 * lambda1 - 34.0) * s;
    Some(((base - w) / 16.0, (base + w) / 16.0))
}

/// Distance from `(L, λ₁)` to the nearest region boundary, measured in
/// whichever coordinate the boundary is graphed over: `L`-units for the
/// critical-value curves `L_±(λ₁)` and the vertical lines
/// `L ∈ {8, 6+4√2, 8+4√3, 16}`, and `λ₁`-units for the curves
/// `λ₁ ∈ {√(2L)−1, L/2−3, 2√L−3, L/4+1}` and the line `λ₁ = 17`.
pub fn boundary_distance(p: &ReducedParams) -> f64 {
    let (l, l1) = (p.l, p.lambda1);
    let mut d = (l1 - 17.0).abs(); // b = 9 line
    if let Some((lo, hi)) = a2_curve_l(l1) {
        d = d.min((l - lo).abs()).min((l - hi).abs());
    }
    for line in [8.0, 6.0 + 4.0 * 2.0f64.sqrt(), 8.0 + 4.0 * 3.0f64.sqrt(), 16.0] {
        d = d.min((l - line).abs());
    }
    for curve in [
        (2.0 * l).sqrt() - 1.0,
        l / 2.0 - 3.0,
        2.0 * l.sqrt() - 3.0,
        l / 4.0 + 1.0,
    ] {
        d = d.min((l1 - curve).abs());
    }
    d
}

/// Zones where the printed count table is known to disagree with the direct
/// `t > 2` analysis under the unordered-pair convention (module docs).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiscrepancyZone {
    /// No known discrepancy: table and direct analysis agree.
    None,
    /// Interior of the printed `B₁`: table says 3, true count is 2
    /// (the single `t₁` pair counted in both orderings).
    PairConvention,
    /// `t₁ > 2` outside the printed `B₁ ∪ B₂`: the table misses one pair.
    ExtraPair,
}

impl DiscrepancyZone {
    /// Token used in CSV output.
    pub fn token(&self) -> &'static str {
        match self {
            DiscrepancyZone::None => "none",
            DiscrepancyZone::PairConvention => "pair-convention",
            DiscrepancyZone::ExtraPair => "extra-pair",
        }
    }
}

/// Which known discrepancy zone (if any) the point falls in.
pub fn discrepancy_zone(p: &ReducedParams) -> DiscrepancyZone {
    let label = classify(p);
    if label.in_b1 {
        return DiscrepancyZone::PairConvention;
    }
    if !label.in_b2 {
        let d = p.l * (p.l + 4.0 - 4.0 * p.lambda1);
        if d >= 0.0 {
            let t1 = 0.5 * (p.l - 2.0 - 2.0 * p.lambda1 + d.sqrt());
            if t1 > 2.0 {
                return DiscrepancyZone::ExtraPair;
            }
        }
    }
    DiscrepancyZone::None
}

// ------------------------------------------------------------------
// Brute-force enumeration
// ------------------------------------------------------------------

/// Positive `m₂` roots of the second reduced equation along the column
/// `M₁ = m1`: `R₂` is exactly the cubic
/// `−m₂³ + (L−2C)m₂² + (2L−C²)m₂ + L` with `C = 1+λ₁+m1`.
fn column_roots(p: &ReducedParams, m1: f64) -> Vec<f64> {
    let c = 1.0 + p.lambda1 + m1;
    let cubic = Cubic::new(-1.0, p.l - 2.0 * c, 2.0 * p.l - c * c, p.l)
        .expect("leading coefficient is -1");
    positive_roots(&cubic)
}

/// Damped 2-D Newton on `(R₁, R₂)`, clamped to the positive quadrant.
/// Returns the refined point if the direct-form residual meets `refine_tol`.
fn newton_2d(p: &ReducedParams, m1: f64, m2: f64, refine_tol: f64) -> Option<(f64, f64)> {
    let mut m1 = m1.max(1e-12);
    let mut m2 = m2.max(1e-12);
    for _ in 0..120 {
        let (r1, r2) = reduced_residuals(p, m1, m2);
        let norm = r1.abs().max(r2.abs());
        let c = 1.0 + p.lambda1 + m1 + m2;
        let a11 = 2.0 * p.l * (1.0 + m1) - c * c - 2.0 * m1 * c;
        let a12 = -2.0 * m1 * c;
        let a21 = -2.0 * m2 * c;
        let a22 = 2.0 * p.l * (1.0 + m2) - c * c - 2.0 * m2 * c;
        let det = a11 * a22 - a12 * a21;
        if det.abs() < 1e-300 {
            break;
        }
        let d1 = (r1 * a22 - r2 * a12) / det;
        let d2 = (a11 * r2 - a21 * r1) / det;
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let n1 = m1 - alpha * d1;
            let n2 = m2 - alpha * d2;
            if n1 > 0.0 && n2 > 0.0 {
                let (s1, s2) = reduced_residuals(p, n1, n2);
                if s1.abs().max(s2.abs()) <= norm * (1.0 - 0.25 * alpha) + 1e-300 {
                    m1 = n1;
                    m2 = n2;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
        if (alpha * d1).abs() <= 1e-15 * m1.max(1.0) && (alpha * d2).abs() <= 1e-15 * m2.max(1.0) {
            break;
        }
    }
    (direct_residual(p, m1, m2) <= refine_tol).then_some((m1, m2))
}

/// Independent symmetric-root scan: brackets sign changes of the *direct*
/// form `g(M) = M − L((1+M)/(1+λ₁+2M))²` on a dense linear grid plus a
/// log-spaced pass for roots below the linear spacing, then bisects.
fn scan_symmetric(p: &ReducedParams, m_max: f64, refine_tol: f64) -> Vec<(f64, f64)> {
    let g = |m: f64| m - p.l * ((1.0 + m) / (1.0 + p.lambda1 + 2.0 * m)).powi(2);
    let mut grid: Vec<f64> = Vec::with_capacity(45_000);
    let linear = 40_000;
    for i in 1..=linear {
        grid.push(m_max * i as f64 / linear as f64);
    }
    // log pass: 4000 points from m_max·1e-12 up to the linear spacing
    let lo = (m_max * 1e-12).ln();
    let hi = (m_max / linear as f64).ln();
    for i in 0..4000 {
        grid.push((lo + (hi - lo) * i as f64 / 4000.0).exp());
    }
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut out = Vec::new();
    let mut prev = grid[0];
    let mut gprev = g(prev);
    for &m in &grid[1..] {
        let gm = g(m);
        if gprev == 0.0 {
            out.push(prev);
        } else if gm != 0.0 && gm.signum() != gprev.signum() {
            let (mut a, mut b, mut ga) = (prev, m, gprev);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                let gmid = g(mid);
                if gmid.signum() == ga.signum() {
                    a = mid;
                    ga = gmid;
                } else {
                    b = mid;
                }
            }
            out.push(0.5 * (a + b));
        }
        prev = m;
        gprev = gm;
    }
    out.into_iter()
        .filter(|&m| direct_residual(p, m, m) <= refine_tol)
        .map(|m| (m, m))
        .collect()
}

fn canonical(m1: f64, m2: f64) -> (f64, f64) {
    if m1 >= m2 {
        (m1, m2)
    } else {
        (m2, m1)
    }
}

/// A refined candidate: canonical coordinates plus whether it came from the
/// 1-D diagonal bisection (as opposed to 2-D Newton).
#[derive(Clone, Copy)]
struct Candidate {
    m1: f64,
    m2: f64,
    from_diagonal: bool,
}

/// Greedy clustering of refined candidates: accept a candidate only if it is
/// farther than `radius` (relative) from every accepted one. A double root is
/// located only to `O(√refine_tol)` — the residual is quadratically flat
/// there — so the radius must grow like `√refine_tol` or a degenerate
/// solution splinters into a blob of near-copies.
///
/// Ranking inside a cluster: diagonal-bisection candidates first, then by
/// residual, then by coordinates for determinism. Preferring the diagonal is
/// deliberate — near a `t = 2` degeneration the 2-D residual valley is
/// flatter than float noise, so 2-D Newton can stop anywhere in a blob whose
/// residual *evaluates* to zero, while the 1-D bisection pins the diagonal
/// crossing to machine precision. The trade-off: a genuine pair less than
/// `radius` away from a diagonal root (which requires `t − 2 ≲ radius²`) is
/// absorbed into it; such parameters sit far inside any boundary-exclusion
/// band.
fn cluster(p: &ReducedParams, candidates: Vec<Candidate>, refine_tol: f64) -> Vec<Candidate> {
    let radius = DEDUP_TOL.max(10.0 * refine_tol.sqrt());
    let mut ranked: Vec<(u8, f64, f64, f64)> = candidates
        .into_iter()
        .map(|c| {
            (
                u8::from(!c.from_diagonal),
                direct_residual(p, c.m1, c.m2),
                c.m1,
                c.m2,
            )
        })
        .collect();
    ranked.sort_by(|a, b| a.partial_cmp(b).expect("finite candidates"));
    let mut found: Vec<Candidate> = Vec::new();
    for (tag, _, m1, m2) in ranked {
        let dup = found.iter().any(|c| {
            (c.m1 - m1).abs() <= radius * c.m1.abs().max(1.0)
                && (c.m2 - m2).abs() <= radius * c.m2.abs().max(1.0)
        });
        if !dup {
            found.push(Candidate {
                m1,
                m2,
                from_diagonal: tag == 0,
            });
        }
    }
    found
}

/// Exhaustive numerical enumeration of the reduced system, independent of the
/// closed-form paths. Detection passes:
///
/// 1. for each of `grid` columns `M₁ = c` in `(0, M_max]` with
///    `M_max = max(L, 4)`, solve the column cubic for *all* its positive `M₂`
///    roots (every true solution lies within one column spacing of such a
///    seed in one of its two orientations, since the solution set is
///    swap-symmetric);
/// 2. a dense 1-D scan of the symmetric diagonal in the direct form (catches
///    symmetric roots far below the column spacing);
/// 3. a local fine re-seeding pass (100 columns across ±2 spacings) around
///    every solution found, separating near-merged sibling pairs close to the
///    `t = 2` degeneration locus.
///
/// Every candidate is polished by damped 2-D Newton and accepted only if the
/// direct-form residual is at most `refine_tol`; accepted pairs are stored as
/// canonical unordered pairs (`m1 ≥ m2`), deduplicated at relative
/// [`DEDUP_TOL`], and sorted by `(t, m1)`.
pub fn brute_force_enumerate(
    p: &ReducedParams,
    grid: usize,
    refine_tol: f64,
) -> Result<Vec<ReducedSolution>> {
    if grid < 100 {
        return Err(Error::GridTooCoarse { grid });
    }
    let m_max = p.l.max(4.0);
    let spacing = m_max / grid as f64;

    let columns: Vec<f64> = (1..=grid).map(|i| spacing * i as f64).collect();
    let refine = |seeds: Vec<(f64, f64)>| -> Vec<(f64, f64)> {
        seeds
            .into_par_iter()
            .filter_map(|(m1, m2)| newton_2d(p, m1, m2, refine_tol))
            .collect()
    };

    let col_seeds: Vec<(f64, f64)> = columns
        .par_iter()
        .flat_map_iter(|&m1| column_roots(p, m1).into_iter().map(move |m2| (m1, m2)))
        .collect();

    let tag = |pairs: Vec<(f64, f64)>, from_diagonal: bool| -> Vec<Candidate> {
        pairs
            .into_iter()
            .map(|(a, b)| {
                let (m1, m2) = canonical(a, b);
                Candidate {
                    m1,
                    m2,
                    from_diagonal,
                }
            })
            .collect()
    };

    let mut candidates: Vec<Candidate> = tag(refine(col_seeds), false);
    candidates.extend(tag(scan_symmetric(p, m_max, refine_tol), true));
    let coarse = cluster(p, candidates.clone(), refine_tol);

    // Local re-seeding around each coarse hit (both orientations) to split
    // near-merged sibling pairs close to the t = 2 degeneration locus.
    let mut fine_seeds: Vec<(f64, f64)> = Vec::new();
    for c in &coarse {
        for center in [c.m1, c.m2] {
            for j in 0..100 {
                let m1 = center - 2.0 * spacing + 4.0 * spacing * j as f64 / 99.0;
                if m1 > 0.0 {
                    for m2 in column_roots(p, m1) {
                        fine_seeds.push((m1, m2));
                    }
                }
            }
        }
    }
    candidates.extend(tag(refine(fine_seeds), false));

    let mut out: Vec<ReducedSolution> = cluster(p, candidates, refine_tol)
        .into_iter()
        .map(|c| {
            let kind = if (c.m1 - c.m2).abs() <= 1e-9 * c.m1.abs().max(1.0) {
                SolutionKind::Symmetric
            } else {
                SolutionKind::Asymmetric
            };
            ReducedSolution {
                m1: c.m1,
                m2: c.m2,
                kind,
                t: c.m1 + c.m2,
            }
        })
        .collect();
    sort_solutions(&mut out);
    Ok(out)
}

// ------------------------------------------------------------------
// Expansion to a full fixed point
// ------------------------------------------------------------------

/// Expand a reduced solution into a fixed point of the full parity-kernel
/// operator, truncated to `n` coordinates:
/// `x₁ = λ₁`, `x_i = λ_i((1+M₂)/(1+‖x‖))²` for even `i`,
/// `x_i = λ_i((1+M₁)/(1+‖x‖))²` for odd `i ≥ 3`, with `‖x‖ = λ₁+M₁+M₂`.
///
/// The activity sequence must match the reduced parameters: `λ₁` equal to
/// `p.lambda1` and both parity block sums equal to `p.l`, all within 1e-9.
pub fn expand_to_full(
    sol: &ReducedSolution,
    p: &ReducedParams,
    spec: &ActivitySpec,
    n: usize,
) -> Result<TruncatedPoint> {
    let checks = [
        ("lambda1", p.lambda1, spec.lambda1()),
        ("odd-block", p.l, spec.odd_sum()),
        ("even-block", p.l, spec.even_sum()),
    ];
    for (which, expected, actual) in checks {
        if (expected - actual).abs() > 1e-9 * expected.abs().max(1.0) {
            return Err(Error::BlockMassMismatch {
                which,
                expected,
                actual,
            });
        }
    }
    let norm = p.lambda1 + sol.m1 + sol.m2;
    let odd_factor = ((1.0 + sol.m1) / (1.0 + norm)).powi(2);
    let even_factor = ((1.0 + sol.m2) / (1.0 + norm)).powi(2);
    let (lambdas, _) = spec.truncate(n)?;
    let values: Vec<f64> = lambdas
        .values()
        .iter()
        .enumerate()
        .map(|(pos, &l)| {
            let i = pos + 1;
            if i == 1 {
                l
            } else if i % 2 == 0 {
                l * even_factor
            } else {
                l * odd_factor
            }
        })
        .collect();
    TruncatedPoint::new(values)
}

/// The parity kernel this module analyzes (re-exported for convenience).
pub fn parity_kernel() -> AdjacencyKernel {
    AdjacencyKernel::Parity
}

// ------------------------------------------------------------------
// Sweeps
// ------------------------------------------------------------------

/// One row of a region sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub l: f64,
    pub lambda1: f64,
    pub label: RegionLabel,
    /// Brute-force count, when requested.
    pub oracle: Option<usize>,
}

/// Classify every point of a `resolution × resolution` grid over the closed
/// ranges `l_range × l1_range` (row-major: `L` outer, `λ₁` inner). Pure
/// classification — no enumeration.
pub fn region_sweep(
    l_range: (f64, f64),
    l1_range: (f64, f64),
    resolution: usize,
) -> Result<Vec<SweepRow>> {
    let ls = linspace(l_range, resolution)?;
    let l1s = linspace(l1_range, resolution)?;
    let rows: Vec<SweepRow> = ls
        .par_iter()
        .flat_map_iter(|&l| {
            let l1s = l1s.clone();
            l1s.into_iter().map(move |l1| {
                let p = ReducedParams { l, lambda1: l1 };
                SweepRow {
                    l,
                    lambda1: l1,
                    label: classify(&p),
                    oracle: None,
                }
            })
        })
        .collect();
    Ok(rows)
}

fn linspace((lo, hi): (f64, f64), n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) || n == 0 {
        return Err(Error::InvalidReducedParams { l: lo, lambda1: hi });
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect())
}

/// One row of an oracle comparison sweep.
#[derive(Debug, Clone)]
pub struct OracleRow {
    pub l: f64,
    pub lambda1: f64,
    /// Tabulated count from [`classify`].
    pub predicted: Option<u32>,
    /// Closed-form count (symmetric + asymmetric, unordered).
    pub analytic: usize,
    /// Brute-force count.
    pub oracle: usize,
    /// Known-discrepancy zone of the point.
    pub zone: DiscrepancyZone,
}

/// Compare tabulated, closed-form, and brute-force counts over a grid,
/// *skipping* points within `eps` (natural units, see [`boundary_distance`])
/// of any region boundary — counts jump exactly on the boundaries, so
/// comparisons there measure float rounding, not correctness.
pub fn oracle_sweep(
    l_range: (f64, f64),
    l1_range: (f64, f64),
    resolution: usize,
    grid: usize,
    refine_tol: f64,
    eps: f64,
) -> Result<Vec<OracleRow>> {
    let ls = linspace(l_range, resolution)?;
    let l1s = linspace(l1_range, resolution)?;
    let mut points: Vec<ReducedParams> = Vec::new();
    for &l in &ls {
        for &l1 in &l1s {
            let p = ReducedParams { l, lambda1: l1 };
            if boundary_distance(&p) > eps {
                points.push(p);
            }
        }
    }
    points
        .par_iter()
        .map(|p| {
            let label = classify(p);
            let analytic = analytic_solutions(p).len();
            let oracle = brute_force_enumerate(p, grid, refine_tol)?.len();
            Ok(OracleRow {
                l: p.l,
                lambda1: p.lambda1,
                predicted: label.predicted,
                analytic,
                oracle,
                zone: discrepancy_zone(p),
            })
        })
        .collect()
}

/// A sampled point of a named boundary curve.
#[derive(Debug, Clone)]
pub struct CurveSample {
    pub curve: &'static str,
    pub lambda1: f64,
    pub l: f64,
}

/// Sample every region boundary curve that intersects the window
/// `l_range × l1_range`, `samples` points per curve. Curve names:
///
/// * `a2_upper`, `a2_lower` — the critical-value curves `L_±(λ₁)`, λ₁ ≥ 17;
/// * `t_product_zero` — `L = (1+λ₁)²/2` (quadratic root product zero, i.e.
///   `λ₁ = √(2L)−1`);
/// * `t_sum_four` — `L = 2λ₁+6` (`t₁+t₂ = 4`, i.e. `λ₁ = L/2−3`);
/// * `t_equals_two` — `L = (λ₁+3)²/4` (a root at exactly 2, `λ₁ = 2√L−3`);
/// * `discriminant_zero` — `L = 4λ₁−4` (`D = 0`, `λ₁ = L/4+1`);
/// * `b9_line` — `λ₁ = 17` (`b = 9`);
/// * `b_l_min` (`L = 8+4√3`), `b_l_max` (`L = 16`), `c_l_min` (`L = 6+4√2`),
///   `b2_l_min` (`L = 8`) — vertical range limits of `B`, `C`, `B₂`.
pub fn boundary_curves(
    l_range: (f64, f64),
    l1_range: (f64, f64),
    samples: usize,
) -> Result<Vec<CurveSample>> {
    let (lmin, lmax) = l_range;
    let (l1min, l1max) = l1_range;
    let n = samples.max(2);
    let mut out = Vec::new();

    // Curves graphed over λ₁.
    let l1s = linspace((l1min, l1max), n)?;
    for &l1 in &l1s {
        if let Some((lo, hi)) = a2_curve_l(l1) {
            if (lmin..=lmax).contains(&lo) {
                out.push(CurveSample { curve: "a2_lower", lambda1: l1, l: lo });
            }
            if (lmin..=lmax).contains(&hi) {
                out.push(CurveSample { curve: "a2_upper", lambda1: l1, l: hi });
            }
        }
    }

    // Curves graphed over L.
    let ls = linspace((lmin, lmax), n)?;
    let graphs: [(&'static str, fn(f64) -> f64); 4] = [
        ("t_product_zero", |l| (2.0 * l).sqrt() - 1.0),
        ("t_sum_four", |l| l / 2.0 - 3.0),
        ("t_equals_two", |l| 2.0 * l.sqrt() - 3.0),
        ("discriminant_zero", |l| l / 4.0 + 1.0),
    ];
    for (name, g) in graphs {
        for &l in &ls {
            let l1 = g(l);
            if (l1min..=l1max).contains(&l1) {
                out.push(CurveSample { curve: name, lambda1: l1, l });
            }
        }
    }

    // Horizontal line λ₁ = 17.
    if (l1min..=l1max).contains(&17.0) {
        for &l in &ls {
            out.push(CurveSample { curve: "b9_line", lambda1: 17.0, l });
        }
    }

    // Vertical lines.
    let verticals: [(&'static str, f64); 4] = [
        ("b_l_min", 8.0 + 4.0 * 3.0f64.sqrt()),
        ("b_l_max", 16.0),
        ("c_l_min", 6.0 + 4.0 * 2.0f64.sqrt()),
        ("b2_l_min", 8.0),
    ];
    for (name, l) in verticals {
        if (lmin..=lmax).contains(&l) {
            for &l1 in &l1s {
                out.push(CurveSample { curve: name, lambda1: l1, l });
            }
        }
    }
    Ok(out)
}
