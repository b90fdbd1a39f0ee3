//! Robust real-root extraction for cubics, and the closed-form fixed points of
//! the star and co-star kernels at branching order k = 2.
//!
//! # Numeric vs radical paths
//!
//! The authoritative root finder is [`real_roots`]: bracketed bisection on the
//! monotone pieces between the cubic's critical points, finished with a Newton
//! polish. The radical path ([`closed_form_real_roots`]) evaluates the textbook
//! solution — Cardano's `α + β` when the depressed discriminant is
//! nonnegative, the trigonometric form otherwise — and exists to cross-check
//! the numeric path, not to replace it.
//!
//! # Closed-form fixed points (k = 2)
//!
//! For the *star* kernel (first row and first column of the adjacency matrix
//! all ones, everything else zero), the fixed-point equation collapses to a
//! scalar equation for the norm `s = ‖x‖`:
//!
//! ```text
//! (s − λ₁)(1 + s)² = (1 + λ₁)²(‖λ‖ − λ₁)
//! ⟺  s³ + (2 − λ₁)s² + (1 − 2λ₁)s − λ₁ − (1 + λ₁)²(‖λ‖ − λ₁) = 0
//! ```
//!
//! with the point reconstructed as `x₁ = λ₁`, `x_i = λ_i((1+λ₁)/(1+s))²`.
//!
//! For the *co-star* kernel (first column zero below the first row, everything
//! else one) the scalar equation is
//!
//! ```text
//! (s − λ₁)(1 + s)² = (‖λ‖ − λ₁)(1 + s − λ₁)²
//! ⟺  s³ + (2 − ‖λ‖)s² + (2(1−λ₁)(1+λ₁−‖λ‖) − 1)s − λ₁ − (1−λ₁)²(‖λ‖−λ₁) = 0
//! ```
//!
//! with `x₁ = λ₁`, `x_i = λ_i((1+s−λ₁)/(1+s))²`. Both constant terms are
//! `−λ₁ − (1±λ₁)²(‖λ‖−λ₁) < 0` while the leading coefficient is `+1`, so the
//! coefficient signs change exactly once for the star cubic (one positive root
//! by Descartes' rule); the star right-hand side is decreasing in `s`, making
//! the root unique without any sign counting, and the co-star builder verifies
//! uniqueness numerically.

use crate::error::{Error, Result};
use crate::sequence::{ActivitySpec, TruncatedPoint};

/// A real cubic `c₃t³ + c₂t² + c₁t + c₀` with `c₃ ≠ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cubic {
    pub c3: f64,
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
}

impl Cubic {
    /// Build a cubic, rejecting a zero (or non-finite) leading coefficient.
    pub fn new(c3: f64, c2: f64, c1: f64, c0: f64) -> Result<Self> {
        if !(c3.is_finite() && c3 != 0.0) || ![c2, c1, c0].iter().all(|c| c.is_finite()) {
            return Err(Error::DegenerateCubic { c3 });
        }
        Ok(Self { c3, c2, c1, c0 })
    }

    /// Evaluate by Horner's scheme.
    pub fn eval(&self, t: f64) -> f64 {
        ((self.c3 * t + self.c2) * t + self.c1) * t + self.c0
    }

    /// First derivative `3c₃t² + 2c₂t + c₁`.
    pub fn eval_deriv(&self, t: f64) -> f64 {
        (3.0 * self.c3 * t + 2.0 * self.c2) * t + self.c1
    }

    /// Residual scale `max(1, |c₀|, |c₁|, |c₂|)` (coefficients grow like the
    /// cube of the parameters, so residual tolerances are scale-aware).
    pub fn scale(&self) -> f64 {
        1.0f64.max(self.c0.abs()).max(self.c1.abs()).max(self.c2.abs())
    }

    /// Number of strict sign changes in the coefficient sequence (zero
    /// coefficients skipped) — Descartes' bound on the positive-root count.
    pub fn descartes_sign_changes(&self) -> usize {
        let mut changes = 0;
        let mut prev = 0.0f64;
        for c in [self.c3, self.c2, self.c1, self.c0] {
            if c != 0.0 {
                if prev != 0.0 && c.signum() != prev.signum() {
                    changes += 1;
                }
                prev = c;
            }
        }
        changes
    }
}

/// A root obtained from the radical/trigonometric path.
///
/// `alpha`/`beta` are the two Cardano cube-root terms when the depressed
/// discriminant is nonnegative (`value = alpha + beta − c₂/(3c₃)`); in the
/// three-real-root regime the trigonometric form applies and both are NaN.
#[derive(Debug, Clone, Copy)]
pub struct ClosedFormRoot {
    pub value: f64,
    pub alpha: f64,
    pub beta: f64,
    pub residual: f64,
}

impl ClosedFormRoot {
    /// True when the Cardano radicals evaluated over the reals.
    pub fn radicals_real(&self) -> bool {
        self.alpha.is_finite() && self.beta.is_finite()
    }
}

/// Tolerance (relative to [`Cubic::scale`]) at which a critical-point value is
/// treated as an exact tangency, i.e. a double root.
const TANGENT_TOL: f64 = 1e-12;

/// All real roots, sorted ascending, tangent (double) roots listed twice.
///
/// Strategy: split the line at the critical points into at most three
/// monotone pieces, bracket each sign change inside a Cauchy bound, bisect,
/// and polish with Newton steps confined to the bracket.
pub fn real_roots(c: &Cubic) -> Vec<f64> {
    let (p2, p1, p0) = (c.c2 / c.c3, c.c1 / c.c3, c.c0 / c.c3);
    let bound = 1.0 + p2.abs().max(p1.abs()).max(p0.abs());
    let tol = TANGENT_TOL * c.scale();

    // Critical points: roots of 3t² + 2p₂t + p₁.
    let disc = p2 * p2 - 3.0 * p1;
    let mut cuts: Vec<f64> = Vec::new();
    if disc > 0.0 {
        let sq = disc.sqrt();
        cuts.push((-p2 - sq) / 3.0);
        cuts.push((-p2 + sq) / 3.0);
    }

    let mut roots: Vec<f64> = Vec::new();
    // Tangencies at critical points count as double roots.
    for &t in &cuts {
        if c.eval(t).abs() <= tol {
            roots.push(t);
            roots.push(t);
        }
    }

    let mut nodes = vec![-bound];
    nodes.extend(cuts.iter().copied().filter(|t| t.abs() < bound));
    nodes.push(bound);
    for w in nodes.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (fa, fb) = (c.eval(a), c.eval(b));
        // Skip pieces whose endpoints already registered as tangent roots.
        if fa.abs() <= tol || fb.abs() <= tol {
            continue;
        }
        if fa.signum() != fb.signum() {
            roots.push(polish(c, bisect(c, a, b, fa)));
        }
    }

    // A cubic with no interior sign change still has one real root caught by
    // the outer bracket; nothing found means every piece endpoint was tangent.
    roots.sort_by(|x, y| x.partial_cmp(y).unwrap());
    dedupe_close(&mut roots);
    roots
}

/// Drop near-duplicate roots produced by adjacent brackets, preserving the
/// deliberate duplicates of tangent roots (which are bitwise equal).
fn dedupe_close(roots: &mut Vec<f64>) {
    let mut out: Vec<f64> = Vec::with_capacity(roots.len());
    for &r in roots.iter() {
        match out.last() {
            Some(&last) if r != last && (r - last).abs() <= 1e-9 * last.abs().max(1.0) => {}
            _ => out.push(r),
        }
    }
    *roots = std::mem::take(&mut out);
}

fn bisect(c: &Cubic, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break; // interval has collapsed to adjacent floats
        }
        let fm = c.eval(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

fn polish(c: &Cubic, mut t: f64) -> f64 {
    for _ in 0..4 {
        let f = c.eval(t);
        let d = c.eval_deriv(t);
        if d == 0.0 {
            break;
        }
        let step = f / d;
        let next = t - step;
        if !next.is_finite() || (next - t).abs() > 1e-2 * t.abs().max(1.0) {
            break; // Newton trying to leave the neighborhood; keep bisection value
        }
        t = next;
        if step.abs() <= f64::EPSILON * t.abs().max(1.0) {
            break;
        }
    }
    t
}

/// The strictly positive entries of [`real_roots`].
pub fn positive_roots(c: &Cubic) -> Vec<f64> {
    real_roots(c).into_iter().filter(|&r| r > 0.0).collect()
}

/// The unique positive root; errors when the count differs from one.
pub fn unique_positive_root(c: &Cubic) -> Result<f64> {
    let pos = positive_roots(c);
    match pos.as_slice() {
        [r] => Ok(*r),
        other => Err(Error::NoUniquePositiveRoot { found: other.len() }),
    }
}

/// All real roots via radicals/trigonometric closed forms (sorted), together
/// with the Cardano components `(α, β)` when they evaluated over the reals.
pub fn closed_form_real_roots(c: &Cubic) -> (Vec<f64>, Option<(f64, f64)>) {
    let (p2, p1, p0) = (c.c2 / c.c3, c.c1 / c.c3, c.c0 / c.c3);
    // Depress: t = y − p₂/3 ⟹ y³ + py + q = 0.
    let shift = p2 / 3.0;
    let p = p1 - p2 * p2 / 3.0;
    let q = 2.0 * p2 * p2 * p2 / 27.0 - p2 * p1 / 3.0 + p0;
    let delta = 0.25 * q * q + p * p * p / 27.0;

    let mut roots: Vec<f64>;
    let mut radicals = None;
    if delta > 0.0 {
        // Evaluate the larger-magnitude cube-root term directly and recover
        // the other from αβ = −p/3: this avoids the catastrophic cancellation
        // in −q/2 ± √Δ when |p|³ ≪ q².
        let sq = delta.sqrt();
        let (alpha, beta) = if q >= 0.0 {
            let beta = (-0.5 * q - sq).cbrt();
            let alpha = if beta == 0.0 { 0.0 } else { -p / (3.0 * beta) };
            (alpha, beta)
        } else {
            let alpha = (-0.5 * q + sq).cbrt();
            let beta = if alpha == 0.0 { 0.0 } else { -p / (3.0 * alpha) };
            (alpha, beta)
        };
        roots = vec![alpha + beta - shift];
        radicals = Some((alpha, beta));
    } else if delta == 0.0 {
        if p == 0.0 {
            roots = vec![-shift; 3]; // triple root
        } else {
            let u = (-0.5 * q).cbrt();
            roots = vec![2.0 * u - shift, -u - shift, -u - shift];
            radicals = Some((u, u));
        }
    } else {
        // Three distinct real roots: y_k = 2√(−p/3)·cos(θ/3 − 2πk/3).
        let m = (-p / 3.0).sqrt();
        let arg = (3.0 * q / (2.0 * p) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
        let theta = arg.acos();
        roots = (0..3)
            .map(|k| 2.0 * m * (theta / 3.0 - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos() - shift)
            .collect();
    }
    roots.sort_by(|x, y| x.partial_cmp(y).unwrap());
    (roots, radicals)
}

/// Closed-form unique positive root with its radical components and residual.
pub fn closed_form_unique_positive(c: &Cubic) -> Result<ClosedFormRoot> {
    let (roots, radicals) = closed_form_real_roots(c);
    let pos: Vec<f64> = roots.into_iter().filter(|&r| r > 0.0).collect();
    let value = match pos.as_slice() {
        [r] => *r,
        // A tangent double root appears twice; collapse exact duplicates.
        [r, s] if (r - s).abs() <= 1e-9 * r.abs().max(1.0) => *r,
        other => return Err(Error::NoUniquePositiveRoot { found: other.len() }),
    };
    let (alpha, beta) = radicals.unwrap_or((f64::NAN, f64::NAN));
    Ok(ClosedFormRoot {
        value,
        alpha,
        beta,
        residual: c.eval(value),
    })
}

fn require_mass_split(lambda1: f64, norm_lambda: f64) -> Result<()> {
    if !(lambda1 > 0.0 && lambda1 < norm_lambda && norm_lambda.is_finite()) {
        return Err(Error::NoMassBeyondFirst {
            lambda1,
            norm: norm_lambda,
        });
    }
    Ok(())
}

/// The scalar cubic whose unique positive root is the star-kernel fixed-point
/// norm at k = 2.
pub fn star_norm_cubic(lambda1: f64, norm_lambda: f64) -> Result<Cubic> {
    require_mass_split(lambda1, norm_lambda)?;
    Cubic::new(
        1.0,
        2.0 - lambda1,
        1.0 - 2.0 * lambda1,
        -lambda1 - (1.0 + lambda1).powi(2) * (norm_lambda - lambda1),
    )
}

/// The star-kernel fixed-point norm at k = 2 (unique positive cubic root).
pub fn star_fixed_norm(lambda1: f64, norm_lambda: f64) -> Result<f64> {
    let c = star_norm_cubic(lambda1, norm_lambda)?;
    debug_assert_eq!(c.descartes_sign_changes(), 1);
    unique_positive_root(&c)
}

/// The scalar cubic for the co-star-kernel fixed-point norm at k = 2.
pub fn costar_norm_cubic(lambda1: f64, norm_lambda: f64) -> Result<Cubic> {
    require_mass_split(lambda1, norm_lambda)?;
    Cubic::new(
        1.0,
        2.0 - norm_lambda,
        2.0 * (1.0 - lambda1) * (1.0 + lambda1 - norm_lambda) - 1.0,
        -lambda1 - (1.0 - lambda1).powi(2) * (norm_lambda - lambda1),
    )
}

/// The co-star-kernel fixed-point norm at k = 2.
pub fn costar_fixed_norm(lambda1: f64, norm_lambda: f64) -> Result<f64> {
    unique_positive_root(&costar_norm_cubic(lambda1, norm_lambda)?)
}

/// Fixed point of the star kernel at k = 2, truncated to `n` coordinates:
/// `(‖x‖, x)` with `x₁ = λ₁` and `x_i = λ_i((1+λ₁)/(1+‖x‖))²`.
pub fn star_fixed_point(spec: &ActivitySpec, n: usize) -> Result<(f64, TruncatedPoint)> {
    let s = star_fixed_norm(spec.lambda1(), spec.norm())?;
    let factor = ((1.0 + spec.lambda1()) / (1.0 + s)).powi(2);
    build_scaled_point(spec, n, s, factor)
}

/// Fixed point of the co-star kernel at k = 2, truncated to `n` coordinates:
/// `(‖x‖, x)` with `x₁ = λ₁` and `x_i = λ_i((1+‖x‖−λ₁)/(1+‖x‖))²`.
pub fn costar_fixed_point(spec: &ActivitySpec, n: usize) -> Result<(f64, TruncatedPoint)> {
    let s = costar_fixed_norm(spec.lambda1(), spec.norm())?;
    let factor = ((1.0 + s - spec.lambda1()) / (1.0 + s)).powi(2);
    build_scaled_point(spec, n, s, factor)
}

/// `x₁ = λ₁`, `x_i = λ_i · factor` for i ≥ 2, truncated to `n` coordinates.
fn build_scaled_point(
    spec: &ActivitySpec,
    n: usize,
    s: f64,
    factor: f64,
) -> Result<(f64, TruncatedPoint)> {
    let (lambdas, _discarded) = spec.truncate(n)?;
    let values: Vec<f64> = lambdas
        .values()
        .iter()
        .enumerate()
        .map(|(i, &l)| if i == 0 { l } else { l * factor })
        .collect();
    Ok((s, TruncatedPoint::new(values)?))
}
