//! Activity sequences, truncated state vectors, and the invariant norm slab.
//!
//! # Notation
//!
//! Throughout the crate, `λ = (λ₁, λ₂, …)` is a summable sequence of strictly
//! positive *activities* and `x = (x₁, x₂, …)` a strictly positive state vector
//! with ℓ¹ norm `‖x‖ = Σ xⱼ`. An [`ActivitySpec`] stores λ exactly as an
//! explicit head `(λ₁, …, λ_m)` followed by a geometric tail
//! `λ_{m+i} = λ_m · ρⁱ` with ratio `ρ ∈ [0, 1)` (ρ = 0 meaning finite support).
//! All derived sums — the norm, the odd/even block masses
//!
//! ```text
//! L₁ = Σ_{j ≥ 1} λ_{2j+1}   (indices 3, 5, 7, …)
//! L₂ = Σ_{j ≥ 1} λ_{2j}     (indices 2, 4, 6, …)
//! ```
//!
//! and truncation remainders — are evaluated in closed form, so they are exact
//! up to rounding rather than approximated by partial sums.
//!
//! The slab
//!
//! ```text
//! A_k = { x : λ₁ + (‖λ‖ − λ₁)/(1 + ‖λ‖)^k ≤ ‖x‖ ≤ ‖λ‖ }
//! ```
//!
//! is invariant under the activity operator (see the `operator` module): one
//! application of the operator maps any positive vector into `A_k`, and `A_k`
//! into itself. [`InvariantSetBounds`] carries the two endpoints;
//! [`in_invariant_set`] tests membership with a 1-ulp-scale slack so that
//! points sitting exactly on an endpoint are not rejected by roundoff.

use crate::error::{Error, Result};

/// Relative tolerance used for endpoint slack and consistency checks.
const NORM_SLACK: f64 = 1e-12;

/// A summable sequence of strictly positive activities: an explicit head plus
/// a geometric tail `λ_{m+i} = λ_m · ρⁱ`.
///
/// Derived quantities (`norm`, `odd_sum`, `even_sum`, truncation remainders)
/// use closed-form geometric sums. Entries are addressed with **1-based**
/// indices matching the mathematical notation: `entry(1) = λ₁`.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivitySpec {
    head: Vec<f64>,
    tail_ratio: f64,
}

impl ActivitySpec {
    /// Build a spec from explicit head entries and a tail ratio in `[0, 1)`.
    pub fn new(head: Vec<f64>, tail_ratio: f64) -> Result<Self> {
        if head.is_empty() {
            return Err(Error::EmptyHead);
        }
        for (i, &v) in head.iter().enumerate() {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidActivity {
                    index: i + 1,
                    value: v,
                });
            }
        }
        if !(tail_ratio.is_finite() && (0.0..1.0).contains(&tail_ratio)) {
            return Err(Error::InvalidTailRatio { value: tail_ratio });
        }
        Ok(Self { head, tail_ratio })
    }

    /// Spec with a single head entry `r/2` and tail ratio `1/2`: total mass is
    /// exactly `r`, with both odd and even blocks populated. Used when only a
    /// target norm is prescribed.
    pub fn with_norm(r: f64) -> Result<Self> {
        Self::new(vec![r / 2.0], 0.5)
    }

    /// Explicit head entries.
    pub fn head(&self) -> &[f64] {
        &self.head
    }

    /// Geometric tail ratio ρ.
    pub fn tail_ratio(&self) -> f64 {
        self.tail_ratio
    }

    /// First activity λ₁.
    pub fn lambda1(&self) -> f64 {
        self.head[0]
    }

    /// The activity λ_j (1-based index; `entry(1) = λ₁`).
    pub fn entry(&self, j: usize) -> f64 {
        debug_assert!(j >= 1, "activity indices are 1-based");
        let m = self.head.len();
        if j <= m {
            self.head[j - 1]
        } else if self.tail_ratio == 0.0 {
            0.0
        } else {
            self.head[m - 1] * self.tail_ratio.powi((j - m) as i32)
        }
    }

    /// Total mass `‖λ‖ = Σ λ_j` (closed form).
    pub fn norm(&self) -> f64 {
        let head_sum: f64 = self.head.iter().sum();
        head_sum + self.tail_mass()
    }

    /// Mass of the tail beyond the head: `Σ_{i ≥ 1} λ_m ρⁱ = λ_m ρ/(1−ρ)`.
    pub fn tail_mass(&self) -> f64 {
        if self.tail_ratio == 0.0 {
            0.0
        } else {
            self.head[self.head.len() - 1] * self.tail_ratio / (1.0 - self.tail_ratio)
        }
    }

    /// Odd block mass `L₁ = Σ_{j ≥ 3 odd} λ_j`.
    pub fn odd_sum(&self) -> f64 {
        self.parity_sum(1)
    }

    /// Even block mass `L₂ = Σ_{j ≥ 2 even} λ_j`.
    pub fn even_sum(&self) -> f64 {
        self.parity_sum(0)
    }

    /// Σ of λ_j over indices j ≥ 2 with j ≡ parity (mod 2), head part summed
    /// directly and tail part in closed form with ratio ρ².
    fn parity_sum(&self, parity: usize) -> f64 {
        let m = self.head.len();
        let mut sum = 0.0;
        for j in 2..=m {
            if j % 2 == parity {
                sum += self.head[j - 1];
            }
        }
        if self.tail_ratio > 0.0 {
            let r = self.tail_ratio;
            let last = self.head[m - 1];
            // Tail positions are m+i for i ≥ 1; those with (m+i) ≡ parity (mod 2)
            // start at i₁ ∈ {1, 2} and step by 2.
            let i1 = if (m + 1) % 2 == parity { 1 } else { 2 };
            sum += last * r.powi(i1) / (1.0 - r * r);
        }
        sum
    }

    /// Σ λ_j² over j ≥ lo (1-based), closed form for the tail (ratio ρ²).
    pub fn squared_sum_from(&self, lo: usize) -> f64 {
        let m = self.head.len();
        let mut sum = 0.0;
        for j in lo.max(1)..=m {
            sum += self.head[j - 1] * self.head[j - 1];
        }
        if self.tail_ratio > 0.0 {
            let r2 = self.tail_ratio * self.tail_ratio;
            let last2 = self.head[m - 1] * self.head[m - 1];
            if lo <= m + 1 {
                sum += last2 * r2 / (1.0 - r2);
            } else {
                // Start deeper in the tail: first term is λ_{lo}².
                let first = self.entry(lo);
                sum += first * first / (1.0 - r2);
            }
        }
        sum
    }

    /// Mass discarded when keeping only the first `n` entries (closed form).
    pub fn discarded_mass(&self, n: usize) -> f64 {
        let m = self.head.len();
        if n >= m {
            if self.tail_ratio == 0.0 {
                0.0
            } else {
                // Σ_{i > n−m} λ_m ρⁱ = λ_m ρ^{n−m+1}/(1−ρ)
                self.head[m - 1] * self.tail_ratio.powi((n - m + 1) as i32)
                    / (1.0 - self.tail_ratio)
            }
        } else {
            let head_rest: f64 = self.head[n..].iter().sum();
            head_rest + self.tail_mass()
        }
    }

    /// Smallest truncation length whose discarded mass is below `1e-12 · ‖λ‖`.
    pub fn default_truncation(&self) -> usize {
        let m = self.head.len();
        if self.tail_ratio == 0.0 {
            return m;
        }
        let threshold = NORM_SLACK * self.norm();
        let mut n = m;
        if self.discarded_mass(n) < threshold {
            return n;
        }
        // Closed-form estimate, then adjust: discarded(n) = λ_m ρ^{n−m+1}/(1−ρ).
        let target = threshold * (1.0 - self.tail_ratio) / self.head[m - 1];
        let est = (target.ln() / self.tail_ratio.ln()).ceil();
        if est.is_finite() && est > 0.0 {
            n = m + est as usize;
        }
        while self.discarded_mass(n) >= threshold {
            n += 1;
        }
        while n > m && self.discarded_mass(n - 1) < threshold {
            n -= 1;
        }
        n
    }

    /// First `n` entries of λ (tail expanded) as a state vector, together with
    /// the discarded tail mass.
    ///
    /// Fails when `n` is zero or reaches past the support of a finite sequence
    /// (ρ = 0), where entries would be zero.
    pub fn truncate(&self, n: usize) -> Result<(TruncatedPoint, f64)> {
        if n < 1 {
            return Err(Error::InvalidTruncation { n });
        }
        let m = self.head.len();
        if self.tail_ratio == 0.0 && n > m {
            return Err(Error::DimensionMismatch { dim: n, support: m });
        }
        let values: Vec<f64> = (1..=n).map(|j| self.entry(j)).collect();
        let point = TruncatedPoint::new(values)?;
        Ok((point, self.discarded_mass(n)))
    }

    /// Largest index with a nonzero activity (`usize::MAX` for ρ > 0).
    pub fn support(&self) -> usize {
        if self.tail_ratio == 0.0 {
            self.head.len()
        } else {
            usize::MAX
        }
    }

    /// Parse the textual config format:
    ///
    /// ```text
    /// # activities
    /// head = 0.1, 0.05, 0.025
    /// tail_ratio = 0.5
    /// ```
    ///
    /// `head` is required; `tail_ratio` defaults to 0. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut head: Option<Vec<f64>> = None;
        let mut tail_ratio: Option<f64> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
                line: line_no,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            match key.trim() {
                "head" => {
                    if head.is_some() {
                        return Err(Error::Config {
                            line: line_no,
                            message: "duplicate `head`".into(),
                        });
                    }
                    let entries = value
                        .split(',')
                        .map(|tok| {
                            let tok = tok.trim();
                            tok.parse::<f64>().map_err(|_| Error::Config {
                                line: line_no,
                                message: format!("bad number `{tok}` in head"),
                            })
                        })
                        .collect::<Result<Vec<f64>>>()?;
                    head = Some(entries);
                }
                "tail_ratio" => {
                    if tail_ratio.is_some() {
                        return Err(Error::Config {
                            line: line_no,
                            message: "duplicate `tail_ratio`".into(),
                        });
                    }
                    let tok = value.trim();
                    tail_ratio = Some(tok.parse::<f64>().map_err(|_| Error::Config {
                        line: line_no,
                        message: format!("bad number `{tok}` for tail_ratio"),
                    })?);
                }
                other => {
                    return Err(Error::Config {
                        line: line_no,
                        message: format!("unknown key `{other}`"),
                    });
                }
            }
        }
        let head = head.ok_or(Error::Config {
            line: 0,
            message: "missing `head`".into(),
        })?;
        Self::new(head, tail_ratio.unwrap_or(0.0))
    }
}

/// A finite-dimensional strictly positive state vector with its cached ℓ¹ norm.
///
/// Stands for a point of the positive sequence cone truncated to its first
/// `dim()` coordinates; values are indexed 0-based in storage but correspond
/// to the 1-based coordinates `x₁, …, x_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedPoint {
    values: Vec<f64>,
    norm: f64,
}

impl TruncatedPoint {
    /// Wrap a vector of strictly positive finite values (empty is allowed and
    /// has norm 0).
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for (i, &v) in values.iter().enumerate() {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::NonPositiveEntry {
                    index: i + 1,
                    value: v,
                });
            }
        }
        let norm = values.iter().sum();
        Ok(Self { values, norm })
    }

    /// Coordinate slice (`values()[0]` is x₁).
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of stored coordinates.
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Cached ℓ¹ norm `Σ xᵢ`.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// Recompute the norm from the coordinates (for consistency checks).
    pub fn recompute_norm(&self) -> f64 {
        self.values.iter().sum()
    }

    /// True when the cached norm matches the recomputed sum within
    /// `1e-12 · max(1, dim)`.
    pub fn norm_consistent(&self) -> bool {
        (self.norm - self.recompute_norm()).abs() <= NORM_SLACK * (self.dim().max(1) as f64)
    }

    /// ℓ¹ distance to another point of the same dimension.
    pub fn l1_distance(&self, other: &TruncatedPoint) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .sum()
    }
}

/// The endpoints of the invariant norm slab
/// `λ₁ + (‖λ‖ − λ₁)/(1 + ‖λ‖)^k ≤ ‖x‖ ≤ ‖λ‖`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantSetBounds {
    k: u32,
    lower: f64,
    upper: f64,
}

impl InvariantSetBounds {
    /// Bounds of the slab for branching order `k`.
    pub fn new(spec: &ActivitySpec, k: u32) -> Self {
        let norm = spec.norm();
        let lambda1 = spec.lambda1();
        let lower = lambda1 + (norm - lambda1) / (1.0 + norm).powi(k as i32);
        Self {
            k,
            lower,
            upper: norm,
        }
    }

    /// Branching order the slab was built for.
    pub fn k(&self) -> u32 {
        self.k
    }

    /// Lower endpoint `λ₁ + (‖λ‖ − λ₁)/(1 + ‖λ‖)^k`.
    pub fn lower(&self) -> f64 {
        self.lower
    }

    /// Upper endpoint `‖λ‖`.
    pub fn upper(&self) -> f64 {
        self.upper
    }

    /// Inclusive membership test on the norm, with `1e-12`-scale slack so
    /// points exactly on an endpoint survive roundoff.
    pub fn contains_norm(&self, norm: f64) -> bool {
        let slack = NORM_SLACK * self.upper.max(1.0);
        norm >= self.lower - slack && norm <= self.upper + slack
    }
}

/// True iff `‖x‖` lies in the slab (endpoints included, 1-ulp-scale slack).
pub fn in_invariant_set(x: &TruncatedPoint, bounds: &InvariantSetBounds) -> bool {
    bounds.contains_norm(x.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn norm_of_small_vectors() {
        let p = TruncatedPoint::new(vec![1.0, 1.0, 1.0]).unwrap();
        assert_eq!(p.norm(), 3.0);
        let empty = TruncatedPoint::new(vec![]).unwrap();
        assert_eq!(empty.norm(), 0.0);
        let geo = TruncatedPoint::new(vec![0.5, 0.25, 0.125]).unwrap();
        assert_relative_eq!(geo.norm(), 0.875, max_relative = 1e-15);
    }

    #[test]
    fn rejects_bad_entries() {
        assert!(TruncatedPoint::new(vec![1.0, 0.0]).is_err());
        assert!(TruncatedPoint::new(vec![-0.5]).is_err());
        assert!(TruncatedPoint::new(vec![f64::NAN]).is_err());
        assert!(ActivitySpec::new(vec![], 0.0).is_err());
        assert!(ActivitySpec::new(vec![1.0], 1.0).is_err());
        assert!(ActivitySpec::new(vec![1.0], -0.1).is_err());
        assert!(ActivitySpec::new(vec![1.0, 0.0], 0.0).is_err());
    }

    #[test]
    fn geometric_norm_is_exact() {
        // head (1,), ratio 1/2: tail sum = 1, total 2.
        let spec = ActivitySpec::new(vec![1.0], 0.5).unwrap();
        assert_relative_eq!(spec.norm(), 2.0, max_relative = 1e-15);
        // finite support
        let spec = ActivitySpec::new(vec![1.0, 2.0], 0.0).unwrap();
        assert_eq!(spec.norm(), 3.0);
    }

    #[test]
    fn parity_sums_partition_the_mass() {
        for (head, ratio) in [
            (vec![0.1], 0.5),
            (vec![0.3, 0.2, 0.1], 0.25),
            (vec![1.0, 2.0, 3.0, 4.0], 0.0),
            (vec![0.7, 0.1], 0.9),
        ] {
            let spec = ActivitySpec::new(head, ratio).unwrap();
            let total = spec.lambda1() + spec.odd_sum() + spec.even_sum();
            assert_relative_eq!(total, spec.norm(), max_relative = 1e-12);
        }
    }

    #[test]
    fn parity_sums_match_partial_sums() {
        let spec = ActivitySpec::new(vec![0.1, 0.05], 0.5).unwrap();
        // Brute-force the first 200 entries.
        let mut odd = 0.0;
        let mut even = 0.0;
        for j in 2..=200 {
            if j % 2 == 0 {
                even += spec.entry(j);
            } else {
                odd += spec.entry(j);
            }
        }
        assert_relative_eq!(spec.odd_sum(), odd, max_relative = 1e-12);
        assert_relative_eq!(spec.even_sum(), even, max_relative = 1e-12);
    }

    #[test]
    fn truncation_examples() {
        let spec = ActivitySpec::new(vec![1.0, 2.0], 0.0).unwrap();
        let (p, discarded) = spec.truncate(2).unwrap();
        assert_eq!(p.values(), &[1.0, 2.0]);
        assert_eq!(discarded, 0.0);

        let spec = ActivitySpec::new(vec![1.0], 0.5).unwrap();
        let (p, discarded) = spec.truncate(3).unwrap();
        assert_eq!(p.values(), &[1.0, 0.5, 0.25]);
        assert_relative_eq!(discarded, 0.25, max_relative = 1e-15);

        let spec = ActivitySpec::new(vec![0.3, 0.2, 0.1], 0.0).unwrap();
        let (p, discarded) = spec.truncate(2).unwrap();
        assert_eq!(p.values(), &[0.3, 0.2]);
        assert_relative_eq!(discarded, 0.1, max_relative = 1e-15);

        assert!(spec.truncate(0).is_err());
        assert!(spec.truncate(4).is_err()); // zero tail, past support
    }

    #[test]
    fn truncation_plus_discarded_recovers_norm() {
        let specs = [
            ActivitySpec::new(vec![0.1], 0.5).unwrap(),
            ActivitySpec::new(vec![0.2, 0.3, 0.1], 0.7).unwrap(),
            ActivitySpec::new(vec![1.0, 2.0, 3.0], 0.0).unwrap(),
        ];
        for spec in &specs {
            for n in 1..=30 {
                if spec.tail_ratio() == 0.0 && n > spec.head().len() {
                    continue;
                }
                let (p, discarded) = spec.truncate(n).unwrap();
                assert_relative_eq!(p.norm() + discarded, spec.norm(), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn default_truncation_meets_target() {
        for ratio in [0.1, 0.5, 0.9, 0.99] {
            let spec = ActivitySpec::new(vec![0.1], ratio).unwrap();
            let n = spec.default_truncation();
            assert!(spec.discarded_mass(n) < 1e-12 * spec.norm());
            if n > 1 {
                assert!(spec.discarded_mass(n - 1) >= 1e-12 * spec.norm());
            }
        }
        let finite = ActivitySpec::new(vec![1.0, 2.0], 0.0).unwrap();
        assert_eq!(finite.default_truncation(), 2);
    }

    #[test]
    fn norm_scales_and_concatenates() {
        let a = TruncatedPoint::new(vec![0.5, 1.5]).unwrap();
        let b = TruncatedPoint::new(vec![2.0]).unwrap();
        let mut joined = a.values().to_vec();
        joined.extend_from_slice(b.values());
        let c = TruncatedPoint::new(joined).unwrap();
        assert_relative_eq!(c.norm(), a.norm() + b.norm(), max_relative = 1e-15);
        let scaled = TruncatedPoint::new(a.values().iter().map(|v| 3.0 * v).collect()).unwrap();
        assert_relative_eq!(scaled.norm(), 3.0 * a.norm(), max_relative = 1e-15);
    }

    #[test]
    fn invariant_slab_endpoints() {
        // λ = (0.1, 0.1), k = 2: lower = 0.1 + 0.1/1.44.
        let spec = ActivitySpec::new(vec![0.1, 0.1], 0.0).unwrap();
        let bounds = InvariantSetBounds::new(&spec, 2);
        assert_relative_eq!(bounds.lower(), 0.1 + 0.1 / 1.44, max_relative = 1e-15);
        assert_relative_eq!(bounds.upper(), 0.2, max_relative = 1e-15);
        assert!(bounds.lower() < bounds.upper());

        let x = TruncatedPoint::new(vec![0.09, 0.09]).unwrap(); // ‖x‖ = 0.18
        assert!(in_invariant_set(&x, &bounds));

        let at_top = TruncatedPoint::new(vec![0.1, 0.1]).unwrap();
        assert!(in_invariant_set(&at_top, &bounds));

        let above = TruncatedPoint::new(vec![0.2, 0.2]).unwrap();
        assert!(!in_invariant_set(&above, &bounds));

        let below = TruncatedPoint::new(vec![0.05, 0.05]).unwrap();
        assert!(!in_invariant_set(&below, &bounds));
    }

    #[test]
    fn config_round_trip() {
        let text = "# activities\nhead = 0.1, 0.05, 0.025\ntail_ratio = 0.5\n";
        let spec = ActivitySpec::parse(text).unwrap();
        assert_eq!(spec.head(), &[0.1, 0.05, 0.025]);
        assert_eq!(spec.tail_ratio(), 0.5);

        let no_tail = ActivitySpec::parse("head = 1.0\n").unwrap();
        assert_eq!(no_tail.tail_ratio(), 0.0);

        assert!(ActivitySpec::parse("").is_err());
        assert!(ActivitySpec::parse("head = a, b\n").is_err());
        assert!(ActivitySpec::parse("heads = 1.0\n").is_err());
        assert!(ActivitySpec::parse("head = 1.0\nhead = 2.0\n").is_err());
        assert!(ActivitySpec::parse("head 1.0\n").is_err());
        // comments and blank lines are fine
        let spec = ActivitySpec::parse("\n# c\nhead = 2.0 # inline\n\n").unwrap();
        assert_eq!(spec.head(), &[2.0]);
    }

    #[test]
    fn with_norm_hits_the_target_exactly() {
        for r in [0.1, 0.4, 1.0, 7.5] {
            let spec = ActivitySpec::with_norm(r).unwrap();
            assert_relative_eq!(spec.norm(), r, max_relative = 1e-15);
            assert!(spec.odd_sum() > 0.0 && spec.even_sum() > 0.0);
        }
    }

    #[test]
    fn entry_expansion_matches_tail_law() {
        let spec = ActivitySpec::new(vec![0.4, 0.2], 0.25).unwrap();
        assert_eq!(spec.entry(1), 0.4);
        assert_eq!(spec.entry(2), 0.2);
        assert_relative_eq!(spec.entry(3), 0.05, max_relative = 1e-15);
        assert_relative_eq!(spec.entry(4), 0.0125, max_relative = 1e-15);
    }

    #[test]
    fn squared_sums_match_partial_sums() {
        let spec = ActivitySpec::new(vec![0.1, 0.05], 0.5).unwrap();
        let mut direct = 0.0;
        for j in 2..=300 {
            direct += spec.entry(j) * spec.entry(j);
        }
        assert_relative_eq!(spec.squared_sum_from(2), direct, max_relative = 1e-12);
        let deeper: f64 = (5..=300).map(|j| spec.entry(j) * spec.entry(j)).sum();
        assert_relative_eq!(spec.squared_sum_from(5), deeper, max_relative = 1e-12);
    }
}
