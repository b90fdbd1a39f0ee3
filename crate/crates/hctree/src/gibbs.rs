//! From fixed points to Gibbs measures: boundary laws, transfer factors, and
//! finite-volume marginals on Cayley-tree balls.
//!
//! # The vacuum construction
//!
//! A fixed point `x*` of the operator satisfies
//! `x_i = λ_i ((1 + Σ_j a_ij x_j)/(1 + ‖x‖))^k`. The literal `1 +` in both
//! numerator and denominator is the signature of an extra spin value that is
//! compatible with everything and carries unit weight. This module makes that
//! spin explicit: the state space is `{0, 1, …, S−1}` where **spin 0 is the
//! vacuum** and spin `i ≥ 1` is the i-th coordinate of the operator. The
//! compatibility table is the augmented kernel
//!
//! ```text
//! â(s, t) = 1                  if s = 0 or t = 0 ,
//! â(s, t) = a_st  (kernel)     otherwise ,
//! ```
//!
//! the activities are `λ̃ = (1, λ₁, λ₂, …)`, and the boundary law is
//! `z = (1, x*₁, x*₂, …)`. With per-spin edge factors `η_s = λ̃_s^{1/(k+1)}`
//! (each vertex of a (k+1)-regular tree spreads its activity over its k+1
//! incident edges), the transfer matrix and vertex weights are
//!
//! ```text
//! Q(s, t) = η_s · â(s, t) · η_t ,      l(s) = z_s / η_s ,
//! ```
//!
//! and the defining identity `z_s = (η_s/η_0)^{k+1} (N_s/N_0)^k` with
//! `N_s = Σ_t â(s,t) z_t` is *exactly* the operator's fixed-point equation.
//!
//! # Finite-volume marginals
//!
//! For a region `Λ` (a root-containing, parent-closed vertex set of a ball)
//! with outer boundary `∂Λ`, the marginal of the measure on `Λ ∪ ∂Λ` is
//!
//! ```text
//! μ(ω) = Z_Λ⁻¹ · ∏_{y ∈ ∂Λ} l(ω(y)) · ∏_{edges (p → c) touching Λ} Q(ω(p), ω(c)) .
//! ```
//!
//! Kernel entries are evaluated with the **row index on the parent side**
//! (the vertex closer to the root). For symmetric kernels the orientation is
//! irrelevant; the built-in kernels are asymmetric in their first row/column
//! (spin 1 lists every spin as a compatible *neighbor value below it* while
//! no spin `≥ 2` lists 1), and the parent-row convention is what makes the
//! boundary-law identity telescope: summing a boundary spin out of the
//! product contracts `Σ_t l(t) Q(s, t) = η_s N_s`, and `(η_s N_s)^k ∝ l(s)`,
//! so nested marginals agree exactly. Rescaling the law `z → c·z` multiplies
//! every configuration weight by `c^{|∂Λ|}` and leaves probabilities
//! untouched.

use crate::error::{Error, Result};
use crate::operator::{apply_f, AdjacencyKernel};
use crate::sequence::{ActivitySpec, TruncatedPoint};
use rayon::prelude::*;

/// Largest stored probability table (number of configurations).
pub const STORED_TABLE_CAP: u128 = 10_000_000;

/// Largest streamed (never materialized) enumeration.
pub const STREAMED_ENUMERATION_CAP: u128 = 10_000_000_000;

/// Fixed-point residual gate for building a boundary law.
pub const FIXED_POINT_TOL: f64 = 1e-9;

// ------------------------------------------------------------------
// Cayley-tree balls
// ------------------------------------------------------------------

/// A radius-`n` ball of the Cayley tree of order `k` (every vertex has `k+1`
/// neighbors), rooted and indexed breadth-first: the root is vertex 0, its
/// `k+1` children are `1..=k+1`, and every deeper vertex has `k` children.
/// Generation `m ≥ 1` holds `(k+1)·k^{m−1}` vertices with contiguous ids.
#[derive(Debug, Clone)]
pub struct CayleyBall {
    k: u32,
    radius: u32,
    /// `layer_starts[m]` = id of the first vertex in generation `m`;
    /// one extra entry marks one past the last vertex.
    layer_starts: Vec<u64>,
}

impl CayleyBall {
    pub fn new(k: u32, radius: u32) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidBranchingOrder { k });
        }
        let mut layer_starts = vec![0u64, 1];
        let mut width: u128 = (k as u128) + 1;
        for _ in 1..=radius {
            let next = layer_starts.last().unwrap().wrapping_add(0) as u128 + width;
            if next > u64::MAX as u128 {
                return Err(Error::EnumerationTooLarge {
                    states: next,
                    cap: u64::MAX as u128,
                });
            }
            layer_starts.push(next as u64);
            width *= k as u128;
        }
        Ok(CayleyBall {
            k,
            radius,
            layer_starts,
        })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    /// Total number of vertices in the ball.
    pub fn vertex_count(&self) -> u64 {
        *self.layer_starts.last().unwrap()
    }

    /// `|W_m|`: 1 for the root generation, `(k+1)k^{m−1}` beyond.
    pub fn layer_size(&self, m: u32) -> u64 {
        assert!(m <= self.radius, "generation {m} outside the ball");
        if m == self.radius {
            self.vertex_count() - self.layer_starts[m as usize]
        } else {
            self.layer_starts[m as usize + 1] - self.layer_starts[m as usize]
        }
    }

    /// Distance from the root.
    pub fn generation(&self, v: u64) -> u32 {
        assert!(v < self.vertex_count(), "vertex {v} outside the ball");
        (self.layer_starts.partition_point(|&s| s <= v) - 1) as u32
    }

    /// Parent vertex (`None` for the root).
    pub fn parent(&self, v: u64) -> Option<u64> {
        let m = self.generation(v);
        match m {
            0 => None,
            1 => Some(0),
            _ => {
                let offset = v - self.layer_starts[m as usize];
                Some(self.layer_starts[m as usize - 1] + offset / self.k as u64)
            }
        }
    }

    /// Children within the ball (empty on the surface generation).
    pub fn children(&self, v: u64) -> std::ops::Range<u64> {
        let m = self.generation(v);
        if m == self.radius {
            return 0..0;
        }
        if v == 0 {
            return 1..(self.k as u64 + 2);
        }
        let offset = v - self.layer_starts[m as usize];
        let base = self.layer_starts[m as usize + 1] + offset * self.k as u64;
        base..(base + self.k as u64)
    }
}

// ------------------------------------------------------------------
// Regions
// ------------------------------------------------------------------

/// A root-containing, parent-closed set of ball vertices, with its outer
/// boundary (the non-member children of members). Members must lie strictly
/// inside the ball so that every boundary vertex exists.
#[derive(Debug, Clone)]
pub struct Region {
    members: Vec<u64>,
    boundary: Vec<u64>,
    support: Vec<u64>,
}

impl Region {
    pub fn new(ball: &CayleyBall, members: &[u64]) -> Result<Self> {
        let mut members: Vec<u64> = members.to_vec();
        members.sort_unstable();
        members.dedup();
        if !members.contains(&0) {
            return Err(Error::RegionMustContainRoot);
        }
        for &v in &members {
            if ball.generation(v) >= ball.radius() {
                return Err(Error::RegionExceedsBall { vertex: v });
            }
            if let Some(p) = ball.parent(v) {
                if members.binary_search(&p).is_err() {
                    return Err(Error::RegionDisconnected { vertex: v });
                }
            }
        }
        let mut boundary: Vec<u64> = Vec::new();
        for &v in &members {
            for c in ball.children(v) {
                if members.binary_search(&c).is_err() {
                    boundary.push(c);
                }
            }
        }
        boundary.sort_unstable();
        let mut support = members.clone();
        support.extend_from_slice(&boundary);
        support.sort_unstable();
        Ok(Region {
            members,
            boundary,
            support,
        })
    }

    /// The sub-ball of radius `r` as a region (`r` must be strictly below the
    /// ball radius so the boundary generation exists).
    pub fn sub_ball(ball: &CayleyBall, r: u32) -> Result<Self> {
        if r >= ball.radius() {
            return Err(Error::RegionExceedsBall {
                vertex: ball.layer_starts[ball.radius() as usize],
            });
        }
        let members: Vec<u64> = (0..ball.layer_starts[r as usize + 1]).collect();
        Region::new(ball, &members)
    }

    pub fn members(&self) -> &[u64] {
        &self.members
    }

    pub fn boundary(&self) -> &[u64] {
        &self.boundary
    }

    /// Members followed by boundary, sorted by vertex id — the variable order
    /// of every configuration table over this region.
    pub fn support(&self) -> &[u64] {
        &self.support
    }

    fn support_position(&self, v: u64) -> Option<usize> {
        self.support.binary_search(&v).ok()
    }

    fn is_member(&self, v: u64) -> bool {
        self.members.binary_search(&v).is_ok()
    }
}

// ------------------------------------------------------------------
// Boundary laws
// ------------------------------------------------------------------

/// A translation-invariant boundary law over the spin space
/// `{0 (vacuum), 1, …, S−1}`: positive values `z` (vacuum entry first),
/// the compatibility kernel of the occupied spins, the activity sequence, and
/// the branching order. Laws built by [`BoundaryLaw::from_fixed_point`] carry
/// `z = (1, x*)`; the law is meaningful up to a positive scalar, and every
/// derived probability is invariant under [`BoundaryLaw::rescaled`].
#[derive(Debug, Clone)]
pub struct BoundaryLaw {
    spec: ActivitySpec,
    kernel: AdjacencyKernel,
    k: u32,
    z: Vec<f64>,
    eta: Vec<f64>,
}

impl BoundaryLaw {
    /// Build the law `z = (1, x*₁, …, x*_{S−1})` from a verified fixed point.
    /// The input must satisfy `‖F(x*) − x*‖₁ <` [`FIXED_POINT_TOL`] for the
    /// given activities and kernel, and must supply at least `spins − 1`
    /// coordinates.
    pub fn from_fixed_point(
        x: &TruncatedPoint,
        spec: &ActivitySpec,
        kernel: &AdjacencyKernel,
        k: u32,
        spins: usize,
    ) -> Result<Self> {
        if spins < 2 {
            return Err(Error::TooFewSpins { spins });
        }
        if spins - 1 > x.dim() {
            return Err(Error::DimensionMismatch {
                dim: spins - 1,
                support: x.dim(),
            });
        }
        let image = apply_f(x, spec, kernel, k)?;
        let residual = image.l1_distance(x);
        if residual >= FIXED_POINT_TOL {
            return Err(Error::NotAFixedPoint {
                residual,
                tol: FIXED_POINT_TOL,
            });
        }
        let mut z = Vec::with_capacity(spins);
        z.push(1.0);
        z.extend_from_slice(&x.values()[..spins - 1]);
        Self::from_values(spec, kernel, k, z)
    }

    /// Build a law from explicit values (vacuum entry first) without the
    /// fixed-point gate — the escape hatch for negative controls and for
    /// rescaled laws. Entries must be positive and the activities must cover
    /// every occupied spin.
    pub fn from_values(
        spec: &ActivitySpec,
        kernel: &AdjacencyKernel,
        k: u32,
        z: Vec<f64>,
    ) -> Result<Self> {
        if z.len() < 2 {
            return Err(Error::TooFewSpins { spins: z.len() });
        }
        if k == 0 {
            return Err(Error::InvalidBranchingOrder { k });
        }
        for (s, &v) in z.iter().enumerate() {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::NonPositiveEntry { index: s, value: v });
            }
        }
        let mut eta = Vec::with_capacity(z.len());
        let root = 1.0 / (k as f64 + 1.0);
        for s in 0..z.len() {
            let activity = if s == 0 { 1.0 } else { spec.entry(s) };
            if !(activity > 0.0 && activity.is_finite()) {
                return Err(Error::InvalidActivity {
                    index: s,
                    value: activity,
                });
            }
            eta.push(activity.powf(root));
        }
        Ok(BoundaryLaw {
            spec: spec.clone(),
            kernel: kernel.clone(),
            k,
            z,
            eta,
        })
    }

    /// The same law scaled by `c > 0`; all probabilities are unchanged.
    pub fn rescaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::NonPositiveArgument { value: c });
        }
        let mut law = self.clone();
        for v in &mut law.z {
            *v *= c;
        }
        Ok(law)
    }

    /// Number of spin values (vacuum included).
    pub fn spins(&self) -> usize {
        self.z.len()
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn spec(&self) -> &ActivitySpec {
        &self.spec
    }

    pub fn kernel(&self) -> &AdjacencyKernel {
        &self.kernel
    }

    /// Law values, vacuum entry first.
    pub fn z(&self) -> &[f64] {
        &self.z
    }

    /// Activity of a spin (`1` for the vacuum).
    pub fn activity(&self, s: usize) -> f64 {
        if s == 0 {
            1.0
        } else {
            self.spec.entry(s)
        }
    }

    /// Augmented compatibility: vacuum pairs with everything; occupied pairs
    /// follow the kernel with the row on the parent side.
    pub fn compatible(&self, parent: usize, child: usize) -> bool {
        parent == 0 || child == 0 || self.kernel.entry(parent, child) == 1
    }

    /// Transfer-matrix entry `Q(s, t) = η_s â(s, t) η_t` (parent row).
    pub fn transfer(&self, parent: usize, child: usize) -> f64 {
        if self.compatible(parent, child) {
            self.eta[parent] * self.eta[child]
        } else {
            0.0
        }
    }

    /// Boundary vertex weight `l(s) = z_s / η_s`.
    pub fn vertex_weight(&self, s: usize) -> f64 {
        self.z[s] / self.eta[s]
    }

    /// Whether the augmented compatibility table is symmetric over the
    /// represented spins. False for every built-in kernel except the
    /// complete one: their first occupied row and column disagree, and the
    /// parent-row orientation is then load-bearing.
    pub fn kernel_symmetric(&self) -> bool {
        let s = self.spins();
        (1..s).all(|i| (i + 1..s).all(|j| self.kernel.entry(i, j) == self.kernel.entry(j, i)))
    }

    /// Scale-invariant consistency residual of the defining identity over the
    /// represented spins:
    /// `max_{s ≥ 1} | z_s/z_0 − λ_s (N_s/N_0)^k |`, `N_s = Σ_t â(s,t) z_t`.
    /// Laws whose occupied part is a fixed point of the truncated operator at
    /// exactly `spins − 1` coordinates drive this to roundoff level.
    pub fn consistency_residual(&self) -> f64 {
        let n0: f64 = self.z.iter().sum();
        let mut worst = 0.0f64;
        for s in 1..self.spins() {
            let ns: f64 = (0..self.spins())
                .map(|t| if self.compatible(s, t) { self.z[t] } else { 0.0 })
                .sum();
            let predicted = self.activity(s) * (ns / n0).powi(self.k as i32);
            worst = worst.max((self.z[s] / self.z[0] - predicted).abs());
        }
        worst
    }

    /// Dense transfer table over the law's spin range.
    pub fn transfer_matrix(&self) -> TransferMatrix {
        let spins = self.spins();
        let entries = (0..spins * spins)
            .map(|i| self.transfer(i / spins, i % spins))
            .collect();
        TransferMatrix {
            spins,
            entries,
            symmetric: self.kernel_symmetric(),
        }
    }

    /// Block factors `z_s/λ_s` of the highest represented occupied spin of
    /// each parity class (indices ≥ 2, where the built-in kernels act
    /// class-constantly). Falls back to the worst-case factor 1 when a class
    /// has no representative, which keeps tail estimates upper bounds.
    fn tail_factors(&self) -> (f64, f64) {
        let factor_of = |par: usize| {
            (2..self.spins())
                .rev()
                .find(|s| s % 2 == par)
                .map(|s| self.z[s] / self.activity(s))
                .unwrap_or(1.0)
        };
        (factor_of(1), factor_of(0))
    }
}

/// The edge-factor table `Q(s, t) = η_s â(s, t) η_t` of a boundary law,
/// materialized densely. Row index on the parent side; `is_symmetric` reports
/// whether orientation matters for this kernel.
#[derive(Debug, Clone)]
pub struct TransferMatrix {
    spins: usize,
    entries: Vec<f64>,
    symmetric: bool,
}

impl TransferMatrix {
    pub fn spins(&self) -> usize {
        self.spins
    }

    pub fn entry(&self, parent: usize, child: usize) -> f64 {
        self.entries[parent * self.spins + child]
    }

    /// True when `Q(s, t) = Q(t, s)` for every spin pair, i.e. the underlying
    /// compatibility kernel is symmetric over the represented spins.
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }
}

/// Σ λ_s² over represented-range-exceeding indices `s ≥ lo` of one parity
/// class, exact for geometric tails (class entries step by the squared ratio).
fn class_squared_tail(spec: &ActivitySpec, lo: usize, parity: usize) -> f64 {
    let m = spec.head().len();
    let mut sum = 0.0;
    for j in lo..=m {
        if j % 2 == parity {
            let v = spec.head()[j - 1];
            sum += v * v;
        }
    }
    let rho = spec.tail_ratio();
    if rho > 0.0 {
        let mut j0 = lo.max(m + 1);
        if j0 % 2 != parity {
            j0 += 1;
        }
        let first = spec.entry(j0);
        sum += first * first / (1.0 - rho.powi(4));
    }
    sum
}

/// Linear mass `T = Σ_{s ≥ 1} λ_s z_s` of the law over occupied spins,
/// including the activity tail beyond the represented range: there
/// `z_s = λ_s · f_{class(s)}` with the block factors of the law, so the tail
/// contributes `f · Σ λ_s²` per parity class — a convergent geometric series
/// evaluated in closed form.
pub fn linear_sum(law: &BoundaryLaw) -> f64 {
    let mut head = 0.0;
    for s in 1..law.spins() {
        head += law.activity(s) * law.z()[s];
    }
    let (f_odd, f_even) = law.tail_factors();
    head
        + f_odd * class_squared_tail(law.spec(), law.spins(), 1)
        + f_even * class_squared_tail(law.spec(), law.spins(), 0)
}

/// Normalisability check: the edge double sum `Σ_{s,t} z_s Q(s,t) z_t`
/// (η-weighted) is bounded by `T²` with `T = ` [`linear_sum`]; the verdict is
/// finiteness of `T`, and summable activities make it true for every law
/// built from a fixed point, since each occupied term is at most `λ_s²`.
pub fn normalisable(law: &BoundaryLaw) -> (bool, f64) {
    let t = linear_sum(law);
    (t.is_finite(), t * t)
}

// ------------------------------------------------------------------
// Marginals
// ------------------------------------------------------------------

/// Precomputed enumeration setup shared by the stored and streamed paths.
struct Enumeration {
    spins: usize,
    /// Edge list as (parent, child) positions into the support order.
    edges: Vec<(usize, usize)>,
    /// Support positions of the boundary vertices.
    boundary_pos: Vec<usize>,
    /// Dense transfer table, `spins × spins`, parent-major.
    q: Vec<f64>,
    /// Vertex weights `l(s)`.
    l: Vec<f64>,
}

impl Enumeration {
    fn new(law: &BoundaryLaw, ball: &CayleyBall, region: &Region) -> Self {
        let spins = law.spins();
        let mut edges = Vec::new();
        for &v in region.members() {
            let pv = region.support_position(v).expect("member is in support");
            for c in ball.children(v) {
                let pc = region
                    .support_position(c)
                    .expect("children of members are in support");
                edges.push((pv, pc));
            }
        }
        let boundary_pos: Vec<usize> = region
            .boundary()
            .iter()
            .map(|&v| region.support_position(v).expect("boundary is in support"))
            .collect();
        let q = law.transfer_matrix().entries;
        let l: Vec<f64> = (0..spins).map(|s| law.vertex_weight(s)).collect();
        Enumeration {
            spins,
            edges,
            boundary_pos,
            q,
            l,
        }
    }

    #[inline]
    fn weight(&self, config: &[usize]) -> f64 {
        let mut w = 1.0;
        for &(p, c) in &self.edges {
            w *= self.q[config[p] * self.spins + config[c]];
        }
        for &b in &self.boundary_pos {
            w *= self.l[config[b]];
        }
        w
    }
}

fn state_count(spins: usize, sites: usize) -> u128 {
    let mut n: u128 = 1;
    for _ in 0..sites {
        n = n.saturating_mul(spins as u128);
    }
    n
}

/// Advance a mixed-radix counter; returns false after the last state.
fn next_config(config: &mut [usize], spins: usize) -> bool {
    for digit in config.iter_mut().rev() {
        *digit += 1;
        if *digit < spins {
            return true;
        }
        *digit = 0;
    }
    false
}

/// An exhaustively enumerated probability table over the configurations of a
/// region's support (members plus boundary, in [`Region::support`] order,
/// row-major with the last support vertex fastest).
#[derive(Debug, Clone)]
pub struct GibbsMarginal {
    spins: usize,
    support: Vec<u64>,
    probabilities: Vec<f64>,
    z_lambda: f64,
    truncation_weight: f64,
}

impl GibbsMarginal {
    pub fn spins(&self) -> usize {
        self.spins
    }

    pub fn support(&self) -> &[u64] {
        &self.support
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Partition value `Z_Λ` (sum of unnormalized configuration weights).
    pub fn z_lambda(&self) -> f64 {
        self.z_lambda
    }

    /// Crude upper proxy for the weight lost to the spin truncation: the
    /// activity mass beyond the represented spins, once per support site
    /// (a union bound over "some site uses a trimmed spin"). Zero whenever
    /// the activities have no mass beyond the spin range.
    pub fn truncation_weight(&self) -> f64 {
        self.truncation_weight
    }

    /// Probability of one full support configuration.
    pub fn probability(&self, config: &[usize]) -> f64 {
        assert_eq!(config.len(), self.support.len(), "configuration length");
        let mut idx = 0usize;
        for &s in config {
            assert!(s < self.spins, "spin {s} out of range");
            idx = idx * self.spins + s;
        }
        self.probabilities[idx]
    }

    /// Single-site marginal distribution of a support vertex.
    pub fn site_marginal(&self, v: u64) -> Vec<f64> {
        let pos = self
            .support
            .binary_search(&v)
            .expect("vertex not in the support");
        let mut out = vec![0.0; self.spins];
        let mut config = vec![0usize; self.support.len()];
        let mut more = true;
        let mut idx = 0usize;
        while more {
            out[config[pos]] += self.probabilities[idx];
            idx += 1;
            more = next_config(&mut config, self.spins);
        }
        out
    }

    /// Joint marginal of two support vertices, row-major over `(u, v)` spins.
    pub fn pair_marginal(&self, u: u64, v: u64) -> Vec<f64> {
        let pu = self.support.binary_search(&u).expect("vertex not in support");
        let pv = self.support.binary_search(&v).expect("vertex not in support");
        let mut out = vec![0.0; self.spins * self.spins];
        let mut config = vec![0usize; self.support.len()];
        let mut more = true;
        let mut idx = 0usize;
        while more {
            out[config[pu] * self.spins + config[pv]] += self.probabilities[idx];
            idx += 1;
            more = next_config(&mut config, self.spins);
        }
        out
    }
}

/// Enumerate the finite-volume marginal of the law's measure on
/// `region ∪ ∂region`. The table has `spins^|support|` entries and must fit
/// under [`STORED_TABLE_CAP`]. Inadmissible configurations (a zero transfer
/// factor on some edge) get probability exactly 0.
pub fn gibbs_marginal(
    law: &BoundaryLaw,
    ball: &CayleyBall,
    region: &Region,
) -> Result<GibbsMarginal> {
    let sites = region.support().len();
    let states = state_count(law.spins(), sites);
    if states > STORED_TABLE_CAP {
        return Err(Error::TableTooLarge {
            states,
            cap: STORED_TABLE_CAP,
        });
    }
    let enumeration = Enumeration::new(law, ball, region);
    let mut weights = Vec::with_capacity(states as usize);
    let mut config = vec![0usize; sites];
    let mut more = true;
    let mut z = 0.0f64;
    while more {
        let w = enumeration.weight(&config);
        z += w;
        weights.push(w);
        more = next_config(&mut config, law.spins());
    }
    for w in &mut weights {
        *w /= z;
    }
    let discarded = law.spec().discarded_mass(law.spins() - 1);
    Ok(GibbsMarginal {
        spins: law.spins(),
        support: region.support().to_vec(),
        probabilities: weights,
        z_lambda: z,
        truncation_weight: sites as f64 * discarded,
    })
}

/// Compatibility of nested finite-volume marginals: enumerate the `big`
/// region's table (streamed, never materialized — capped by
/// [`STREAMED_ENUMERATION_CAP`]), project every configuration onto the
/// `small` region's support, and compare the projected distribution to the
/// directly computed `small` table. Returns the maximum absolute probability
/// discrepancy; for a consistent boundary law this is roundoff-sized
/// regardless of the regions chosen.
pub fn specification_consistency(
    law: &BoundaryLaw,
    ball: &CayleyBall,
    small: &Region,
    big: &Region,
) -> Result<f64> {
    for &v in small.members() {
        if !big.is_member(v) {
            return Err(Error::RegionsNotNested { vertex: v });
        }
    }
    let small_table = gibbs_marginal(law, ball, small)?;
    let spins = law.spins();
    let big_sites = big.support().len();
    let big_states = state_count(spins, big_sites);
    if big_states > STREAMED_ENUMERATION_CAP {
        return Err(Error::EnumerationTooLarge {
            states: big_states,
            cap: STREAMED_ENUMERATION_CAP,
        });
    }

    // Every small-support vertex appears in the big support: members nest by
    // assumption and a small-boundary vertex is a child of a small member,
    // hence either a big member or on the big boundary.
    let projection: Vec<usize> = small_table
        .support
        .iter()
        .map(|&v| {
            big.support_position(v)
                .ok_or(Error::RegionsNotNested { vertex: v })
        })
        .collect::<Result<_>>()?;

    let enumeration = Enumeration::new(law, ball, big);
    let small_size = small_table.probabilities.len();

    // Parallelize over a prefix of the big support, odometer over the rest.
    let mut prefix_len = 0usize;
    while prefix_len < big_sites && state_count(spins, prefix_len) < 1024 {
        prefix_len += 1;
    }
    let prefix_states = state_count(spins, prefix_len) as u64;
    let accumulated: Vec<f64> = (0..prefix_states)
        .into_par_iter()
        .fold(
            || vec![0.0f64; small_size],
            |mut acc, prefix_idx| {
                let mut config = vec![0usize; big_sites];
                let mut rem = prefix_idx;
                for pos in (0..prefix_len).rev() {
                    config[pos] = (rem % spins as u64) as usize;
                    rem /= spins as u64;
                }
                loop {
                    let w = enumeration.weight(&config);
                    if w != 0.0 {
                        let mut idx = 0usize;
                        for &p in &projection {
                            idx = idx * spins + config[p];
                        }
                        acc[idx] += w;
                    }
                    if !next_config(&mut config[prefix_len..], spins) {
                        break;
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![0.0f64; small_size],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );

    let total: f64 = accumulated.iter().sum();
    let mut worst = 0.0f64;
    for (projected, &direct) in accumulated.iter().zip(&small_table.probabilities) {
        worst = worst.max((projected / total - direct).abs());
    }
    Ok(worst)
}
