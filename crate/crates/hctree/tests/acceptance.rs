//! Acceptance suite: one test per release criterion, each printing a single
//! `criterion N: PASS — …` evidence line (visible with `--nocapture`) and
//! asserting both the numerical claims and the runtime budget.
//!
//! Criteria 6 and 7 share one parameter-grid computation through a
//! process-wide cache, so the whole-grid enumeration is paid once; its budget
//! covers both tests.

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use hctree::{
    analytic_solutions, apply_f, boundary_distance, brute_force_enumerate, classify,
    costar_fixed_point, costar_norm_cubic, critical_points, factorization_residual,
    gibbs_marginal, in_invariant_set, iterate, lambda_hat, linear_sum, normalisable, oracle_sweep,
    phi, positive_roots, region_sweep, sample_in_slab, specification_consistency,
    star_fixed_point, star_norm_cubic, symmetric_solutions, ActivitySpec, AdjacencyKernel,
    BoundaryLaw, CayleyBall, DiscrepancyZone, InvariantSetBounds, OracleRow, ReducedParams,
    ReducedSolution, Region, SolutionKind,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BASE_SEED: u64 = 42;

/// Random activity sequence rescaled to an exact target norm.
fn random_spec(rng: &mut ChaCha8Rng, target_norm: f64, allow_tail: bool) -> ActivitySpec {
    let len = rng.gen_range(2..=5);
    let head: Vec<f64> = (0..len).map(|_| rng.gen_range(0.2..1.0)).collect();
    let ratio = if allow_tail && rng.gen_bool(0.5) {
        rng.gen_range(0.3..0.6)
    } else {
        0.0
    };
    let raw = ActivitySpec::new(head.clone(), ratio).unwrap();
    let scale = target_norm / raw.norm();
    ActivitySpec::new(head.into_iter().map(|h| h * scale).collect(), ratio).unwrap()
}

#[test]
fn criterion_1_contraction_threshold() {
    let t0 = Instant::now();
    let hat2 = lambda_hat(2).unwrap();
    let reference = 0.5296;
    assert!(
        (hat2 - reference).abs() < 1e-3,
        "lambda_hat(2) = {hat2} vs reference {reference}"
    );
    let mut prev = f64::INFINITY;
    let mut worst_phi = 0.0f64;
    for k in 2..=10 {
        let hat = lambda_hat(k).unwrap();
        let residual = phi(k, hat).unwrap().abs();
        assert!(residual < 1e-12, "phi(lambda_hat({k})) = {residual}");
        worst_phi = worst_phi.max(residual);
        assert!(hat < prev, "lambda_hat must decrease at k = {k}");
        prev = hat;
    }
    let elapsed = t0.elapsed();
    assert!(elapsed < Duration::from_secs(1), "budget 1 s, took {elapsed:?}");
    println!(
        "criterion 1: PASS — lambda_hat(2) = {:.12} (|Δ| = {:.1e} from 0.5296); \
         max |phi(lambda_hat(k))| = {:.1e} for k = 2..10, strictly decreasing; {:?}",
        hat2,
        (hat2 - reference).abs(),
        worst_phi,
        elapsed
    );
}

#[test]
fn criterion_2_critical_window() {
    let t0 = Instant::now();
    let pair = critical_points(10.0).expect("b = 10 is above the critical threshold");
    assert!((pair.x1 - 2.0).abs() < 1e-12, "x1 = {}", pair.x1);
    assert!((pair.x2 - 5.0).abs() < 1e-12, "x2 = {}", pair.x2);
    assert!(
        (pair.f_x1 - 1.0 / 32.0).abs() < 1e-12,
        "f(x1) = {}",
        pair.f_x1
    );
    assert!(
        (pair.f_x2 - 4.0 / 125.0).abs() < 1e-12,
        "f(x2) = {}",
        pair.f_x2
    );

    // a = 4/L against the window (1/32, 4/125) at lambda1 = 19 (b = 10):
    // inside, at both endpoints, and outside on each side.
    let count = |l: f64| {
        symmetric_solutions(&ReducedParams::new(l, 19.0).unwrap()).len()
    };
    assert_eq!(count(126.5), 3, "interior of the window");
    assert_eq!(count(125.0), 2, "lower endpoint (tangent)");
    assert_eq!(count(128.0), 2, "upper endpoint (tangent)");
    assert_eq!(count(100.0), 1, "below the window");
    assert_eq!(count(130.0), 1, "above the window");

    let elapsed = t0.elapsed();
    assert!(elapsed < Duration::from_secs(1), "budget 1 s, took {elapsed:?}");
    println!(
        "criterion 2: PASS — critical pair (2, 5) with values (1/32, 4/125) to 1e-12; \
         symmetric counts 3/2/1 inside/at/outside the window at lambda1 = 19; {elapsed:?}"
    );
}

#[test]
fn criterion_3_contraction_convergence() {
    let t0 = Instant::now();
    let hat2 = lambda_hat(2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(BASE_SEED);
    let kernels = [
        AdjacencyKernel::Parity,
        AdjacencyKernel::Star,
        AdjacencyKernel::CoStar,
    ];
    let mut worst_spread = 0.0f64;
    let mut worst_ratio = 0.0f64;
    for _ in 0..100 {
        let target = rng.gen_range(0.05..0.9 * hat2);
        let spec = random_spec(&mut rng, target, true);
        assert!(spec.norm() < hat2);
        let n = spec.default_truncation().clamp(2, 48);
        let bounds = InvariantSetBounds::new(&spec, 2);
        for kernel in &kernels {
            let mut endpoints = Vec::with_capacity(5);
            for _ in 0..5 {
                let x0 = sample_in_slab(&bounds, n, &mut rng);
                let out = iterate(&x0, &spec, kernel, 2, 1e-14, 50_000).unwrap();
                assert!(out.converged, "iteration must converge below the threshold");
                endpoints.push(out.point);
            }
            for i in 0..endpoints.len() {
                for j in i + 1..endpoints.len() {
                    let d = endpoints[i].l1_distance(&endpoints[j]);
                    assert!(d < 2e-12, "starts disagree by {d}");
                    worst_spread = worst_spread.max(d);
                }
            }
            for _ in 0..3 {
                let x = sample_in_slab(&bounds, n, &mut rng);
                let y = sample_in_slab(&bounds, n, &mut rng);
                let dist = x.l1_distance(&y);
                if dist < 1e-12 {
                    continue;
                }
                let fx = apply_f(&x, &spec, kernel, 2).unwrap();
                let fy = apply_f(&y, &spec, kernel, 2).unwrap();
                let ratio = fx.l1_distance(&fy) / dist;
                assert!(ratio < 1.0, "expansion ratio {ratio} at norm {}", spec.norm());
                worst_ratio = worst_ratio.max(ratio);
            }
        }
    }
    let elapsed = t0.elapsed();
    assert!(elapsed < Duration::from_secs(30), "budget 30 s, took {elapsed:?}");
    println!(
        "criterion 3: PASS — 100 random activity sequences × 3 kernels × 5 starts all \
         met at one point (worst spread {worst_spread:.2e} < 2e-12); worst sampled \
         contraction ratio {worst_ratio:.6} < 1; {elapsed:?}"
    );
}

#[test]
fn criterion_4_slab_invariance() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(BASE_SEED + 1);
    let kernels = [
        AdjacencyKernel::AllOnes,
        AdjacencyKernel::Star,
        AdjacencyKernel::CoStar,
        AdjacencyKernel::Parity,
    ];
    let mut checked = 0usize;
    for kernel in &kernels {
        for _ in 0..1000 {
            let target = rng.gen_range(0.2..3.0);
            let spec = random_spec(&mut rng, target, true);
            let k = rng.gen_range(2..=5);
            let bounds = InvariantSetBounds::new(&spec, k);
            let n = spec.default_truncation();
            let x = sample_in_slab(&bounds, n, &mut rng);
            assert!(in_invariant_set(&x, &bounds), "sampler must land in the slab");
            let fx = apply_f(&x, &spec, kernel, k).unwrap();
            assert!(
                in_invariant_set(&fx, &bounds),
                "image norm {} left the slab [{}, {}] (kernel {kernel:?}, k = {k})",
                fx.norm(),
                bounds.lower(),
                bounds.upper()
            );
            checked += 1;
        }
    }
    let elapsed = t0.elapsed();
    assert!(elapsed < Duration::from_secs(5), "budget 5 s, took {elapsed:?}");
    println!(
        "criterion 4: PASS — {checked} random slab points (1000 per kernel, k in 2..=5) \
         all mapped back into the slab; {elapsed:?}"
    );
}

#[test]
fn criterion_5_closed_form_fixed_points() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(BASE_SEED + 2);
    let mut worst_star = 0.0f64;
    let mut worst_costar = 0.0f64;
    for _ in 0..1000 {
        // Star: the cubic has exactly one positive root for any mass split.
        let lambda1 = rng.gen_range(0.05..1.95);
        let extra = rng.gen_range(0.1..3.0);
        let len = rng.gen_range(2..=5);
        let mut head = vec![lambda1];
        let mut weights: Vec<f64> = (1..len).map(|_| rng.gen_range(0.1..1.0)).collect();
        let wsum: f64 = weights.iter().sum();
        for w in &mut weights {
            head.push(*w * extra / wsum);
        }
        let spec = ActivitySpec::new(head, 0.0).unwrap();
        assert_eq!(
            positive_roots(&star_norm_cubic(lambda1, spec.norm()).unwrap()).len(),
            1,
            "unique positive root"
        );
        let (s, x) = star_fixed_point(&spec, spec.support()).unwrap();
        assert!((x.norm() - s).abs() < 1e-9);
        let residual = apply_f(&x, &spec, &AdjacencyKernel::Star, 2)
            .unwrap()
            .l1_distance(&x);
        assert!(residual < 1e-9, "star residual {residual}");
        worst_star = worst_star.max(residual);

        // Co-star: lambda1 < 1 keeps the sign pattern single-change.
        let lambda1 = rng.gen_range(0.05..0.95);
        let extra = rng.gen_range(0.1..2.5);
        let len = rng.gen_range(2..=5);
        let mut head = vec![lambda1];
        let mut weights: Vec<f64> = (1..len).map(|_| rng.gen_range(0.1..1.0)).collect();
        let wsum: f64 = weights.iter().sum();
        for w in &mut weights {
            head.push(*w * extra / wsum);
        }
        let spec = ActivitySpec::new(head, 0.0).unwrap();
        assert_eq!(
            positive_roots(&costar_norm_cubic(lambda1, spec.norm()).unwrap()).len(),
            1,
            "unique positive root"
        );
        let (s, x) = costar_fixed_point(&spec, spec.support()).unwrap();
        assert!((x.norm() - s).abs() < 1e-9);
        let residual = apply_f(&x, &spec, &AdjacencyKernel::CoStar, 2)
            .unwrap()
            .l1_distance(&x);
        assert!(residual < 1e-9, "co-star residual {residual}");
        worst_costar = worst_costar.max(residual);
    }
    let elapsed = t0.elapsed();
    assert!(elapsed < Duration::from_secs(10), "budget 10 s, took {elapsed:?}");
    println!(
        "criterion 5: PASS — 1000 random mass splits per kernel: closed-form fixed \
         points have operator residual < 1e-9 (worst star {worst_star:.2e}, worst \
         co-star {worst_costar:.2e}) with unique positive cubic roots; {elapsed:?}"
    );
}

// ------------------------------------------------------------------
// Criteria 6 and 7 share one grid computation.
// ------------------------------------------------------------------

const GRID_RES: usize = 50;
const GRID_COLUMNS: usize = 120;
const REFINE_TOL: f64 = 1e-10;
const BOUNDARY_EPS: f64 = 1e-3;

struct GridData {
    rows: Vec<OracleRow>,
    enumerated: Vec<(ReducedParams, Vec<ReducedSolution>)>,
    elapsed: Duration,
}

fn grid_data() -> &'static GridData {
    static GRID: OnceLock<GridData> = OnceLock::new();
    GRID.get_or_init(|| {
        let t0 = Instant::now();
        // L = 4, 8, …, 200 and lambda1 = 0.6, 1.2, …, 30.
        let rows = oracle_sweep(
            (4.0, 200.0),
            (0.6, 30.0),
            GRID_RES,
            GRID_COLUMNS,
            REFINE_TOL,
            BOUNDARY_EPS,
        )
        .unwrap();
        let enumerated = rows
            .iter()
            .map(|row| {
                let p = ReducedParams::new(row.l, row.lambda1).unwrap();
                let sols = brute_force_enumerate(&p, GRID_COLUMNS, REFINE_TOL).unwrap();
                (p, sols)
            })
            .collect();
        GridData {
            rows,
            enumerated,
            elapsed: t0.elapsed(),
        }
    })
}

#[test]
fn criterion_6_grid_count_oracle() {
    let data = grid_data();
    let excluded = GRID_RES * GRID_RES - data.rows.len();
    assert!(
        data.rows.len() > 2300,
        "boundary exclusion removed too much: kept {}",
        data.rows.len()
    );

    let mut disagreements = Vec::new();
    let mut witness5 = None;
    for row in &data.rows {
        assert_eq!(
            row.oracle, row.analytic,
            "enumeration vs analytic at (L = {}, lambda1 = {})",
            row.l, row.lambda1
        );
        let predicted = row
            .predicted
            .expect("classification covers every grid point") as usize;
        if predicted != row.analytic {
            match row.zone {
                DiscrepancyZone::PairConvention => assert_eq!(
                    predicted,
                    row.analytic + 1,
                    "pair-convention zone at (L = {}, lambda1 = {})",
                    row.l,
                    row.lambda1
                ),
                DiscrepancyZone::ExtraPair => assert_eq!(
                    row.analytic,
                    predicted + 1,
                    "extra-pair zone at (L = {}, lambda1 = {})",
                    row.l,
                    row.lambda1
                ),
                DiscrepancyZone::None => panic!(
                    "unflagged table disagreement at (L = {}, lambda1 = {}): predicted {predicted}, enumerated {}",
                    row.l, row.lambda1, row.analytic
                ),
            }
            disagreements.push(row);
        }
        if row.analytic == 5 && witness5.is_none() {
            let label = classify(&ReducedParams::new(row.l, row.lambda1).unwrap());
            if label.in_a3 && label.in_b2 {
                witness5 = Some((row.l, row.lambda1));
            }
        }
    }
    for row in &disagreements {
        println!(
            "  flagged disagreement: L = {:.1}, lambda1 = {:.1}: table {} vs enumerated {} ({})",
            row.l,
            row.lambda1,
            row.predicted.unwrap(),
            row.analytic,
            row.zone.token()
        );
    }
    let (wl, wl1) =
        witness5.expect("the maximal count 5 must be realized inside the lens/band overlap");
    assert!(
        data.elapsed < Duration::from_secs(600),
        "budget 10 min, took {:?}",
        data.elapsed
    );
    println!(
        "criterion 6: PASS — {} grid points ({excluded} excluded near region boundaries): \
         enumerated count = analytic count everywhere; {} table disagreements, every one \
         inside a flagged zone (listed above); count 5 realized at (L = {wl}, lambda1 = {wl1}); \
         grid time {:?}",
        data.rows.len(),
        disagreements.len(),
        data.elapsed
    );
}

#[test]
fn criterion_7_asymmetric_product_law() {
    let data = grid_data();
    let mut checked = 0usize;
    let mut worst_product = 0.0f64;
    let mut worst_factorization = 0.0f64;
    for (p, sols) in &data.enumerated {
        for sol in sols {
            if sol.kind != SolutionKind::Asymmetric {
                continue;
            }
            let product_dev = (sol.m1 * sol.m2 - 1.0).abs();
            assert!(
                product_dev < 1e-9,
                "M1·M2 = {} at (L = {}, lambda1 = {})",
                sol.m1 * sol.m2,
                p.l,
                p.lambda1
            );
            let lhs = (1.0 + p.lambda1 + sol.t).powi(2);
            let rhs = p.l * (2.0 + sol.t);
            let rel = factorization_residual(p, sol.t).abs() / lhs.max(rhs);
            assert!(
                rel < 1e-7,
                "factorization residual {rel} at (L = {}, lambda1 = {})",
                p.l,
                p.lambda1
            );
            worst_product = worst_product.max(product_dev);
            worst_factorization = worst_factorization.max(rel);
            checked += 1;
        }
    }
    assert!(checked > 100, "expected many asymmetric solutions, saw {checked}");
    println!(
        "criterion 7: PASS — {checked} enumerated asymmetric solutions: worst \
         |M1·M2 − 1| = {worst_product:.2e} < 1e-9, worst relative factorization \
         residual = {worst_factorization:.2e} < 1e-7 (runtime shared with criterion 6)"
    );
}

#[test]
fn criterion_8_gibbs_layer() {
    let t0 = Instant::now();
    // Geometric activities with equal odd/even block mass and a norm far
    // below the contraction threshold.
    let spec = ActivitySpec::new(vec![0.1, 0.08, 0.12], 0.5).unwrap();
    let spins = 6;
    let (x0, _) = spec.truncate(spins - 1).unwrap();
    let out = iterate(&x0, &spec, &AdjacencyKernel::Parity, 2, 1e-15, 10_000).unwrap();
    assert!(out.converged);
    let law =
        BoundaryLaw::from_fixed_point(&out.point, &spec, &AdjacencyKernel::Parity, 2, spins)
            .unwrap();

    // Normalisability with the square-summability margin.
    let t_sum = linear_sum(&law);
    let (finite, value) = normalisable(&law);
    let bound = spec.lambda1() + spec.squared_sum_from(2);
    assert!(finite);
    assert!(value.is_finite());
    assert!(t_sum < bound, "linear sum {t_sum} must stay below {bound}");

    // Root-edge marginal sums to one.
    let ball = CayleyBall::new(2, 2).unwrap();
    let edge = Region::new(&ball, &[0, 1]).unwrap();
    let marginal = gibbs_marginal(&law, &ball, &edge).unwrap();
    let total: f64 = marginal.probabilities().iter().sum();
    assert!((total - 1.0).abs() < 1e-9, "marginal total {total}");

    // Nested volumes agree.
    let small = Region::sub_ball(&ball, 0).unwrap();
    let big = Region::sub_ball(&ball, 1).unwrap();
    let discrepancy = specification_consistency(&law, &ball, &small, &big).unwrap();
    assert!(discrepancy < 1e-9, "nested discrepancy {discrepancy}");

    // Doubling the law leaves probabilities unchanged.
    let doubled = gibbs_marginal(&law.rescaled(2.0).unwrap(), &ball, &edge).unwrap();
    let mut worst_rescale = 0.0f64;
    for (p, q) in marginal
        .probabilities()
        .iter()
        .zip(doubled.probabilities())
    {
        worst_rescale = worst_rescale.max((p - q).abs());
    }
    assert!(worst_rescale < 1e-9, "rescale deviation {worst_rescale}");

    let elapsed = t0.elapsed();
    assert!(elapsed < Duration::from_secs(30), "budget 30 s, took {elapsed:?}");
    println!(
        "criterion 8: PASS — law residual {:.1e}; linear sum {:.6} < bound {:.6} \
         (square {:.2e}); root-edge total 1±{:.1e}; nested discrepancy {:.2e} < 1e-9; \
         doubling shift {:.1e}; {elapsed:?}",
        law.consistency_residual(),
        t_sum,
        bound,
        value,
        (total - 1.0).abs(),
        discrepancy,
        worst_rescale
    );
}

#[test]
fn criterion_9_region_figures() {
    let t0 = Instant::now();
    let rows = region_sweep((1.0, 200.0), (0.15, 30.0), 200).unwrap();
    assert_eq!(rows.len(), 200 * 200);
    assert!(
        rows.iter().all(|r| r.label.predicted.is_some()),
        "the classification table must cover the sweep window"
    );

    let a3: Vec<_> = rows.iter().filter(|r| r.label.in_a3).collect();
    assert!(!a3.is_empty(), "lens region must appear");
    let (mut min_l1, mut max_l1, mut min_l) = (f64::INFINITY, 0.0f64, f64::INFINITY);
    for r in &a3 {
        min_l1 = min_l1.min(r.lambda1);
        max_l1 = max_l1.max(r.lambda1);
        min_l = min_l.min(r.l);
    }
    assert!(min_l1 > 17.0, "lens exists only for lambda1 > 17, saw {min_l1}");
    assert!(
        max_l1 < 29.0,
        "lens closes before the window's top edge, saw {max_l1}"
    );
    assert!(min_l > 100.0, "lens sits at large L, saw {min_l}");

    let b: Vec<_> = rows.iter().filter(|r| r.label.in_b).collect();
    assert!(!b.is_empty(), "band B must appear");
    let b_lo = 8.0 + 4.0 * 3.0f64.sqrt();
    for r in &b {
        assert!(
            r.l >= b_lo - 1e-9 && r.l <= 16.0 + 1e-9,
            "B must satisfy {b_lo:.3} <= L <= 16, saw L = {}",
            r.l
        );
        assert!(r.lambda1 > (2.0 * r.l).sqrt() - 1.0 - 1e-9);
    }

    let c: Vec<_> = rows.iter().filter(|r| r.label.in_c).collect();
    assert!(!c.is_empty(), "band C must appear");
    let c_lo = 6.0 + 4.0 * 2.0f64.sqrt();
    for r in &c {
        assert!(r.l > c_lo - 1e-9, "C needs L > {c_lo:.3}, saw {}", r.l);
        assert!(r.lambda1 <= 2.0 * r.l.sqrt() - 3.0 + 1e-9);
    }

    let b2: Vec<_> = rows.iter().filter(|r| r.label.in_b2).collect();
    assert!(!b2.is_empty(), "band B2 must appear");
    for r in &b2 {
        assert!(r.l > 8.0 - 1e-9, "B2 needs L > 8, saw {}", r.l);
        assert!(r.lambda1 >= 2.0 * r.l.sqrt() - 3.0 - 1e-9);
        assert!(r.lambda1 <= r.l / 4.0 + 1.0 + 1e-9);
    }

    let elapsed = t0.elapsed();
    assert!(elapsed < Duration::from_secs(60), "budget 1 min, took {elapsed:?}");
    println!(
        "criterion 9: PASS — 200×200 sweep: lens nonempty and bounded \
         (lambda1 in ({min_l1:.2}, {max_l1:.2}), L > {min_l:.0}); band B within \
         [{b_lo:.3}, 16] ({} points); band C beyond {c_lo:.3} ({} points); band B2 \
         beyond L = 8 ({} points); {elapsed:?}",
        b.len(),
        c.len(),
        b2.len()
    );
}

#[test]
fn acceptance_suite_is_deterministic() {
    // The random criteria draw from fixed seeds; replaying a slice of
    // criterion 3's stream must give identical samples.
    let mut a = ChaCha8Rng::seed_from_u64(BASE_SEED);
    let mut b = ChaCha8Rng::seed_from_u64(BASE_SEED);
    let spec_a = random_spec(&mut a, 0.3, true);
    let spec_b = random_spec(&mut b, 0.3, true);
    assert_eq!(spec_a.head(), spec_b.head());
    assert_eq!(spec_a.tail_ratio(), spec_b.tail_ratio());
    let bounds = InvariantSetBounds::new(&spec_a, 2);
    let xa = sample_in_slab(&bounds, 8, &mut a);
    let xb = sample_in_slab(&bounds, 8, &mut b);
    assert_eq!(xa.values(), xb.values());
    // Boundary exclusion is symmetric: a point excluded by the grid metric
    // stays excluded under the same epsilon.
    let p = ReducedParams::new(16.0, 5.0).unwrap();
    assert!(boundary_distance(&p) <= BOUNDARY_EPS);
    let far = ReducedParams::new(126.5, 19.0).unwrap();
    assert!(boundary_distance(&far) > BOUNDARY_EPS);
    assert_eq!(analytic_solutions(&far).len(), 4);
}
