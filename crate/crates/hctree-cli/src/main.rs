//! Command-line front end for the hctree library.
//!
//! Exit codes: 0 on success, 1 on a computation failure (domain errors,
//! non-convergence, table caps), 2 on bad arguments (clap's default).
//! All numeric output uses 15 significant digits; CSV artifacts are UTF-8
//! with `\n` line endings, and runs are byte-deterministic under a fixed
//! `--seed`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hctree::{
    analytic_solutions, apply_f, boundary_curves, certify, classify, costar_fixed_point,
    discrepancy_zone, gibbs_marginal, iterate, linear_sum, normalisable, oracle_sweep,
    region_sweep, specification_consistency, star_fixed_point, ActivitySpec, AdjacencyKernel,
    BoundaryLaw, CayleyBall, CurveSample, ReducedParams, Region, RegionLabel, SolutionKind,
    SweepRow, Verdict,
};

#[derive(Parser)]
#[command(
    name = "hctree",
    version,
    about = "Fixed points of a hard-core activity operator on Cayley trees"
)]
struct Cli {
    /// Seed for every sampled check (fixed seed ⇒ identical output).
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certify the contraction condition ‖λ‖ < λ̂(k) for an activity sequence.
    Certify(CertifyArgs),
    /// Closed-form fixed point of the star (2) or co-star (3) kernel at k = 2.
    Solve(SolveArgs),
    /// Classify a reduced parameter point into the phase regions.
    Classify(PointArgs),
    /// List the reduced two-block solutions at a parameter point.
    Enumerate(EnumerateArgs),
    /// Sweep a parameter window and write region-membership CSV (plus curves).
    Regions(RegionsArgs),
    /// Build a boundary law and print the root marginal of its Gibbs measure.
    Gibbs(GibbsArgs),
    /// Compare predicted, analytic, and enumerated counts over a grid.
    Oracle(OracleArgs),
}

#[derive(Args)]
struct CertifyArgs {
    /// Branching order of the tree (each vertex has k+1 neighbors).
    #[arg(long)]
    k: u32,
    /// Activity config file (`head = …`, `tail_ratio = …`).
    #[arg(long, conflicts_with = "norm", required_unless_present = "norm")]
    lambda: Option<PathBuf>,
    /// Shorthand: a canonical sequence with this exact total mass.
    #[arg(long)]
    norm: Option<f64>,
    /// Random slab pairs used for the empirical contraction ratio.
    #[arg(long, default_value_t = 200)]
    samples: usize,
}

#[derive(Args)]
struct SolveArgs {
    /// Closed-form family: 2 = star kernel (first spin compatible with all),
    /// 3 = co-star kernel (everything except the first spin's column).
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(["2", "3"]))]
    example: String,
    /// First activity λ₁.
    #[arg(long)]
    lambda1: f64,
    /// Total activity mass ‖λ‖ (must exceed λ₁).
    #[arg(long)]
    norm: f64,
}

#[derive(Args)]
struct PointArgs {
    /// Shared block activity mass L = L₁ = L₂.
    #[arg(long = "L")]
    l: f64,
    /// First activity λ₁.
    #[arg(long)]
    lambda1: f64,
}

#[derive(Args)]
struct EnumerateArgs {
    #[command(flatten)]
    point: PointArgs,
    /// Also run the brute-force grid enumeration and report its count.
    #[arg(long)]
    oracle: bool,
    /// Seed columns per axis for the brute-force stage.
    #[arg(long, default_value_t = 120)]
    grid: usize,
    /// Residual acceptance tolerance for refined roots.
    #[arg(long, default_value_t = 1e-10)]
    refine_tol: f64,
}

#[derive(Args)]
struct WindowArgs {
    #[arg(long, default_value_t = 1.0)]
    lmin: f64,
    #[arg(long, default_value_t = 200.0)]
    lmax: f64,
    #[arg(long, default_value_t = 0.15)]
    l1min: f64,
    #[arg(long, default_value_t = 30.0)]
    l1max: f64,
    /// Samples per axis.
    #[arg(long)]
    res: usize,
}

#[derive(Args)]
struct RegionsArgs {
    #[command(flatten)]
    window: WindowArgs,
    /// Output CSV path; boundary curves go to `<stem>_curves.csv` beside it.
    #[arg(long)]
    out: PathBuf,
    /// Also render the boundary curves as an SVG at this path.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct GibbsArgs {
    /// Compatibility kernel for the occupied spins.
    #[arg(long, value_enum, default_value_t = KernelChoice::Parity)]
    kernel: KernelChoice,
    /// Activity config file (`head = …`, `tail_ratio = …`).
    #[arg(long)]
    lambda: PathBuf,
    /// Branching order of the tree.
    #[arg(long, default_value_t = 2)]
    k: u32,
    /// Ball radius (≥ 2; the nested-consistency check always compares the
    /// radius-0 and radius-1 sub-balls).
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(2..))]
    radius: u32,
    /// Number of spin values including the unoccupied state 0 (≥ 2).
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u64).range(2..))]
    spins: u64,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    window: WindowArgs,
    /// Seed columns per axis for the brute-force stage.
    #[arg(long, default_value_t = 120)]
    grid: usize,
    /// Half-width of the excluded neighborhoods around region boundaries.
    #[arg(long, default_value_t = 1e-3)]
    eps: f64,
    /// Residual acceptance tolerance for refined roots.
    #[arg(long, default_value_t = 1e-10)]
    refine_tol: f64,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelChoice {
    /// Same-parity spins are compatible (two-block structure).
    Parity,
    /// Only the first spin is compatible below every other.
    Star,
    /// Everything except the first spin's column.
    Costar,
    /// Every pair compatible.
    Complete,
}

impl KernelChoice {
    fn kernel(self) -> AdjacencyKernel {
        match self {
            KernelChoice::Parity => AdjacencyKernel::Parity,
            KernelChoice::Star => AdjacencyKernel::Star,
            KernelChoice::Costar => AdjacencyKernel::CoStar,
            KernelChoice::Complete => AdjacencyKernel::AllOnes,
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Certify(args) => cmd_certify(args, cli.seed),
        Command::Solve(args) => cmd_solve(args),
        Command::Classify(args) => cmd_classify(args),
        Command::Enumerate(args) => cmd_enumerate(args),
        Command::Regions(args) => cmd_regions(args),
        Command::Gibbs(args) => cmd_gibbs(args),
        Command::Oracle(args) => cmd_oracle(args),
    }
}

/// 15 significant digits.
fn num(v: f64) -> String {
    format!("{v:.14e}")
}

fn load_spec(path: &Path) -> Result<ActivitySpec> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading activity config {}", path.display()))?;
    ActivitySpec::parse(&text).with_context(|| format!("parsing {}", path.display()))
}

fn cmd_certify(args: CertifyArgs, seed: u64) -> Result<()> {
    let spec = match (&args.lambda, args.norm) {
        (Some(path), None) => load_spec(path)?,
        (None, Some(r)) => ActivitySpec::with_norm(r)?,
        _ => bail!("exactly one of --lambda or --norm is required"),
    };
    let cert = certify(&spec, args.k, args.samples, seed)?;
    println!("k={}", cert.k);
    println!("norm_lambda={}", num(cert.norm_lambda));
    println!("lambda_hat={}", num(cert.lambda_hat));
    println!("phi={}", num(cert.phi_value));
    let verdict = match cert.verdict {
        Verdict::Contraction => "Contraction",
        Verdict::Inconclusive => "Inconclusive",
    };
    println!("verdict={verdict}");
    if let Some(kappa) = cert.empirical_kappa {
        println!("empirical_kappa={}", num(kappa));
    }
    Ok(())
}

fn cmd_solve(args: SolveArgs) -> Result<()> {
    if !(args.lambda1 > 0.0 && args.norm > args.lambda1) {
        bail!(
            "need 0 < lambda1 < norm, got lambda1 = {}, norm = {}",
            args.lambda1,
            args.norm
        );
    }
    let spec = ActivitySpec::new(vec![args.lambda1, args.norm - args.lambda1], 0.0)?;
    let (norm_x, point, kernel) = match args.example.as_str() {
        "2" => {
            let (s, p) = star_fixed_point(&spec, 2)?;
            (s, p, AdjacencyKernel::Star)
        }
        _ => {
            let (s, p) = costar_fixed_point(&spec, 2)?;
            (s, p, AdjacencyKernel::CoStar)
        }
    };
    let residual = apply_f(&point, &spec, &kernel, 2)?.l1_distance(&point);
    println!("norm_x={}", num(norm_x));
    println!("residual={}", num(residual));
    Ok(())
}

fn region_name(label: &RegionLabel) -> &'static str {
    if label.in_a3 {
        "A3"
    } else if label.in_a2 {
        "A2"
    } else {
        "A1"
    }
}

fn cmd_classify(args: PointArgs) -> Result<()> {
    let p = ReducedParams::new(args.l, args.lambda1)?;
    let label = classify(&p);
    let zone = discrepancy_zone(&p);
    println!("L={}", num(p.l));
    println!("lambda1={}", num(p.lambda1));
    println!("inA1={}", label.in_a1 as u8);
    println!("inA2={}", label.in_a2 as u8);
    println!("inA3={}", label.in_a3 as u8);
    println!("inB={}", label.in_b as u8);
    println!("inC={}", label.in_c as u8);
    println!("inB1={}", label.in_b1 as u8);
    println!("inB2={}", label.in_b2 as u8);
    println!("region={}", region_name(&label));
    match label.predicted {
        Some(n) => println!("predicted={n}"),
        None => println!("predicted="),
    }
    println!("near_boundary={}", label.near_boundary as u8);
    println!("zone={}", zone.token());
    Ok(())
}

fn cmd_enumerate(args: EnumerateArgs) -> Result<()> {
    let p = ReducedParams::new(args.point.l, args.point.lambda1)?;
    let label = classify(&p);
    let solutions = analytic_solutions(&p);
    let symmetric = solutions
        .iter()
        .filter(|s| s.kind == SolutionKind::Symmetric)
        .count();
    println!("L={}", num(p.l));
    println!("lambda1={}", num(p.lambda1));
    println!("region={}", region_name(&label));
    match label.predicted {
        Some(n) => println!("predicted={n}"),
        None => println!("predicted="),
    }
    println!("zone={}", discrepancy_zone(&p).token());
    println!("analytic_count={}", solutions.len());
    println!("symmetric_count={symmetric}");
    println!("asymmetric_count={}", solutions.len() - symmetric);
    if args.oracle {
        let enumerated = hctree::brute_force_enumerate(&p, args.grid, args.refine_tol)?;
        println!("oracle_count={}", enumerated.len());
    }
    println!("kind,M1,M2,t");
    for s in &solutions {
        let kind = match s.kind {
            SolutionKind::Symmetric => "symmetric",
            SolutionKind::Asymmetric => "asymmetric",
        };
        println!("{kind},{},{},{}", num(s.m1), num(s.m2), num(s.t));
    }
    Ok(())
}

fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("L,lambda1,inA1,inA2,inA3,inB1,inB2,predicted,oracle\n");
    for r in rows {
        let predicted = r
            .label
            .predicted
            .map(|n| n.to_string())
            .unwrap_or_default();
        let oracle = r.oracle.map(|n| n.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{predicted},{oracle}",
            num(r.l),
            num(r.lambda1),
            r.label.in_a1 as u8,
            r.label.in_a2 as u8,
            r.label.in_a3 as u8,
            r.label.in_b1 as u8,
            r.label.in_b2 as u8,
        );
    }
    out
}

fn curves_csv(samples: &[CurveSample]) -> String {
    let mut out = String::from("curve,lambda1,L\n");
    for s in samples {
        let _ = writeln!(out, "{},{},{}", s.curve, num(s.lambda1), num(s.l));
    }
    out
}

fn curves_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "regions".into());
    out.with_file_name(format!("{stem}_curves.csv"))
}

fn cmd_regions(args: RegionsArgs) -> Result<()> {
    let l_range = (args.window.lmin, args.window.lmax);
    let l1_range = (args.window.l1min, args.window.l1max);
    let rows = region_sweep(l_range, l1_range, args.window.res)?;
    std::fs::write(&args.out, sweep_csv(&rows))
        .with_context(|| format!("writing {}", args.out.display()))?;
    let curves = boundary_curves(l_range, l1_range, args.window.res.max(2))?;
    let cpath = curves_path(&args.out);
    std::fs::write(&cpath, curves_csv(&curves))
        .with_context(|| format!("writing {}", cpath.display()))?;
    if let Some(svg_path) = &args.svg {
        let svg = render_svg(&curves, l_range, l1_range);
        std::fs::write(svg_path, svg)
            .with_context(|| format!("writing {}", svg_path.display()))?;
    }
    println!("rows={}", rows.len());
    println!("out={}", args.out.display());
    println!("curves={}", cpath.display());
    Ok(())
}

fn cmd_gibbs(args: GibbsArgs) -> Result<()> {
    let spins = args.spins as usize;
    let spec = load_spec(&args.lambda)?;
    let kernel = args.kernel.kernel();
    let (x0, _) = spec.truncate(spins - 1)?;
    let outcome = iterate(&x0, &spec, &kernel, args.k, 1e-15, 50_000)?;
    if !outcome.converged {
        bail!(
            "fixed-point iteration did not converge (residual {:.3e}); \
             certify the contraction condition first",
            outcome.residual
        );
    }
    let law = BoundaryLaw::from_fixed_point(&outcome.point, &spec, &kernel, args.k, spins)?;
    let ball = CayleyBall::new(args.k, args.radius)?;
    let root_region = Region::sub_ball(&ball, 0)?;
    let marginal = gibbs_marginal(&law, &ball, &root_region)?;
    let small = Region::sub_ball(&ball, 0)?;
    let big = Region::sub_ball(&ball, 1)?;
    let discrepancy = specification_consistency(&law, &ball, &small, &big)?;
    let (finite, square) = normalisable(&law);

    println!("k={}", args.k);
    println!("spins={spins}");
    println!("radius={}", args.radius);
    println!("norm_lambda={}", num(spec.norm()));
    println!("iterations={}", outcome.iterations);
    println!("law_residual={}", num(law.consistency_residual()));
    println!("normalisable={finite}");
    println!("linear_sum={}", num(linear_sum(&law)));
    println!("square_sum={}", num(square));
    println!("z_lambda={}", num(marginal.z_lambda()));
    println!("consistency={}", num(discrepancy));
    println!("truncation_weight={}", num(marginal.truncation_weight()));
    println!("spin,probability");
    for (spin, p) in marginal.site_marginal(0).iter().enumerate() {
        println!("{spin},{}", num(*p));
    }
    Ok(())
}

fn cmd_oracle(args: OracleArgs) -> Result<()> {
    let rows = oracle_sweep(
        (args.window.lmin, args.window.lmax),
        (args.window.l1min, args.window.l1max),
        args.window.res,
        args.grid,
        args.refine_tol,
        args.eps,
    )?;
    let mut out = String::from("L,lambda1,predicted,analytic,oracle,known-discrepancy\n");
    let mut flagged = 0usize;
    for r in &rows {
        let predicted = r.predicted.map(|n| n.to_string()).unwrap_or_default();
        if r.predicted.map(|n| n as usize) != Some(r.analytic) {
            flagged += 1;
        }
        let _ = writeln!(
            out,
            "{},{},{predicted},{},{},{}",
            num(r.l),
            num(r.lambda1),
            r.analytic,
            r.oracle,
            r.zone.token()
        );
    }
    std::fs::write(&args.out, out).with_context(|| format!("writing {}", args.out.display()))?;
    println!("rows={}", rows.len());
    println!("flagged={flagged}");
    println!("out={}", args.out.display());
    Ok(())
}

/// Minimal polyline rendering of the boundary curves: λ₁ runs horizontally,
/// L vertically (up). Out-of-window samples break the polyline.
fn render_svg(samples: &[CurveSample], l_range: (f64, f64), l1_range: (f64, f64)) -> String {
    const W: f64 = 640.0;
    const H: f64 = 480.0;
    const MARGIN: f64 = 42.0;
    const PALETTE: [&str; 10] = [
        "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
        "#bcbd22", "#7f7f7f",
    ];
    let sx = |l1: f64| MARGIN + (l1 - l1_range.0) / (l1_range.1 - l1_range.0) * (W - 2.0 * MARGIN);
    let sy = |l: f64| H - MARGIN - (l - l_range.0) / (l_range.1 - l_range.0) * (H - 2.0 * MARGIN);

    let mut by_curve: BTreeMap<&str, Vec<Option<(f64, f64)>>> = BTreeMap::new();
    for s in samples {
        let inside = s.l >= l_range.0
            && s.l <= l_range.1
            && s.lambda1 >= l1_range.0
            && s.lambda1 <= l1_range.1
            && s.l.is_finite()
            && s.lambda1.is_finite();
        by_curve
            .entry(s.curve)
            .or_default()
            .push(inside.then(|| (sx(s.lambda1), sy(s.l))));
    }

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {W} {H}" font-family="monospace" font-size="11">"#
    );
    let _ = writeln!(
        svg,
        r##"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="#333"/>"##,
        W - 2.0 * MARGIN,
        H - 2.0 * MARGIN
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">lambda1</text>"#,
        W / 2.0,
        H - 10.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="14" y="{}" transform="rotate(-90 14 {})" text-anchor="middle">L</text>"#,
        H / 2.0,
        H / 2.0
    );
    for (index, (name, points)) in by_curve.iter().enumerate() {
        let color = PALETTE[index % PALETTE.len()];
        let mut run: Vec<String> = Vec::new();
        let flush = |run: &mut Vec<String>, svg: &mut String| {
            if run.len() >= 2 {
                let _ = writeln!(
                    svg,
                    r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.4"/>"#,
                    run.join(" ")
                );
            }
            run.clear();
        };
        for p in points {
            match p {
                Some((x, y)) => run.push(format!("{x:.2},{y:.2}")),
                None => flush(&mut run, &mut svg),
            }
        }
        flush(&mut run, &mut svg);
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" fill="{color}">{name}</text>"#,
            MARGIN + 6.0,
            MARGIN + 14.0 + 13.0 * index as f64
        );
    }
    svg.push_str("</svg>\n");
    svg
}
