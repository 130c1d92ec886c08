//! Command-line front end: configure a problem, run one of the studies,
//! and emit deterministic CSV/SVG artifacts.
//!
//! Exit codes: 0 on success, 1 on numerical or validation failures,
//! 2 on usage errors.

mod emit;
mod svg;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use eigloc::analysis::{
    cea_check, perturbation_experiment, pointwise_convergence_study, refinement_study,
    weyl_sequence_demo, KChoice, ProblemConfig,
};
use eigloc::assembly::{Bc, QuadratureRule};
use eigloc::coeff::Expr;
use eigloc::eigensolve::{generalized_eigs, Pencil, Spectrum};
use eigloc::localization::{
    default_matching_tol, find_matching, nodal_pairing_report, node_intervals, IntervalMode,
    MatchingResult, NodeInterval,
};
use eigloc::mesh::Point2;

#[derive(Parser)]
#[command(
    name = "eigloc",
    version,
    about = "Spectral localization studies for preconditioned elliptic pencils"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the structured mesh and write it as JSON.
    Mesh(ProblemArgs),
    /// Assemble the pencil and write the generalized eigenvalues.
    Eig(ProblemArgs),
    /// Eigenvalue-to-interval matching and per-node report.
    Localize(LocalizeArgs),
    /// Refinement study: interval fill distance across nested meshes.
    Study(StudyArgs),
    /// Local perturbation experiment on a node set.
    Perturb(PerturbArgs),
    /// Shrinking-disc bump sequence.
    Weyl(WeylArgs),
    /// Galerkin quasi-optimality and pointwise operator convergence.
    Converge(ConvergeArgs),
    /// Run the built-in reference problem and emit its figures.
    #[command(name = "reproduce-paper")]
    ReproducePaper(ReproduceArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum BcArg {
    Neumann,
    Dirichlet,
}

#[derive(Clone, Copy, ValueEnum)]
enum QuadArg {
    Centroid,
    Midpoint3,
}

#[derive(Args)]
struct ProblemArgs {
    /// Problem configuration JSON; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ny: Option<usize>,
    /// Coefficient expression for the operator.
    #[arg(long)]
    k: Option<String>,
    /// Coefficient expression for the preconditioner.
    #[arg(long)]
    g: Option<String>,
    #[arg(long)]
    bc: Option<BcArg>,
    #[arg(long)]
    quad: Option<QuadArg>,
    /// Output directory for artifacts.
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Interval-membership tolerance (default 1e-9 times the spectral
    /// radius).
    #[arg(long)]
    tol: Option<f64>,
}

impl ProblemArgs {
    fn config(&self) -> Result<ProblemConfig, String> {
        let mut cfg = match &self.config {
            Some(path) => ProblemConfig::from_json_file(path)
                .map_err(|e| format!("{}: {e}", path.display()))?,
            None => ProblemConfig::reference(),
        };
        if let Some(nx) = self.nx {
            cfg.nx = nx;
        }
        if let Some(ny) = self.ny {
            cfg.ny = ny;
        }
        if let Some(k) = &self.k {
            cfg.k = k.clone();
        }
        if let Some(g) = &self.g {
            cfg.g = g.clone();
        }
        if let Some(bc) = self.bc {
            cfg.bc = match bc {
                BcArg::Neumann => Bc::Neumann,
                BcArg::Dirichlet => Bc::Dirichlet0,
            };
        }
        if let Some(q) = self.quad {
            cfg.quadrature = match q {
                QuadArg::Centroid => QuadratureRule::Centroid,
                QuadArg::Midpoint3 => QuadratureRule::EdgeMidpoints,
            };
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct LocalizeArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Subdivision depth of the sampled per-support intervals.
    #[arg(long, default_value_t = 8)]
    depth: u32,
}

#[derive(Args)]
struct StudyArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Number of nested refinement levels.
    #[arg(long, default_value_t = 3)]
    levels: usize,
    /// Grid resolution for the fill distance.
    #[arg(long, default_value_t = 256)]
    grid: usize,
}

#[derive(Args)]
struct PerturbArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Comma-separated mesh node indices forming the perturbed set.
    #[arg(long, value_delimiter = ',', required = true)]
    nodes: Vec<usize>,
    /// Perturbation constant; defaults to the midpoint of the local
    /// effective-ratio range.
    #[arg(long)]
    k_value: Option<f64>,
}

#[derive(Args)]
struct WeylArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Disc center as `x,y`.
    #[arg(long, default_value = "0,0")]
    x0: String,
    /// Comma-separated disc radii.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.5, 0.25, 0.125])]
    radii: Vec<f64>,
}

#[derive(Args)]
struct ConvergeArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Probe function expression.
    #[arg(long, default_value = "sin(pi*x)*sin(pi*y)")]
    w: String,
    #[arg(long, default_value_t = 3)]
    levels: usize,
    /// Run only the quasi-optimality part (2 levels suffice).
    #[arg(long, default_value_t = false)]
    cea_only: bool,
}

#[derive(Args)]
struct ReproduceArgs {
    #[arg(long, default_value_t = 16)]
    nx: usize,
    #[arg(long, default_value_t = 16)]
    ny: usize,
    #[arg(long)]
    bc: Option<BcArg>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    #[arg(long)]
    tol: Option<f64>,
}

fn main() {
    let cli = Cli::parse();
    if let Err(msg) = run(cli.command) {
        eprintln!("error: {msg}");
        std::process::exit(1);
    }
}

fn run(command: Command) -> Result<(), String> {
    match command {
        Command::Mesh(args) => cmd_mesh(args),
        Command::Eig(args) => cmd_eig(args),
        Command::Localize(args) => cmd_localize(args),
        Command::Study(args) => cmd_study(args),
        Command::Perturb(args) => cmd_perturb(args),
        Command::Weyl(args) => cmd_weyl(args),
        Command::Converge(args) => cmd_converge(args),
        Command::ReproducePaper(args) => cmd_reproduce(args),
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn cmd_mesh(args: ProblemArgs) -> Result<(), String> {
    let cfg = args.config()?;
    let mesh = cfg.build_mesh().map_err(err)?;
    std::fs::create_dir_all(&args.out_dir).map_err(err)?;
    let path = args.out_dir.join("mesh.json");
    mesh.write_json(&path).map_err(err)?;
    println!(
        "mesh: {} nodes, {} triangles, {} boundary nodes -> {}",
        mesh.n_nodes(),
        mesh.n_triangles(),
        mesh.boundary_nodes().len(),
        path.display()
    );
    Ok(())
}

fn solve(cfg: &ProblemConfig) -> Result<(eigloc::assembly::AssembledPencil, Spectrum), String> {
    let assembled = cfg.assemble().map_err(err)?;
    let pencil = Pencil::from_assembled(&assembled).map_err(err)?;
    let spectrum = generalized_eigs(&pencil, false).map_err(err)?;
    Ok((assembled, spectrum))
}

fn cmd_eig(args: ProblemArgs) -> Result<(), String> {
    let cfg = args.config()?;
    let (_, spectrum) = solve(&cfg)?;
    if spectrum.is_empty() {
        return Err("empty spectrum".into());
    }
    let path = args.out_dir.join("eigs.csv");
    emit::write_text(&path, &emit::eigs_csv(&spectrum)).map_err(err)?;
    println!(
        "eig: {} eigenvalues in [{}, {}] -> {}",
        spectrum.len(),
        spectrum.min(),
        spectrum.max(),
        path.display()
    );
    Ok(())
}

struct Localization {
    spectrum: Spectrum,
    quad_intervals: Vec<NodeInterval>,
    matching: MatchingResult,
    /// Sampled intervals (nodal points included in the sample set).
    sampled_intervals: Vec<NodeInterval>,
}

fn localize(cfg: &ProblemConfig, depth: u32, tol: Option<f64>) -> Result<Localization, String> {
    let (assembled, spectrum) = solve(cfg)?;
    if spectrum.is_empty() {
        return Err("empty spectrum".into());
    }
    let ratio = cfg.ratio().map_err(err)?;
    let quad_intervals =
        node_intervals(&assembled, &ratio, IntervalMode::QuadratureConsistent).map_err(err)?;
    let sampled_intervals =
        node_intervals(&assembled, &ratio, IntervalMode::AnalyticSampled(depth)).map_err(err)?;
    let tol = tol.unwrap_or_else(|| default_matching_tol(&spectrum));
    let matching = find_matching(&spectrum, &quad_intervals, tol);
    Ok(Localization {
        spectrum,
        quad_intervals,
        matching,
        sampled_intervals,
    })
}

fn pairing_summary(loc: &Localization) -> Result<(f64, f64), String> {
    let kept: Vec<NodeInterval> = loc
        .sampled_intervals
        .iter()
        .enumerate()
        .filter(|(j, _)| loc.matching.eig_of_interval[*j].is_some())
        .map(|(_, iv)| iv.clone())
        .collect();
    let report = nodal_pairing_report(&loc.spectrum, &kept).map_err(err)?;
    Ok((report.max_difference, report.max_width))
}

fn cmd_localize(args: LocalizeArgs) -> Result<(), String> {
    let cfg = args.problem.config()?;
    let loc = localize(&cfg, args.depth, args.problem.tol)?;
    let path = args.problem.out_dir.join("localize.csv");
    emit::write_text(
        &path,
        &emit::localize_csv(&loc.quad_intervals, &loc.matching, &loc.spectrum),
    )
    .map_err(err)?;
    if loc.matching.is_perfect() {
        let (max_diff, max_width) = pairing_summary(&loc)?;
        println!(
            "localize: perfect matching of {} eigenvalues to {} intervals (tol {})",
            loc.spectrum.len(),
            loc.quad_intervals.len(),
            loc.matching.tol
        );
        println!(
            "localize: max sorted pairing difference {max_diff}, max interval width {max_width}"
        );
        println!("localize: wrote {}", path.display());
        Ok(())
    } else {
        let w = loc
            .matching
            .witness
            .as_ref()
            .expect("deficient matching carries a witness");
        Err(format!(
            "matching deficient: {} intervals reachable from an unmatched interval hold only {} eigenvalues (report in {})",
            w.members.len(),
            w.eigs_in_union,
            path.display()
        ))
    }
}

fn cmd_study(args: StudyArgs) -> Result<(), String> {
    let cfg = args.problem.config()?;
    let report = refinement_study(&cfg, args.levels, args.grid).map_err(err)?;
    let path = args.problem.out_dir.join("study.csv");
    emit::write_text(&path, &emit::study_csv(&report)).map_err(err)?;
    println!(
        "study: target interval [{}, {}], {} levels -> {}",
        report.target.lo,
        report.target.hi,
        report.levels.len(),
        path.display()
    );
    for l in &report.levels {
        println!(
            "  level {}: dofs {}, fill {}, max width {}",
            l.level, l.n_dofs, l.fill_distance, l.max_width
        );
    }
    Ok(())
}

fn cmd_perturb(args: PerturbArgs) -> Result<(), String> {
    let cfg = args.problem.config()?;
    let choice = match args.k_value {
        Some(v) => KChoice::Value(v),
        None => KChoice::Midpoint,
    };
    let report = perturbation_experiment(&cfg, &args.nodes, choice).map_err(err)?;
    let path = args.problem.out_dir.join("perturb.csv");
    emit::write_text(&path, &emit::perturb_csv(&report)).map_err(err)?;
    println!(
        "perturb: |J| = {}, K = {}, multiplicity {}, theta {} <= bound {}, {} eigenvalues in interval -> {}",
        report.j_nodes.len(),
        report.k_value,
        report.multiplicity,
        report.theta,
        report.bound,
        report.eigs_in_interval,
        path.display()
    );
    if !report.columns_exact {
        return Err("perturbed columns do not equal K times the B columns exactly".into());
    }
    Ok(())
}

fn cmd_weyl(args: WeylArgs) -> Result<(), String> {
    let cfg = args.problem.config()?;
    let x0 = parse_point(&args.x0)?;
    let report = weyl_sequence_demo(&cfg, x0, &args.radii).map_err(err)?;
    let path = args.problem.out_dir.join("weyl.csv");
    emit::write_text(&path, &emit::weyl_csv(&report)).map_err(err)?;
    println!(
        "weyl: center ({}, {}), lambda0 = {} -> {}",
        report.center.x,
        report.center.y,
        report.lambda0,
        path.display()
    );
    for row in &report.radii {
        println!(
            "  r = {}: {} bump nodes, |u|_B = {}, bound {}",
            row.radius, row.n_bump_nodes, row.u_norm, row.bound
        );
    }
    Ok(())
}

fn parse_point(text: &str) -> Result<Point2, String> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected `x,y`, got `{text}`"));
    }
    let x: f64 = parts[0].trim().parse().map_err(err)?;
    let y: f64 = parts[1].trim().parse().map_err(err)?;
    Ok(Point2::new(x, y))
}

fn cmd_converge(args: ConvergeArgs) -> Result<(), String> {
    let cfg = args.problem.config()?;
    let w = Expr::parse(&args.w).map_err(err)?;
    let report = if args.cea_only {
        cea_check(&cfg, &w, args.levels).map_err(err)?
    } else {
        pointwise_convergence_study(&cfg, &w, args.levels).map_err(err)?
    };
    let path = args.problem.out_dir.join("converge.csv");
    emit::write_text(&path, &emit::converge_csv(&report)).map_err(err)?;
    println!(
        "converge: kappa = {}, {} coarse levels -> {}",
        report.kappa,
        report.levels.len(),
        path.display()
    );
    for l in &report.levels {
        println!(
            "  level {}: ratio {}, z error {}",
            l.level, l.quasi_opt_ratio, l.z_error
        );
    }
    Ok(())
}

fn cmd_reproduce(args: ReproduceArgs) -> Result<(), String> {
    let started = Instant::now();
    let mut cfg = ProblemConfig::reference();
    cfg.nx = args.nx;
    cfg.ny = args.ny;
    if let Some(bc) = args.bc {
        cfg.bc = match bc {
            BcArg::Neumann => Bc::Neumann,
            BcArg::Dirichlet => Bc::Dirichlet0,
        };
    }
    let loc = localize(&cfg, 8, args.tol)?;
    if !loc.matching.is_perfect() {
        return Err("reference problem matching is not perfect".into());
    }
    let (max_diff, max_width) = pairing_summary(&loc)?;

    std::fs::create_dir_all(&args.out_dir).map_err(err)?;
    emit::write_text(&args.out_dir.join("eigs.csv"), &emit::eigs_csv(&loc.spectrum))
        .map_err(err)?;
    emit::write_text(
        &args.out_dir.join("localize.csv"),
        &emit::localize_csv(&loc.quad_intervals, &loc.matching, &loc.spectrum),
    )
    .map_err(err)?;
    let mut nodal: Vec<f64> = loc.sampled_intervals.iter().map(|iv| iv.nodal_ratio).collect();
    nodal.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let plot = svg::pairing_plot(
        &loc.spectrum.values,
        &nodal,
        &format!("{}x{} mesh: eigenvalues vs nodal ratio values", cfg.nx, cfg.ny),
    );
    emit::write_text(&args.out_dir.join("plot.svg"), &plot).map_err(err)?;

    println!(
        "reproduce: {} eigenvalues in [{}, {}]",
        loc.spectrum.len(),
        loc.spectrum.min(),
        loc.spectrum.max()
    );
    println!("reproduce: perfect matching; max sorted difference {max_diff} (cap {max_width})");
    println!(
        "reproduce: wrote eigs.csv, localize.csv, plot.svg to {} in {:.2}s",
        args.out_dir.display(),
        started.elapsed().as_secs_f64()
    );
    Ok(())
}
