//! Study drivers: refinement of the spectral interval, the local
//! perturbation construction, bump (quasi-mode) sequences, and Galerkin
//! convergence on nested hierarchies.
//!
//! The continuous operator is surrogated on the finest hierarchy level;
//! coarse-level matrices in the convergence studies are Galerkin
//! projections `P^T M P` of the finest matrices so that subspace nesting
//! holds exactly in floating point.

use std::collections::BTreeSet;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::assembly::{
    assemble_from_averages, assemble_on_triangles, effective_averages, AssembledPencil, Bc,
    QuadratureRule,
};
use crate::coeff::{ratio_range, Expr, Interval, RatioField, Region, ScalarField};
use crate::eigensolve::{deflate_constants, generalized_eigs, Pencil};
use crate::error::{Error, Result};
use crate::linalg::{DenseCholesky, GroundedSolver};
use crate::localization::{node_intervals, IntervalMode};
use crate::mesh::{Mesh, MeshHierarchy, Point2, Rect};
use crate::sparse::SymSparseMatrix;

/// One problem instance: domain, grid, coefficient expressions, boundary
/// treatment and quadrature.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemConfig {
    pub domain: Rect,
    pub nx: usize,
    pub ny: usize,
    /// Expression for the diffusion coefficient of `A`.
    pub k: String,
    /// Expression for the preconditioner coefficient of `B`.
    pub g: String,
    pub bc: Bc,
    pub quadrature: QuadratureRule,
}

impl ProblemConfig {
    /// The built-in reference problem: a Gaussian-peaked pair on
    /// `(-1,1)^2` with ratio `2 + sin(x+y)` and Neumann boundaries.
    pub fn reference() -> ProblemConfig {
        ProblemConfig {
            domain: Rect::new(-1.0, 1.0, -1.0, 1.0),
            nx: 16,
            ny: 16,
            k: "(1+50*exp(-5*(x^2+y^2)))*(2+sin(x+y))".into(),
            g: "1+50*exp(-5*(x^2+y^2))".into(),
            bc: Bc::Neumann,
            quadrature: QuadratureRule::EdgeMidpoints,
        }
    }

    pub fn from_json_file(path: &Path) -> Result<ProblemConfig> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn fields(&self) -> Result<(ScalarField, ScalarField)> {
        Ok((ScalarField::parse(&self.k)?, ScalarField::parse(&self.g)?))
    }

    pub fn ratio(&self) -> Result<RatioField> {
        let (k, g) = self.fields()?;
        Ok(RatioField::new(k, g))
    }

    pub fn build_mesh(&self) -> Result<Mesh> {
        Mesh::structured(self.domain, self.nx, self.ny)
    }

    pub fn assemble(&self) -> Result<AssembledPencil> {
        self.assemble_on(Arc::new(self.build_mesh()?))
    }

    pub fn assemble_on(&self, mesh: Arc<Mesh>) -> Result<AssembledPencil> {
        let (k, g) = self.fields()?;
        AssembledPencil::assemble(mesh, &k, &g, self.quadrature, self.bc)
    }
}

/// Largest distance from the uniform grid on `[a, b]` to the eigenvalue
/// set: how well the computed eigenvalues fill the target interval.
pub fn fill_distance(interval: (f64, f64), values: &[f64], grid: usize) -> Result<f64> {
    let (a, b) = interval;
    if !(a <= b) {
        return Err(Error::InvalidArgument(format!("invalid interval [{a}, {b}]")));
    }
    if grid < 2 {
        return Err(Error::InvalidArgument("grid needs at least 2 samples".into()));
    }
    if values.is_empty() {
        return Err(Error::EmptySpectrum);
    }
    let mut worst = 0.0f64;
    for i in 0..grid {
        let s = a + (b - a) * i as f64 / (grid - 1) as f64;
        // values are ascending; nearest by binary search.
        let idx = values.partition_point(|&v| v < s);
        let mut best = f64::INFINITY;
        if idx < values.len() {
            best = best.min((values[idx] - s).abs());
        }
        if idx > 0 {
            best = best.min((values[idx - 1] - s).abs());
        }
        worst = worst.max(best);
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy)]
pub struct RefinementLevel {
    pub level: usize,
    pub n_dofs: usize,
    /// Largest nodal support diameter.
    pub h_max: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub fill_distance: f64,
    /// Largest per-node sampled interval width.
    pub max_width: f64,
}

#[derive(Debug, Clone)]
pub struct RefinementReport {
    /// Sampled range of the ratio over the whole domain (finest mesh).
    pub target: Interval,
    pub levels: Vec<RefinementLevel>,
}

/// Re-assembles and solves the problem on a nested hierarchy and records
/// how the eigenvalues fill the global ratio interval.
pub fn refinement_study(cfg: &ProblemConfig, n_levels: usize, grid: usize) -> Result<RefinementReport> {
    if n_levels < 2 {
        return Err(Error::InvalidArgument("refinement study needs at least 2 levels".into()));
    }
    let ratio = cfg.ratio()?;
    if !ratio.k.is_analytic() || !ratio.g.is_analytic() {
        return Err(Error::Unsupported(
            "refinement study needs analytic coefficient fields".into(),
        ));
    }
    let hierarchy = MeshHierarchy::build(cfg.build_mesh()?, n_levels);
    let finest = hierarchy.levels.last().unwrap();
    let target = ratio_range(&ratio, finest, Region::WholeDomain, 16)?;

    let mut levels = Vec::new();
    for (l, mesh) in hierarchy.levels.iter().enumerate() {
        let mesh = Arc::new(mesh.clone());
        let assembled = cfg.assemble_on(mesh.clone())?;
        let pencil = Pencil::from_assembled(&assembled)?;
        let spectrum = generalized_eigs(&pencil, false)?;
        let intervals = node_intervals(&assembled, &ratio, IntervalMode::AnalyticSampled(4))?;
        let max_width = intervals.iter().map(|iv| iv.width()).fold(0.0, f64::max);
        levels.push(RefinementLevel {
            level: l,
            n_dofs: spectrum.len(),
            h_max: hierarchy.max_support_diameter(l),
            lambda_min: spectrum.min(),
            lambda_max: spectrum.max(),
            fill_distance: fill_distance((target.lo, target.hi), &spectrum.values, grid)?,
            max_width,
        });
    }
    Ok(RefinementReport { target, levels })
}

/// Choice of the constant used in the local perturbation.
#[derive(Debug, Clone, Copy)]
pub enum KChoice {
    /// Midpoint of the effective-ratio range over the perturbed region.
    Midpoint,
    Value(f64),
}

#[derive(Debug, Clone)]
pub struct PerturbationReport {
    pub j_nodes: Vec<usize>,
    pub k_value: f64,
    /// Multiplicity of `K` in the perturbed spectrum (cluster tolerance
    /// `1e-9 K`).
    pub multiplicity: usize,
    pub theta_min: f64,
    pub theta_max: f64,
    /// `max(|theta_min|, |theta_max|)`.
    pub theta: f64,
    /// `sup over the perturbed region of |r_T - K|`.
    pub bound: f64,
    /// Eigenvalues of the unperturbed pencil in `[K - bound, K + bound]`.
    pub eigs_in_interval: usize,
    /// Whether the perturbed columns equal `K` times the `B` columns
    /// bitwise.
    pub columns_exact: bool,
}

/// Replaces `k` by `K * g` on the union of supports of `j_nodes`
/// (operating on the per-triangle effective averages) and verifies the
/// perturbation bounds on the discrete pencil.
pub fn perturbation_experiment(
    cfg: &ProblemConfig,
    j_nodes: &[usize],
    choice: KChoice,
) -> Result<PerturbationReport> {
    if j_nodes.is_empty() {
        return Err(Error::InvalidArgument("perturbation needs a nonempty node set".into()));
    }
    let mesh = Arc::new(cfg.build_mesh()?);
    let (k_field, g_field) = cfg.fields()?;
    let rule = cfg.quadrature;
    let k_avg = effective_averages(&mesh, &k_field, rule)?;
    let g_avg = effective_averages(&mesh, &g_field, rule)?;
    let a_full = assemble_from_averages(&mesh, &k_avg)?;
    let b_full = assemble_from_averages(&mesh, &g_avg)?;

    let boundary = mesh.boundary_nodes();
    let mut region: BTreeSet<usize> = BTreeSet::new();
    for &j in j_nodes {
        if j >= mesh.n_nodes() {
            return Err(Error::IndexOutOfRange {
                index: j,
                len: mesh.n_nodes(),
            });
        }
        if cfg.bc == Bc::Dirichlet0 && boundary.contains(&j) {
            return Err(Error::InvalidArgument(format!(
                "node {j} lies on the boundary and has no degree of freedom under Dirichlet conditions"
            )));
        }
        region.extend(mesh.node_support(j)?.triangles);
    }

    let mut r_lo = f64::INFINITY;
    let mut r_hi = f64::NEG_INFINITY;
    for &t in &region {
        let r = k_avg[t] / g_avg[t];
        r_lo = r_lo.min(r);
        r_hi = r_hi.max(r);
    }
    let k_value = match choice {
        KChoice::Midpoint => 0.5 * (r_lo + r_hi),
        KChoice::Value(v) => {
            if !(v > 0.0) {
                return Err(Error::InvalidArgument(format!("perturbation constant must be positive, got {v}")));
            }
            v
        }
    };
    let bound = (r_hi - k_value).abs().max((r_lo - k_value).abs());

    // A_tilde = A - A|_region + K * B|_region. Entries whose triangles
    // all lie in the region cancel exactly, so the perturbed columns of
    // the j-nodes equal K times the B columns bit for bit.
    let a_region = assemble_on_triangles(&mesh, &k_avg, Some(&region))?;
    let b_region = assemble_on_triangles(&mesh, &g_avg, Some(&region))?;
    let a_tilde = a_full.combine(&a_region, k_value, &b_region);
    let mut columns_exact = true;
    for &j in j_nodes {
        for (i, v) in a_tilde.row(j) {
            let want = k_value * b_full.get(i, j);
            if v.to_bits() != want.to_bits() {
                columns_exact = false;
            }
        }
    }

    let reduce = |m: &SymSparseMatrix| -> SymSparseMatrix {
        match cfg.bc {
            Bc::Neumann => m.clone(),
            Bc::Dirichlet0 => {
                let interior: Vec<usize> =
                    (0..m.n()).filter(|i| !boundary.contains(i)).collect();
                m.restrict(&interior)
            }
        }
    };
    let make_pencil = |a: &SymSparseMatrix, b: &SymSparseMatrix| -> Result<Pencil> {
        match cfg.bc {
            Bc::Neumann => deflate_constants(a.clone(), b.clone()),
            Bc::Dirichlet0 => Pencil::new(reduce(a), reduce(b)),
        }
    };

    let perturbed = generalized_eigs(&make_pencil(&a_tilde, &b_full)?, false)?;
    let cluster_tol = 1e-9 * k_value;
    let multiplicity = perturbed
        .values
        .iter()
        .filter(|&&v| (v - k_value).abs() <= cluster_tol)
        .count();

    let diff = a_full.combine(&a_tilde, 0.0, &a_tilde);
    let shifts = generalized_eigs(&make_pencil(&diff, &b_full)?, false)?;
    let theta_min = shifts.min();
    let theta_max = shifts.max();
    let theta = theta_min.abs().max(theta_max.abs());

    let base = generalized_eigs(&make_pencil(&a_full, &b_full)?, false)?;
    let count_tol = 1e-9 * base.spectral_radius().max(k_value);
    let eigs_in_interval = base
        .values
        .iter()
        .filter(|&&v| v >= k_value - bound - count_tol && v <= k_value + bound + count_tol)
        .count();

    Ok(PerturbationReport {
        j_nodes: j_nodes.to_vec(),
        k_value,
        multiplicity,
        theta_min,
        theta_max,
        theta,
        bound,
        eigs_in_interval,
        columns_exact,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct WeylRadius {
    pub radius: f64,
    /// Number of hat functions in the bump.
    pub n_bump_nodes: usize,
    /// `|| (lambda_0 I - B^-1 A) v_r ||_B` for the normalized bump.
    pub u_norm: f64,
    /// `sup over the disc of |g lambda_0 - k|` divided by the disc
    /// minimum of `g`.
    pub bound: f64,
}

#[derive(Debug, Clone)]
pub struct WeylReport {
    pub center: Point2,
    pub lambda0: f64,
    pub radii: Vec<WeylRadius>,
}

/// Builds B-normalized discrete bumps supported in shrinking discs around
/// `x0` and measures how nearly they are annihilated by
/// `lambda_0 I - B^-1 A` with `lambda_0 = r(x0)`.
pub fn weyl_sequence_demo(cfg: &ProblemConfig, x0: Point2, radii: &[f64]) -> Result<WeylReport> {
    if radii.is_empty() {
        return Err(Error::InvalidArgument("no radii given".into()));
    }
    let d = cfg.domain;
    for &r in radii {
        if !(r > 0.0) {
            return Err(Error::InvalidArgument(format!("radius {r} is not positive")));
        }
        if x0.x - r < d.ax || x0.x + r > d.bx || x0.y - r < d.ay || x0.y + r > d.by {
            return Err(Error::InvalidArgument(format!(
                "disc of radius {r} around ({}, {}) leaves the domain",
                x0.x, x0.y
            )));
        }
    }
    let mesh = Arc::new(cfg.build_mesh()?);
    let (k_field, g_field) = cfg.fields()?;
    let ratio = RatioField::new(k_field.clone(), g_field.clone());
    let lambda0 = ratio.eval(&mesh, x0, None)?;

    let assembled = cfg.assemble_on(mesh.clone())?;
    let (a, b) = (&assembled.a, &assembled.b);
    enum Solver {
        Grounded(GroundedSolver),
        Direct(DenseCholesky),
    }
    let solver = match cfg.bc {
        Bc::Neumann => Solver::Grounded(GroundedSolver::new(b)?),
        Bc::Dirichlet0 => Solver::Direct(DenseCholesky::new(b.n(), &b.to_dense())?),
    };
    let dof_nodes = assembled.dof_nodes();
    let boundary = mesh.boundary_nodes();

    let mut rows = Vec::new();
    for &radius in radii {
        // Interior nodes whose whole support patch lies inside the disc,
        // so the bump vanishes outside it.
        let mut bump: Vec<usize> = Vec::new();
        for (row, &node) in dof_nodes.iter().enumerate() {
            if boundary.contains(&node) {
                continue;
            }
            let support = mesh.node_support(node)?;
            let mut inside = true;
            'tris: for &t in &support.triangles {
                for p in mesh.triangle_vertices(t) {
                    if p.dist(x0) > radius * (1.0 + 1e-12) {
                        inside = false;
                        break 'tris;
                    }
                }
            }
            if inside {
                bump.push(row);
            }
        }
        if bump.is_empty() {
            return Err(Error::InsufficientResolution(radius));
        }
        let n = a.n();
        let mut v = vec![0.0; n];
        for &row in &bump {
            v[row] = 1.0;
        }
        let norm = b.quadratic_form(&v).max(0.0).sqrt();
        if norm == 0.0 {
            return Err(Error::ZeroBNorm);
        }
        v.iter_mut().for_each(|x| *x /= norm);

        let av = a.matvec(&v);
        let z = match &solver {
            Solver::Grounded(s) => s.solve(&av),
            Solver::Direct(c) => c.solve(&av),
        };
        let u: Vec<f64> = v.iter().zip(&z).map(|(&vi, &zi)| lambda0 * vi - zi).collect();
        let u_norm = b.quadratic_form(&u).max(0.0).sqrt();

        rows.push(WeylRadius {
            radius,
            n_bump_nodes: bump.len(),
            u_norm,
            bound: disc_bound(&mesh, &k_field, &g_field, x0, radius, lambda0)?,
        });
    }
    Ok(WeylReport {
        center: x0,
        lambda0,
        radii: rows,
    })
}

/// `sup_disc |g lambda0 - k| / min_disc g`, sampled on mesh triangles
/// intersecting the disc and, for analytic fields, on a polar grid.
fn disc_bound(
    mesh: &Mesh,
    k: &ScalarField,
    g: &ScalarField,
    x0: Point2,
    radius: f64,
    lambda0: f64,
) -> Result<f64> {
    let mut sup = 0.0f64;
    let mut g_min = f64::INFINITY;
    let mut visit = |kv: f64, gv: f64| {
        sup = sup.max((gv * lambda0 - kv).abs());
        g_min = g_min.min(gv);
    };
    for t in 0..mesh.n_triangles() {
        let verts = mesh.triangle_vertices(t);
        let tri_diam = verts[0]
            .dist(verts[1])
            .max(verts[1].dist(verts[2]))
            .max(verts[2].dist(verts[0]));
        if verts.iter().all(|p| p.dist(x0) > radius + tri_diam) {
            continue;
        }
        for p in crate::coeff::triangle_samples(verts, 4) {
            if p.dist(x0) <= radius {
                visit(k.eval_on_triangle(p, t)?, g.eval_on_triangle(p, t)?);
            }
        }
    }
    if let (ScalarField::Analytic(ke), ScalarField::Analytic(ge)) = (k, g) {
        let n_r = 48;
        let n_t = 96;
        for i in 0..=n_r {
            let rr = radius * i as f64 / n_r as f64;
            for j in 0..n_t {
                let ang = 2.0 * std::f64::consts::PI * j as f64 / n_t as f64;
                let p = Point2::new(x0.x + rr * ang.cos(), x0.y + rr * ang.sin());
                visit(ke.eval(p.x, p.y)?, ge.eval(p.x, p.y)?);
            }
        }
    }
    if !(g_min > 0.0) {
        return Err(Error::InvalidArgument("preconditioner coefficient not positive on the disc".into()));
    }
    Ok(sup / g_min)
}

#[derive(Debug, Clone, Copy)]
pub struct ConvergenceLevel {
    pub level: usize,
    pub n_dofs: usize,
    /// `||w - w_n||_B` for the Galerkin solution of `Z w = f`.
    pub galerkin_error: f64,
    /// Best approximation `||w - P_B w||_B`.
    pub best_error: f64,
    /// Galerkin over best, 1 when both vanish.
    pub quasi_opt_ratio: f64,
    /// `||Z_f w - Z_n w||_B` against the finest-level surrogate.
    pub z_error: f64,
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    /// Effective-ratio condition number `sup r / inf r` on the finest
    /// level; the quasi-optimality cap.
    pub kappa: f64,
    pub levels: Vec<ConvergenceLevel>,
}

enum LevelSolver {
    Grounded(GroundedSolver),
    Direct(DenseCholesky),
}

impl LevelSolver {
    fn new(m: &SymSparseMatrix, neumann: bool) -> Result<LevelSolver> {
        Ok(if neumann {
            LevelSolver::Grounded(GroundedSolver::new(m)?)
        } else {
            LevelSolver::Direct(DenseCholesky::new(m.n(), &m.to_dense())?)
        })
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        match self {
            LevelSolver::Grounded(s) => s.solve(rhs),
            LevelSolver::Direct(c) => c.solve(rhs),
        }
    }
}

struct LevelData {
    /// Fine-dof by coarse-dof interpolation rows.
    p_rows: Vec<Vec<(usize, f64)>>,
    n_coarse: usize,
    a: SymSparseMatrix,
    a_solver: LevelSolver,
    b_solver: LevelSolver,
}

/// Shared state of the convergence studies: the hierarchy, the finest
/// pencil and one factorization per level. Building it once and running
/// several probe functions `w` through [`ConvergenceEngine::study`] is
/// much cheaper than re-factoring per probe.
pub struct ConvergenceEngine {
    hierarchy: MeshHierarchy,
    fine_dofs: Vec<usize>,
    a_f: SymSparseMatrix,
    b_f: SymSparseMatrix,
    b_f_solver: LevelSolver,
    levels: Vec<LevelData>,
    kappa: f64,
    neumann: bool,
}

impl ConvergenceEngine {
    pub fn new(cfg: &ProblemConfig, n_levels: usize) -> Result<ConvergenceEngine> {
        if n_levels < 2 {
            return Err(Error::InvalidArgument("hierarchy needs at least 2 levels".into()));
        }
        let hierarchy = MeshHierarchy::build(cfg.build_mesh()?, n_levels);
        let finest = hierarchy.levels.last().unwrap().clone();
        let neumann = cfg.bc == Bc::Neumann;
        let assembled = cfg.assemble_on(Arc::new(finest))?;
        let ratios = assembled.effective_ratios();
        let kappa = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            / ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let fine_dofs = assembled.dof_nodes();
        let a_f = assembled.a.clone();
        let b_f = assembled.b.clone();
        let b_f_solver = LevelSolver::new(&b_f, neumann)?;

        let finest_idx = hierarchy.levels.len() - 1;
        let mut levels = Vec::new();
        for l in 0..finest_idx {
            let p = hierarchy.to_finest(l);
            let coarse_mesh = &hierarchy.levels[l];
            let coarse_dofs: Vec<usize> = match cfg.bc {
                Bc::Neumann => (0..coarse_mesh.n_nodes()).collect(),
                Bc::Dirichlet0 => {
                    let bnd = coarse_mesh.boundary_nodes();
                    (0..coarse_mesh.n_nodes()).filter(|i| !bnd.contains(i)).collect()
                }
            };
            let mut coarse_pos = vec![usize::MAX; coarse_mesh.n_nodes()];
            for (r, &c) in coarse_dofs.iter().enumerate() {
                coarse_pos[c] = r;
            }
            // Dof-restricted interpolation rows. Dropped coarse columns
            // correspond to boundary values, which vanish for every
            // admissible coarse function.
            let p_rows: Vec<Vec<(usize, f64)>> = fine_dofs
                .iter()
                .map(|&fine_node| {
                    p.rows()[fine_node]
                        .iter()
                        .filter_map(|&(c, w)| {
                            (coarse_pos[c] != usize::MAX).then(|| (coarse_pos[c], w))
                        })
                        .collect()
                })
                .collect();
            let n_coarse = coarse_dofs.len();
            let a = a_f.project(&p_rows, n_coarse);
            let b = b_f.project(&p_rows, n_coarse);
            let a_solver = LevelSolver::new(&a, neumann)?;
            let b_solver = LevelSolver::new(&b, neumann)?;
            levels.push(LevelData {
                p_rows,
                n_coarse,
                a,
                a_solver,
                b_solver,
            });
        }
        Ok(ConvergenceEngine {
            hierarchy,
            fine_dofs,
            a_f,
            b_f,
            b_f_solver,
            levels,
            kappa,
            neumann,
        })
    }

    pub fn n_levels(&self) -> usize {
        self.hierarchy.levels.len()
    }

    /// B-(semi)norm; under Neumann conditions constants are in the
    /// kernel, so the mean is removed first to keep the value accurate
    /// near zero.
    fn b_norm(&self, v: &[f64]) -> f64 {
        if self.neumann {
            let mean: f64 = v.iter().sum::<f64>() / v.len() as f64;
            let shifted: Vec<f64> = v.iter().map(|x| x - mean).collect();
            self.b_f.quadratic_form(&shifted).max(0.0).sqrt()
        } else {
            self.b_f.quadratic_form(v).max(0.0).sqrt()
        }
    }

    /// Runs one probe function through every coarse level.
    pub fn study(&self, w: &Expr) -> Result<ConvergenceReport> {
        let finest = self.hierarchy.levels.last().unwrap();
        let w_f: Vec<f64> = self
            .fine_dofs
            .iter()
            .map(|&node| {
                let p = finest.nodes()[node];
                w.eval(p.x, p.y)
            })
            .collect::<Result<_>>()?;
        let n_f = w_f.len();
        let aw = self.a_f.matvec(&w_f);
        // Finest-level surrogate of the preconditioned image of w.
        let zf = self.b_f_solver.solve(&aw);
        let w_scale = self.b_norm(&w_f).max(1.0);

        let mut rows = Vec::new();
        for (l, data) in self.levels.iter().enumerate() {
            let prolong = |c: &[f64]| -> Vec<f64> {
                (0..n_f)
                    .map(|i| data.p_rows[i].iter().map(|&(j, wt)| wt * c[j]).sum())
                    .collect()
            };
            let restrict = |f: &[f64]| -> Vec<f64> {
                let mut out = vec![0.0; data.n_coarse];
                for (i, row) in data.p_rows.iter().enumerate() {
                    for &(j, wt) in row {
                        out[j] += wt * f[i];
                    }
                }
                out
            };

            // Galerkin solution of Z w = f in the B-inner product, which
            // reduces to the energy projection A_l c = P^T A_f w.
            let c_gal = data.a_solver.solve(&restrict(&aw));
            let gal_lift = prolong(&c_gal);
            let e_gal: Vec<f64> = w_f.iter().zip(&gal_lift).map(|(a, b)| a - b).collect();
            let galerkin_error = self.b_norm(&e_gal);

            // B-orthogonal projection of w.
            let c_proj = data.b_solver.solve(&restrict(&self.b_f.matvec(&w_f)));
            let proj_lift = prolong(&c_proj);
            let e_best: Vec<f64> = w_f.iter().zip(&proj_lift).map(|(a, b)| a - b).collect();
            let best_error = self.b_norm(&e_best);

            let quasi_opt_ratio = if best_error <= 1e-13 * w_scale {
                1.0
            } else {
                galerkin_error / best_error
            };

            // Z_l w = B_l^-1 A_l (projection of w).
            let c_z = data.b_solver.solve(&data.a.matvec(&c_proj));
            let z_lift = prolong(&c_z);
            let e_z: Vec<f64> = zf.iter().zip(&z_lift).map(|(a, b)| a - b).collect();
            let z_error = self.b_norm(&e_z);

            rows.push(ConvergenceLevel {
                level: l,
                n_dofs: data.n_coarse,
                galerkin_error,
                best_error,
                quasi_opt_ratio,
                z_error,
            });
        }
        Ok(ConvergenceReport {
            kappa: self.kappa,
            levels: rows,
        })
    }
}

/// Quasi-optimality check: Galerkin error against best approximation on
/// every coarse level of a nested hierarchy.
pub fn cea_check(cfg: &ProblemConfig, w: &Expr, n_levels: usize) -> Result<ConvergenceReport> {
    ConvergenceEngine::new(cfg, n_levels)?.study(w)
}

/// Pointwise convergence of the extended discrete operators toward the
/// finest-level surrogate; needs at least three levels.
pub fn pointwise_convergence_study(cfg: &ProblemConfig, w: &Expr, n_levels: usize) -> Result<ConvergenceReport> {
    if n_levels < 3 {
        return Err(Error::InvalidArgument(
            "pointwise convergence study needs at least 3 levels".into(),
        ));
    }
    ConvergenceEngine::new(cfg, n_levels)?.study(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_reference(nx: usize) -> ProblemConfig {
        ProblemConfig {
            nx,
            ny: nx,
            ..ProblemConfig::reference()
        }
    }

    #[test]
    fn fill_distance_basics() {
        // Two endpoint eigenvalues: worst point is the middle.
        let d = fill_distance((0.0, 2.0), &[0.0, 2.0], 2001).unwrap();
        assert!((d - 1.0).abs() < 2e-3);
        let d = fill_distance((0.0, 2.0), &[1.0], 3).unwrap();
        assert!((d - 1.0).abs() < 1e-15);
        assert!(fill_distance((0.0, 1.0), &[], 10).is_err());
        assert!(fill_distance((0.0, 1.0), &[0.5], 1).is_err());
        assert!(fill_distance((1.0, 0.0), &[0.5], 4).is_err());
    }

    #[test]
    fn constant_ratio_refinement_has_zero_fill_distance() {
        let cfg = ProblemConfig {
            k: "2.5*(1+x^2+y^2)".into(),
            g: "1+x^2+y^2".into(),
            nx: 2,
            ny: 2,
            ..ProblemConfig::reference()
        };
        let report = refinement_study(&cfg, 2, 64).unwrap();
        assert!(report.target.width() <= 1e-12);
        for level in &report.levels {
            assert!(level.fill_distance <= 1e-11, "{}", level.fill_distance);
            assert!((level.lambda_min - 2.5).abs() <= 1e-11);
            assert!((level.lambda_max - 2.5).abs() <= 1e-11);
        }
    }

    #[test]
    fn reference_refinement_decreases_fill_and_halves_widths() {
        let cfg = small_reference(4);
        let report = refinement_study(&cfg, 3, 256).unwrap();
        assert_eq!(report.levels.len(), 3);
        for pair in report.levels.windows(2) {
            assert!(pair[1].n_dofs > pair[0].n_dofs);
            assert!(
                pair[1].fill_distance <= 0.9 * pair[0].fill_distance,
                "{} vs {}",
                pair[1].fill_distance,
                pair[0].fill_distance
            );
            let factor = pair[1].max_width / pair[0].max_width;
            assert!(factor >= 0.4 && factor <= 0.6, "width factor {factor}");
        }
    }

    #[test]
    fn perturbing_everything_makes_the_pencil_proportional() {
        let cfg = small_reference(3);
        let all: Vec<usize> = (0..16).collect();
        let report = perturbation_experiment(&cfg, &all, KChoice::Value(1.7)).unwrap();
        assert!(report.columns_exact);
        // A_tilde = K B: every deflated eigenvalue equals K.
        assert_eq!(report.multiplicity, 15);
        assert!(report.theta <= report.bound + 1e-10);
    }

    #[test]
    fn midpoint_perturbation_bounds_hold() {
        let cfg = small_reference(5);
        for j_nodes in [vec![7usize], vec![8, 14, 21], vec![0, 35]] {
            let report = perturbation_experiment(&cfg, &j_nodes, KChoice::Midpoint).unwrap();
            assert!(report.columns_exact, "columns for {j_nodes:?}");
            assert!(report.multiplicity >= j_nodes.len(), "multiplicity {}", report.multiplicity);
            assert!(
                report.theta <= report.bound + 1e-10,
                "theta {} vs bound {}",
                report.theta,
                report.bound
            );
            assert!(report.eigs_in_interval >= j_nodes.len());
        }
    }

    #[test]
    fn perturbation_counts_match_dense_oracle_on_small_problem() {
        // Dirichlet on a 4x3 grid: 6 interior dofs, small enough for the
        // characteristic-polynomial oracle.
        let cfg = ProblemConfig {
            bc: crate::assembly::Bc::Dirichlet0,
            nx: 4,
            ny: 3,
            ..ProblemConfig::reference()
        };
        let mesh = cfg.build_mesh().unwrap();
        let boundary = mesh.boundary_nodes();
        let interior: Vec<usize> = (0..mesh.n_nodes()).filter(|i| !boundary.contains(i)).collect();
        assert_eq!(interior.len(), 6);
        let j_nodes = vec![interior[1], interior[4]];
        let report = perturbation_experiment(&cfg, &j_nodes, KChoice::Midpoint).unwrap();

        // Rebuild the perturbed pencil with the same public pieces and
        // hand its dense reductions to the oracle.
        let (k_field, g_field) = cfg.fields().unwrap();
        let k_avg = effective_averages(&mesh, &k_field, cfg.quadrature).unwrap();
        let g_avg = effective_averages(&mesh, &g_field, cfg.quadrature).unwrap();
        let a_full = assemble_from_averages(&mesh, &k_avg).unwrap();
        let b_full = assemble_from_averages(&mesh, &g_avg).unwrap();
        let mut region = BTreeSet::new();
        for &j in &j_nodes {
            region.extend(mesh.node_support(j).unwrap().triangles);
        }
        let a_region = assemble_on_triangles(&mesh, &k_avg, Some(&region)).unwrap();
        let b_region = assemble_on_triangles(&mesh, &g_avg, Some(&region)).unwrap();
        let a_tilde = a_full.combine(&a_region, report.k_value, &b_region);

        let n = interior.len();
        let dense = |m: &SymSparseMatrix| m.restrict(&interior).to_dense();
        let perturbed = eigloc_oracles::charpoly_generalized_eigs(n, &dense(&a_tilde), &dense(&b_full));
        let base = eigloc_oracles::charpoly_generalized_eigs(n, &dense(&a_full), &dense(&b_full));

        // Polynomial root finders split a double root by about the
        // square root of the coefficient rounding (~1e-6 here); the
        // cluster window absorbs that while staying far below the
        // spectral gap.
        let cluster = perturbed
            .iter()
            .filter(|&&v| (v - report.k_value).abs() <= 1e-4 * report.k_value)
            .count();
        assert_eq!(cluster, report.multiplicity);
        let in_interval = base
            .iter()
            .filter(|&&v| {
                v >= report.k_value - report.bound - 1e-8 && v <= report.k_value + report.bound + 1e-8
            })
            .count();
        assert_eq!(in_interval, report.eigs_in_interval);
        assert!(report.multiplicity >= j_nodes.len());
    }

    #[test]
    fn dirichlet_fill_distance_bounded_by_max_interval_width() {
        // Every interval holds an eigenvalue after matching and the
        // intervals cover the global effective range, so no grid point
        // is farther than the largest width from an eigenvalue.
        let cfg = ProblemConfig {
            bc: crate::assembly::Bc::Dirichlet0,
            nx: 6,
            ny: 6,
            ..ProblemConfig::reference()
        };
        let assembled = cfg.assemble().unwrap();
        let spectrum =
            generalized_eigs(&Pencil::from_assembled(&assembled).unwrap(), false).unwrap();
        let ratios = assembled.effective_ratios();
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let ratio = cfg.ratio().unwrap();
        let intervals =
            node_intervals(&assembled, &ratio, IntervalMode::QuadratureConsistent).unwrap();
        let max_width = intervals.iter().map(|iv| iv.width()).fold(0.0, f64::max);
        let fill = fill_distance((lo, hi), &spectrum.values, 512).unwrap();
        assert!(fill <= max_width + 1e-9, "fill {fill} vs max width {max_width}");
    }

    #[test]
    fn perturbation_rejects_bad_input() {
        let cfg = small_reference(3);
        assert!(perturbation_experiment(&cfg, &[], KChoice::Midpoint).is_err());
        assert!(perturbation_experiment(&cfg, &[3], KChoice::Value(-1.0)).is_err());
        let dirichlet = ProblemConfig {
            bc: Bc::Dirichlet0,
            ..small_reference(3)
        };
        // Node 0 is a boundary node.
        assert!(perturbation_experiment(&dirichlet, &[0], KChoice::Midpoint).is_err());
    }

    #[test]
    fn weyl_bump_of_constant_ratio_vanishes() {
        let cfg = ProblemConfig {
            k: "3*(1+50*exp(-5*(x^2+y^2)))".into(),
            nx: 16,
            ny: 16,
            ..ProblemConfig::reference()
        };
        let report = weyl_sequence_demo(&cfg, Point2::new(0.0, 0.0), &[0.5]).unwrap();
        assert!((report.lambda0 - 3.0).abs() < 1e-12);
        assert!(report.radii[0].u_norm <= 1e-10, "{}", report.radii[0].u_norm);
    }

    #[test]
    fn weyl_demo_detects_insufficient_resolution() {
        let cfg = small_reference(4);
        match weyl_sequence_demo(&cfg, Point2::new(0.0, 0.0), &[0.2]) {
            Err(Error::InsufficientResolution(r)) => assert!((r - 0.2).abs() < 1e-15),
            other => panic!("{other:?}"),
        }
        assert!(weyl_sequence_demo(&cfg, Point2::new(0.9, 0.9), &[0.5]).is_err());
    }

    #[test]
    fn weyl_norms_decrease_and_respect_bounds() {
        let cfg = ProblemConfig {
            nx: 32,
            ny: 32,
            ..ProblemConfig::reference()
        };
        let report = weyl_sequence_demo(&cfg, Point2::new(0.0, 0.0), &[0.5, 0.25]).unwrap();
        assert!(report.radii[0].u_norm > report.radii[1].u_norm);
        for row in &report.radii {
            assert!(
                row.u_norm <= 1.1 * row.bound,
                "radius {}: {} vs bound {}",
                row.radius,
                row.u_norm,
                row.bound
            );
        }
    }

    #[test]
    fn convergence_of_coarse_function_is_exact() {
        // w in the coarsest space: both errors vanish, ratio 1.
        let cfg = small_reference(2);
        let engine = ConvergenceEngine::new(&cfg, 3).unwrap();
        let w = Expr::parse("1+x").unwrap();
        let report = engine.study(&w).unwrap();
        for level in &report.levels {
            assert!(level.galerkin_error <= 1e-10, "{}", level.galerkin_error);
            assert!(level.best_error <= 1e-10);
            assert_eq!(level.quasi_opt_ratio, 1.0);
        }
    }

    #[test]
    fn constant_probe_gives_zero_errors() {
        let cfg = small_reference(2);
        let report = cea_check(&cfg, &Expr::parse("4").unwrap(), 3).unwrap();
        for level in &report.levels {
            assert!(level.galerkin_error <= 1e-10);
            assert!(level.z_error <= 1e-10);
        }
    }

    #[test]
    fn constant_ratio_makes_galerkin_equal_projection() {
        let cfg = ProblemConfig {
            k: "2.5*(1+x^2+y^2)".into(),
            g: "1+x^2+y^2".into(),
            nx: 2,
            ny: 2,
            ..ProblemConfig::reference()
        };
        let report = cea_check(&cfg, &Expr::parse("sin(pi*x)*sin(pi*y)").unwrap(), 3).unwrap();
        for level in &report.levels {
            assert!(
                (level.quasi_opt_ratio - 1.0).abs() <= 1e-10,
                "ratio {}",
                level.quasi_opt_ratio
            );
            // Z = 2.5 I here, so the operator error is 2.5 times the
            // best-approximation distance.
            assert!(
                (level.z_error - 2.5 * level.best_error).abs() <= 1e-9 * level.z_error.max(1e-300),
                "z {} vs 2.5 * {}",
                level.z_error,
                level.best_error
            );
        }
    }

    #[test]
    fn dirichlet_convergence_engine_paths() {
        // Probe vanishes on the boundary of (-1,1)^2, so it is an
        // admissible Dirichlet function.
        let cfg = ProblemConfig {
            bc: crate::assembly::Bc::Dirichlet0,
            ..small_reference(4)
        };
        let report =
            pointwise_convergence_study(&cfg, &Expr::parse("sin(pi*x)*sin(pi*y)").unwrap(), 3).unwrap();
        for level in &report.levels {
            assert!(level.quasi_opt_ratio <= report.kappa + 1e-6);
        }
        for pair in report.levels.windows(2) {
            assert!(pair[1].z_error <= pair[0].z_error * (1.0 + 1e-12));
        }
    }

    #[test]
    fn dirichlet_weyl_bump_of_constant_ratio_vanishes() {
        let cfg = ProblemConfig {
            k: "3*(1+50*exp(-5*(x^2+y^2)))".into(),
            bc: crate::assembly::Bc::Dirichlet0,
            nx: 16,
            ny: 16,
            ..ProblemConfig::reference()
        };
        let report = weyl_sequence_demo(&cfg, Point2::new(0.0, 0.0), &[0.5]).unwrap();
        assert!(report.radii[0].u_norm <= 1e-10, "{}", report.radii[0].u_norm);
    }

    #[test]
    fn reference_convergence_is_quasi_optimal_and_monotone() {
        let cfg = small_reference(4);
        let report =
            pointwise_convergence_study(&cfg, &Expr::parse("sin(pi*x)*sin(pi*y)").unwrap(), 4).unwrap();
        assert!(report.kappa <= 3.0 + 1e-9);
        for level in &report.levels {
            assert!(level.quasi_opt_ratio <= report.kappa + 1e-6);
        }
        for pair in report.levels.windows(2) {
            assert!(
                pair[1].z_error <= pair[0].z_error * (1.0 + 1e-12),
                "{} then {}",
                pair[0].z_error,
                pair[1].z_error
            );
        }
        assert!(pointwise_convergence_study(&cfg, &Expr::parse("x").unwrap(), 2).is_err());
    }
}
