//! Eigenvalue localization: per-node ratio intervals, the bipartite
//! matching between eigenvalues and intervals, the sorted pairing report
//! and the Taylor remainder bound.
//!
//! With quadrature-consistent intervals the assembled pencil is exactly
//! the pencil of a piecewise-constant problem, so a perfect matching is
//! not a numerical accident but a theorem about the discrete problem;
//! `find_matching` either produces the permutation or a node set
//! violating Hall's condition together with the eigenvalue count in its
//! union of intervals.

use std::collections::VecDeque;

use crate::assembly::AssembledPencil;
use crate::coeff::{ratio_range, triangle_samples, Interval, RatioField, Region, Var};
use crate::eigensolve::Spectrum;
use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point2};

/// Ratio interval attached to one degree of freedom.
#[derive(Debug, Clone)]
pub struct NodeInterval {
    /// Mesh node index.
    pub node: usize,
    /// Nodal point.
    pub point: Point2,
    /// Ratio value at the nodal point.
    pub nodal_ratio: f64,
    pub interval: Interval,
}

impl NodeInterval {
    pub fn width(&self) -> f64 {
        self.interval.width()
    }
}

/// How per-node intervals are computed.
#[derive(Debug, Clone, Copy)]
pub enum IntervalMode {
    /// Min/max of the per-triangle effective ratios over the support;
    /// exact for the assembled pencil.
    QuadratureConsistent,
    /// Sampled range of the analytic ratio over the support at the given
    /// subdivision depth (vertices, edge midpoints and centroid are
    /// always included).
    AnalyticSampled(u32),
}

/// One interval per pencil degree of freedom (all nodes under Neumann,
/// interior nodes under Dirichlet), in matrix row order.
pub fn node_intervals(
    pencil: &AssembledPencil,
    ratio: &RatioField,
    mode: IntervalMode,
) -> Result<Vec<NodeInterval>> {
    let mesh = &pencil.mesh;
    let effective = pencil.effective_ratios();
    let mut out = Vec::new();
    for node in pencil.dof_nodes() {
        let support = mesh.node_support(node)?;
        let interval = match mode {
            IntervalMode::QuadratureConsistent => {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for &t in &support.triangles {
                    lo = lo.min(effective[t]);
                    hi = hi.max(effective[t]);
                }
                Interval {
                    lo,
                    hi,
                    certified: true,
                }
            }
            IntervalMode::AnalyticSampled(depth) => {
                ratio_range(ratio, mesh, Region::Triangles(&support.triangles), depth)?
            }
        };
        let point = mesh.nodes()[node];
        let hint = support.triangles.first().copied();
        let nodal_ratio = ratio.eval(mesh, point, hint)?;
        out.push(NodeInterval {
            node,
            point,
            nodal_ratio,
            interval,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchingStatus {
    /// Every eigenvalue is matched to a distinct interval containing it.
    Perfect,
    Deficient,
}

/// Node set violating Hall's condition, reported when no perfect
/// matching exists.
#[derive(Debug, Clone)]
pub struct HallWitness {
    /// Positions into the interval list (the canonical set of intervals
    /// reachable from an unmatched interval by alternating paths).
    pub members: Vec<usize>,
    /// Number of eigenvalues lying in the union of the members'
    /// intervals; strictly less than `members.len()`.
    pub eigs_in_union: usize,
}

#[derive(Debug, Clone)]
pub struct MatchingResult {
    pub status: MatchingStatus,
    /// Eigenvalue index assigned to each interval; under Neumann
    /// deflation exactly one interval stays unmatched even in the
    /// perfect case.
    pub eig_of_interval: Vec<Option<usize>>,
    pub witness: Option<HallWitness>,
    pub tol: f64,
}

impl MatchingResult {
    pub fn is_perfect(&self) -> bool {
        self.status == MatchingStatus::Perfect
    }

    /// Interval position matched to each eigenvalue (perfect matchings
    /// only).
    pub fn interval_of_eig(&self, n_eigs: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; n_eigs];
        for (j, e) in self.eig_of_interval.iter().enumerate() {
            if let Some(i) = e {
                out[*i] = Some(j);
            }
        }
        out
    }
}

/// Default membership tolerance: `1e-9` times the spectral radius.
pub fn default_matching_tol(spectrum: &Spectrum) -> f64 {
    1e-9 * spectrum.spectral_radius()
}

/// Maximum bipartite matching between eigenvalues and intervals
/// (Hopcroft-Karp). The matching is eigenvalue-perfect when every
/// eigenvalue is assigned; otherwise the canonical Hall violator is
/// reported: the intervals reachable from an unmatched interval by
/// alternating paths, whose union contains fewer eigenvalues than the
/// set has members.
pub fn find_matching(spectrum: &Spectrum, intervals: &[NodeInterval], tol: f64) -> MatchingResult {
    let values = &spectrum.values;
    let n_left = intervals.len();
    let n_right = values.len();
    // Adjacency: interval j ~ eigenvalue i iff the value lies inside
    // (within tol). Eigenvalues are sorted, so each interval sees a
    // contiguous index range.
    let adj: Vec<Vec<usize>> = intervals
        .iter()
        .map(|iv| {
            let lo = iv.interval.lo - tol;
            let hi = iv.interval.hi + tol;
            let start = values.partition_point(|&v| v < lo);
            let end = values.partition_point(|&v| v <= hi);
            (start..end).collect()
        })
        .collect();

    const NIL: usize = usize::MAX;
    let mut match_left = vec![NIL; n_left];
    let mut match_right = vec![NIL; n_right];
    let mut dist = vec![usize::MAX; n_left];

    let bfs = |match_left: &[usize], match_right: &[usize], dist: &mut [usize]| -> bool {
        let mut queue = VecDeque::new();
        for u in 0..n_left {
            if match_left[u] == NIL {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                let w = match_right[v];
                if w == NIL {
                    found = true;
                } else if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        found
    };

    fn dfs(
        u: usize,
        adj: &[Vec<usize>],
        match_left: &mut [usize],
        match_right: &mut [usize],
        dist: &mut [usize],
    ) -> bool {
        const NIL: usize = usize::MAX;
        for idx in 0..adj[u].len() {
            let v = adj[u][idx];
            let w = match_right[v];
            if w == NIL || (dist[w] == dist[u].wrapping_add(1) && dfs(w, adj, match_left, match_right, dist)) {
                match_left[u] = v;
                match_right[v] = u;
                return true;
            }
        }
        dist[u] = usize::MAX;
        false
    }

    let mut matched = 0usize;
    while bfs(&match_left, &match_right, &mut dist) {
        for u in 0..n_left {
            if match_left[u] == NIL && dfs(u, &adj, &mut match_left, &mut match_right, &mut dist) {
                matched += 1;
            }
        }
    }

    let eig_of_interval: Vec<Option<usize>> = match_left
        .iter()
        .map(|&v| (v != NIL).then_some(v))
        .collect();

    if matched == n_right {
        return MatchingResult {
            status: MatchingStatus::Perfect,
            eig_of_interval,
            witness: None,
            tol,
        };
    }

    // Final layered search: intervals reachable from unmatched intervals
    // by alternating paths form the canonical Hall violator.
    bfs(&match_left, &match_right, &mut dist);
    let members: Vec<usize> = (0..n_left).filter(|&u| dist[u] != usize::MAX).collect();
    let mut in_union = vec![false; n_right];
    for &u in &members {
        for &v in &adj[u] {
            in_union[v] = true;
        }
    }
    let eigs_in_union = in_union.iter().filter(|&&b| b).count();
    MatchingResult {
        status: MatchingStatus::Deficient,
        eig_of_interval,
        witness: Some(HallWitness {
            members,
            eigs_in_union,
        }),
        tol,
    }
}

/// One line of the sorted pairing comparison.
#[derive(Debug, Clone, Copy)]
pub struct PairingRow {
    pub eigenvalue: f64,
    pub nodal_ratio: f64,
    pub difference: f64,
}

/// Sorted eigenvalues against sorted nodal ratios, with the theoretical
/// cap `max_j width_j`.
#[derive(Debug, Clone)]
pub struct PairingReport {
    pub rows: Vec<PairingRow>,
    pub max_difference: f64,
    pub max_width: f64,
}

/// Pairs the ascending eigenvalues with the ascending nodal ratios of
/// `intervals`. Counts must agree; under Neumann deflation the caller
/// drops the unmatched interval first (see [`MatchingResult`]).
pub fn nodal_pairing_report(spectrum: &Spectrum, intervals: &[NodeInterval]) -> Result<PairingReport> {
    if spectrum.len() != intervals.len() {
        return Err(Error::CountMismatch {
            left: spectrum.len(),
            right: intervals.len(),
        });
    }
    let mut ratios: Vec<f64> = intervals.iter().map(|iv| iv.nodal_ratio).collect();
    ratios.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut rows = Vec::with_capacity(ratios.len());
    let mut max_difference = 0.0f64;
    for (&eigenvalue, &nodal_ratio) in spectrum.values.iter().zip(&ratios) {
        let difference = (eigenvalue - nodal_ratio).abs();
        max_difference = max_difference.max(difference);
        rows.push(PairingRow {
            eigenvalue,
            nodal_ratio,
            difference,
        });
    }
    let max_width = intervals.iter().map(|iv| iv.width()).fold(0.0, f64::max);
    Ok(PairingReport {
        rows,
        max_difference,
        max_width,
    })
}

/// Taylor remainder bound for the pairing of eigenvalues with nodal
/// values: `h |grad r(x_j)| + h^2/2 sup |D^2 r|` over the support, with
/// the Hessian supremum sampled at the given depth. Requires analytic
/// `k` and `g`.
pub fn taylor_bound(ratio: &RatioField, mesh: &Mesh, node: usize, depth: u32) -> Result<f64> {
    let expr = ratio.as_expr().ok_or_else(|| {
        Error::Unsupported("taylor_bound needs analytic coefficient fields".into())
    })?;
    let support = mesh.node_support(node)?;
    let h = support.diameter;
    let point = mesh.nodes()[node];

    let rx = expr.derivative(Var::X);
    let ry = expr.derivative(Var::Y);
    let grad = rx
        .eval(point.x, point.y)?
        .hypot(ry.eval(point.x, point.y)?);

    let rxx = rx.derivative(Var::X);
    let rxy = rx.derivative(Var::Y);
    let ryy = ry.derivative(Var::Y);
    let mut hess_sup = 0.0f64;
    for &t in &support.triangles {
        for p in triangle_samples(mesh.triangle_vertices(t), depth) {
            let a = rxx.eval(p.x, p.y)?;
            let b = rxy.eval(p.x, p.y)?;
            let c = ryy.eval(p.x, p.y)?;
            hess_sup = hess_sup.max(sym2x2_norm(a, b, c));
        }
    }
    Ok(h * grad + 0.5 * h * h * hess_sup)
}

/// Spectral norm of the symmetric matrix [[a, b], [b, c]].
fn sym2x2_norm(a: f64, b: f64, c: f64) -> f64 {
    let mean = 0.5 * (a + c);
    let disc = (0.5 * (a - c)).hypot(b);
    mean.abs() + disc
}
