//! P1 stiffness assembly for variable scalar coefficients.
//!
//! Per-triangle effective coefficient averages are first-class outputs:
//! the assembled matrix is bitwise identical to re-assembling with those
//! averages as per-triangle constants, which is what makes the interval
//! localization of the eigenvalues exactly checkable on assembled pencils.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::coeff::ScalarField;
use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point2};
use crate::sparse::{SymSparseBuilder, SymSparseMatrix};

/// Triangle quadrature. Edge midpoints integrate quadratics exactly and
/// are the default; the centroid rule is kept for comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuadratureRule {
    Centroid,
    #[serde(rename = "midpoint3")]
    EdgeMidpoints,
}

impl QuadratureRule {
    /// Points and weights; weights are positive and sum to the area.
    pub fn points(self, v: [Point2; 3], area: f64) -> Vec<(Point2, f64)> {
        let [a, b, c] = v;
        match self {
            QuadratureRule::Centroid => vec![(
                Point2::new((a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0),
                area,
            )],
            QuadratureRule::EdgeMidpoints => {
                let w = area / 3.0;
                vec![
                    (Point2::new(0.5 * (a.x + b.x), 0.5 * (a.y + b.y)), w),
                    (Point2::new(0.5 * (b.x + c.x), 0.5 * (b.y + c.y)), w),
                    (Point2::new(0.5 * (c.x + a.x), 0.5 * (c.y + a.y)), w),
                ]
            }
        }
    }
}

/// Boundary condition applied to assembled matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bc {
    Neumann,
    #[serde(rename = "dirichlet")]
    Dirichlet0,
}

/// Element stiffness for a P1 triangle with a constant coefficient.
///
/// The off-diagonal entries are `c * area * (grad phi_i . grad phi_j)`;
/// each diagonal entry is the negated sum of its off-diagonal row, so the
/// matrix annihilates the constant vector by construction.
pub fn element_stiffness(v: [Point2; 3], coeff: f64) -> Result<[[f64; 3]; 3]> {
    let [a, b, c] = v;
    let area = 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
    if !(area > 0.0) {
        return Err(Error::InvalidMesh(format!(
            "degenerate triangle with signed area {area}"
        )));
    }
    // grad phi_i = rot(p_{i+2} - p_{i+1}) / (2 area).
    let g = [
        [(b.y - c.y), (c.x - b.x)],
        [(c.y - a.y), (a.x - c.x)],
        [(a.y - b.y), (b.x - a.x)],
    ];
    let scale = coeff / (4.0 * area);
    let m01 = scale * (g[0][0] * g[1][0] + g[0][1] * g[1][1]);
    let m02 = scale * (g[0][0] * g[2][0] + g[0][1] * g[2][1]);
    let m12 = scale * (g[1][0] * g[2][0] + g[1][1] * g[2][1]);
    Ok([
        [-(m01 + m02), m01, m02],
        [m01, -(m01 + m12), m12],
        [m02, m12, -(m02 + m12)],
    ])
}

/// Quadrature averages `c_T = sum_q w_q c(x_q) / area(T)` per triangle.
///
/// Per-triangle-constant fields pass through unchanged (their average is
/// the constant itself), which keeps re-assembly from averages bitwise
/// reproducible. Every quadrature sample must be strictly positive.
pub fn effective_averages(mesh: &Mesh, field: &ScalarField, rule: QuadratureRule) -> Result<Vec<f64>> {
    if let ScalarField::PerTriangleConstant(values) = field {
        if values.len() != mesh.n_triangles() {
            return Err(Error::FieldMeshMismatch {
                got: values.len(),
                expected: mesh.n_triangles(),
            });
        }
        for (t, &v) in values.iter().enumerate() {
            if !(v > 0.0) {
                return Err(Error::nonpositive(t, mesh.triangle_centroid(t), v));
            }
        }
        return Ok(values.clone());
    }
    let mut out = Vec::with_capacity(mesh.n_triangles());
    for t in 0..mesh.n_triangles() {
        let verts = mesh.triangle_vertices(t);
        let area = mesh.triangle_area(t);
        let mut sum = 0.0;
        for (p, w) in rule.points(verts, area) {
            let v = field.eval_on_triangle(p, t)?;
            if !(v > 0.0) {
                return Err(Error::nonpositive(t, p, v));
            }
            sum += w * v;
        }
        out.push(sum / area);
    }
    Ok(out)
}

/// Global stiffness matrix from per-triangle coefficient averages, summed
/// in ascending triangle order.
pub fn assemble_from_averages(mesh: &Mesh, averages: &[f64]) -> Result<SymSparseMatrix> {
    assemble_on_triangles(mesh, averages, None)
}

/// Like [`assemble_from_averages`] but restricted to a subset of
/// triangles (ascending iteration order is shared with the full
/// assembly, so entries supported inside the subset match bitwise).
pub fn assemble_on_triangles(
    mesh: &Mesh,
    averages: &[f64],
    subset: Option<&BTreeSet<usize>>,
) -> Result<SymSparseMatrix> {
    if averages.len() != mesh.n_triangles() {
        return Err(Error::FieldMeshMismatch {
            got: averages.len(),
            expected: mesh.n_triangles(),
        });
    }
    let mut builder = SymSparseBuilder::new(mesh.n_nodes());
    for t in 0..mesh.n_triangles() {
        if let Some(keep) = subset {
            if !keep.contains(&t) {
                continue;
            }
        }
        let em = element_stiffness(mesh.triangle_vertices(t), averages[t])?;
        let tri = mesh.triangles()[t];
        for i in 0..3 {
            for j in i..3 {
                builder.add(tri[i], tri[j], em[i][j]);
            }
        }
    }
    Ok(builder.build())
}

/// Assembles the stiffness matrix of one coefficient field.
pub fn assemble_stiffness(
    mesh: &Mesh,
    field: &ScalarField,
    rule: QuadratureRule,
    bc: Bc,
) -> Result<(SymSparseMatrix, Vec<f64>, Option<Vec<usize>>)> {
    let averages = effective_averages(mesh, field, rule)?;
    let full = assemble_from_averages(mesh, &averages)?;
    match bc {
        Bc::Neumann => Ok((full, averages, None)),
        Bc::Dirichlet0 => {
            let boundary = mesh.boundary_nodes();
            let (reduced, interior) = apply_dirichlet(&full, &boundary)?;
            Ok((reduced, averages, Some(interior)))
        }
    }
}

/// Removes the rows and columns of `boundary` nodes. Returns the reduced
/// matrix and the ascending list of retained node indices (the bijection
/// reduced index -> node).
pub fn apply_dirichlet(
    matrix: &SymSparseMatrix,
    boundary: &BTreeSet<usize>,
) -> Result<(SymSparseMatrix, Vec<usize>)> {
    let interior: Vec<usize> = (0..matrix.n()).filter(|i| !boundary.contains(i)).collect();
    if interior.is_empty() {
        return Err(Error::EmptySystem(matrix.n()));
    }
    Ok((matrix.restrict(&interior), interior))
}

/// The symmetric pencil `(A, B)` of one problem: matrices, quadrature
/// averages of both coefficients, and the boundary treatment.
#[derive(Debug, Clone)]
pub struct AssembledPencil {
    pub mesh: Arc<Mesh>,
    /// Stiffness matrix of `k` (reduced when `bc` is Dirichlet).
    pub a: SymSparseMatrix,
    /// Stiffness matrix of `g`.
    pub b: SymSparseMatrix,
    pub k_avg: Vec<f64>,
    pub g_avg: Vec<f64>,
    pub bc: Bc,
    pub rule: QuadratureRule,
    /// Reduced index -> mesh node, present under Dirichlet elimination.
    pub interior: Option<Vec<usize>>,
}

impl AssembledPencil {
    pub fn assemble(
        mesh: Arc<Mesh>,
        k: &ScalarField,
        g: &ScalarField,
        rule: QuadratureRule,
        bc: Bc,
    ) -> Result<AssembledPencil> {
        let (a, k_avg, interior) = assemble_stiffness(&mesh, k, rule, bc)?;
        let (b, g_avg, _) = assemble_stiffness(&mesh, g, rule, bc)?;
        Ok(AssembledPencil {
            mesh,
            a,
            b,
            k_avg,
            g_avg,
            bc,
            rule,
            interior,
        })
    }

    /// Mesh node index backing each matrix row.
    pub fn dof_nodes(&self) -> Vec<usize> {
        match &self.interior {
            Some(map) => map.clone(),
            None => (0..self.mesh.n_nodes()).collect(),
        }
    }

    /// Per-triangle effective ratios `k_T / g_T`.
    pub fn effective_ratios(&self) -> Vec<f64> {
        self.k_avg
            .iter()
            .zip(&self.g_avg)
            .map(|(&k, &g)| k / g)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{RatioField, Region};
    use crate::mesh::Rect;

    fn unit_mesh(n: usize) -> Mesh {
        Mesh::structured(Rect::unit(), n, n).unwrap()
    }

    #[test]
    fn element_matrix_of_unit_right_triangle() {
        // Hand integration: gradients (-1,-1), (1,0), (0,1), area 1/2.
        let m = element_stiffness(
            [Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)],
            1.0,
        )
        .unwrap();
        let want = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((m[i][j] - want[i][j]).abs() < 1e-15, "({i},{j})");
            }
        }
    }

    #[test]
    fn element_matrix_scales_linearly_and_rows_sum_to_zero() {
        let v = [Point2::new(0.2, 0.1), Point2::new(1.3, 0.4), Point2::new(0.5, 1.7)];
        let m1 = element_stiffness(v, 1.0).unwrap();
        let m3 = element_stiffness(v, 3.0).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((m3[i][j] - 3.0 * m1[i][j]).abs() <= 1e-15 * m3[i][j].abs().max(1e-30));
            }
            let others: Vec<usize> = (0..3).filter(|&j| j != i).collect();
            let row = (m1[i][others[0]] + m1[i][others[1]]) + m1[i][i];
            assert_eq!(row, 0.0, "row {i} does not vanish exactly");
        }
    }

    #[test]
    fn element_matrix_rejects_degenerate_triangle() {
        let r = element_stiffness(
            [Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(2.0, 0.0)],
            1.0,
        );
        assert!(r.is_err());
    }

    #[test]
    fn neumann_matrix_annihilates_constants() {
        let mesh = unit_mesh(4);
        let (a, _, _) = assemble_stiffness(
            &mesh,
            &ScalarField::constant(1.0),
            QuadratureRule::EdgeMidpoints,
            Bc::Neumann,
        )
        .unwrap();
        let ones = vec![1.0; a.n()];
        let r = a.matvec(&ones);
        let max = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(max <= 1e-12 * a.max_abs(), "residual {max}");
    }

    #[test]
    fn dirichlet_on_2x2_gives_five_point_value() {
        let mesh = unit_mesh(2);
        let (a, _, interior) = assemble_stiffness(
            &mesh,
            &ScalarField::constant(1.0),
            QuadratureRule::EdgeMidpoints,
            Bc::Dirichlet0,
        )
        .unwrap();
        let interior = interior.unwrap();
        assert_eq!(interior, vec![4]);
        assert_eq!(a.n(), 1);
        assert!((a.get(0, 0) - 4.0).abs() < 1e-13);
    }

    #[test]
    fn proportional_fields_give_proportional_matrices() {
        let mesh = unit_mesh(3);
        let g = ScalarField::parse("1+x+y^2").unwrap();
        let k = ScalarField::parse("2.5*(1+x+y^2)").unwrap();
        let (a, _, _) = assemble_stiffness(&mesh, &k, QuadratureRule::EdgeMidpoints, Bc::Neumann).unwrap();
        let (b, _, _) = assemble_stiffness(&mesh, &g, QuadratureRule::EdgeMidpoints, Bc::Neumann).unwrap();
        for (i, j, v) in a.entries() {
            let w = 2.5 * b.get(i, j);
            assert!((v - w).abs() <= 1e-14 * v.abs().max(1e-30), "({i},{j}): {v} vs {w}");
        }
    }

    #[test]
    fn quadrature_consistency_is_bitwise() {
        let mesh = unit_mesh(4);
        let k = ScalarField::parse("(1+50*exp(-5*(x^2+y^2)))*(2+sin(x+y))").unwrap();
        for rule in [QuadratureRule::EdgeMidpoints, QuadratureRule::Centroid] {
            let (a, avg, _) = assemble_stiffness(&mesh, &k, rule, Bc::Neumann).unwrap();
            let (a2, avg2, _) = assemble_stiffness(
                &mesh,
                &ScalarField::PerTriangleConstant(avg.clone()),
                rule,
                Bc::Neumann,
            )
            .unwrap();
            assert_eq!(avg, avg2);
            assert_eq!(a, a2, "re-assembly from averages must be bit-for-bit");
        }
    }

    #[test]
    fn effective_ratio_containment() {
        let mesh = unit_mesh(4);
        let k = ScalarField::parse("2+sin(3*x)+cos(2*y)").unwrap();
        let g = ScalarField::parse("1+x^2+y^2").unwrap();
        let rule = QuadratureRule::EdgeMidpoints;
        let pencil = AssembledPencil::assemble(Arc::new(unit_mesh(4)), &k, &g, rule, Bc::Neumann).unwrap();
        for t in 0..mesh.n_triangles() {
            let verts = mesh.triangle_vertices(t);
            let area = mesh.triangle_area(t);
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for (p, _) in rule.points(verts, area) {
                let r = k.eval(&mesh, p, Some(t)).unwrap() / g.eval(&mesh, p, Some(t)).unwrap();
                lo = lo.min(r);
                hi = hi.max(r);
            }
            let r_eff = pencil.k_avg[t] / pencil.g_avg[t];
            assert!(
                r_eff >= lo - 1e-12 * lo.abs() && r_eff <= hi + 1e-12 * hi.abs(),
                "triangle {t}: {r_eff} outside [{lo}, {hi}]"
            );
        }
    }

    #[test]
    fn nonpositive_sample_names_triangle_and_point() {
        let mesh = unit_mesh(2);
        // Positive at (0,0) but negative over most of the square.
        let field = ScalarField::parse("0.05-x").unwrap();
        let err = effective_averages(&mesh, &field, QuadratureRule::EdgeMidpoints).unwrap_err();
        match err {
            Error::NonpositiveCoefficient { triangle, value, .. } => {
                assert!(value <= 0.0);
                assert!(triangle < mesh.n_triangles());
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn dirichlet_with_empty_boundary_is_identity() {
        let mesh = unit_mesh(2);
        let (a, _, _) = assemble_stiffness(
            &mesh,
            &ScalarField::constant(1.0),
            QuadratureRule::Centroid,
            Bc::Neumann,
        )
        .unwrap();
        let (same, map) = apply_dirichlet(&a, &BTreeSet::new()).unwrap();
        assert_eq!(same, a);
        assert_eq!(map.len(), a.n());
        let all: BTreeSet<usize> = (0..a.n()).collect();
        assert!(apply_dirichlet(&a, &all).is_err());
    }

    #[test]
    fn subset_assembly_matches_full_on_interior_entries() {
        let mesh = unit_mesh(3);
        let k = ScalarField::parse("1+x+y").unwrap();
        let avg = effective_averages(&mesh, &k, QuadratureRule::EdgeMidpoints).unwrap();
        let full = assemble_from_averages(&mesh, &avg).unwrap();
        let subset: BTreeSet<usize> = (0..mesh.n_triangles()).collect();
        let sub = assemble_on_triangles(&mesh, &avg, Some(&subset)).unwrap();
        assert_eq!(full, sub);
    }

    #[test]
    fn node_interval_membership_of_unit_vectors() {
        // e_j^T A e_j / e_j^T B e_j lies in the effective-ratio range of
        // the support of node j.
        let mesh = Arc::new(unit_mesh(4));
        let k = ScalarField::parse("2+sin(x+y)").unwrap();
        let g = ScalarField::parse("1+x^2").unwrap();
        let p =
            AssembledPencil::assemble(mesh.clone(), &k, &g, QuadratureRule::EdgeMidpoints, Bc::Neumann)
                .unwrap();
        let ratios = RatioField::new(
            ScalarField::PerTriangleConstant(p.k_avg.clone()),
            ScalarField::PerTriangleConstant(p.g_avg.clone()),
        );
        for j in 0..mesh.n_nodes() {
            let support = mesh.node_support(j).unwrap();
            let iv = crate::coeff::ratio_range(&ratios, &mesh, Region::Triangles(&support.triangles), 0)
                .unwrap();
            let quotient = p.a.get(j, j) / p.b.get(j, j);
            assert!(
                iv.contains(quotient, 1e-12 * quotient.abs()),
                "node {j}: {quotient} outside [{}, {}]",
                iv.lo,
                iv.hi
            );
        }
    }
}
