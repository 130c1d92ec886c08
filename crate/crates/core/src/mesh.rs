//! Conforming P1 triangulations of rectangles: structured construction,
//! uniform (red) refinement with prolongation operators, nodal supports
//! and JSON round-tripping.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of the closed domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn dist(self, other: Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Axis-aligned rectangle `(ax, bx) x (ay, by)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub ax: f64,
    pub bx: f64,
    pub ay: f64,
    pub by: f64,
}

impl Rect {
    pub fn new(ax: f64, bx: f64, ay: f64, by: f64) -> Self {
        Rect { ax, bx, ay, by }
    }

    pub fn unit() -> Self {
        Rect::new(0.0, 1.0, 0.0, 1.0)
    }

    pub fn area(&self) -> f64 {
        (self.bx - self.ax) * (self.by - self.ay)
    }
}

/// Nodal support: the triangles incident to a node and their diameter.
#[derive(Debug, Clone)]
pub struct Support {
    pub node: usize,
    pub triangles: Vec<usize>,
    /// Maximal pairwise distance between vertices of the listed triangles.
    pub diameter: f64,
}

/// Conforming triangulation. Immutable after construction; every triangle
/// is stored counterclockwise with strictly positive area.
#[derive(Debug, Clone)]
pub struct Mesh {
    nodes: Vec<Point2>,
    triangles: Vec<[usize; 3]>,
    domain: Rect,
}

fn signed_area(a: Point2, b: Point2, c: Point2) -> f64 {
    0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y))
}

impl Mesh {
    /// Structured nx-by-ny grid on `rect`, each cell split by the
    /// lower-left to upper-right diagonal. Nodes are ordered row-major.
    pub fn structured(rect: Rect, nx: usize, ny: usize) -> Result<Mesh> {
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidMesh(format!(
                "cell counts must be positive, got {nx}x{ny}"
            )));
        }
        if !(rect.ax < rect.bx && rect.ay < rect.by)
            || !(rect.ax.is_finite() && rect.bx.is_finite() && rect.ay.is_finite() && rect.by.is_finite())
        {
            return Err(Error::InvalidMesh(format!(
                "degenerate rectangle ({}, {}) x ({}, {})",
                rect.ax, rect.bx, rect.ay, rect.by
            )));
        }
        let hx = (rect.bx - rect.ax) / nx as f64;
        let hy = (rect.by - rect.ay) / ny as f64;
        let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
        for iy in 0..=ny {
            for ix in 0..=nx {
                // Endpoints exactly on the rectangle edges.
                let x = if ix == nx { rect.bx } else { rect.ax + ix as f64 * hx };
                let y = if iy == ny { rect.by } else { rect.ay + iy as f64 * hy };
                nodes.push(Point2::new(x, y));
            }
        }
        let idx = |ix: usize, iy: usize| iy * (nx + 1) + ix;
        let mut triangles = Vec::with_capacity(2 * nx * ny);
        for iy in 0..ny {
            for ix in 0..nx {
                let ll = idx(ix, iy);
                let lr = idx(ix + 1, iy);
                let ul = idx(ix, iy + 1);
                let ur = idx(ix + 1, iy + 1);
                triangles.push([ll, lr, ur]);
                triangles.push([ll, ur, ul]);
            }
        }
        Mesh::from_parts(nodes, triangles)
    }

    /// Validates node indices, orientation and conformity. The domain is
    /// taken as the bounding box of the nodes.
    pub fn from_parts(nodes: Vec<Point2>, triangles: Vec<[usize; 3]>) -> Result<Mesh> {
        if nodes.is_empty() || triangles.is_empty() {
            return Err(Error::InvalidMesh("mesh needs nodes and triangles".into()));
        }
        for p in &nodes {
            if !p.x.is_finite() || !p.y.is_finite() {
                return Err(Error::InvalidMesh(format!("non-finite node ({}, {})", p.x, p.y)));
            }
        }
        let mut edge_count: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= nodes.len() {
                    return Err(Error::InvalidMesh(format!(
                        "triangle {t} references node {v}, but the mesh has {} nodes",
                        nodes.len()
                    )));
                }
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::InvalidMesh(format!("triangle {t} repeats a vertex")));
            }
            let area = signed_area(nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]);
            if !(area > 0.0) {
                return Err(Error::InvalidMesh(format!(
                    "triangle {t} has nonpositive signed area {area}; vertices must be counterclockwise"
                )));
            }
            for e in 0..3 {
                let a = tri[e];
                let b = tri[(e + 1) % 3];
                let key = (a.min(b), a.max(b));
                *edge_count.entry(key).or_insert(0) += 1;
            }
        }
        if let Some((edge, n)) = edge_count.iter().find(|(_, &n)| n > 2) {
            return Err(Error::InvalidMesh(format!(
                "edge {:?} is shared by {n} triangles; mesh is not conforming",
                edge
            )));
        }
        let (mut ax, mut bx, mut ay, mut by) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for p in &nodes {
            ax = ax.min(p.x);
            bx = bx.max(p.x);
            ay = ay.min(p.y);
            by = by.max(p.y);
        }
        Ok(Mesh {
            nodes,
            triangles,
            domain: Rect::new(ax, bx, ay, by),
        })
    }

    pub fn nodes(&self) -> &[Point2] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn domain(&self) -> Rect {
        self.domain
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_vertices(&self, t: usize) -> [Point2; 3] {
        let [a, b, c] = self.triangles[t];
        [self.nodes[a], self.nodes[b], self.nodes[c]]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_vertices(t);
        signed_area(a, b, c)
    }

    pub fn triangle_centroid(&self, t: usize) -> Point2 {
        let [a, b, c] = self.triangle_vertices(t);
        Point2::new((a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0)
    }

    /// Triangles having node `j` as a vertex, plus the patch diameter.
    pub fn node_support(&self, j: usize) -> Result<Support> {
        if j >= self.nodes.len() {
            return Err(Error::IndexOutOfRange {
                index: j,
                len: self.nodes.len(),
            });
        }
        let triangles: Vec<usize> = self
            .triangles
            .iter()
            .enumerate()
            .filter(|(_, tri)| tri.contains(&j))
            .map(|(t, _)| t)
            .collect();
        let mut verts = BTreeSet::new();
        for &t in &triangles {
            verts.extend(self.triangles[t]);
        }
        let pts: Vec<Point2> = verts.iter().map(|&v| self.nodes[v]).collect();
        let mut diameter: f64 = 0.0;
        for (i, &p) in pts.iter().enumerate() {
            for &q in &pts[i + 1..] {
                diameter = diameter.max(p.dist(q));
            }
        }
        Ok(Support {
            node: j,
            triangles,
            diameter,
        })
    }

    /// Nodes lying on an edge that belongs to exactly one triangle.
    pub fn boundary_nodes(&self) -> BTreeSet<usize> {
        let mut edge_count: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for tri in &self.triangles {
            for e in 0..3 {
                let a = tri[e];
                let b = tri[(e + 1) % 3];
                *edge_count.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        let mut out = BTreeSet::new();
        for ((a, b), n) in edge_count {
            if n == 1 {
                out.insert(a);
                out.insert(b);
            }
        }
        out
    }

    /// Splits every triangle into four congruent children via edge
    /// midpoints. Parent nodes keep their indices; midpoints are appended
    /// in order of first encounter (triangles ascending, local edges
    /// `ab`, `bc`, `ca`).
    pub fn refine_uniform(&self) -> (Mesh, Prolongation) {
        let n_coarse = self.nodes.len();
        let mut nodes = self.nodes.clone();
        let mut midpoint: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut rows: Vec<Vec<(usize, f64)>> = (0..n_coarse).map(|j| vec![(j, 1.0)]).collect();
        let mut mid = |a: usize, b: usize, nodes: &mut Vec<Point2>, rows: &mut Vec<Vec<(usize, f64)>>| {
            let key = (a.min(b), a.max(b));
            *midpoint.entry(key).or_insert_with(|| {
                let p = Point2::new(
                    0.5 * (nodes[a].x + nodes[b].x),
                    0.5 * (nodes[a].y + nodes[b].y),
                );
                nodes.push(p);
                rows.push(vec![(key.0, 0.5), (key.1, 0.5)]);
                nodes.len() - 1
            })
        };
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        for tri in &self.triangles {
            let [a, b, c] = *tri;
            let ab = mid(a, b, &mut nodes, &mut rows);
            let bc = mid(b, c, &mut nodes, &mut rows);
            let ca = mid(c, a, &mut nodes, &mut rows);
            triangles.push([a, ab, ca]);
            triangles.push([ab, b, bc]);
            triangles.push([ca, bc, c]);
            triangles.push([ab, bc, ca]);
        }
        let fine = Mesh {
            nodes,
            triangles,
            domain: self.domain,
        };
        let p = Prolongation {
            n_coarse,
            rows,
        };
        (fine, p)
    }

    /// Evaluates the P1 function with nodal `coeffs` at `p`, locating the
    /// containing triangle by brute force. Returns `None` outside the mesh.
    pub fn eval_p1(&self, coeffs: &[f64], p: Point2) -> Option<f64> {
        let t = self.locate(p)?;
        let lambda = self.barycentric(t, p);
        let [a, b, c] = self.triangles[t];
        Some(lambda[0] * coeffs[a] + lambda[1] * coeffs[b] + lambda[2] * coeffs[c])
    }

    /// First triangle containing `p` (boundary-inclusive, small slack for
    /// roundoff).
    pub fn locate(&self, p: Point2) -> Option<usize> {
        const SLACK: f64 = 1e-12;
        for t in 0..self.triangles.len() {
            let l = self.barycentric(t, p);
            if l.iter().all(|&v| v >= -SLACK) {
                return Some(t);
            }
        }
        None
    }

    pub(crate) fn barycentric(&self, t: usize, p: Point2) -> [f64; 3] {
        let [a, b, c] = self.triangle_vertices(t);
        let area = signed_area(a, b, c);
        [
            signed_area(p, b, c) / area,
            signed_area(a, p, c) / area,
            signed_area(a, b, p) / area,
        ]
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let file = MeshFile {
            nodes: self.nodes.iter().map(|p| [p.x, p.y]).collect(),
            triangles: self.triangles.clone(),
        };
        let mut text = serde_json::to_string_pretty(&file)?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn read_json(path: &Path) -> Result<Mesh> {
        let text = std::fs::read_to_string(path)?;
        let file: MeshFile = serde_json::from_str(&text)?;
        let nodes = file.nodes.iter().map(|&[x, y]| Point2::new(x, y)).collect();
        Mesh::from_parts(nodes, file.triangles)
    }
}

/// Mesh file layout: 0-based indices, counterclockwise triangles.
#[derive(Serialize, Deserialize)]
struct MeshFile {
    nodes: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
}

/// Sparse fine-by-coarse interpolation: rows hold `(coarse index, weight)`
/// pairs; coinciding nodes carry weight 1, edge midpoints 1/2 + 1/2.
#[derive(Debug, Clone)]
pub struct Prolongation {
    n_coarse: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl Prolongation {
    pub fn n_fine(&self) -> usize {
        self.rows.len()
    }

    pub fn n_coarse(&self) -> usize {
        self.n_coarse
    }

    pub fn rows(&self) -> &[Vec<(usize, f64)>] {
        &self.rows
    }

    /// `P c`: coarse nodal coefficients to fine ones.
    pub fn apply(&self, coarse: &[f64]) -> Vec<f64> {
        assert_eq!(coarse.len(), self.n_coarse);
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(j, w)| w * coarse[j]).sum())
            .collect()
    }

    /// `P^T f`: restriction of a fine vector.
    pub fn apply_transpose(&self, fine: &[f64]) -> Vec<f64> {
        assert_eq!(fine.len(), self.rows.len());
        let mut out = vec![0.0; self.n_coarse];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, w) in row {
                out[j] += w * fine[i];
            }
        }
        out
    }

    /// Identity prolongation (used as the recursion anchor when
    /// accumulating across levels).
    pub fn identity(n: usize) -> Prolongation {
        Prolongation {
            n_coarse: n,
            rows: (0..n).map(|j| vec![(j, 1.0)]).collect(),
        }
    }

    /// `self . inner`: composes fine<-mid with mid<-coarse.
    pub fn compose(&self, inner: &Prolongation) -> Prolongation {
        assert_eq!(self.n_coarse, inner.rows.len());
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
                for &(m, w) in row {
                    for &(c, v) in &inner.rows[m] {
                        *acc.entry(c).or_insert(0.0) += w * v;
                    }
                }
                acc.into_iter().collect()
            })
            .collect();
        Prolongation {
            n_coarse: inner.n_coarse,
            rows,
        }
    }
}

/// Nested meshes produced by repeated uniform refinement, with one
/// prolongation per adjacent pair.
#[derive(Debug)]
pub struct MeshHierarchy {
    pub levels: Vec<Mesh>,
    pub prolongations: Vec<Prolongation>,
}

impl MeshHierarchy {
    pub fn build(base: Mesh, n_levels: usize) -> MeshHierarchy {
        assert!(n_levels >= 1);
        let mut levels = vec![base];
        let mut prolongations = Vec::new();
        for _ in 1..n_levels {
            let (fine, p) = levels.last().unwrap().refine_uniform();
            levels.push(fine);
            prolongations.push(p);
        }
        MeshHierarchy {
            levels,
            prolongations,
        }
    }

    /// Accumulated prolongation from `level` up to the finest mesh.
    pub fn to_finest(&self, level: usize) -> Prolongation {
        let finest = self.levels.len() - 1;
        let mut acc = Prolongation::identity(self.levels[finest].n_nodes());
        for l in (level..finest).rev() {
            acc = acc.compose(&self.prolongations[l]);
        }
        acc
    }

    pub fn max_support_diameter(&self, level: usize) -> f64 {
        let mesh = &self.levels[level];
        (0..mesh.n_nodes())
            .map(|j| mesh.node_support(j).unwrap().diameter)
            .fold(0.0, f64::max)
    }
}
