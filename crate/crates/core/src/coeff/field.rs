//! Coefficient fields over a mesh and inf/sup ranges of the ratio
//! `r = k/g` over triangle regions.

use crate::coeff::expr::Expr;
use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point2};

/// Coefficient function: analytic on the closed domain, or one constant
/// per triangle of a specific mesh.
#[derive(Debug, Clone)]
pub enum ScalarField {
    Analytic(Expr),
    PerTriangleConstant(Vec<f64>),
}

impl ScalarField {
    pub fn parse(text: &str) -> Result<ScalarField> {
        Ok(ScalarField::Analytic(Expr::parse(text)?))
    }

    pub fn constant(c: f64) -> ScalarField {
        ScalarField::Analytic(Expr::Num(c))
    }

    pub fn is_analytic(&self) -> bool {
        matches!(self, ScalarField::Analytic(_))
    }

    /// Field value at `p`. Per-triangle fields need a triangle hint or a
    /// successful point location on `mesh`.
    pub fn eval(&self, mesh: &Mesh, p: Point2, hint: Option<usize>) -> Result<f64> {
        match self {
            ScalarField::Analytic(e) => e.eval(p.x, p.y),
            ScalarField::PerTriangleConstant(values) => {
                if values.len() != mesh.n_triangles() {
                    return Err(Error::FieldMeshMismatch {
                        got: values.len(),
                        expected: mesh.n_triangles(),
                    });
                }
                let t = match hint {
                    Some(t) if t < values.len() => t,
                    Some(t) => {
                        return Err(Error::IndexOutOfRange {
                            index: t,
                            len: values.len(),
                        })
                    }
                    None => mesh.locate(p).ok_or_else(|| Error::InvalidArgument(
                        format!("point ({}, {}) lies outside the mesh", p.x, p.y),
                    ))?,
                };
                Ok(values[t])
            }
        }
    }

    /// Value on a known triangle; analytic fields just evaluate at `p`.
    pub(crate) fn eval_on_triangle(&self, p: Point2, t: usize) -> Result<f64> {
        match self {
            ScalarField::Analytic(e) => e.eval(p.x, p.y),
            ScalarField::PerTriangleConstant(values) => Ok(values[t]),
        }
    }
}

/// The pair `(k, g)` defining the ratio `r = k/g`.
#[derive(Debug, Clone)]
pub struct RatioField {
    pub k: ScalarField,
    pub g: ScalarField,
}

impl RatioField {
    pub fn new(k: ScalarField, g: ScalarField) -> RatioField {
        RatioField { k, g }
    }

    pub fn eval(&self, mesh: &Mesh, p: Point2, hint: Option<usize>) -> Result<f64> {
        Ok(self.k.eval(mesh, p, hint)? / self.g.eval(mesh, p, hint)?)
    }

    /// `k/g` as a single expression, when both fields are analytic.
    pub fn as_expr(&self) -> Option<Expr> {
        match (&self.k, &self.g) {
            (ScalarField::Analytic(k), ScalarField::Analytic(g)) => Some(Expr::Bin(
                super::expr::BinOp::Div,
                Box::new(k.clone()),
                Box::new(g.clone()),
            )),
            _ => None,
        }
    }
}

/// Closed interval with a flag recording whether its endpoints are exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    /// True only when both fields are per-triangle constants, so the
    /// range is an exact min/max rather than a sampled estimate.
    pub certified: bool,
}

impl Interval {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, v: f64, tol: f64) -> bool {
        v >= self.lo - tol && v <= self.hi + tol
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// Deterministic sample points of a triangle: the vertices, edge
/// midpoints, centroid, and the barycentric lattice of order `depth`.
pub fn triangle_samples(v: [Point2; 3], depth: u32) -> Vec<Point2> {
    let [a, b, c] = v;
    let mut pts = vec![
        a,
        b,
        c,
        Point2::new(0.5 * (a.x + b.x), 0.5 * (a.y + b.y)),
        Point2::new(0.5 * (b.x + c.x), 0.5 * (b.y + c.y)),
        Point2::new(0.5 * (c.x + a.x), 0.5 * (c.y + a.y)),
        Point2::new((a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0),
    ];
    if depth >= 2 {
        let s = depth as usize;
        for i in 0..=s {
            for j in 0..=(s - i) {
                let k = s - i - j;
                let (la, lb, lc) = (i as f64 / s as f64, j as f64 / s as f64, k as f64 / s as f64);
                pts.push(Point2::new(
                    la * a.x + lb * b.x + lc * c.x,
                    la * a.y + lb * b.y + lc * c.y,
                ));
            }
        }
    }
    pts
}

/// Region of a mesh over which a range is taken.
#[derive(Debug, Clone, Copy)]
pub enum Region<'a> {
    WholeDomain,
    Triangles(&'a [usize]),
}

/// Inf/sup estimate of `k/g` over a region.
///
/// When both fields are per-triangle constants the result is the exact
/// min/max of the per-triangle ratios (`certified = true`). Otherwise the
/// ratio is sampled at the vertices, edge midpoints, centroid and an
/// order-`depth` barycentric lattice of every region triangle.
pub fn ratio_range(ratio: &RatioField, mesh: &Mesh, region: Region<'_>, depth: u32) -> Result<Interval> {
    let all: Vec<usize>;
    let tris: &[usize] = match region {
        Region::WholeDomain => {
            all = (0..mesh.n_triangles()).collect();
            &all
        }
        Region::Triangles(t) => t,
    };
    if tris.is_empty() {
        return Err(Error::EmptyRegion);
    }
    for &t in tris {
        if t >= mesh.n_triangles() {
            return Err(Error::IndexOutOfRange {
                index: t,
                len: mesh.n_triangles(),
            });
        }
    }
    if let (ScalarField::PerTriangleConstant(kv), ScalarField::PerTriangleConstant(gv)) =
        (&ratio.k, &ratio.g)
    {
        if kv.len() != mesh.n_triangles() || gv.len() != mesh.n_triangles() {
            return Err(Error::FieldMeshMismatch {
                got: kv.len().min(gv.len()),
                expected: mesh.n_triangles(),
            });
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &t in tris {
            let r = kv[t] / gv[t];
            lo = lo.min(r);
            hi = hi.max(r);
        }
        return Ok(Interval {
            lo,
            hi,
            certified: true,
        });
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &t in tris {
        for p in triangle_samples(mesh.triangle_vertices(t), depth) {
            let k = ratio.k.eval_on_triangle(p, t)?;
            let g = ratio.g.eval_on_triangle(p, t)?;
            let r = k / g;
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    Ok(Interval {
        lo,
        hi,
        certified: false,
    })
}
