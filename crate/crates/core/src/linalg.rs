//! Dense kernels behind the eigensolver: Cholesky factorization, the
//! classic Householder tridiagonalization / implicit-shift QL pair, and
//! the reflector that deflates the constant vector out of Neumann pencils.
//!
//! Everything here is deterministic: fixed loop orders, no pivoting
//! choices that depend on ties.

use crate::error::{Error, Result};
use crate::sparse::SymSparseMatrix;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Lower-triangular Cholesky factor of a dense SPD matrix (row-major).
pub(crate) struct DenseCholesky {
    n: usize,
    l: Vec<f64>,
}

impl DenseCholesky {
    pub fn new(n: usize, a: &[f64]) -> Result<DenseCholesky> {
        assert_eq!(a.len(), n * n);
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut sum = a[i * n + j];
                for k in 0..j {
                    sum -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if sum <= 0.0 {
                        return Err(Error::NotPositiveDefinite);
                    }
                    l[i * n + i] = sum.sqrt();
                } else {
                    l[i * n + j] = sum / l[j * n + j];
                }
            }
        }
        Ok(DenseCholesky { n, l })
    }

    /// Solves `L y = b` in place.
    pub fn forward(&self, b: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let mut sum = b[i];
            for k in 0..i {
                sum -= self.l[i * n + k] * b[k];
            }
            b[i] = sum / self.l[i * n + i];
        }
    }

    /// Solves `L^T x = b` in place.
    pub fn backward(&self, b: &mut [f64]) {
        let n = self.n;
        for i in (0..n).rev() {
            let mut sum = b[i];
            for k in i + 1..n {
                sum -= self.l[k * n + i] * b[k];
            }
            b[i] = sum / self.l[i * n + i];
        }
    }

    /// Solves `L L^T x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.forward(&mut x);
        self.backward(&mut x);
        x
    }

    /// Forms `S = L^{-1} A L^{-T}` for symmetric dense `A`, symmetrized
    /// exactly after the two triangular sweeps.
    pub fn congruence(&self, a: &[f64]) -> Vec<f64> {
        let n = self.n;
        assert_eq!(a.len(), n * n);
        // W = L^{-1} A, column by column.
        let mut w = vec![0.0; n * n];
        let mut col = vec![0.0; n];
        for j in 0..n {
            for i in 0..n {
                col[i] = a[i * n + j];
            }
            self.forward(&mut col);
            for i in 0..n {
                w[i * n + j] = col[i];
            }
        }
        // S^T = L^{-1} W^T, column by column; S is then symmetrized.
        let mut s = vec![0.0; n * n];
        for j in 0..n {
            col.copy_from_slice(&w[j * n..(j + 1) * n]);
            self.forward(&mut col);
            for i in 0..n {
                s[i * n + j] = col[i];
            }
        }
        for i in 0..n {
            for j in 0..i {
                let v = 0.5 * (s[i * n + j] + s[j * n + i]);
                s[i * n + j] = v;
                s[j * n + i] = v;
            }
        }
        s
    }
}

/// Eigen-decomposition of a dense symmetric matrix by Householder
/// tridiagonalization followed by implicit-shift QL. Eigenvalues are
/// returned ascending; eigenvectors (when requested) are orthonormal and
/// returned per eigenvalue.
pub(crate) fn symmetric_eigen(n: usize, a: &[f64], want_vectors: bool) -> (Vec<f64>, Option<Vec<Vec<f64>>>) {
    assert_eq!(a.len(), n * n);
    if n == 0 {
        return (Vec::new(), if want_vectors { Some(Vec::new()) } else { None });
    }
    let mut v = a.to_vec();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(n, &mut v, &mut d, &mut e);
    tql2(n, &mut v, &mut d, &mut e);
    // Stable ascending sort; ties keep QL output order.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let vectors = want_vectors.then(|| {
        order
            .iter()
            .map(|&j| (0..n).map(|k| v[k * n + j]).collect())
            .collect()
    });
    (values, vectors)
}

/// Householder reduction to tridiagonal form; `v` holds the accumulated
/// orthogonal transformation on exit, `d` the diagonal, `e` the
/// subdiagonal in `e[1..]`.
fn tred2(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64]) {
    for j in 0..n {
        d[j] = v[(n - 1) * n + j];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for item in d.iter().take(i) {
            scale += item.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1) * n + j];
                v[i * n + j] = 0.0;
                v[j * n + i] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for item in e.iter_mut().take(i) {
                *item = 0.0;
            }
            for j in 0..i {
                let f = d[j];
                v[j * n + i] = f;
                let mut g = e[j] + v[j * n + j] * f;
                for k in j + 1..i {
                    g += v[k * n + j] * d[k];
                    e[k] += v[k * n + j] * f;
                }
                e[j] = g;
            }
            let mut f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                let f = d[j];
                let g = e[j];
                for k in j..i {
                    v[k * n + j] -= f * e[k] + g * d[k];
                }
                d[j] = v[(i - 1) * n + j];
                v[i * n + j] = 0.0;
            }
        }
        d[i] = h;
    }
    for i in 0..n - 1 {
        v[(n - 1) * n + i] = v[i * n + i];
        v[i * n + i] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[k * n + i + 1] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[k * n + i + 1] * v[k * n + j];
                }
                for k in 0..=i {
                    v[k * n + j] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[k * n + i + 1] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1) * n + j];
        v[(n - 1) * n + j] = 0.0;
    }
    v[(n - 1) * n + (n - 1)] = 1.0;
    e[0] = 0.0;
}

/// Implicit-shift QL on the tridiagonal `(d, e)`, accumulating rotations
/// into `v`.
fn tql2(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64]) {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            loop {
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for item in d.iter_mut().take(n).skip(l + 2) {
                    *item -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        let h = v[k * n + i + 1];
                        v[k * n + i + 1] = s * v[k * n + i] + c * h;
                        v[k * n + i] = c * v[k * n + i] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
}

/// Direct solver for a singular Neumann matrix whose kernel is the
/// constant vector: grounds node 0 and factors the remaining SPD block.
/// For a consistent right-hand side the grounded solution satisfies the
/// full system exactly, with `x[0] = 0`.
pub(crate) struct GroundedSolver {
    chol: DenseCholesky,
    n: usize,
}

impl GroundedSolver {
    pub fn new(m: &SymSparseMatrix) -> Result<GroundedSolver> {
        let n = m.n();
        if n < 2 {
            return Err(Error::EmptySystem(n));
        }
        let r = n - 1;
        let mut dense = vec![0.0; r * r];
        for (i, j, v) in m.entries() {
            if i >= 1 && j >= 1 {
                dense[(i - 1) * r + (j - 1)] = v;
            }
        }
        let chol = DenseCholesky::new(r, &dense)?;
        Ok(GroundedSolver { chol, n })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        assert_eq!(rhs.len(), self.n);
        let reduced = self.chol.solve(&rhs[1..]);
        let mut x = Vec::with_capacity(self.n);
        x.push(0.0);
        x.extend(reduced);
        x
    }
}

/// Householder reflector whose trailing `n-1` columns form an orthonormal
/// basis of the complement of the all-ones vector. Used to deflate the
/// constant nullspace of Neumann pencils without changing the remaining
/// spectrum.
pub(crate) struct ConstantDeflator {
    n: usize,
    v: Vec<f64>,
    beta: f64,
}

impl ConstantDeflator {
    pub fn new(n: usize) -> ConstantDeflator {
        assert!(n >= 2);
        let u = 1.0 / (n as f64).sqrt();
        // v = u * ones + e0; H = I - beta v v^T maps e0 to -u * ones.
        let mut v = vec![u; n];
        v[0] += 1.0;
        let beta = 2.0 / dot(&v, &v);
        ConstantDeflator { n, v, beta }
    }

    /// Dense `(H M H)[1.., 1..]`, the pencil block on the complement of
    /// the constant vector.
    pub fn reduce(&self, m: &SymSparseMatrix) -> Vec<f64> {
        let n = self.n;
        assert_eq!(m.n(), n);
        let mut dense = m.to_dense();
        let t = m.matvec(&self.v);
        let s = dot(&self.v, &t);
        // H M H = M - v w^T - w v^T with w = beta t - (beta^2 s / 2) v.
        let w: Vec<f64> = t
            .iter()
            .zip(&self.v)
            .map(|(&ti, &vi)| self.beta * ti - 0.5 * self.beta * self.beta * s * vi)
            .collect();
        for i in 0..n {
            for j in 0..n {
                dense[i * n + j] -= self.v[i] * w[j] + w[i] * self.v[j];
            }
        }
        let r = n - 1;
        let mut out = vec![0.0; r * r];
        for i in 0..r {
            for j in 0..r {
                out[i * r + j] = dense[(i + 1) * n + (j + 1)];
            }
        }
        // Enforce exact symmetry of the reduced block.
        for i in 0..r {
            for j in 0..i {
                let v = 0.5 * (out[i * r + j] + out[j * r + i]);
                out[i * r + j] = v;
                out[j * r + i] = v;
            }
        }
        out
    }

    /// `Q y`: lifts a reduced vector back to the full space.
    pub fn lift(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.n - 1);
        let mut z = Vec::with_capacity(self.n);
        z.push(0.0);
        z.extend_from_slice(y);
        let c = self.beta * dot(&self.v, &z);
        for i in 0..self.n {
            z[i] -= c * self.v[i];
        }
        z
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::SymSparseBuilder;

    #[test]
    fn cholesky_solves() {
        let a = [4.0, 2.0, 2.0, 3.0];
        let c = DenseCholesky::new(2, &a).unwrap();
        let x = c.solve(&[8.0, 7.0]);
        assert!((x[0] - 1.25).abs() < 1e-14);
        assert!((x[1] - 1.5).abs() < 1e-14);
        assert!(DenseCholesky::new(2, &[1.0, 2.0, 2.0, 1.0]).is_err());
    }

    #[test]
    fn eigen_of_small_symmetric() {
        // diag(1, 2) and a 2x2 with known eigenvalues 1 and 3.
        let (vals, _) = symmetric_eigen(2, &[1.0, 0.0, 0.0, 2.0], false);
        assert!((vals[0] - 1.0).abs() < 1e-14 && (vals[1] - 2.0).abs() < 1e-14);
        let (vals, vecs) = symmetric_eigen(2, &[2.0, 1.0, 1.0, 2.0], true);
        assert!((vals[0] - 1.0).abs() < 1e-14 && (vals[1] - 3.0).abs() < 1e-14);
        let v = vecs.unwrap();
        for (lambda, q) in vals.iter().zip(&v) {
            let r0 = 2.0 * q[0] + q[1] - lambda * q[0];
            let r1 = q[0] + 2.0 * q[1] - lambda * q[1];
            assert!(r0.abs() < 1e-13 && r1.abs() < 1e-13);
        }
    }

    #[test]
    fn eigen_residuals_on_moderate_matrix() {
        let n = 24;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let v = 1.0 / (1.0 + (i as f64 - j as f64).abs()) + if i == j { 3.0 } else { 0.0 };
                a[i * n + j] = v;
            }
        }
        let (vals, vecs) = symmetric_eigen(n, &a, true);
        let vecs = vecs.unwrap();
        for w in vals.windows(2) {
            assert!(w[0] <= w[1]);
        }
        for (lambda, q) in vals.iter().zip(&vecs) {
            let norm: f64 = dot(q, q).sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
            for i in 0..n {
                let row: f64 = (0..n).map(|j| a[i * n + j] * q[j]).sum();
                assert!((row - lambda * q[i]).abs() < 1e-10, "residual too large");
            }
        }
    }

    #[test]
    fn grounded_solver_handles_consistent_singular_system() {
        // 1D Neumann Laplacian on 4 nodes.
        let mut b = SymSparseBuilder::new(4);
        let stencil = [(0, 0, 1.0), (0, 1, -1.0), (1, 1, 2.0), (1, 2, -1.0), (2, 2, 2.0), (2, 3, -1.0), (3, 3, 1.0)];
        for (i, j, v) in stencil {
            b.add(i, j, v);
        }
        let m = b.build();
        let rhs = [1.0, -1.0, -1.0, 1.0];
        let solver = GroundedSolver::new(&m).unwrap();
        let x = solver.solve(&rhs);
        let back = m.matvec(&x);
        for (r, want) in back.iter().zip(rhs) {
            assert!((r - want).abs() < 1e-12);
        }
        assert_eq!(x[0], 0.0);
    }

    #[test]
    fn deflator_basis_is_orthonormal_complement_of_ones() {
        let n = 5;
        let d = ConstantDeflator::new(n);
        for j in 0..n - 1 {
            let mut y = vec![0.0; n - 1];
            y[j] = 1.0;
            let q = d.lift(&y);
            let ones_dot: f64 = q.iter().sum();
            assert!(ones_dot.abs() < 1e-14, "column {j} not orthogonal to ones");
            for k in 0..n - 1 {
                let mut y2 = vec![0.0; n - 1];
                y2[k] = 1.0;
                let q2 = d.lift(&y2);
                let want = if j == k { 1.0 } else { 0.0 };
                assert!((dot(&q, &q2) - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn deflator_reduce_matches_explicit_basis() {
        let m = SymSparseMatrix::from_dense(3, &[2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0]).unwrap();
        let d = ConstantDeflator::new(3);
        let red = d.reduce(&m);
        for i in 0..2 {
            let mut yi = vec![0.0; 2];
            yi[i] = 1.0;
            let qi = d.lift(&yi);
            for j in 0..2 {
                let mut yj = vec![0.0; 2];
                yj[j] = 1.0;
                let qj = d.lift(&yj);
                let want = dot(&qi, &m.matvec(&qj));
                assert!((red[i * 2 + j] - want).abs() < 1e-13);
            }
        }
    }
}
