//! Symmetric-definite generalized eigensolver.
//!
//! The pencil `A v = lambda B v` is reduced by the Cholesky factor of `B`
//! to an ordinary symmetric problem for `L^-1 A L^-T`, which is solved by
//! Householder tridiagonalization with implicit-shift QL. Neumann pencils
//! are first restricted to the orthogonal complement of the constant
//! vector; this deflation leaves the remaining spectrum unchanged, unlike
//! grounding a node.

use num_complex::Complex64;

use crate::assembly::{AssembledPencil, Bc};
use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, ConstantDeflator, DenseCholesky};
use crate::sparse::SymSparseMatrix;

/// A symmetric pencil, optionally marked for constant-vector deflation.
#[derive(Debug, Clone)]
pub struct Pencil {
    a: SymSparseMatrix,
    b: SymSparseMatrix,
    deflate: bool,
}

impl Pencil {
    /// Pencil with `B` positive definite as given (Dirichlet-style).
    pub fn new(a: SymSparseMatrix, b: SymSparseMatrix) -> Result<Pencil> {
        if a.n() != b.n() {
            return Err(Error::InvalidArgument(format!(
                "pencil dimensions differ: {} vs {}",
                a.n(),
                b.n()
            )));
        }
        Ok(Pencil { a, b, deflate: false })
    }

    /// Builds the pencil of an assembled problem, deflating the constant
    /// nullspace for Neumann boundary conditions.
    pub fn from_assembled(p: &AssembledPencil) -> Result<Pencil> {
        match p.bc {
            Bc::Neumann => deflate_constants(p.a.clone(), p.b.clone()),
            Bc::Dirichlet0 => Pencil::new(p.a.clone(), p.b.clone()),
        }
    }

    pub fn a(&self) -> &SymSparseMatrix {
        &self.a
    }

    pub fn b(&self) -> &SymSparseMatrix {
        &self.b
    }

    /// Dimension of the stored matrices.
    pub fn dim(&self) -> usize {
        self.a.n()
    }

    /// Number of eigenvalues the pencil yields.
    pub fn reduced_dim(&self) -> usize {
        if self.deflate {
            self.a.n() - 1
        } else {
            self.a.n()
        }
    }

    pub fn is_deflated(&self) -> bool {
        self.deflate
    }
}

/// Restricts a Neumann pencil to the orthonormal complement of the
/// constant vector. Both matrices must annihilate constants; the reduced
/// `B` block must be positive definite.
pub fn deflate_constants(a: SymSparseMatrix, b: SymSparseMatrix) -> Result<Pencil> {
    if a.n() != b.n() {
        return Err(Error::InvalidArgument(format!(
            "pencil dimensions differ: {} vs {}",
            a.n(),
            b.n()
        )));
    }
    let n = a.n();
    if n < 2 {
        return Err(Error::EmptySystem(n));
    }
    let ones = vec![1.0; n];
    for m in [&a, &b] {
        let res = m
            .matvec(&ones)
            .iter()
            .fold(0.0f64, |acc, v| acc.max(v.abs()));
        let scale = m.max_abs().max(f64::MIN_POSITIVE);
        if res > 1e-10 * scale {
            return Err(Error::NotDeflatable(res / scale));
        }
    }
    let deflator = ConstantDeflator::new(n);
    let b_red = deflator.reduce(&b);
    DenseCholesky::new(n - 1, &b_red)?;
    Ok(Pencil {
        a,
        b,
        deflate: true,
    })
}

/// Ascending generalized eigenvalues, optionally with B-orthonormal
/// eigenvectors in the coordinates of the stored matrices.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: Option<Vec<Vec<f64>>>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(f64::NAN)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(f64::NAN)
    }

    /// Largest absolute eigenvalue.
    pub fn spectral_radius(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Solves the pencil. With deflation the eigenvectors are lifted back to
/// the full coordinate space, where they remain B-orthonormal.
pub fn generalized_eigs(pencil: &Pencil, want_vectors: bool) -> Result<Spectrum> {
    let n = pencil.dim();
    if pencil.deflate {
        let deflator = ConstantDeflator::new(n);
        let a_red = deflator.reduce(&pencil.a);
        let b_red = deflator.reduce(&pencil.b);
        let (values, vectors) = solve_dense(n - 1, &a_red, &b_red, want_vectors)?;
        let vectors = vectors.map(|vs| vs.iter().map(|y| deflator.lift(y)).collect());
        Ok(Spectrum { values, vectors })
    } else {
        let a = pencil.a.to_dense();
        let b = pencil.b.to_dense();
        let (values, vectors) = solve_dense(n, &a, &b, want_vectors)?;
        Ok(Spectrum { values, vectors })
    }
}

fn solve_dense(
    n: usize,
    a: &[f64],
    b: &[f64],
    want_vectors: bool,
) -> Result<(Vec<f64>, Option<Vec<Vec<f64>>>)> {
    let chol = DenseCholesky::new(n, b)?;
    let s = chol.congruence(a);
    let (values, raw) = symmetric_eigen(n, &s, want_vectors);
    let vectors = raw.map(|vs| {
        vs.into_iter()
            .map(|mut y| {
                chol.backward(&mut y);
                y
            })
            .collect()
    });
    Ok((values, vectors))
}

/// Resolvent norm of the B-self-adjoint operator at a complex shift:
/// `max_i 1 / |mu - lambda_i|`, the inverse distance to the spectrum.
pub fn resolvent_norm(spectrum: &Spectrum, mu: Complex64) -> Result<f64> {
    if spectrum.is_empty() {
        return Err(Error::EmptySpectrum);
    }
    let mut dist = f64::INFINITY;
    let mut nearest = f64::NAN;
    for &lambda in &spectrum.values {
        let d = (mu - Complex64::new(lambda, 0.0)).norm();
        if d < dist {
            dist = d;
            nearest = lambda;
        }
    }
    if dist == 0.0 {
        return Err(Error::ShiftOnSpectrum(nearest));
    }
    Ok(1.0 / dist)
}

/// `(v^T A v) / (v^T B v)` for the pencil's stored matrices.
pub fn rayleigh_quotient(pencil: &Pencil, v: &[f64]) -> Result<f64> {
    if v.len() != pencil.dim() {
        return Err(Error::InvalidArgument(format!(
            "vector length {} does not match pencil dimension {}",
            v.len(),
            pencil.dim()
        )));
    }
    let denom = pencil.b.quadratic_form(v);
    if denom <= 0.0 {
        return Err(Error::ZeroBNorm);
    }
    Ok(pencil.a.quadratic_form(v) / denom)
}
