//! Symmetric sparse storage with deterministic accumulation order.
//!
//! Both halves of every off-diagonal entry are written from the same
//! accumulator, so `m.get(i, j)` and `m.get(j, i)` are bitwise equal by
//! construction, not up to tolerance.

use std::collections::BTreeMap;
use std::io::Write;

use crate::error::{Error, Result};

/// Builder keyed by `(row, col)`; insertion adds to both mirror entries.
#[derive(Debug, Default)]
pub struct SymSparseBuilder {
    n: usize,
    entries: BTreeMap<(usize, usize), f64>,
}

impl SymSparseBuilder {
    pub fn new(n: usize) -> Self {
        SymSparseBuilder {
            n,
            entries: BTreeMap::new(),
        }
    }

    /// Accumulates `v` into `(i, j)` and, for `i != j`, into `(j, i)`.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.n && j < self.n);
        *self.entries.entry((i, j)).or_insert(0.0) += v;
        if i != j {
            *self.entries.entry((j, i)).or_insert(0.0) += v;
        }
    }

    /// Accumulates into the upper-triangle entry only when `i <= j`,
    /// mirroring the stored value; used when the caller iterates ordered
    /// local pairs of a symmetric element matrix.
    pub fn add_sym(&mut self, i: usize, j: usize, v: f64) {
        if i <= j {
            self.add(i, j, v);
        }
    }

    pub fn build(self) -> SymSparseMatrix {
        let nnz = self.entries.len();
        let mut row_ptr = vec![0usize; self.n + 1];
        let mut col_idx = Vec::with_capacity(nnz);
        let mut vals = Vec::with_capacity(nnz);
        for (&(i, j), &v) in &self.entries {
            row_ptr[i + 1] += 1;
            col_idx.push(j);
            vals.push(v);
        }
        for i in 0..self.n {
            row_ptr[i + 1] += row_ptr[i];
        }
        SymSparseMatrix {
            n: self.n,
            row_ptr,
            col_idx,
            vals,
        }
    }
}

/// Frozen CSR form; symmetric by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SymSparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<f64>,
}

impl SymSparseMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        match self.col_idx[lo..hi].binary_search(&j) {
            Ok(k) => self.vals[lo + k],
            Err(_) => 0.0,
        }
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        self.col_idx[lo..hi]
            .iter()
            .copied()
            .zip(self.vals[lo..hi].iter().copied())
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.matvec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().fold(0.0, |m, v| f64::max(m, v.abs()))
    }

    pub fn frobenius(&self) -> f64 {
        self.vals.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n * self.n];
        for (i, j, v) in self.entries() {
            out[i * self.n + j] = v;
        }
        out
    }

    pub fn from_dense(n: usize, data: &[f64]) -> Result<SymSparseMatrix> {
        assert_eq!(data.len(), n * n);
        let mut b = SymSparseBuilder::new(n);
        for i in 0..n {
            for j in i..n {
                let v = data[i * n + j];
                if data[j * n + i] != v {
                    return Err(Error::InvalidArgument(format!(
                        "dense input is not symmetric at ({i}, {j})"
                    )));
                }
                if v != 0.0 {
                    b.add(i, j, v);
                }
            }
        }
        Ok(b.build())
    }

    /// Entrywise `self - sub + scale * addend` over the union pattern.
    pub fn combine(&self, sub: &SymSparseMatrix, scale: f64, addend: &SymSparseMatrix) -> SymSparseMatrix {
        assert_eq!(self.n, sub.n);
        assert_eq!(self.n, addend.n);
        let mut b = SymSparseBuilder::new(self.n);
        let mut keys: BTreeMap<(usize, usize), ()> = BTreeMap::new();
        for (i, j, _) in self.entries().chain(sub.entries()).chain(addend.entries()) {
            if i <= j {
                keys.insert((i, j), ());
            }
        }
        for (&(i, j), _) in &keys {
            let v = self.get(i, j) - sub.get(i, j) + scale * addend.get(i, j);
            b.add(i, j, v);
        }
        b.build()
    }

    /// Rows and columns restricted to `keep` (ascending node indices).
    pub fn restrict(&self, keep: &[usize]) -> SymSparseMatrix {
        let mut pos = vec![usize::MAX; self.n];
        for (r, &k) in keep.iter().enumerate() {
            pos[k] = r;
        }
        let mut b = SymSparseBuilder::new(keep.len());
        for (i, j, v) in self.entries() {
            if i <= j && pos[i] != usize::MAX && pos[j] != usize::MAX {
                b.add(pos[i], pos[j], v);
            }
        }
        b.build()
    }

    /// Galerkin triple product `P^T M P` for a sparse interpolation `P`
    /// given by rows of `(coarse index, weight)` pairs.
    pub fn project(&self, p_rows: &[Vec<(usize, f64)>], n_coarse: usize) -> SymSparseMatrix {
        assert_eq!(p_rows.len(), self.n);
        let mut acc: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (i, j, v) in self.entries() {
            for &(ci, wi) in &p_rows[i] {
                for &(cj, wj) in &p_rows[j] {
                    *acc.entry((ci, cj)).or_insert(0.0) += wi * v * wj;
                }
            }
        }
        let mut b = SymSparseBuilder::new(n_coarse);
        for (&(i, j), &v) in &acc {
            if i <= j {
                // Mirror entries accumulate to the same total in BTreeMap
                // order; write the upper one to keep exact symmetry.
                b.add(i, j, if i == j { v } else { 0.5 * (v + acc[&(j, i)]) });
            }
        }
        b.build()
    }

    /// Coordinate-format text dump `i j value` per line, for debugging.
    pub fn write_coo<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (i, j, v) in self.entries() {
            writeln!(w, "{} {} {}", i, j, v)?;
        }
        Ok(())
    }
}
