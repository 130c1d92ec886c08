//! Discretization and spectral verification toolkit for preconditioned
//! elliptic operators.
//!
//! Two scalar coefficient fields `k` and `g` on a rectangle define the
//! stiffness pencil `(A, B)` of the operators `-div(k grad u)` and
//! `-div(g grad u)` under P1 Galerkin discretization. The generalized
//! eigenvalues of `B^-1 A` are governed by the local ranges of the ratio
//! `r = k/g` over nodal supports; this crate assembles the pencils,
//! solves them, and checks the localization, pairing, perturbation and
//! convergence statements on concrete meshes.
//!
//! Modules follow the pipeline:
//! - [`mesh`]: structured triangulations, uniform refinement, supports;
//! - [`coeff`]: coefficient expressions, symbolic derivatives, ratio ranges;
//! - [`assembly`]: element and global stiffness matrices, boundary handling;
//! - [`eigensolve`]: symmetric-definite generalized eigensolver, deflation,
//!   resolvent norms;
//! - [`localization`]: per-node intervals, bipartite matching of eigenvalues
//!   to intervals, pairing and Taylor bounds;
//! - [`analysis`]: refinement, perturbation, bump-sequence and convergence
//!   studies.

pub mod analysis;
pub mod assembly;
pub mod coeff;
pub mod eigensolve;
pub mod error;
pub(crate) mod linalg;
pub mod localization;
pub mod mesh;
pub mod sparse;

pub use error::{Error, Result};
