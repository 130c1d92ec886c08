//! Coefficient fields `k`, `g` and the ratio `r = k/g`: expression
//! parsing, symbolic differentiation, evaluation and range estimation.

mod expr;
mod field;

pub use expr::{BinOp, Expr, Func, Var};
pub use field::{ratio_range, triangle_samples, Interval, RatioField, Region, ScalarField};
