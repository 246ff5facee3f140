//! Dense tensors and Tucker-format decompositions that keep original fibers.
//!
//! The crate provides:
//!
//! * [`DenseTensor`] and [`Matrix`], column-major 64-bit storage with the
//!   usual multilinear operations (unfold, fold, mode product, norms);
//! * [`kernels`], the matrix primitives the decompositions are built from:
//!   seeded Gaussian test matrices, truncated pivoted QR column selection,
//!   a one-sided Jacobi thin SVD and a QR-based pseudoinverse;
//! * [`decomp`], HOSVD, the higher-order interpolatory decomposition,
//!   the deterministic hybrid decomposition and its randomized variant;
//! * [`analysis`], closed-form evaluation of the probabilistic error bound
//!   for the randomized hybrid decomposition.
//!
//! Modes are numbered from 1 at the API surface (`mode_mul(&t, &m, 1)` acts
//! on the first index). Column and fiber indices are 0-based.

// `!(x > y)` is used on purpose so that NaN falls into the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod decomp;
mod error;
pub mod kernels;
mod matrix;
mod tensor;

pub use decomp::{
    compute_core, hoid, hosvd, hybrid, randomized_hybrid, reconstruct, Factor, FactorKind,
    SketchConfig, TuckerModel,
};
pub use error::{Error, Result};
pub use matrix::Matrix;
pub use tensor::{
    fold, frobenius_norm, mode_mul, relative_error, sketch_unfolding_transposed, unfold,
    unfolding_columns, unfolding_matmul, DenseTensor,
};
