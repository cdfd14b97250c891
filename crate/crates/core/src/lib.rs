//! Exact construction and verification of factorized rational R-matrices
//! for sl(2) and sl(3) acting on truncated polynomial representations.
//!
//! Everything is computed over the rationals. Operators are tabulated on
//! height-graded monomial bases, composed sparsely, and compared only
//! through zero tests on certified windows.

pub mod error;
pub mod exactnum;
pub mod linop;
pub mod polyspace;
pub mod sl2core;
pub mod sl3core;
pub mod verify;

pub use error::{Error, Result};
pub use exactnum::{gamma_ratio, pochhammer, pochhammer_ratio, rat_arith, ArithOp, Rat};
pub use linop::dense::DenseMatrix;
pub use linop::{is_zero, LaxOp, SparseOp, Witness, ZeroCheck};
pub use polyspace::{enumerate_basis, tensor_basis, GradedBasis, Monomial, Poly, VarSpec};
pub use verify::suite::{run_suite, Mutation, Report, Suite, SuiteConfig};
pub use verify::{CheckResult, Status};
