//! Dense linear algebra: norms, matrix measures, pseudoinverses and
//! seminorms induced by surjective maps.

pub mod decomp;
pub mod matrix;
pub mod measure;
pub mod seminorm;

pub use decomp::{
    lambda_max_sym, lambda_min_sym, singular_values, solve, symmetric_eigen, tridiagonal_eigenvalue, SymmetricEigen,
};
pub use matrix::{dot, norm2, DenseMatrix};
pub use measure::{inner_product_bound_check, matrix_measure, matrix_measure_limit, operator_norm, NormKind, Weight};
pub use seminorm::{pseudoinverse, semi_measure, seminorm, SurjectiveMap, RANK_THRESHOLD};
