//! Full-row-rank maps `T`, their Moore–Penrose pseudoinverse, the induced
//! seminorm `‖x‖_T = ‖Tx‖` and the semi-measure `μ(T A T†)`.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::decomp::{singular_values, solve};
use crate::linalg::matrix::DenseMatrix;
use crate::linalg::measure::{matrix_measure, NormKind};
use crate::scalar::Scalar;

/// Relative singular-value threshold below which a map counts as rank deficient.
pub const RANK_THRESHOLD: f64 = 1e-10;

/// `T† = Tᵀ (T Tᵀ)⁻¹` for a full-row-rank `T` (m×n, m ≤ n).
pub fn pseudoinverse<T: Scalar>(t: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    let (m, n) = t.shape();
    if m > n {
        return Err(Error::Dimension(format!("full-row-rank map must be wide or square, got {m}x{n}")));
    }
    let sv = singular_values(t)?;
    let ratio = if sv[0] > T::zero() { sv[m - 1] / sv[0] } else { T::zero() };
    if !(ratio > T::tolerance(RANK_THRESHOLD)) {
        return Err(Error::RankDeficient { ratio: ratio.to_f64_lossy(), threshold: RANK_THRESHOLD });
    }
    let gram = t.try_mul(&t.transpose())?;
    // (T Tᵀ) Y = T  ⇒  Y = (T Tᵀ)⁻¹ T and T† = Yᵀ since the Gram matrix is symmetric.
    Ok(solve(&gram, t)?.transpose())
}

/// A surjective linear map with its pseudoinverse and the projector onto
/// its kernel, `I − T†T`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurjectiveMap<T> {
    t: DenseMatrix<T>,
    t_dagger: DenseMatrix<T>,
    projector_ker: DenseMatrix<T>,
}

impl<T: Scalar> SurjectiveMap<T> {
    pub fn new(t: DenseMatrix<T>) -> Result<Self> {
        let t_dagger = pseudoinverse(&t)?;
        let n = t.cols();
        let m = t.rows();
        let projector_ker = DenseMatrix::<T>::identity(n).try_sub(&t_dagger.try_mul(&t)?)?;

        let tol = T::tolerance(1e-9);
        let scale = T::one() + t.max_abs() * t_dagger.max_abs();
        let right_inverse = t.try_mul(&t_dagger)?.max_abs_diff(&DenseMatrix::identity(m));
        if right_inverse > tol * scale {
            return Err(Error::RankDeficient { ratio: right_inverse.to_f64_lossy(), threshold: RANK_THRESHOLD });
        }
        Ok(Self { t, t_dagger, projector_ker })
    }

    pub fn identity(n: usize) -> Self {
        Self::new(DenseMatrix::identity(n)).expect("identity is surjective")
    }

    pub fn matrix(&self) -> &DenseMatrix<T> {
        &self.t
    }

    pub fn pseudoinverse(&self) -> &DenseMatrix<T> {
        &self.t_dagger
    }

    pub fn projector_ker(&self) -> &DenseMatrix<T> {
        &self.projector_ker
    }

    /// Dimension of the domain (columns of `T`).
    pub fn domain_dim(&self) -> usize {
        self.t.cols()
    }

    /// Dimension of the codomain (rows of `T`).
    pub fn range_dim(&self) -> usize {
        self.t.rows()
    }

    pub fn apply(&self, x: &[T]) -> Result<Vec<T>> {
        self.t.try_mul_vec(x)
    }

    /// `T A T†`.
    pub fn reduce(&self, a: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        self.t.try_mul(a)?.try_mul(&self.t_dagger)
    }

    /// `⟨x, y⟩_T = ⟨Tx, Ty⟩` under `norm` on the codomain.
    pub fn semi_inner(&self, x: &[T], y: &[T], norm: &NormKind<T>) -> Result<T> {
        norm.inner(&self.apply(x)?, &self.apply(y)?)
    }
}

impl<T: Scalar> Serialize for SurjectiveMap<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.t.serialize(s)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for SurjectiveMap<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let t = DenseMatrix::<T>::deserialize(d)?;
        SurjectiveMap::new(t).map_err(serde::de::Error::custom)
    }
}

/// `‖Tx‖` under an inner-product norm on the codomain.
pub fn seminorm<T: Scalar>(x: &[T], map: &SurjectiveMap<T>, norm: &NormKind<T>) -> Result<T> {
    norm.require_inner_product()?;
    if x.len() != map.domain_dim() {
        return Err(Error::Dimension(format!(
            "vector of length {} for a map with {} columns",
            x.len(),
            map.domain_dim()
        )));
    }
    norm.vector_norm(&map.apply(x)?)
}

/// `μ_T(A) = μ(T A T†)`.
pub fn semi_measure<T: Scalar>(a: &DenseMatrix<T>, map: &SurjectiveMap<T>, norm: &NormKind<T>) -> Result<T> {
    if !a.is_square() || a.rows() != map.domain_dim() {
        return Err(Error::Dimension(format!("matrix {:?} for a map with {} columns", a.shape(), map.domain_dim())));
    }
    matrix_measure(&map.reduce(a)?, norm)
}
