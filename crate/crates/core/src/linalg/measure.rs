//! Vector norms, induced operator norms and matrix measures (logarithmic
//! norms) for the 1-, 2-, ∞- and weighted 2-norm.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::decomp::{lambda_max_sym, singular_values, symmetric_eigen};
use crate::linalg::matrix::{dot, DenseMatrix};
use crate::scalar::Scalar;

/// Symmetric positive-definite weight `P` with its square root and inverse
/// square root precomputed. Induces `‖x‖_P = ‖P^{1/2} x‖₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct Weight<T> {
    p: DenseMatrix<T>,
    sqrt: DenseMatrix<T>,
    inv_sqrt: DenseMatrix<T>,
    lambda_max: T,
}

impl<T: Scalar> Weight<T> {
    pub fn new(p: DenseMatrix<T>) -> Result<Self> {
        if !p.is_square() {
            return Err(Error::InvalidWeight(format!("weight has shape {:?}", p.shape())));
        }
        if !p.is_symmetric(T::tolerance(1e-10)) {
            return Err(Error::InvalidWeight("weight is not symmetric".into()));
        }
        let eig = symmetric_eigen(&p)?;
        let lmin = eig.values[0];
        if lmin <= T::zero() {
            return Err(Error::InvalidWeight(format!("weight is not positive definite (smallest eigenvalue {lmin})")));
        }
        let n = p.rows();
        let spectral = |g: &dyn Fn(T) -> T| {
            DenseMatrix::from_fn(n, n, |i, j| {
                (0..n).fold(T::zero(), |acc, k| acc + eig.vectors[(i, k)] * g(eig.values[k]) * eig.vectors[(j, k)])
            })
        };
        let sqrt = spectral(&|l| l.sqrt());
        let inv_sqrt = spectral(&|l| T::one() / l.sqrt());
        let lambda_max = *eig.values.last().expect("non-empty");
        Ok(Self { p, sqrt, inv_sqrt, lambda_max })
    }

    pub fn matrix(&self) -> &DenseMatrix<T> {
        &self.p
    }

    pub fn sqrt(&self) -> &DenseMatrix<T> {
        &self.sqrt
    }

    pub fn inv_sqrt(&self) -> &DenseMatrix<T> {
        &self.inv_sqrt
    }

    pub fn lambda_max(&self) -> T {
        self.lambda_max
    }

    pub fn dim(&self) -> usize {
        self.p.rows()
    }

    /// `P^{1/2} A P^{-1/2}`.
    fn similarity(&self, a: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        self.sqrt.try_mul(a)?.try_mul(&self.inv_sqrt)
    }
}

/// The norm on ℝⁿ a measure or seminorm is taken with respect to.
#[derive(Debug, Clone, PartialEq)]
pub enum NormKind<T> {
    One,
    Two,
    Inf,
    WeightedTwo(Weight<T>),
}

impl<T: Scalar> NormKind<T> {
    pub fn weighted_two(p: DenseMatrix<T>) -> Result<Self> {
        Weight::new(p).map(NormKind::WeightedTwo)
    }

    pub fn is_inner_product(&self) -> bool {
        matches!(self, NormKind::Two | NormKind::WeightedTwo(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            NormKind::One => "one",
            NormKind::Two => "two",
            NormKind::Inf => "inf",
            NormKind::WeightedTwo(_) => "weighted-two",
        }
    }

    fn check_dim(&self, n: usize) -> Result<()> {
        match self {
            NormKind::WeightedTwo(w) if w.dim() != n => {
                Err(Error::Dimension(format!("weight is {}x{} but the space has dimension {n}", w.dim(), w.dim())))
            }
            _ => Ok(()),
        }
    }

    pub fn vector_norm(&self, x: &[T]) -> Result<T> {
        self.check_dim(x.len())?;
        Ok(match self {
            NormKind::One => x.iter().map(|v| v.abs()).sum(),
            NormKind::Two => dot(x, x).sqrt(),
            NormKind::Inf => x.iter().fold(T::zero(), |m, v| m.max(v.abs())),
            NormKind::WeightedTwo(w) => dot(x, &w.p.try_mul_vec(x)?).max(T::zero()).sqrt(),
        })
    }

    /// Inner product inducing this norm; errors for the 1- and ∞-norm.
    pub fn inner(&self, x: &[T], y: &[T]) -> Result<T> {
        if x.len() != y.len() {
            return Err(Error::Dimension(format!("inner product of vectors of length {} and {}", x.len(), y.len())));
        }
        self.check_dim(x.len())?;
        match self {
            NormKind::Two => Ok(dot(x, y)),
            NormKind::WeightedTwo(w) => Ok(dot(x, &w.p.try_mul_vec(y)?)),
            _ => Err(Error::InvalidParameter(format!("the {}-norm is not induced by an inner product", self.label()))),
        }
    }

    pub fn require_inner_product(&self) -> Result<()> {
        if self.is_inner_product() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "an inner-product norm (two or weighted-two) is required, got {}",
                self.label()
            )))
        }
    }
}

impl<T: Scalar> Serialize for NormKind<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            NormKind::WeightedTwo(w) => {
                #[derive(Serialize)]
                struct Weighted<'a, T: Scalar> {
                    weighted_two: &'a DenseMatrix<T>,
                }
                Weighted { weighted_two: &w.p }.serialize(s)
            }
            other => s.serialize_str(other.label()),
        }
    }
}

/// Accepts `"one"`, `"two"`, `"inf"` or `{"weighted_two": [[..]]}`.
impl<'de, T: Scalar> Deserialize<'de> for NormKind<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr<T: Scalar> {
            Tag(String),
            Weighted {
                #[serde(bound = "T: Scalar")]
                weighted_two: DenseMatrix<T>,
            },
        }
        match Repr::<T>::deserialize(d)? {
            Repr::Tag(tag) => match tag.as_str() {
                "one" | "1" => Ok(NormKind::One),
                "two" | "2" => Ok(NormKind::Two),
                "inf" | "infinity" => Ok(NormKind::Inf),
                other => Err(serde::de::Error::custom(format!(
                    "unknown norm {other:?} (expected one, two, inf or {{\"weighted_two\": P}})"
                ))),
            },
            Repr::Weighted { weighted_two } => NormKind::weighted_two(weighted_two).map_err(serde::de::Error::custom),
        }
    }
}

fn require_square<T: Scalar>(a: &DenseMatrix<T>) -> Result<()> {
    if a.is_square() {
        Ok(())
    } else {
        Err(Error::Dimension(format!("expected a square matrix, got {:?}", a.shape())))
    }
}

/// Closed-form matrix measure μ(A).
pub fn matrix_measure<T: Scalar>(a: &DenseMatrix<T>, norm: &NormKind<T>) -> Result<T> {
    require_square(a)?;
    norm.check_dim(a.rows())?;
    let n = a.rows();
    match norm {
        NormKind::One => Ok((0..n)
            .map(|j| a[(j, j)] + (0..n).filter(|&i| i != j).map(|i| a[(i, j)].abs()).sum::<T>())
            .fold(T::neg_infinity(), T::max)),
        NormKind::Inf => Ok((0..n)
            .map(|i| a[(i, i)] + (0..n).filter(|&j| j != i).map(|j| a[(i, j)].abs()).sum::<T>())
            .fold(T::neg_infinity(), T::max)),
        NormKind::Two => lambda_max_sym(a),
        NormKind::WeightedTwo(w) => lambda_max_sym(&w.similarity(a)?),
    }
}

/// Operator norm induced by `norm` (spectral norm for the 2-norms).
pub fn operator_norm<T: Scalar>(a: &DenseMatrix<T>, norm: &NormKind<T>) -> Result<T> {
    match norm {
        NormKind::One => {
            Ok((0..a.cols()).map(|j| (0..a.rows()).map(|i| a[(i, j)].abs()).sum::<T>()).fold(T::zero(), T::max))
        }
        NormKind::Inf => Ok((0..a.rows()).map(|i| a.row(i).iter().map(|v| v.abs()).sum::<T>()).fold(T::zero(), T::max)),
        NormKind::Two => Ok(singular_values(a)?[0]),
        NormKind::WeightedTwo(w) => {
            require_square(a)?;
            norm.check_dim(a.rows())?;
            Ok(singular_values(&w.similarity(a)?)?[0])
        }
    }
}

/// One-sided difference quotient `(‖I + hA‖ − 1)/h` from the limit
/// definition of the measure.
pub fn matrix_measure_limit<T: Scalar>(a: &DenseMatrix<T>, norm: &NormKind<T>, h: T) -> Result<T> {
    if !(h > T::zero()) || !h.is_finite() {
        return Err(Error::InvalidParameter(format!("step h must be positive, got {h}")));
    }
    require_square(a)?;
    norm.check_dim(a.rows())?;
    let n = a.rows();
    // For the weighted norm, ‖I + hA‖_P = ‖I + h P^{1/2} A P^{-1/2}‖₂.
    let (base, inner) = match norm {
        NormKind::WeightedTwo(w) => (w.similarity(a)?, NormKind::Two),
        other => (a.clone(), other.clone()),
    };
    let shifted = DenseMatrix::from_fn(n, n, |i, j| {
        let id = if i == j { T::one() } else { T::zero() };
        id + h * base[(i, j)]
    });
    Ok((operator_norm(&shifted, &inner)? - T::one()) / h)
}

/// `μ(A)⟨x, x⟩ − ⟨x, Ax⟩`, nonnegative for every inner-product norm.
pub fn inner_product_bound_check<T: Scalar>(a: &DenseMatrix<T>, x: &[T], norm: &NormKind<T>) -> Result<T> {
    norm.require_inner_product()?;
    let mu = matrix_measure(a, norm)?;
    let ax = a.try_mul_vec(x)?;
    Ok(mu * norm.inner(x, x)? - norm.inner(x, &ax)?)
}
