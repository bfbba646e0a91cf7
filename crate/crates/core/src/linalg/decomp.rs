//! Dense decompositions used by the measure and seminorm routines.
//!
//! Everything here is deterministic: fixed sweep order, no randomized
//! pivoting, so repeated runs produce bitwise-identical results.

use crate::error::{Error, Result};
use crate::linalg::matrix::DenseMatrix;
use crate::scalar::Scalar;

const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymmetricEigen<T> {
    /// Eigenvalues in ascending order.
    pub values: Vec<T>,
    /// Column `k` is the unit eigenvector for `values[k]`.
    pub vectors: DenseMatrix<T>,
}

/// Cyclic Jacobi eigen-solver. Only the symmetric part of `a` is used.
pub fn symmetric_eigen<T: Scalar>(a: &DenseMatrix<T>) -> Result<SymmetricEigen<T>> {
    if !a.is_square() {
        return Err(Error::Dimension(format!("eigen-solve of {:?} matrix", a.shape())));
    }
    let n = a.rows();
    let mut m = a.symmetric_part();
    let mut v = DenseMatrix::<T>::identity(n);
    let two = T::of(2.0);

    let mut converged = n == 1;
    for _ in 0..MAX_SWEEPS {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum();
        let scale: T = (0..n).map(|i| m[(i, i)] * m[(i, i)]).sum::<T>() + off;
        if off <= T::epsilon() * T::epsilon() * scale || off == T::zero() {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                let theta = (aqq - app) / (two * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                m[(p, q)] = T::zero();
                m[(q, p)] = T::zero();
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::Eigen(format!("Jacobi sweeps exhausted for n = {n}")));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].partial_cmp(&m[(j, j)]).expect("finite eigenvalues"));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let vectors = DenseMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(SymmetricEigen { values, vectors })
}

pub fn lambda_max_sym<T: Scalar>(a: &DenseMatrix<T>) -> Result<T> {
    let eig = symmetric_eigen(a)?;
    Ok(*eig.values.last().expect("non-empty spectrum"))
}

pub fn lambda_min_sym<T: Scalar>(a: &DenseMatrix<T>) -> Result<T> {
    let eig = symmetric_eigen(a)?;
    Ok(eig.values[0])
}

/// `k`-th smallest eigenvalue (0-based) of the symmetric tridiagonal matrix
/// with diagonal `diag` and off-diagonal `off` (`off.len() == diag.len() - 1`),
/// by Sturm-sequence bisection.
pub fn tridiagonal_eigenvalue<T: Scalar>(diag: &[T], off: &[T], k: usize) -> Result<T> {
    let n = diag.len();
    if n == 0 || off.len() + 1 != n || k >= n {
        return Err(Error::Dimension(format!(
            "tridiagonal eigenvalue {k} of size {n} with {} off-diagonals",
            off.len()
        )));
    }
    // Gershgorin interval.
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    for i in 0..n {
        let r = if i > 0 { off[i - 1].abs() } else { T::zero() } + if i + 1 < n { off[i].abs() } else { T::zero() };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    let span = (hi - lo).max(T::one());
    lo = lo - span * T::epsilon();
    hi = hi + span * T::epsilon();

    // Number of eigenvalues strictly below x.
    let count_below = |x: T| -> usize {
        let tiny = T::min_positive_value();
        let mut count = 0;
        let mut d = T::one();
        for i in 0..n {
            let b2 = if i > 0 { off[i - 1] * off[i - 1] } else { T::zero() };
            d = diag[i] - x - if i > 0 { b2 / d } else { T::zero() };
            if d.abs() < tiny {
                d = -tiny;
            }
            if d < T::zero() {
                count += 1;
            }
        }
        count
    };

    for _ in 0..200 {
        let mid = lo + (hi - lo) * T::of(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_below(mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(lo + (hi - lo) * T::of(0.5))
}

/// Singular values in descending order via one-sided Jacobi rotations.
pub fn singular_values<T: Scalar>(a: &DenseMatrix<T>) -> Result<Vec<T>> {
    // Orthogonalize the columns of the taller orientation.
    let work = if a.rows() >= a.cols() { a.clone() } else { a.transpose() };
    let (m, n) = work.shape();
    let mut cols: Vec<Vec<T>> = (0..n).map(|j| (0..m).map(|i| work[(i, j)]).collect()).collect();
    let two = T::of(2.0);
    let tol = T::epsilon();

    let mut converged = n == 1;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha: T = cols[p].iter().map(|&x| x * x).sum();
                let beta: T = cols[q].iter().map(|&x| x * x).sum();
                let gamma: T = cols[p].iter().zip(&cols[q]).map(|(&x, &y)| x * y).sum();
                if gamma == T::zero() || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (two * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                let (left, right) = cols.split_at_mut(q);
                for (x, y) in left[p].iter_mut().zip(right[0].iter_mut()) {
                    let xp = *x;
                    let yq = *y;
                    *x = c * xp - s * yq;
                    *y = s * xp + c * yq;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Eigen(format!("one-sided Jacobi SVD did not converge ({m}x{n})")));
    }
    let mut sv: Vec<T> = cols.iter().map(|c| c.iter().map(|&x| x * x).sum::<T>().sqrt()).collect();
    sv.sort_by(|a, b| b.partial_cmp(a).expect("finite singular values"));
    Ok(sv)
}

/// Solves `A X = B` by LU decomposition with partial pivoting.
pub fn solve<T: Scalar>(a: &DenseMatrix<T>, b: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    if !a.is_square() || a.rows() != b.rows() {
        return Err(Error::Dimension(format!("solve with A {:?} and B {:?}", a.shape(), b.shape())));
    }
    let n = a.rows();
    let mut lu = a.clone();
    let mut x = b.clone();
    let scale = a.max_abs().max(T::min_positive_value());
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| lu[(i, col)].abs().partial_cmp(&lu[(j, col)].abs()).expect("finite entries"))
            .expect("non-empty range");
        if lu[(pivot, col)].abs() <= T::epsilon() * scale {
            return Err(Error::InvalidParameter("singular matrix in linear solve".into()));
        }
        if pivot != col {
            for j in 0..n {
                let tmp = lu[(col, j)];
                lu[(col, j)] = lu[(pivot, j)];
                lu[(pivot, j)] = tmp;
            }
            for j in 0..x.cols() {
                let tmp = x[(col, j)];
                x[(col, j)] = x[(pivot, j)];
                x[(pivot, j)] = tmp;
            }
        }
        for i in (col + 1)..n {
            let factor = lu[(i, col)] / lu[(col, col)];
            if factor == T::zero() {
                continue;
            }
            for j in col..n {
                lu[(i, j)] = lu[(i, j)] - factor * lu[(col, j)];
            }
            for j in 0..x.cols() {
                x[(i, j)] = x[(i, j)] - factor * x[(col, j)];
            }
        }
    }
    for col in (0..n).rev() {
        for j in 0..x.cols() {
            let mut acc = x[(col, j)];
            for k in (col + 1)..n {
                acc = acc - lu[(col, k)] * x[(k, j)];
            }
            x[(col, j)] = acc / lu[(col, col)];
        }
    }
    Ok(x)
}
