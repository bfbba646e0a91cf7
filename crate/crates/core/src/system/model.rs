use std::fmt;
use std::sync::Arc;

use rand::{Rng, RngExt};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::scalar::Scalar;

pub type FieldFn<T> = Arc<dyn Fn(T, &[T]) -> Vec<T> + Send + Sync>;
pub type JacobianFn<T> = Arc<dyn Fn(T, &[T]) -> DenseMatrix<T> + Send + Sync>;
pub type MatrixFn<T> = Arc<dyn Fn(T) -> DenseMatrix<T> + Send + Sync>;

/// Axis-aligned region a model is certified on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SampleBox<T> {
    pub lower: Vec<T>,
    pub upper: Vec<T>,
}

impl<T: Scalar> SampleBox<T> {
    pub fn new(lower: Vec<T>, upper: Vec<T>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::Dimension(format!("sample box bounds of length {} and {}", lower.len(), upper.len())));
        }
        for (i, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            if !lo.is_finite() || !hi.is_finite() || lo > hi {
                return Err(Error::InvalidParameter(format!(
                    "sample box coordinate {i}: [{lo}, {hi}] is not a finite interval"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The cube `[-r, r]^dim`.
    pub fn cube(dim: usize, r: T) -> Self {
        Self::new(vec![-r; dim], vec![r; dim]).expect("valid cube")
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, x: &[T], slack: T) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&v, (&lo, &hi))| v >= lo - slack && v <= hi + slack)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<T> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&lo, &hi)| {
                let u = T::of(rng.random::<f64>());
                lo + (hi - lo) * u
            })
            .collect()
    }
}

/// An evaluatable vector field `F(t, x)` on ℝⁿ, optionally with an analytic
/// Jacobian. Cheap to clone; the closures are shared.
#[derive(Clone)]
pub struct VectorFieldModel<T> {
    name: String,
    dim: usize,
    eval: FieldFn<T>,
    jacobian: Option<JacobianFn<T>>,
    time_invariant: bool,
    sample_box: SampleBox<T>,
    linear_part: Option<DenseMatrix<T>>,
}

impl<T: Scalar> VectorFieldModel<T> {
    /// A time-invariant model without Jacobian; see the `with_*` builders.
    pub fn new(
        name: impl Into<String>,
        sample_box: SampleBox<T>,
        eval: impl Fn(T, &[T]) -> Vec<T> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            dim: sample_box.dim(),
            eval: Arc::new(eval),
            jacobian: None,
            time_invariant: true,
            sample_box,
            linear_part: None,
        }
    }

    pub fn with_jacobian(mut self, jacobian: impl Fn(T, &[T]) -> DenseMatrix<T> + Send + Sync + 'static) -> Self {
        self.jacobian = Some(Arc::new(jacobian));
        self
    }

    pub fn time_varying(mut self) -> Self {
        self.time_invariant = false;
        self
    }

    /// `F(x) = A x`.
    pub fn linear(name: impl Into<String>, a: DenseMatrix<T>, sample_box: SampleBox<T>) -> Result<Self> {
        if !a.is_square() || a.rows() != sample_box.dim() {
            return Err(Error::Dimension(format!(
                "linear field matrix {:?} on a {}-dimensional box",
                a.shape(),
                sample_box.dim()
            )));
        }
        let (jac, part) = (a.clone(), a.clone());
        let mut model =
            Self::new(name, sample_box, move |_, x| a.try_mul_vec(x).expect("dimension checked at construction"))
                .with_jacobian(move |_, _| jac.clone());
        model.linear_part = Some(part);
        Ok(model)
    }

    /// `A` when the model was built by [`VectorFieldModel::linear`].
    pub fn as_linear(&self) -> Option<&DenseMatrix<T>> {
        self.linear_part.as_ref()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_time_invariant(&self) -> bool {
        self.time_invariant
    }

    pub fn sample_box(&self) -> &SampleBox<T> {
        &self.sample_box
    }

    pub fn has_analytic_jacobian(&self) -> bool {
        self.jacobian.is_some()
    }

    /// Evaluates `F(t, x)`, rejecting wrong lengths and non-finite output.
    pub fn eval(&self, t: T, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.dim {
            return Err(Error::Dimension(format!(
                "{}: state of length {} for a {}-dimensional model",
                self.name,
                x.len(),
                self.dim
            )));
        }
        let fx = (self.eval)(t, x);
        if fx.len() != self.dim {
            return Err(evaluation_error(t, x, format!("output has length {}", fx.len())));
        }
        if let Some(i) = fx.iter().position(|v| !v.is_finite()) {
            return Err(evaluation_error(t, x, format!("component {i} is {}", fx[i])));
        }
        Ok(fx)
    }

    /// Like [`eval`](Self::eval) but lets non-finite output through, so an
    /// integrator can report where a trajectory blew up.
    pub(crate) fn eval_raw(&self, t: T, x: &[T]) -> Result<Vec<T>> {
        let fx = (self.eval)(t, x);
        if x.len() != self.dim || fx.len() != self.dim {
            return Err(evaluation_error(t, x, format!("length mismatch for {}", self.name)));
        }
        Ok(fx)
    }

    pub fn analytic_jacobian(&self, t: T, x: &[T]) -> Option<Result<DenseMatrix<T>>> {
        let jac = self.jacobian.as_ref()?;
        let m = jac(t, x);
        Some(if m.shape() != (self.dim, self.dim) {
            Err(evaluation_error(t, x, format!("Jacobian has shape {:?}", m.shape())))
        } else if !m.is_finite() {
            Err(evaluation_error(t, x, "Jacobian has non-finite entries".into()))
        } else {
            Ok(m)
        })
    }

    /// Analytic Jacobian when present, central differences otherwise.
    pub fn jacobian(&self, t: T, x: &[T]) -> Result<DenseMatrix<T>> {
        match self.analytic_jacobian(t, x) {
            Some(j) => j,
            None => jacobian_fd(self, t, x, default_fd_step(x)),
        }
    }
}

impl<T: fmt::Debug> fmt::Debug for VectorFieldModel<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorFieldModel")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("analytic_jacobian", &self.jacobian.is_some())
            .field("time_invariant", &self.time_invariant)
            .field("sample_box", &self.sample_box)
            .finish()
    }
}

fn evaluation_error<T: Scalar>(t: T, x: &[T], reason: String) -> Error {
    Error::Evaluation { t: t.to_f64_lossy(), x: x.iter().map(|v| v.to_f64_lossy()).collect(), reason }
}

/// `h = 1e-6 · (1 + ‖x‖∞)`.
pub fn default_fd_step<T: Scalar>(x: &[T]) -> T {
    let inf = x.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let base = T::of(1e-6).max(T::epsilon().sqrt());
    base * (T::one() + inf)
}

/// Central-difference Jacobian; column `j` is `(F(x + h e_j) − F(x − h e_j)) / 2h`.
pub fn jacobian_fd<T: Scalar>(model: &VectorFieldModel<T>, t: T, x: &[T], h: T) -> Result<DenseMatrix<T>> {
    if !(h > T::zero()) || !h.is_finite() {
        return Err(Error::InvalidParameter(format!("finite-difference step must be positive, got {h}")));
    }
    if !model.sample_box().contains(x, h) {
        return Err(Error::InvalidParameter(format!(
            "{}: point {:?} lies outside the sample box inflated by h",
            model.name(),
            x.iter().map(|v| v.to_f64_lossy()).collect::<Vec<_>>()
        )));
    }
    let n = model.dim();
    let mut jac = DenseMatrix::zeros(n, n);
    let mut probe = x.to_vec();
    let two_h = h + h;
    for j in 0..n {
        probe[j] = x[j] + h;
        let plus = model.eval(t, &probe)?;
        probe[j] = x[j] - h;
        let minus = model.eval(t, &probe)?;
        probe[j] = x[j];
        for i in 0..n {
            jac[(i, j)] = (plus[i] - minus[i]) / two_h;
        }
    }
    Ok(jac)
}

/// Linear time-varying system `ẋ = A(t) x`.
#[derive(Clone)]
pub struct LtvSystem<T> {
    name: String,
    dim: usize,
    a_of_t: MatrixFn<T>,
    sample_box: SampleBox<T>,
}

impl<T: Scalar> LtvSystem<T> {
    pub fn new(
        name: impl Into<String>,
        sample_box: SampleBox<T>,
        a_of_t: impl Fn(T) -> DenseMatrix<T> + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.into(), dim: sample_box.dim(), a_of_t: Arc::new(a_of_t), sample_box }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix_at(&self, t: T) -> Result<DenseMatrix<T>> {
        let a = (self.a_of_t)(t);
        if a.shape() != (self.dim, self.dim) {
            return Err(Error::Dimension(format!("A({t}) has shape {:?}", a.shape())));
        }
        if !a.is_finite() {
            return Err(Error::NonFinite(format!("A({t}) has non-finite entries")));
        }
        Ok(a)
    }

    /// The same dynamics as a (time-varying) vector field with Jacobian `A(t)`.
    pub fn to_model(&self) -> VectorFieldModel<T> {
        let a_eval = Arc::clone(&self.a_of_t);
        let a_jac = Arc::clone(&self.a_of_t);
        VectorFieldModel::new(self.name.clone(), self.sample_box.clone(), move |t, x| {
            a_eval(t).try_mul_vec(x).unwrap_or_else(|_| vec![T::nan(); x.len()])
        })
        .with_jacobian(move |t, _| a_jac(t))
        .time_varying()
    }
}

impl<T> fmt::Debug for LtvSystem<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LtvSystem").field("name", &self.name).field("dim", &self.dim).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn linear_models_expose_their_matrix() {
        let a = DenseMatrix::from_rows(&[[-1.0, 2.0], [0.0, -3.0]]).unwrap();
        let m = VectorFieldModel::linear("lin", a.clone(), SampleBox::cube(2, 1.0)).unwrap();
        assert_eq!(m.as_linear(), Some(&a));
        let sq = VectorFieldModel::new("sq", SampleBox::cube(1, 1.0), |_, x: &[f64]| vec![x[0] * x[0]]);
        assert!(sq.as_linear().is_none());
    }

    #[test]
    fn fd_jacobian_examples() {
        let neg = VectorFieldModel::new("neg", SampleBox::cube(2, 5.0), |_, x: &[f64]| x.iter().map(|v| -v).collect());
        let j = jacobian_fd(&neg, 0.0, &[0.3, -1.2], 1e-5).unwrap();
        assert!(j.max_abs_diff(&DenseMatrix::identity(2).scale(-1.0)) < 1e-9);

        let rot = VectorFieldModel::new("rot", SampleBox::cube(2, 5.0), |_, x: &[f64]| vec![x[1], -x[0]]);
        let j = jacobian_fd(&rot, 0.0, &[1.0, 1.0], 1e-5).unwrap();
        let expect = DenseMatrix::from_rows(&[[0.0, 1.0], [-1.0, 0.0]]).unwrap();
        assert!(j.max_abs_diff(&expect) < 1e-9);

        let sq = VectorFieldModel::new("sq", SampleBox::cube(2, 5.0), |_, x: &[f64]| vec![x[0] * x[0], 0.0]);
        let j = jacobian_fd(&sq, 0.0, &[3.0, 0.0], 1e-4).unwrap();
        assert_abs_diff_eq!(j[(0, 0)], 6.0, epsilon = 1e-6);
        assert_abs_diff_eq!(j[(1, 1)], 0.0, epsilon = 1e-6);
    }

    #[test]
    fn fd_reports_non_finite_evaluation() {
        let blowup = VectorFieldModel::new("blowup", SampleBox::cube(1, 1.0), |_, x: &[f64]| vec![1.0 / x[0]]);
        match jacobian_fd(&blowup, 0.0, &[1e-7], 1e-7) {
            Err(Error::Evaluation { x, .. }) => assert_eq!(x.len(), 1),
            other => panic!("expected evaluation error, got {other:?}"),
        }
        assert!(matches!(jacobian_fd(&blowup, 0.0, &[0.5], 0.0), Err(Error::InvalidParameter(_))));
        assert!(matches!(jacobian_fd(&blowup, 0.0, &[3.0], 1e-6), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn eval_checks_lengths() {
        let bad = VectorFieldModel::new("bad", SampleBox::cube(2, 1.0), |_, _x: &[f64]| vec![0.0]);
        assert!(matches!(bad.eval(0.0, &[0.0, 0.0]), Err(Error::Evaluation { .. })));
        assert!(matches!(bad.eval(0.0, &[0.0]), Err(Error::Dimension(_))));
    }

    #[test]
    fn sample_box_validation() {
        assert!(SampleBox::new(vec![1.0], vec![0.0]).is_err());
        assert!(SampleBox::<f64>::new(vec![], vec![]).is_err());
        assert!(SampleBox::new(vec![0.0, 0.0], vec![1.0]).is_err());
    }
}
