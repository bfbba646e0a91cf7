//! Built-in test systems addressable by name.

use crate::error::{Error, Result};
use crate::linalg::{matrix_measure, DenseMatrix, NormKind};
use crate::scalar::Scalar;
use crate::system::model::{LtvSystem, SampleBox, VectorFieldModel};

pub const CATALOG_NAMES: &[&str] = &[
    "linear",
    "linear_stable",
    "scalar_decay",
    "scalar_growth",
    "rotation_decay",
    "quad_nonsmooth",
    "cubic_decay",
    "ltv_cosine",
];

/// A catalog entry: either a general vector field or a linear time-varying
/// system.
#[derive(Debug, Clone)]
pub enum CatalogSystem<T> {
    Field(VectorFieldModel<T>),
    Ltv(LtvSystem<T>),
}

impl<T: Scalar> CatalogSystem<T> {
    pub fn into_model(self) -> VectorFieldModel<T> {
        match self {
            CatalogSystem::Field(m) => m,
            CatalogSystem::Ltv(l) => l.to_model(),
        }
    }

    pub fn as_ltv(&self) -> Option<&LtvSystem<T>> {
        match self {
            CatalogSystem::Ltv(l) => Some(l),
            CatalogSystem::Field(_) => None,
        }
    }
}

fn default_box<T: Scalar>(dim: usize) -> SampleBox<T> {
    SampleBox::cube(dim, T::of(5.0))
}

/// Looks up a catalog system. `linear` and `linear_stable` take their matrix
/// from `matrix`; `linear_stable` additionally requires `μ₂(A) < 0`.
pub fn builtin_system<T: Scalar>(name: &str, matrix: Option<DenseMatrix<T>>) -> Result<CatalogSystem<T>> {
    let field = |m: VectorFieldModel<T>| Ok(CatalogSystem::Field(m));
    match name {
        "linear" | "linear_stable" => {
            let a = matrix.ok_or_else(|| Error::Config(format!("system {name:?} needs a \"matrix\" parameter")))?;
            if name == "linear_stable" {
                let mu = matrix_measure(&a, &NormKind::Two)?;
                if !(mu < T::zero()) {
                    return Err(Error::Config(format!("linear_stable requires mu_2(A) < 0, got {mu}")));
                }
            }
            let n = a.rows();
            field(VectorFieldModel::linear(name, a, default_box(n))?)
        }
        "scalar_decay" => field(scalar_linear(name, -T::one())),
        "scalar_growth" => field(scalar_linear(name, T::one())),
        "rotation_decay" => {
            let a = DenseMatrix::from_rows(&[[-T::one(), T::one()], [-T::one(), -T::one()]])?;
            field(VectorFieldModel::linear(name, a, default_box(2))?)
        }
        "quad_nonsmooth" => {
            // −x − sat(x): continuous and monotone, but not differentiable at |x_i| = 1.
            field(VectorFieldModel::new(name, SampleBox::cube(2, T::of(3.0)), |_, x: &[T]| {
                x.iter().map(|&v| -v - v.max(-T::one()).min(T::one())).collect()
            }))
        }
        "cubic_decay" => field(
            VectorFieldModel::new(name, SampleBox::cube(1, T::of(2.0)), |_, x: &[T]| {
                vec![-x[0] * x[0] * x[0] - x[0] + T::one()]
            })
            .with_jacobian(|_, x: &[T]| DenseMatrix::from_fn(1, 1, |_, _| -T::of(3.0) * x[0] * x[0] - T::one())),
        ),
        "ltv_cosine" => Ok(CatalogSystem::Ltv(LtvSystem::new(name, default_box(1), |t: T| {
            DenseMatrix::from_fn(1, 1, |_, _| -T::of(2.0) + t.cos())
        }))),
        _ => Err(Error::UnknownSystem {
            name: name.to_string(),
            valid: CATALOG_NAMES.iter().map(|s| s.to_string()).collect(),
        }),
    }
}

fn scalar_linear<T: Scalar>(name: &str, a: T) -> VectorFieldModel<T> {
    VectorFieldModel::new(name, default_box(1), move |_, x: &[T]| vec![a * x[0]])
        .with_jacobian(move |_, _| DenseMatrix::from_fn(1, 1, |_, _| a))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_examples() {
        let m = builtin_system::<f64>("scalar_decay", None).unwrap().into_model();
        assert_eq!(m.dim(), 1);
        assert_eq!(m.eval(0.0, &[2.0]).unwrap(), vec![-2.0]);

        let ltv = builtin_system::<f64>("ltv_cosine", None).unwrap();
        let a0 = ltv.as_ltv().unwrap().matrix_at(0.0).unwrap();
        assert_eq!(a0, DenseMatrix::identity(1).scale(-1.0));

        let rot = builtin_system::<f64>("rotation_decay", None).unwrap().into_model();
        assert_eq!(rot.eval(0.0, &[1.0, 2.0]).unwrap(), vec![1.0, -3.0]);
        let j = rot.jacobian(0.0, &[0.0, 0.0]).unwrap();
        assert!((matrix_measure(&j, &NormKind::Two).unwrap() + 1.0).abs() < 1e-14);
    }

    #[test]
    fn unknown_name_lists_catalog() {
        match builtin_system::<f64>("nope", None) {
            Err(Error::UnknownSystem { valid, .. }) => assert!(valid.contains(&"scalar_decay".to_string())),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn linear_entries_need_a_matrix() {
        assert!(matches!(builtin_system::<f64>("linear", None), Err(Error::Config(_))));
        let unstable = DenseMatrix::identity(2);
        assert!(builtin_system::<f64>("linear_stable", Some(unstable.clone())).is_err());
        assert!(builtin_system::<f64>("linear", Some(unstable)).is_ok());
    }
}
