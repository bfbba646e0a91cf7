use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::rk4::{rk4_drive, TimeGrid};
use crate::linalg::{matrix::sub, NormKind};
use crate::scalar::Scalar;
use crate::system::VectorFieldModel;

/// Flow-map iteration settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumOptions<T> {
    /// Period of the flow map that is iterated.
    pub tau: T,
    pub dt: T,
    pub max_iters: usize,
}

impl<T: Scalar> Default for EquilibriumOptions<T> {
    fn default() -> Self {
        Self { tau: T::one(), dt: T::of(1e-3), max_iters: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Equilibrium<T> {
    pub point: Vec<T>,
    pub iterations: usize,
    /// `‖Φ_τ(x_{k−1}) − x_{k−1}‖` for the final iterate.
    pub last_step: T,
    /// `e^{−cτ}/(1 − e^{−cτ})·last_step`, a bound on the distance to the
    /// true equilibrium when the rate `c` is valid.
    pub error_bound: T,
    /// `‖F(point)‖`.
    pub residual: T,
}

/// Locates the equilibrium of a contracting time-invariant field with
/// default [`EquilibriumOptions`].
pub fn find_equilibrium<T: Scalar>(
    model: &VectorFieldModel<T>,
    x_start: &[T],
    rate: T,
    norm: &NormKind<T>,
    tol: T,
) -> Result<Equilibrium<T>> {
    find_equilibrium_with(model, x_start, rate, norm, tol, &EquilibriumOptions::default())
}

/// Iterates the time-`τ` flow map from `x_start` until successive iterates
/// are closer than `tol` and `‖F(x)‖ ≤ tol·(1 + ‖x‖)`.
pub fn find_equilibrium_with<T: Scalar>(
    model: &VectorFieldModel<T>,
    x_start: &[T],
    rate: T,
    norm: &NormKind<T>,
    tol: T,
    opts: &EquilibriumOptions<T>,
) -> Result<Equilibrium<T>> {
    if !model.is_time_invariant() {
        return Err(Error::InvalidParameter(format!("{} is time-varying", model.name())));
    }
    if !(rate > T::zero()) || !(tol > T::zero()) {
        return Err(Error::InvalidParameter(format!("rate and tol must be positive, got {rate} and {tol}")));
    }
    let grid = TimeGrid::new(T::zero(), opts.tau, opts.dt)?;
    if grid.steps() == 0 {
        return Err(Error::InvalidParameter("tau must be positive".into()));
    }
    let factor = (-rate * opts.tau).exp();
    let mut x = x_start.to_vec();
    let mut last_step = T::infinity();
    for iteration in 1..=opts.max_iters {
        let next = rk4_drive(model, &x, &grid, |_, _, _| Ok(()))?;
        last_step = norm.vector_norm(&sub(&next, &x))?;
        x = next;
        if last_step < tol {
            let residual = norm.vector_norm(&model.eval(T::zero(), &x)?)?;
            if residual <= tol * (T::one() + norm.vector_norm(&x)?) {
                return Ok(Equilibrium {
                    point: x,
                    iterations: iteration,
                    last_step,
                    error_bound: factor / (T::one() - factor) * last_step,
                    residual,
                });
            }
        }
    }
    Err(Error::NonConvergence { iterations: opts.max_iters, last_step: last_step.to_f64_lossy() })
}
