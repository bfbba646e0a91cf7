//! Sampled checks of the contraction, partial-contraction and
//! semi-contraction sufficient conditions.

use std::collections::BTreeMap;

use rand::RngExt;
use rand_pcg::Pcg32;

use crate::certify::certificate::{settle_margin, verdict_for, Certificate, Condition, Witness};
use crate::certify::sampling::{worst_over_samples, Sampling};
use crate::error::{Error, Result};
use crate::linalg::{matrix::sub, matrix_measure, operator_norm, DenseMatrix, NormKind, SurjectiveMap};
use crate::scalar::Scalar;
use crate::system::{RateFunction, VectorFieldModel};

/// Pairs closer than this (in the relevant (semi)norm) are redrawn.
const DEGENERATE_PAIR: f64 = 1e-12;
const MAX_REDRAWS: usize = 1000;

/// One of the sampled conditions, bound to its inputs.
#[derive(Debug, Clone, Copy)]
pub enum Check<'a, T> {
    OperatorMeasure {
        model: &'a VectorFieldModel<T>,
        rate: &'a RateFunction<T>,
        norm: &'a NormKind<T>,
    },
    IntegralContractivity {
        model: &'a VectorFieldModel<T>,
        rate: &'a RateFunction<T>,
        norm: &'a NormKind<T>,
    },
    IntegralPartial {
        model: &'a VectorFieldModel<T>,
        map: &'a SurjectiveMap<T>,
        rate: &'a RateFunction<T>,
        norm: &'a NormKind<T>,
    },
    IntegralSemi {
        model: &'a VectorFieldModel<T>,
        map: &'a SurjectiveMap<T>,
        rate: &'a RateFunction<T>,
        norm: &'a NormKind<T>,
    },
    SemiMeasureBound {
        model: &'a VectorFieldModel<T>,
        map: &'a SurjectiveMap<T>,
        rate: &'a RateFunction<T>,
        norm: &'a NormKind<T>,
    },
    KernelInvariance {
        model: &'a VectorFieldModel<T>,
        map: &'a SurjectiveMap<T>,
    },
}

impl<'a, T: Scalar> Check<'a, T> {
    pub fn condition(&self) -> Condition {
        match self {
            Check::OperatorMeasure { .. } => Condition::OperatorMeasure,
            Check::IntegralContractivity { .. } => Condition::IntegralContractivity,
            Check::IntegralPartial { .. } => Condition::IntegralPartial,
            Check::IntegralSemi { .. } => Condition::IntegralSemi,
            Check::SemiMeasureBound { .. } => Condition::SemiMeasureBound,
            Check::KernelInvariance { .. } => Condition::KernelInvariance,
        }
    }

    fn model(&self) -> &'a VectorFieldModel<T> {
        match *self {
            Check::OperatorMeasure { model, .. }
            | Check::IntegralContractivity { model, .. }
            | Check::IntegralPartial { model, .. }
            | Check::IntegralSemi { model, .. }
            | Check::SemiMeasureBound { model, .. }
            | Check::KernelInvariance { model, .. } => model,
        }
    }

    fn rate(&self) -> Option<&'a RateFunction<T>> {
        match *self {
            Check::OperatorMeasure { rate, .. }
            | Check::IntegralContractivity { rate, .. }
            | Check::IntegralPartial { rate, .. }
            | Check::IntegralSemi { rate, .. }
            | Check::SemiMeasureBound { rate, .. } => Some(rate),
            Check::KernelInvariance { .. } => None,
        }
    }

    fn validate(&self) -> Result<()> {
        let n = self.model().dim();
        let check_map = |map: &SurjectiveMap<T>| {
            if map.domain_dim() != n {
                Err(Error::Dimension(format!("map has {} columns but the model has dimension {n}", map.domain_dim())))
            } else {
                Ok(())
            }
        };
        let check_norm = |norm: &NormKind<T>, dim: usize| match norm {
            NormKind::WeightedTwo(w) if w.dim() != dim => {
                Err(Error::Dimension(format!("weight is {}x{} on a {dim}-dimensional space", w.dim(), w.dim())))
            }
            _ => Ok(()),
        };
        match *self {
            Check::OperatorMeasure { norm, .. } => check_norm(norm, n),
            Check::IntegralContractivity { norm, .. } => {
                norm.require_inner_product()?;
                check_norm(norm, n)
            }
            Check::IntegralPartial { map, norm, .. } | Check::IntegralSemi { map, norm, .. } => {
                norm.require_inner_product()?;
                check_map(map)?;
                check_norm(norm, map.range_dim())
            }
            Check::SemiMeasureBound { map, norm, .. } => {
                check_map(map)?;
                check_norm(norm, map.range_dim())
            }
            Check::KernelInvariance { map, .. } => check_map(map),
        }
    }

    fn draw(&self, rng: &mut Pcg32, t_probe: T) -> Result<Witness<T>> {
        let model = self.model();
        let bx = model.sample_box();
        let t = t_probe * T::of(rng.random::<f64>());
        let floor = T::of(DEGENERATE_PAIR);
        match *self {
            Check::IntegralContractivity { norm, .. } => {
                for _ in 0..MAX_REDRAWS {
                    let x = bx.sample(rng);
                    let y = bx.sample(rng);
                    if norm.vector_norm(&sub(&x, &y))? >= floor {
                        return Ok(Witness { t, x, y: Some(y) });
                    }
                }
            }
            Check::IntegralSemi { map, norm, .. } => {
                for _ in 0..MAX_REDRAWS {
                    let x = bx.sample(rng);
                    let y = bx.sample(rng);
                    if norm.vector_norm(&map.apply(&sub(&x, &y))?)? >= floor {
                        return Ok(Witness { t, x, y: Some(y) });
                    }
                }
            }
            Check::IntegralPartial { map, norm, .. } => {
                for _ in 0..MAX_REDRAWS {
                    let x = bx.sample(rng);
                    if norm.vector_norm(&map.apply(&x)?)? >= floor {
                        return Ok(Witness { t, x, y: None });
                    }
                }
            }
            _ => return Ok(Witness { t, x: bx.sample(rng), y: None }),
        }
        Err(Error::InvalidParameter(format!("{}: could not draw a non-degenerate sample from the box", model.name())))
    }

    /// Settled margin at a witness, plus an optional diagnostic (the
    /// Jacobian's operator norm for the measure-based checks).
    fn evaluate(&self, w: &Witness<T>) -> Result<(T, Option<T>)> {
        let t = w.t;
        let pair =
            || w.y.as_deref().ok_or_else(|| Error::InvalidParameter("pairwise check needs a witness with y".into()));
        match *self {
            Check::OperatorMeasure { model, rate, norm } => {
                let jac = model.jacobian(t, &w.x)?;
                let mu = matrix_measure(&jac, norm)?;
                let c = rate.at(t);
                let op = operator_norm(&jac, norm)?;
                Ok((settle_margin(mu + c, mu.abs() + c), Some(op)))
            }
            Check::IntegralContractivity { model, rate, norm } => {
                let y = pair()?;
                let e = sub(&w.x, y);
                let df = sub(&model.eval(t, &w.x)?, &model.eval(t, y)?);
                let ip = norm.inner(&e, &df)?;
                let ee = norm.inner(&e, &e)?;
                let c = rate.at(t);
                Ok((settle_margin(ip + c * ee, ip.abs() + c * ee), None))
            }
            Check::IntegralSemi { model, map, rate, norm } => {
                let y = pair()?;
                let e = sub(&w.x, y);
                let df = sub(&model.eval(t, &w.x)?, &model.eval(t, y)?);
                let ip = map.semi_inner(&e, &df, norm)?;
                let ee = map.semi_inner(&e, &e, norm)?;
                let c = rate.at(t);
                Ok((settle_margin(ip + c * ee, ip.abs() + c * ee), None))
            }
            Check::IntegralPartial { model, map, rate, norm } => {
                let fx = model.eval(t, &w.x)?;
                let ip = map.semi_inner(&w.x, &fx, norm)?;
                let xx = map.semi_inner(&w.x, &w.x, norm)?;
                let c = rate.at(t);
                Ok((settle_margin(ip + c * xx, ip.abs() + c * xx), None))
            }
            Check::SemiMeasureBound { model, map, rate, norm } => {
                let jac = model.jacobian(t, &w.x)?;
                let mu = matrix_measure(&map.reduce(&jac)?, norm)?;
                let c = rate.at(t);
                let op = operator_norm(&jac, &NormKind::Two)?;
                Ok((settle_margin(mu + c, mu.abs() + c), Some(op)))
            }
            Check::KernelInvariance { model, map } => {
                let u = map.projector_ker().try_mul_vec(&w.x)?;
                let fu = model.eval(t, &u)?;
                let leak = NormKind::Two.vector_norm(&map.apply(&fu)?)?;
                let mut margin = settle_margin(leak, NormKind::Two.vector_norm(&fu)?);
                if let Some(jac) = model.analytic_jacobian(t, &w.x) {
                    let jac = jac?;
                    let restricted: DenseMatrix<T> = map.matrix().try_mul(&jac)?.try_mul(map.projector_ker())?;
                    let jac_leak = operator_norm(&restricted, &NormKind::Two)?;
                    let scale = operator_norm(&jac, &NormKind::Two)?;
                    margin = margin.max(settle_margin(jac_leak, scale));
                }
                Ok((margin, None))
            }
        }
    }

    /// Re-evaluates the margin at a stored witness.
    pub fn replay(&self, witness: &Witness<T>) -> Result<T> {
        self.validate()?;
        self.evaluate(witness).map(|(m, _)| m)
    }

    pub fn run(&self, sampling: &Sampling<T>) -> Result<Certificate<T>> {
        self.validate()?;
        let worst = worst_over_samples(sampling, |rng| self.draw(rng, sampling.t_probe), |w| self.evaluate(w))?;
        let mut diagnostics = BTreeMap::new();
        diagnostics.insert("worst_sample_index".to_string(), worst.index as f64);
        if let Some(op) = worst.aux_max {
            diagnostics.insert("sup_jacobian_op_norm".to_string(), op.to_f64_lossy());
        }
        Ok(Certificate {
            condition: self.condition(),
            rate: self.rate().cloned(),
            samples: sampling.samples,
            seed: sampling.seed,
            worst_margin: worst.margin,
            witness: Some(worst.witness),
            verdict: verdict_for(worst.margin),
            diagnostics,
            note: None,
        })
    }
}

pub fn check_operator_measure<T: Scalar>(
    model: &VectorFieldModel<T>,
    rate: &RateFunction<T>,
    norm: &NormKind<T>,
    sampling: &Sampling<T>,
) -> Result<Certificate<T>> {
    Check::OperatorMeasure { model, rate, norm }.run(sampling)
}

pub fn check_integral_contractivity<T: Scalar>(
    model: &VectorFieldModel<T>,
    rate: &RateFunction<T>,
    norm: &NormKind<T>,
    sampling: &Sampling<T>,
) -> Result<Certificate<T>> {
    Check::IntegralContractivity { model, rate, norm }.run(sampling)
}

pub fn check_integral_partial<T: Scalar>(
    model: &VectorFieldModel<T>,
    map: &SurjectiveMap<T>,
    rate: &RateFunction<T>,
    norm: &NormKind<T>,
    sampling: &Sampling<T>,
) -> Result<Certificate<T>> {
    Check::IntegralPartial { model, map, rate, norm }.run(sampling)
}

pub fn check_integral_semi<T: Scalar>(
    model: &VectorFieldModel<T>,
    map: &SurjectiveMap<T>,
    rate: &RateFunction<T>,
    norm: &NormKind<T>,
    sampling: &Sampling<T>,
) -> Result<Certificate<T>> {
    Check::IntegralSemi { model, map, rate, norm }.run(sampling)
}

pub fn check_semi_measure_bound<T: Scalar>(
    model: &VectorFieldModel<T>,
    map: &SurjectiveMap<T>,
    rate: &RateFunction<T>,
    norm: &NormKind<T>,
    sampling: &Sampling<T>,
) -> Result<Certificate<T>> {
    Check::SemiMeasureBound { model, map, rate, norm }.run(sampling)
}

pub fn check_kernel_invariance<T: Scalar>(
    model: &VectorFieldModel<T>,
    map: &SurjectiveMap<T>,
    sampling: &Sampling<T>,
) -> Result<Certificate<T>> {
    Check::KernelInvariance { model, map }.run(sampling)
}
