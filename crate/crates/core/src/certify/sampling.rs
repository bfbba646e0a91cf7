use rand_pcg::Pcg32;
use rayon::prelude::*;

use crate::certify::certificate::Witness;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const DEFAULT_SAMPLES: usize = 10_000;
pub const DEFAULT_T_PROBE: f64 = 10.0;

/// How many points to draw, from which seed, over which time window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sampling<T> {
    pub samples: usize,
    pub seed: u64,
    /// Times are drawn uniformly from `[0, t_probe]`.
    pub t_probe: T,
}

impl<T: Scalar> Sampling<T> {
    pub fn new(samples: usize, seed: u64) -> Self {
        Self { samples, seed, t_probe: T::of(DEFAULT_T_PROBE) }
    }

    pub fn with_t_probe(mut self, t_probe: T) -> Self {
        self.t_probe = t_probe;
        self
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::InvalidParameter("at least one sample is required".into()));
        }
        if !(self.t_probe >= T::zero()) || !self.t_probe.is_finite() {
            return Err(Error::InvalidParameter(format!("t_probe must be >= 0, got {}", self.t_probe)));
        }
        Ok(())
    }
}

impl<T: Scalar> Default for Sampling<T> {
    fn default() -> Self {
        Self::new(DEFAULT_SAMPLES, 0)
    }
}

/// Independent generator for sample `index`: same 64-bit seed, one PCG
/// stream per index, so draws do not depend on evaluation order.
pub fn sample_rng(seed: u64, index: usize) -> Pcg32 {
    Pcg32::new(seed, index as u64)
}

pub(crate) struct Worst<T> {
    pub margin: T,
    pub index: usize,
    pub witness: Witness<T>,
    /// Largest auxiliary diagnostic seen across all samples.
    pub aux_max: Option<T>,
}

/// Draws `samples` witnesses in parallel and keeps the one with the largest
/// margin; ties go to the lowest sample index, and an error at the lowest
/// failing index wins over everything else. The result is independent of
/// thread count and scheduling.
pub(crate) fn worst_over_samples<T, D, E>(sampling: &Sampling<T>, draw: D, eval: E) -> Result<Worst<T>>
where
    T: Scalar,
    D: Fn(&mut Pcg32) -> Result<Witness<T>> + Sync,
    E: Fn(&Witness<T>) -> Result<(T, Option<T>)> + Sync,
{
    sampling.validate()?;
    type Item<T> = std::result::Result<Worst<T>, (usize, Error)>;

    let combine = |a: Item<T>, b: Item<T>| -> Item<T> {
        match (a, b) {
            (Err(ea), Err(eb)) => Err(if ea.0 <= eb.0 { ea } else { eb }),
            (Err(e), Ok(_)) | (Ok(_), Err(e)) => Err(e),
            (Ok(wa), Ok(wb)) => {
                let aux_max = match (wa.aux_max, wb.aux_max) {
                    (Some(x), Some(y)) => Some(x.max(y)),
                    (x, y) => x.or(y),
                };
                let a_wins = wa.margin > wb.margin || (wa.margin == wb.margin && wa.index < wb.index);
                let mut keep = if a_wins { wa } else { wb };
                keep.aux_max = aux_max;
                Ok(keep)
            }
        }
    };

    (0..sampling.samples)
        .into_par_iter()
        .map(|index| -> Item<T> {
            let mut rng = sample_rng(sampling.seed, index);
            let witness = draw(&mut rng).map_err(|e| (index, e))?;
            let (margin, aux) = eval(&witness).map_err(|e| (index, e))?;
            if margin.is_nan() {
                return Err((index, Error::NonFinite(format!("margin at sample {index} is NaN"))));
            }
            Ok(Worst { margin, index, witness, aux_max: aux })
        })
        .reduce_with(combine)
        .expect("at least one sample")
        .map_err(|(_, e)| e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngExt;

    #[test]
    fn reduction_prefers_lowest_index_on_ties() {
        let s = Sampling::<f64>::new(64, 3);
        let w = worst_over_samples(
            &s,
            |rng| Ok(Witness { t: 0.0, x: vec![rng.random::<f64>()], y: None }),
            |_| Ok((0.0, None)),
        )
        .unwrap();
        assert_eq!(w.index, 0);
    }

    #[test]
    fn reduction_reports_lowest_failing_index() {
        let s = Sampling::<f64>::new(100, 1);
        let err = worst_over_samples(
            &s,
            |rng| Ok(Witness { t: 0.0, x: vec![rng.random::<f64>()], y: None }),
            |w| {
                if w.x[0] > 0.5 {
                    Err(Error::InvalidParameter(format!("{}", w.x[0])))
                } else {
                    Ok((w.x[0], None))
                }
            },
        );
        let first_bad = (0..100).map(|i| sample_rng(1, i).random::<f64>()).find(|&v| v > 0.5).unwrap();
        assert_eq!(err.err(), Some(Error::InvalidParameter(format!("{first_bad}"))));
    }

    #[test]
    fn zero_samples_rejected() {
        let s = Sampling::<f64>::new(0, 1);
        assert!(worst_over_samples(&s, |_| unreachable!(), |_| unreachable!()).is_err());
    }
}
