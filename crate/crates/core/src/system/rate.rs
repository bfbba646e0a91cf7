use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A strictly positive contraction rate `c(t)`.
#[derive(Debug, Clone, PartialEq)]
pub enum RateFunction<T> {
    Constant(T),
    /// Piecewise-linear interpolation through `(times[k], values[k])`, held
    /// constant outside the table.
    Tabulated {
        times: Vec<T>,
        values: Vec<T>,
    },
}

impl<T: Scalar> RateFunction<T> {
    pub fn constant(c: T) -> Result<Self> {
        if !(c > T::zero()) || !c.is_finite() {
            return Err(Error::InvalidParameter(format!("rate must be positive and finite, got {c}")));
        }
        Ok(RateFunction::Constant(c))
    }

    pub fn tabulated(times: Vec<T>, values: Vec<T>) -> Result<Self> {
        if times.is_empty() || times.len() != values.len() {
            return Err(Error::InvalidParameter(format!(
                "rate table needs matching non-empty columns, got {} times and {} values",
                times.len(),
                values.len()
            )));
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) || times.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidParameter("rate table times must be finite and strictly increasing".into()));
        }
        if let Some(v) = values.iter().find(|v| !(**v > T::zero()) || !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("rate values must be positive, got {v}")));
        }
        Ok(RateFunction::Tabulated { times, values })
    }

    pub fn at(&self, t: T) -> T {
        match self {
            RateFunction::Constant(c) => *c,
            RateFunction::Tabulated { times, values } => {
                let last = times.len() - 1;
                if t <= times[0] {
                    return values[0];
                }
                if t >= times[last] {
                    return values[last];
                }
                let k = times.partition_point(|&s| s <= t) - 1;
                let w = (t - times[k]) / (times[k + 1] - times[k]);
                values[k] + (values[k + 1] - values[k]) * w
            }
        }
    }

    pub fn as_constant(&self) -> Option<T> {
        match self {
            RateFunction::Constant(c) => Some(*c),
            RateFunction::Tabulated { .. } => None,
        }
    }

    /// Cumulative trapezoid integral `∫_{grid[0]}^{grid[k]} c(s) ds` for every
    /// grid point.
    pub fn cumulative_integral(&self, grid: &[T]) -> Vec<T> {
        let mut acc = T::zero();
        let mut out = Vec::with_capacity(grid.len());
        for (k, &t) in grid.iter().enumerate() {
            if k > 0 {
                let s = grid[k - 1];
                acc = acc + (t - s) * (self.at(s) + self.at(t)) * T::of(0.5);
            }
            out.push(acc);
        }
        out
    }
}

impl<T: Scalar> Serialize for RateFunction<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            RateFunction::Constant(c) => c.serialize(s),
            RateFunction::Tabulated { times, values } => {
                #[derive(Serialize)]
                struct Table<'a, T> {
                    times: &'a [T],
                    values: &'a [T],
                }
                Table { times, values }.serialize(s)
            }
        }
    }
}

/// Accepts a bare number or `{"times": [...], "values": [...]}`.
impl<'de, T: Scalar> Deserialize<'de> for RateFunction<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged, bound = "T: Scalar")]
        enum Repr<T> {
            Constant(T),
            Table { times: Vec<T>, values: Vec<T> },
        }
        match Repr::<T>::deserialize(d)? {
            Repr::Constant(c) => RateFunction::constant(c),
            Repr::Table { times, values } => RateFunction::tabulated(times, values),
        }
        .map_err(serde::de::Error::custom)
    }
}
