use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::rk4::{rk4_drive, Dynamics, TimeGrid};
use crate::linalg::{matrix::sub, matrix_measure, seminorm, NormKind, SurjectiveMap};
use crate::scalar::Scalar;
use crate::system::{LtvSystem, RateFunction, VectorFieldModel};

pub const DEFAULT_SLACK: f64 = 0.05;

/// Which quantity a [`DecayReport`] compares against its envelope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    NormDistance,
    SeminormDistance,
    SeminormOfState,
    #[serde(rename = "F-norm")]
    FNorm,
    CoppelUpper,
    CoppelLower,
}

/// Integration window and the slack allowed on envelope comparisons.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window<T> {
    pub t0: T,
    pub t_end: T,
    pub dt: T,
    pub slack: T,
}

impl<T: Scalar> Window<T> {
    pub fn new(t0: T, t_end: T, dt: T) -> Self {
        Self { t0, t_end, dt, slack: T::of(DEFAULT_SLACK) }
    }

    pub fn with_slack(mut self, slack: T) -> Self {
        self.slack = slack;
        self
    }

    fn grid(&self) -> Result<TimeGrid<T>> {
        if !(self.t_end > self.t0) {
            return Err(Error::InvalidParameter(format!("need t_end > t0, got [{}, {}]", self.t0, self.t_end)));
        }
        if !(self.slack >= T::zero()) {
            return Err(Error::InvalidParameter(format!("slack must be >= 0, got {}", self.slack)));
        }
        TimeGrid::new(self.t0, self.t_end, self.dt)
    }
}

/// An observed quantity checked against an exponential envelope on a grid.
///
/// `max_violation` is the largest relative excess `observed/bound − 1`;
/// where the envelope is below round-off scale the excess is measured
/// relative to that scale instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct DecayReport<T> {
    pub quantity: Quantity,
    pub times: Vec<T>,
    pub observed: Vec<T>,
    pub bound: Vec<T>,
    pub max_violation: T,
    pub slack: T,
    pub pass: bool,
}

impl<T: Scalar> DecayReport<T> {
    pub fn new(quantity: Quantity, times: Vec<T>, observed: Vec<T>, bound: Vec<T>, slack: T) -> Self {
        let scale =
            observed.first().copied().unwrap_or_else(T::zero).max(bound.first().copied().unwrap_or_else(T::zero));
        let floor = scale * T::tolerance(1e-14) + T::min_positive_value();
        let max_violation =
            observed.iter().zip(&bound).map(|(&o, &b)| (o - b) / b.max(floor)).fold(T::neg_infinity(), T::max);
        let mut report = Self { quantity, times, observed, bound, max_violation, slack, pass: false };
        report.pass = report.max_violation <= slack;
        report
    }

    /// The same comparison judged at a different slack.
    pub fn with_slack(mut self, slack: T) -> Self {
        self.slack = slack;
        self.pass = self.max_violation <= slack;
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// `exp(−∫_{t0}^{t} c)` on the grid, integral by trapezoid.
fn rate_envelope<T: Scalar>(rate: &RateFunction<T>, times: &[T]) -> Vec<T> {
    rate.cumulative_integral(times).into_iter().map(|i| (-i).exp()).collect()
}

/// Integrates two initial conditions side by side and records
/// `metric(x(t), y(t))` at every grid point.
fn paired_metric<T, M>(model: &VectorFieldModel<T>, x0: &[T], y0: &[T], grid: &TimeGrid<T>, metric: M) -> Result<Vec<T>>
where
    T: Scalar,
    M: Fn(&[T], &[T]) -> Result<T>,
{
    let n = model.dim();
    if y0.len() != n {
        return Err(Error::Dimension(format!("y0 has length {}, model has dimension {n}", y0.len())));
    }
    let stacked = (2 * n, |t: T, z: &[T], out: &mut [T]| {
        let (zx, zy) = z.split_at(n);
        let (ox, oy) = out.split_at_mut(n);
        model.rhs(t, zx, ox)?;
        model.rhs(t, zy, oy)
    });
    let mut z0 = x0.to_vec();
    z0.extend_from_slice(y0);
    let mut observed = Vec::with_capacity(grid.steps() + 1);
    rk4_drive(&stacked, &z0, grid, |_, _, z| {
        let (zx, zy) = z.split_at(n);
        observed.push(metric(zx, zy)?);
        Ok(())
    })?;
    Ok(observed)
}

fn state_metric<T, M>(sys: &dyn Dynamics<T>, x0: &[T], grid: &TimeGrid<T>, mut metric: M) -> Result<Vec<T>>
where
    T: Scalar,
    M: FnMut(T, &[T]) -> Result<T>,
{
    let mut observed = Vec::with_capacity(grid.steps() + 1);
    rk4_drive(sys, x0, grid, |_, t, x| {
        observed.push(metric(t, x)?);
        Ok(())
    })?;
    Ok(observed)
}

fn envelope_report<T: Scalar>(
    quantity: Quantity,
    times: Vec<T>,
    observed: Vec<T>,
    rate: &RateFunction<T>,
    slack: T,
) -> DecayReport<T> {
    let start = observed[0];
    let bound = rate_envelope(rate, &times).into_iter().map(|e| e * start).collect();
    DecayReport::new(quantity, times, observed, bound, slack)
}

/// Checks `‖φ(t,x0) − φ(t,y0)‖ ≤ e^{−∫c}·‖x0 − y0‖`.
pub fn verify_pairwise_decay<T: Scalar>(
    model: &VectorFieldModel<T>,
    x0: &[T],
    y0: &[T],
    rate: &RateFunction<T>,
    norm: &NormKind<T>,
    window: &Window<T>,
) -> Result<DecayReport<T>> {
    if x0 == y0 {
        return Err(Error::InvalidParameter("x0 and y0 must differ".into()));
    }
    let grid = window.grid()?;
    let observed = paired_metric(model, x0, y0, &grid, |x, y| norm.vector_norm(&sub(x, y)))?;
    Ok(envelope_report(Quantity::NormDistance, grid.times(), observed, rate, window.slack))
}

/// Checks `‖φ(t,x0) − φ(t,y0)‖_T ≤ e^{−∫c}·‖x0 − y0‖_T`.
pub fn verify_semi_decay<T: Scalar>(
    model: &VectorFieldModel<T>,
    map: &SurjectiveMap<T>,
    x0: &[T],
    y0: &[T],
    rate: &RateFunction<T>,
    norm: &NormKind<T>,
    window: &Window<T>,
) -> Result<DecayReport<T>> {
    if x0 == y0 {
        return Err(Error::InvalidParameter("x0 and y0 must differ".into()));
    }
    let grid = window.grid()?;
    let observed = paired_metric(model, x0, y0, &grid, |x, y| seminorm(&sub(x, y), map, norm))?;
    Ok(envelope_report(Quantity::SeminormDistance, grid.times(), observed, rate, window.slack))
}

/// Checks `‖φ(t,x0)‖_T ≤ e^{−∫c}·‖x0‖_T`.
pub fn verify_partial_decay<T: Scalar>(
    model: &VectorFieldModel<T>,
    map: &SurjectiveMap<T>,
    x0: &[T],
    rate: &RateFunction<T>,
    norm: &NormKind<T>,
    window: &Window<T>,
) -> Result<DecayReport<T>> {
    let grid = window.grid()?;
    let observed = state_metric(model, x0, &grid, |_, x| seminorm(x, map, norm))?;
    Ok(envelope_report(Quantity::SeminormOfState, grid.times(), observed, rate, window.slack))
}

/// Upper and lower Coppel envelopes for one trajectory of `ẋ = A(t)x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct CoppelReports<T> {
    /// `‖x(t)‖` against `‖x0‖·exp(∫μ(A))`.
    pub upper: DecayReport<T>,
    /// `‖x0‖·exp(−∫μ(−A))` against `‖x(t)‖`.
    pub lower: DecayReport<T>,
}

impl<T: Scalar> CoppelReports<T> {
    pub fn pass(&self) -> bool {
        self.upper.pass && self.lower.pass
    }

    pub fn max_violation(&self) -> T {
        self.upper.max_violation.max(self.lower.max_violation)
    }
}

/// Checks `‖x0‖e^{−∫μ(−A)} ≤ ‖x(t)‖ ≤ ‖x0‖e^{∫μ(A)}` on the grid.
pub fn verify_coppel_envelope<T: Scalar>(
    sys: &LtvSystem<T>,
    x0: &[T],
    norm: &NormKind<T>,
    window: &Window<T>,
) -> Result<CoppelReports<T>> {
    let grid = window.grid()?;
    let times = grid.times();
    let mut mu_plus = Vec::with_capacity(times.len());
    let mut mu_minus = Vec::with_capacity(times.len());
    for &t in &times {
        let a = sys.matrix_at(t)?;
        mu_plus.push(matrix_measure(&a, norm)?);
        mu_minus.push(matrix_measure(&a.scale(-T::one()), norm)?);
    }
    let norm0 = norm.vector_norm(x0)?;
    if norm0 == T::zero() {
        return Err(Error::InvalidParameter("x0 must be nonzero".into()));
    }
    let observed = state_metric(sys, x0, &grid, |_, x| norm.vector_norm(x))?;
    let upper_env = cumulative_trapezoid(&times, &mu_plus).into_iter().map(|i| norm0 * i.exp()).collect();
    let lower_env = cumulative_trapezoid(&times, &mu_minus).into_iter().map(|i| norm0 * (-i).exp()).collect();
    Ok(CoppelReports {
        upper: DecayReport::new(Quantity::CoppelUpper, times.clone(), observed.clone(), upper_env, window.slack),
        lower: DecayReport::new(Quantity::CoppelLower, times, lower_env, observed, window.slack),
    })
}

fn cumulative_trapezoid<T: Scalar>(times: &[T], values: &[T]) -> Vec<T> {
    let mut acc = T::zero();
    let mut out = Vec::with_capacity(times.len());
    out.push(acc);
    for k in 1..times.len() {
        acc = acc + (times[k] - times[k - 1]) * (values[k] + values[k - 1]) * T::of(0.5);
        out.push(acc);
    }
    out
}

/// Checks `‖F(φ(t,x0))‖ ≤ e^{−∫c}·‖F(x0)‖` for a time-invariant field.
pub fn verify_fieldnorm_decay<T: Scalar>(
    model: &VectorFieldModel<T>,
    x0: &[T],
    rate: &RateFunction<T>,
    norm: &NormKind<T>,
    window: &Window<T>,
) -> Result<DecayReport<T>> {
    if !model.is_time_invariant() {
        return Err(Error::InvalidParameter(format!("{} is time-varying", model.name())));
    }
    let grid = window.grid()?;
    let observed = state_metric(model, x0, &grid, |t, x| norm.vector_norm(&model.eval(t, x)?))?;
    Ok(envelope_report(Quantity::FNorm, grid.times(), observed, rate, window.slack))
}
