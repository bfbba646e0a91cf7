use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::export::write_csv;
use crate::scalar::Scalar;
use crate::system::{LtvSystem, VectorFieldModel};

/// Right-hand side of an ODE `ẋ = f(t, x)`.
pub trait Dynamics<T: Scalar> {
    fn state_dim(&self) -> usize;

    /// Writes `f(t, x)` into `out`. Non-finite output is allowed; the
    /// integrator detects it on the resulting state.
    fn rhs(&self, t: T, x: &[T], out: &mut [T]) -> Result<()>;
}

impl<T: Scalar> Dynamics<T> for VectorFieldModel<T> {
    fn state_dim(&self) -> usize {
        self.dim()
    }

    fn rhs(&self, t: T, x: &[T], out: &mut [T]) -> Result<()> {
        out.copy_from_slice(&self.eval_raw(t, x)?);
        Ok(())
    }
}

impl<T: Scalar> Dynamics<T> for LtvSystem<T> {
    fn state_dim(&self) -> usize {
        self.dim()
    }

    fn rhs(&self, t: T, x: &[T], out: &mut [T]) -> Result<()> {
        let a = self.matrix_at(t)?;
        for (i, o) in out.iter_mut().enumerate() {
            *o = a.row(i).iter().zip(x).map(|(&aij, &xj)| aij * xj).sum();
        }
        Ok(())
    }
}

impl<T: Scalar, F> Dynamics<T> for (usize, F)
where
    F: Fn(T, &[T], &mut [T]) -> Result<()>,
{
    fn state_dim(&self) -> usize {
        self.0
    }

    fn rhs(&self, t: T, x: &[T], out: &mut [T]) -> Result<()> {
        (self.1)(t, x, out)
    }
}

/// Uniform time grid `t0 + k·dt`, `k = 0..=steps`, ending exactly at `t_end`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid<T> {
    t0: T,
    t_end: T,
    dt: T,
    steps: usize,
}

impl<T: Scalar> TimeGrid<T> {
    /// Uses the largest step that divides `[t0, t_end]` evenly and does not
    /// exceed `dt` by more than a relative `1e-9`.
    /// `t_end = t0` gives a single-point grid.
    pub fn new(t0: T, t_end: T, dt: T) -> Result<Self> {
        if !(dt > T::zero()) || !dt.is_finite() {
            return Err(Error::InvalidParameter(format!("dt must be positive and finite, got {dt}")));
        }
        if !t0.is_finite() || !t_end.is_finite() || t_end < t0 {
            return Err(Error::InvalidParameter(format!("need finite t0 <= t_end, got [{t0}, {t_end}]")));
        }
        let span = t_end - t0;
        let ratio = (span / dt).to_f64_lossy();
        let steps = if span == T::zero() { 0 } else { (ratio * (1.0 - 1e-9)).ceil().max(1.0) as usize };
        let dt = if steps == 0 { dt } else { span / T::of(steps as f64) };
        Ok(Self { t0, t_end, dt, steps })
    }

    pub fn t0(&self) -> T {
        self.t0
    }

    pub fn t_end(&self) -> T {
        self.t_end
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn time(&self, k: usize) -> T {
        if k == self.steps {
            self.t_end
        } else {
            self.t0 + self.dt * T::of(k as f64)
        }
    }

    pub fn times(&self) -> Vec<T> {
        (0..=self.steps).map(|k| self.time(k)).collect()
    }
}

/// Classical RK4 on `grid`, calling `observe(k, t_k, x_k)` at every grid
/// point including the initial one. Returns the final state.
pub fn rk4_drive<T, D, O>(sys: &D, x0: &[T], grid: &TimeGrid<T>, mut observe: O) -> Result<Vec<T>>
where
    T: Scalar,
    D: Dynamics<T> + ?Sized,
    O: FnMut(usize, T, &[T]) -> Result<()>,
{
    let n = sys.state_dim();
    if x0.len() != n {
        return Err(Error::Dimension(format!("initial state has length {}, system has dimension {n}", x0.len())));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("initial state".into()));
    }
    let half = T::of(0.5);
    let sixth = T::one() / T::of(6.0);
    let two = T::of(2.0);
    let mut x = x0.to_vec();
    let mut k1 = vec![T::zero(); n];
    let mut k2 = vec![T::zero(); n];
    let mut k3 = vec![T::zero(); n];
    let mut k4 = vec![T::zero(); n];
    let mut tmp = vec![T::zero(); n];

    observe(0, grid.time(0), &x)?;
    for k in 0..grid.steps() {
        let t = grid.time(k);
        let h = grid.time(k + 1) - t;
        sys.rhs(t, &x, &mut k1)?;
        for i in 0..n {
            tmp[i] = x[i] + h * half * k1[i];
        }
        sys.rhs(t + h * half, &tmp, &mut k2)?;
        for i in 0..n {
            tmp[i] = x[i] + h * half * k2[i];
        }
        sys.rhs(t + h * half, &tmp, &mut k3)?;
        for i in 0..n {
            tmp[i] = x[i] + h * k3[i];
        }
        sys.rhs(t + h, &tmp, &mut k4)?;
        for i in 0..n {
            x[i] = x[i] + h * sixth * (k1[i] + two * (k2[i] + k3[i]) + k4[i]);
        }
        let t_next = grid.time(k + 1);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { t: t_next.to_f64_lossy() });
        }
        observe(k + 1, t_next, &x)?;
    }
    Ok(x)
}

/// A sampled solution `φ(t, t0, x0)` on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub states: Vec<Vec<T>>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states.first().map_or(0, Vec::len)
    }

    pub fn final_state(&self) -> &[T] {
        self.states.last().map_or(&[], Vec::as_slice)
    }

    /// CSV with columns `t, state_0, …, state_{n-1}`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut header = vec!["t".to_string()];
        header.extend((0..self.dim()).map(|i| format!("state_{i}")));
        let rows = self.times.iter().zip(&self.states).map(|(&t, x)| {
            let mut row = Vec::with_capacity(x.len() + 1);
            row.push(t);
            row.extend_from_slice(x);
            row
        });
        write_csv(out, &header, rows)
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

/// Integrates `sys` from `x0` over `[t0, t_end]` with fixed-step RK4.
pub fn integrate_rk4<T, D>(sys: &D, x0: &[T], t0: T, t_end: T, dt: T) -> Result<Trajectory<T>>
where
    T: Scalar,
    D: Dynamics<T> + ?Sized,
{
    if !(t_end > t0) {
        return Err(Error::InvalidParameter(format!("need t_end > t0, got [{t0}, {t_end}]")));
    }
    let grid = TimeGrid::new(t0, t_end, dt)?;
    let mut traj =
        Trajectory { times: Vec::with_capacity(grid.steps() + 1), states: Vec::with_capacity(grid.steps() + 1) };
    rk4_drive(sys, x0, &grid, |_, t, x| {
        traj.times.push(t);
        traj.states.push(x.to_vec());
        Ok(())
    })?;
    Ok(traj)
}
