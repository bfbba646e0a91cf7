use std::io::Write;

use crate::certify::Sampling;
use crate::error::{Error, Result};
use crate::export::write_csv;
use crate::integrate::{DecayReport, Quantity, TimeGrid, DEFAULT_SLACK};
use crate::rdpde::grid::rd_seminorm_weighted;
use crate::rdpde::scenario::{check_rd_hypotheses, RdCertificate, RdScenario, FIGURE1_T_END};
use crate::rdpde::simulate::{simulate_rd, stability_limit, Initial, Snapshot};
use crate::scalar::Scalar;

/// Settings for [`run_rd_experiment`].
#[derive(Debug, Clone, PartialEq)]
pub struct RdExperimentOptions<T> {
    /// `None` uses the stability limit.
    pub dt: Option<T>,
    pub t_end: T,
    pub slack: T,
    /// Spacing of the recorded decay series.
    pub output_interval: T,
    /// Requested snapshot times; each is taken at the nearest recorded time.
    pub snapshot_times: Vec<T>,
    pub sampling: Sampling<T>,
}

impl<T: Scalar> Default for RdExperimentOptions<T> {
    fn default() -> Self {
        Self {
            dt: None,
            t_end: T::of(FIGURE1_T_END),
            slack: T::of(DEFAULT_SLACK),
            output_interval: T::of(0.005),
            snapshot_times: vec![T::zero(), T::of(0.1), T::of(FIGURE1_T_END)],
            sampling: Sampling::new(1000, 0),
        }
    }
}

/// Both trajectories of a scenario, their seminorm decay and the envelope
/// checks against the certified rate.
#[derive(Debug, Clone, PartialEq)]
pub struct RdExperiment<T> {
    pub hypotheses: RdCertificate<T>,
    pub dt: T,
    pub steps: usize,
    /// `‖u(t) − v(t)‖_{Π_S,P^{1/2}}` against `e^{−(c/λ_max(P))t}` times its
    /// initial value. Without a certified rate the envelope is flat and the
    /// experiment does not pass.
    pub distance: DecayReport<T>,
    /// `‖u(t)‖_{Π_S,P^{1/2}}` against the same envelope.
    pub partial_u: DecayReport<T>,
    pub partial_v: DecayReport<T>,
    /// Least-squares slope of `ln distance` over the recorded times.
    pub log_slope: Option<T>,
    pub snapshots: Vec<(Snapshot<T>, Snapshot<T>)>,
}

impl<T: Scalar> RdExperiment<T> {
    pub fn pass(&self) -> bool {
        self.hypotheses.certificate.is_certified() && self.distance.pass && self.partial_u.pass && self.partial_v.pass
    }

    /// CSV with columns `t, seminorm, bound`.
    pub fn write_decay_csv<W: Write>(&self, out: W) -> Result<()> {
        let header = ["t", "seminorm", "bound"].map(String::from);
        let d = &self.distance;
        let rows = (0..d.times.len()).map(|k| vec![d.times[k], d.observed[k], d.bound[k]]);
        write_csv(out, &header, rows)
    }

    /// CSV with columns `t, x, u_1, …, u_n, v_1, …, v_n`, one block per
    /// snapshot time.
    pub fn write_snapshots_csv<W: Write>(&self, out: W) -> Result<()> {
        let n = self.n_species();
        let mut header = vec!["t".to_string(), "x".to_string()];
        header.extend((1..=n).map(|s| format!("u_{s}")));
        header.extend((1..=n).map(|s| format!("v_{s}")));
        let mut rows = Vec::new();
        for (u, v) in &self.snapshots {
            let grid = u.field.grid();
            for j in 0..grid.n_points() {
                let mut row = vec![u.t, grid.node(j)];
                row.extend_from_slice(u.field.at(j));
                row.extend_from_slice(v.field.at(j));
                rows.push(row);
            }
        }
        write_csv(out, &header, rows)
    }

    fn n_species(&self) -> usize {
        self.snapshots.first().map_or(0, |(u, _)| u.field.n_species())
    }
}

/// Checks the hypotheses, simulates both initial conditions concurrently
/// and compares their seminorm distance with the certified envelope.
pub fn run_rd_experiment<T: Scalar>(
    scenario: &RdScenario<T>,
    opts: &RdExperimentOptions<T>,
) -> Result<RdExperiment<T>> {
    if !(opts.output_interval > T::zero()) {
        return Err(Error::Config(format!("output_interval must be positive, got {}", opts.output_interval)));
    }
    if !(opts.slack >= T::zero()) {
        return Err(Error::Config(format!("slack must be >= 0, got {}", opts.slack)));
    }
    let dt = match opts.dt {
        Some(dt) => dt,
        None => stability_limit(scenario)?.min(opts.output_interval),
    };
    let grid = TimeGrid::new(T::zero(), opts.t_end, dt).map_err(|e| Error::Config(e.to_string()))?;
    let every = (opts.output_interval / grid.dt()).round().to_f64_lossy().max(1.0) as usize;

    let hypotheses = check_rd_hypotheses(scenario, &opts.sampling)?;
    let (us, vs) = rayon::join(
        || simulate_rd(scenario, Initial::U0, opts.t_end, dt, every),
        || simulate_rd(scenario, Initial::V0, opts.t_end, dt, every),
    );
    let (us, vs) = (us?, vs?);

    let weight = scenario.weight();
    let times: Vec<T> = us.iter().map(|s| s.t).collect();
    let mut distance = Vec::with_capacity(us.len());
    let mut norm_u = Vec::with_capacity(us.len());
    let mut norm_v = Vec::with_capacity(us.len());
    for (u, v) in us.iter().zip(&vs) {
        distance.push(rd_seminorm_weighted(&u.field.try_sub(&v.field)?, weight)?);
        norm_u.push(rd_seminorm_weighted(&u.field, weight)?);
        norm_v.push(rd_seminorm_weighted(&v.field, weight)?);
    }
    let rate = hypotheses.decay_rate.unwrap_or_else(T::zero);
    let report = |quantity, observed: Vec<T>| {
        let start = observed[0];
        let bound = times.iter().map(|&t| start * (-rate * t).exp()).collect();
        DecayReport::new(quantity, times.clone(), observed, bound, opts.slack)
    };
    let log_slope = least_squares_slope(&times, &distance);
    let snapshots = opts
        .snapshot_times
        .iter()
        .filter(|&&ts| ts <= opts.t_end)
        .map(|&ts| {
            let k = nearest_index(&times, ts);
            (us[k].clone(), vs[k].clone())
        })
        .collect();

    Ok(RdExperiment {
        hypotheses,
        dt: grid.dt(),
        steps: grid.steps(),
        distance: report(Quantity::SeminormDistance, distance),
        partial_u: report(Quantity::SeminormOfState, norm_u),
        partial_v: report(Quantity::SeminormOfState, norm_v),
        log_slope,
        snapshots,
    })
}

fn nearest_index<T: Scalar>(times: &[T], t: T) -> usize {
    let mut best = 0;
    for (k, &s) in times.iter().enumerate() {
        if (s - t).abs() < (times[best] - t).abs() {
            best = k;
        }
    }
    best
}

/// Slope of the least-squares line through `(t_k, ln y_k)` over positive
/// `y_k`; `None` with fewer than two such points.
pub fn least_squares_slope<T: Scalar>(times: &[T], values: &[T]) -> Option<T> {
    let pts: Vec<(T, T)> =
        times.iter().zip(values).filter(|(_, &y)| y > T::zero()).map(|(&t, &y)| (t, y.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let m = T::of(pts.len() as f64);
    let tm = pts.iter().map(|p| p.0).sum::<T>() / m;
    let ym = pts.iter().map(|p| p.1).sum::<T>() / m;
    let sxx: T = pts.iter().map(|p| (p.0 - tm) * (p.0 - tm)).sum();
    let sxy: T = pts.iter().map(|p| (p.0 - tm) * (p.1 - ym)).sum();
    (sxx > T::zero()).then(|| sxy / sxx)
}
