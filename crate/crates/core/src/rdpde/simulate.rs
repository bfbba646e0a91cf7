use crate::error::{Error, Result};
use crate::integrate::{rk4_drive, TimeGrid};
use crate::linalg::lambda_max_sym;
use crate::rdpde::grid::{laplacian_all, Field};
use crate::rdpde::scenario::RdScenario;
use crate::scalar::Scalar;

/// Which initial condition of a scenario to start from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Initial {
    U0,
    V0,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot<T> {
    pub t: T,
    pub field: Field<T>,
}

/// Largest stable explicit step `0.4·h²/(2·λ_max(sym Γ))`; unbounded
/// without diffusion.
pub fn stability_limit<T: Scalar>(scenario: &RdScenario<T>) -> Result<T> {
    let h = scenario.grid().spacing();
    let g = lambda_max_sym(&scenario.gamma().symmetric_part())?;
    if g <= T::zero() {
        return Ok(T::infinity());
    }
    Ok(T::of(0.4) * h * h / (T::of(2.0) * g))
}

/// Method-of-lines RK4 run from one of the scenario's initial conditions.
/// See [`simulate_rd_from`].
pub fn simulate_rd<T: Scalar>(
    scenario: &RdScenario<T>,
    which: Initial,
    t_end: T,
    dt: T,
    record_every: usize,
) -> Result<Vec<Snapshot<T>>> {
    let u0 = match which {
        Initial::U0 => scenario.u0(),
        Initial::V0 => scenario.v0(),
    };
    simulate_rd_from(scenario, u0, t_end, dt, record_every)
}

/// Integrates `du_j/dt = f(u_j) + Γ (L_N u)_j` from `u0` over `[0, t_end]`,
/// recording every `record_every`-th step and always the last one.
pub fn simulate_rd_from<T: Scalar>(
    scenario: &RdScenario<T>,
    u0: &Field<T>,
    t_end: T,
    dt: T,
    record_every: usize,
) -> Result<Vec<Snapshot<T>>> {
    if u0.grid() != scenario.grid() || u0.n_species() != scenario.n_species() {
        return Err(Error::Dimension("initial field does not match the scenario".into()));
    }
    if record_every == 0 {
        return Err(Error::Config("record_every must be at least 1".into()));
    }
    let grid = TimeGrid::new(T::zero(), t_end, dt).map_err(|e| Error::Config(e.to_string()))?;
    let limit = stability_limit(scenario)?;
    if grid.steps() > 0 && grid.dt() > limit * T::of(1.0 + 1e-9) {
        return Err(Error::Config(format!(
            "dt = {} exceeds the explicit stability limit {limit} (0.4 h^2 / (2 lambda_max(sym Gamma)))",
            grid.dt()
        )));
    }

    let n = scenario.n_species();
    let nodes = scenario.grid().n_points();
    let h = scenario.grid().spacing();
    let inv_h2 = T::one() / (h * h);
    let gamma = scenario.gamma();
    let reaction = scenario.reaction();
    let linear = reaction.as_linear();
    let rhs = (nodes * n, |_: T, x: &[T], out: &mut [T]| {
        let mut lap = vec![T::zero(); x.len()];
        laplacian_all(x, n, inv_h2, &mut lap);
        for j in 0..nodes {
            let range = j * n..(j + 1) * n;
            let (u, l, o) = (&x[range.clone()], &lap[range.clone()], &mut out[range]);
            match linear {
                Some(a) => {
                    for (s, os) in o.iter_mut().enumerate() {
                        let mut acc = T::zero();
                        for r in 0..n {
                            acc = acc + a[(s, r)] * u[r] + gamma[(s, r)] * l[r];
                        }
                        *os = acc;
                    }
                }
                None => {
                    reaction.apply(u, o);
                    for (s, os) in o.iter_mut().enumerate() {
                        *os = *os + gamma.row(s).iter().zip(l).map(|(&g, &lr)| g * lr).sum::<T>();
                    }
                }
            }
        }
        Ok(())
    });

    let steps = grid.steps();
    let mut out = Vec::with_capacity(steps / record_every + 2);
    rk4_drive(&rhs, u0.values(), &grid, |k, t, x| {
        if k % record_every == 0 || k == steps {
            out.push(Snapshot { t, field: Field::from_parts_unchecked(u0.grid().clone(), n, x.to_vec()) });
        }
        Ok(())
    })?;
    Ok(out)
}
