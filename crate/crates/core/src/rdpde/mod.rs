//! Method-of-lines reaction-diffusion on an interval with zero-flux
//! boundaries: grid operators, the mean-free projection and its seminorm,
//! the contraction hypotheses, and simulation.

pub mod experiment;
pub mod grid;
pub mod scenario;
pub mod simulate;

pub use experiment::{least_squares_slope, run_rd_experiment, RdExperiment, RdExperimentOptions};
pub use grid::{
    neumann_eigenvalue, neumann_lambda2, neumann_lambda2_exact, neumann_laplacian, project_meanfree, rd_seminorm,
    rd_seminorm_weighted, Field, Grid1D,
};
pub use scenario::{
    check_rd_hypotheses, figure1_alpha, figure1_beta, figure1_scenario, RdCertificate, RdScenario, Reaction,
    FIGURE1_N_POINTS, FIGURE1_T_END,
};
pub use simulate::{simulate_rd, simulate_rd_from, stability_limit, Initial, Snapshot};
