//! Fixed-step RK4 integration and empirical checks of the decay estimates
//! that contraction, partial contraction and semi-contraction guarantee.

pub mod decay;
pub mod equilibrium;
pub mod rk4;

pub use decay::{
    verify_coppel_envelope, verify_fieldnorm_decay, verify_pairwise_decay, verify_partial_decay, verify_semi_decay,
    CoppelReports, DecayReport, Quantity, Window, DEFAULT_SLACK,
};
pub use equilibrium::{find_equilibrium, find_equilibrium_with, Equilibrium, EquilibriumOptions};
pub use rk4::{integrate_rk4, rk4_drive, Dynamics, TimeGrid, Trajectory};
