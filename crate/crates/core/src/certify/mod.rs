//! Sampling-based certification of contraction-type sufficient conditions.
//!
//! Every check draws points uniformly from the model's sample box (and times
//! from `[0, t_probe]`), evaluates a margin that is `≤ 0` exactly when the
//! inequality holds at that point, and reports the worst one.

pub mod certificate;
pub mod checks;
pub mod sampling;

pub use certificate::{settle_margin, Certificate, Condition, Verdict, Witness};
pub use checks::{
    check_integral_contractivity, check_integral_partial, check_integral_semi, check_kernel_invariance,
    check_operator_measure, check_semi_measure_bound, Check,
};
pub use sampling::{sample_rng, Sampling, DEFAULT_SAMPLES, DEFAULT_T_PROBE};
