//! Vector fields, linear time-varying systems, contraction rates and the
//! built-in catalog.

pub mod catalog;
pub mod model;
pub mod rate;

pub use catalog::{builtin_system, CatalogSystem, CATALOG_NAMES};
pub use model::{default_fd_step, jacobian_fd, LtvSystem, SampleBox, VectorFieldModel};
pub use rate::RateFunction;
