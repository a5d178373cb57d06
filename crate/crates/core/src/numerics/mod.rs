//! Flows, Euler-Maruyama simulation, scaling maps and the distributional
//! limit check.

pub mod control;
pub mod dist_limit;
pub mod energy;
pub mod flow;
pub mod ode;
pub mod path;
pub mod scale;
pub mod sde;

pub use control::{Control, PiecewiseLinearControl, SampledRateControl};
pub use dist_limit::{dist_limit_check, DistLimitConfig, DistLimitReport};
pub use flow::{flow, flow_endpoint, uniform_grid};
pub use path::Path;
pub use scale::{inverse_scale_map, scale_map};
pub use sde::{euler_maruyama, rng_for};
