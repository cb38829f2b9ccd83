//! Weighted point-to-point registration: closed-form weighted Kabsch, an ICP
//! loop driven by it, and a multi-start wrapper over the 24 axis-aligned
//! orientations.

mod icp;
mod kabsch;
mod multistart;

pub use icp::{icp_weighted, icp_weighted_indexed, IcpParams, RegistrationResult};
pub use kabsch::weighted_kabsch;
pub use multistart::{
    cube_rotations, multi_start, multi_start_indexed, multi_start_runs, select_best, start_transforms,
};
