//! Orbits, cycle times, eigenvectors and (super/sub-)eigenspaces.
//!
//! Everything here works on additive coordinates through the
//! [`TopicalMap`](crate::fnmodel::TopicalMap) trait, so the same code runs on
//! a parsed function and on its iterates.

mod eigen;
mod orbit;
mod spaces;

pub use eigen::{eigen_solve, orbit_spread_bounded, EigenOptions, EigenReport, EigenStatus};
pub(crate) use eigen::liminf_round;
pub use orbit::{
    collatz_wielandt_upper, collatz_wielandt_value, cycle_times, orbit, CycleTimeEstimate, OrbitTrace,
    CW_SAMPLE_RADIUS,
};
pub use spaces::{
    byk_reduce, coordinate_realization_check, membership, super_diameter_bound, DiameterBound, Membership,
    RealizationCheck, MEMBERSHIP_TOL,
};
