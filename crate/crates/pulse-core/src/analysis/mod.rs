//! Closed-form stationary states, bifurcation points and their numerical cross-checks.

mod fronts;
mod pulse;
mod spectrum;

pub use fronts::{
    eps0_for_front, front_residual, front_velocities, front_velocities_exact, mirror_front_type, stationary_front,
    FixedPointType, FrontBranch, FrontVelocities, StationaryFront,
};
pub use pulse::{
    bifurcation_points, bifurcation_points_with, sp_eigenvalues, sp_homogeneous, sp_jacobian, tp_exact,
    tp_perturbative, BifurcationPoints, PulseKind, StationaryPulse,
};
pub use spectrum::{
    eigenvalues, find_crossing, het_hopf_sweep, het_sp, leading_complex_real, leading_real, legacy_jacobian, legacy_sp,
    numeric_jacobian, scan_bifurcations, truncated_jacobian, NumericBifurcations, COMPLEX_EPS, FD_STEP,
};
