//! Interface equations for the pulse: full mass-matrix form, its truncation, the
//! homogeneous width-velocity system, isolated fronts, and the constant-interaction
//! baseline, with fixed and adaptive Runge-Kutta integration.

mod integrate;
mod rhs;

pub use integrate::{
    dopri5_step, integrate, integrate_observed, rk4_step, Event, EventKind, IntegratorConfig, Method, Termination,
    Trajectory,
};
pub use rhs::{
    mass_matrix_det, rhs, rhs_full, rhs_homogeneous3d, rhs_legacy, rhs_single_front, rhs_truncated, InterfaceState,
    LegacyCoefficients, OdeVariant, Side,
};

use crate::analysis::{tp_exact, StationaryPulse};
use crate::error::Result;
use crate::model::{DerivedCoefficients, ModelParams, ResponseProfile};

/// Distance, in units of sqrt(D), between an incoming pulse and the leftmost edge.
pub const INCOMING_OFFSET: f64 = 30.0;

/// Right-moving traveling pulse placed `INCOMING_OFFSET * sqrt(D)` to the left of the
/// heterogeneity (or centred at 0 for a homogeneous medium).
pub fn incoming_tp(
    p: &ModelParams,
    c: &DerivedCoefficients,
    resp: &ResponseProfile,
) -> Result<(InterfaceState, StationaryPulse)> {
    let tp = tp_exact(p, c)?;
    let left = resp.support().map(|(a, _)| a - INCOMING_OFFSET * p.sqrt_d()).unwrap_or(0.0);
    Ok((InterfaceState::centered(left - tp.h_star / 2.0, tp.h_star, tp.r_star), tp))
}

/// Standing pulse at the origin with both interfaces nudged by `kick`.
pub fn kicked_sp(c: &DerivedCoefficients, kick: f64) -> InterfaceState {
    InterfaceState::centered(0.0, c.h0, kick)
}

/// Width-velocity coordinates (h, r2, r1).
pub fn project(s: &InterfaceState) -> [f64; 3] {
    [s.h(), s.r2, s.r1]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_matches_width_system() {
        let p = ModelParams::new(0.1733, 1.0, 0.001).unwrap();
        let c = DerivedCoefficients::for_params(&p);
        let resp = ResponseProfile::constant(p.delta0);
        let s0 = kicked_sp(&c, 0.1);
        let cfg = IntegratorConfig { t_end: 200.0, record_stride: 1, ..Default::default() };
        let traj = integrate(&OdeVariant::Homogeneous3D, s0, &p, &c, &resp, &cfg).unwrap();
        let mut f = |y: &[f64; 3]| Ok(rhs_homogeneous3d(*y, &p, &c));
        let mut y = project(&s0);
        for (i, s) in traj.states.iter().enumerate().skip(1) {
            y = rk4_step(&mut f, &y, traj.times[i] - traj.times[i - 1]).unwrap();
            let q = project(s);
            for k in 0..3 {
                assert!((q[k] - y[k]).abs() < 1e-9, "t={} k={k}", traj.times[i]);
            }
        }
    }
}
