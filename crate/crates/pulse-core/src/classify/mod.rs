//! Labelling of long-time behaviour: homogeneous attractors, scattering outcomes
//! at a heterogeneity, phase-diagram sweeps, residence times and trapping.

mod homogeneous;
mod scattering;
mod sweep;

pub use homogeneous::{
    classify_homogeneous, classify_homogeneous_report, window_stats, BehaviorClass, ClassifyConfig, HomogeneousReport,
    WindowStats, V_TOL_FLOOR,
};
pub use scattering::{
    classify_scattering, residence_time, run_scattering, run_trap, trap_check, turning_point, ScatterConfig,
    ScatterLabel, ScatterOutcome, ScatterRun, TrapOutcome,
};
pub use sweep::{
    bisect_boundary, bump, scatter_label, sweep_phase_diagram, BoundaryPoint, PhaseCell, PhaseDiagram, SweepConfig,
};
