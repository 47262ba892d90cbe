use rayon::prelude::*;

use super::scattering::{run_scattering, ScatterConfig, ScatterLabel, ScatterOutcome};
use crate::error::{Error, Result};
use crate::model::{DerivedCoefficients, Heterogeneity, ModelParams};

/// Sharp bump of width `d0` and height `eps0` centred at the origin.
pub fn bump(d0: f64, eps0: f64) -> Heterogeneity {
    Heterogeneity::SharpBump { eps0, d0, xc: 0.0 }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseCell {
    pub d0: f64,
    pub eps0: f64,
    pub outcome: ScatterOutcome,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryPoint {
    pub d0: f64,
    pub eps_star: f64,
    /// Labels on the low and high side, e.g. `PEN|REB`.
    pub kind: String,
    pub bracket: (f64, f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseDiagram {
    pub cells: Vec<PhaseCell>,
    pub boundaries: Vec<BoundaryPoint>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepConfig {
    pub scatter: ScatterConfig,
    /// Bisection tolerance on eps0; `None` skips boundary refinement.
    pub boundary_tol: Option<f64>,
    /// How many times an unresolved midpoint is retried with a doubled horizon.
    pub horizon_retries: u32,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig { scatter: ScatterConfig::default(), boundary_tol: Some(1e-5), horizon_retries: 2 }
    }
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidParameter { name: "jobs", reason: e.to_string() })
}

/// Scatter label at one (d0, eps0), retrying unresolved runs with longer horizons.
pub fn scatter_label(
    p: &ModelParams,
    c: &DerivedCoefficients,
    d0: f64,
    eps0: f64,
    cfg: &SweepConfig,
) -> Result<ScatterOutcome> {
    let mut sc = cfg.scatter;
    let mut out = run_scattering(p, c, &bump(d0, eps0), &sc)?.outcome;
    for _ in 0..cfg.horizon_retries {
        if out.label.is_resolved() {
            break;
        }
        sc.integrator.t_end *= 2.0;
        out = run_scattering(p, c, &bump(d0, eps0), &sc)?.outcome;
    }
    Ok(out)
}

/// Locate the label change between `lo` and `hi` (labels must differ and be resolved).
pub fn bisect_boundary(
    p: &ModelParams,
    c: &DerivedCoefficients,
    d0: f64,
    (mut lo, mut hi): (f64, f64),
    (lab_lo, mut lab_hi): (ScatterLabel, ScatterLabel),
    tol: f64,
    cfg: &SweepConfig,
) -> Result<BoundaryPoint> {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let lab = scatter_label(p, c, d0, mid, cfg)?.label;
        if lab == lab_lo {
            lo = mid;
        } else if lab.is_resolved() {
            // a third label in between narrows onto the transition nearest the low side
            hi = mid;
            lab_hi = lab;
        } else {
            break;
        }
    }
    Ok(BoundaryPoint { d0, eps_star: 0.5 * (lo + hi), kind: format!("{}|{}", lab_lo, lab_hi), bracket: (lo, hi) })
}

/// Label every (d0, eps0) cell in parallel and refine the boundaries along eps0.
pub fn sweep_phase_diagram(
    p: &ModelParams,
    c: &DerivedCoefficients,
    d0s: &[f64],
    eps0s: &[f64],
    cfg: &SweepConfig,
    jobs: usize,
) -> Result<PhaseDiagram> {
    if d0s.is_empty() || eps0s.is_empty() {
        return Err(Error::InvalidParameter { name: "axes", reason: "both sweep axes need at least one value".into() });
    }
    if eps0s.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter { name: "eps0", reason: "values must be strictly increasing".into() });
    }
    let pool = pool(jobs.max(1))?;
    let grid: Vec<(f64, f64)> = d0s.iter().flat_map(|&d| eps0s.iter().map(move |&e| (d, e))).collect();
    let cells: Vec<PhaseCell> = pool.install(|| {
        grid.par_iter()
            .map(|&(d0, eps0)| scatter_label(p, c, d0, eps0, cfg).map(|outcome| PhaseCell { d0, eps0, outcome }))
            .collect::<Result<Vec<_>>>()
    })?;
    let mut brackets = vec![];
    for (row, &d0) in d0s.iter().enumerate() {
        let r = &cells[row * eps0s.len()..(row + 1) * eps0s.len()];
        for w in r.windows(2) {
            let (a, b) = (w[0].outcome.label, w[1].outcome.label);
            if a != b && a.is_resolved() && b.is_resolved() {
                brackets.push((d0, (w[0].eps0, w[1].eps0), (a, b)));
            }
        }
    }
    let boundaries = match cfg.boundary_tol {
        None => brackets
            .iter()
            .map(|&(d0, (lo, hi), (a, b))| BoundaryPoint {
                d0,
                eps_star: 0.5 * (lo + hi),
                kind: format!("{a}|{b}"),
                bracket: (lo, hi),
            })
            .collect(),
        Some(tol) => pool.install(|| {
            brackets
                .par_iter()
                .map(|&(d0, span, labs)| bisect_boundary(p, c, d0, span, labs, tol, cfg))
                .collect::<Result<Vec<_>>>()
        })?,
    };
    Ok(PhaseDiagram { cells, boundaries })
}
