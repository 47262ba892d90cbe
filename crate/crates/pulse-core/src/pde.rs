//! Finite-difference reference solver for the two-component reaction-diffusion system
//! on a periodic domain.

use crate::error::{Error, Result};
use crate::hybrid::{stationary_field, Boundary, HybridConfig, Snapshot};
use crate::linalg::DiffusionSolver;
use crate::model::{response_auto, Heterogeneity, ModelParams};
use crate::reduced_ode::{Event, EventKind, InterfaceState, Termination, Trajectory};

/// Bistable reaction of the fast component.
pub fn reaction_f(u: f64, v: f64) -> f64 {
    (u + 0.5) * (0.5 - u) * (u - v / 2.0)
}

pub fn reaction_g(u: f64, v: f64, delta: f64) -> f64 {
    u - v + delta
}

pub const U_GUARD: f64 = 1.5;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PdeConfig {
    pub dx: f64,
    pub dt: f64,
    pub t_end: f64,
    pub record_stride: usize,
    pub x_lo: f64,
    pub x_hi: f64,
    pub snapshot_every: Option<f64>,
}

impl Default for PdeConfig {
    fn default() -> Self {
        PdeConfig {
            dx: 0.025,
            dt: 0.0025,
            t_end: 1000.0,
            record_stride: 40,
            x_lo: 0.0,
            x_hi: 120.0,
            snapshot_every: None,
        }
    }
}

impl PdeConfig {
    /// Hybrid grid on the same domain, for fields shared between the tiers.
    pub fn as_hybrid(&self) -> HybridConfig {
        HybridConfig {
            dx: self.dx,
            dt: self.dt,
            boundary: Boundary::Periodic,
            t_end: self.t_end,
            record_stride: self.record_stride,
            x_lo: self.x_lo,
            x_hi: self.x_hi,
            snapshot_every: self.snapshot_every,
        }
    }

    pub fn length(&self) -> f64 {
        self.x_hi - self.x_lo
    }

    pub fn grid(&self) -> Vec<f64> {
        self.as_hybrid().grid()
    }

    pub fn validate(&self, p: &ModelParams) -> Result<()> {
        let bad = |name, reason: String| Err(Error::InvalidParameter { name, reason });
        if !(self.dx > 0.0) || !(self.dt > 0.0) {
            return bad("dx", format!("dx = {} and dt = {} must be positive", self.dx, self.dt));
        }
        if !(self.x_hi > self.x_lo) || self.as_hybrid().cells() < 8 {
            return bad("domain", format!("[{}, {}] holds too few cells", self.x_lo, self.x_hi));
        }
        if self.record_stride == 0 {
            return bad("record_stride", "must be at least 1".into());
        }
        if !(p.epsilon > 0.0) {
            return bad("epsilon", format!("must be positive, got {}", p.epsilon));
        }
        // explicit bistable kinetics: linear rate at most 1/2 in units of 1/(tau eps)
        if self.dt * 0.5 / (p.tau * p.epsilon) >= 1.0 {
            return bad("dt", format!("{} too large for the fast kinetics (tau eps = {})", self.dt, p.tau * p.epsilon));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PdeState {
    pub grid: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub t: f64,
}

fn min_image(d: f64, len: f64) -> f64 {
    d - len * (d / len).round()
}

/// Tanh pulse on (l1, l2) with the slow field of the sharp-interface limit.
pub fn initial_pulse(l2: f64, l1: f64, p: &ModelParams, het: &Heterogeneity, cfg: &PdeConfig) -> Result<PdeState> {
    if !(l2 > l1) || l2 - l1 >= cfg.length() / 2.0 {
        return Err(Error::InvalidParameter { name: "l2", reason: format!("pulse ({l1}, {l2}) does not fit") });
    }
    let grid = cfg.grid();
    let len = cfg.length();
    let w = 2.0 * 2f64.sqrt() * p.epsilon;
    let c = 0.5 * (l1 + l2);
    let h = l2 - l1;
    let u = grid
        .iter()
        .map(|&x| {
            let y = min_image(x - c, len);
            0.5 * (((y + h / 2.0) / w).tanh() - ((y - h / 2.0) / w).tanh()) - 0.5
        })
        .collect();
    let resp = response_auto(het, p)?;
    let v = stationary_field(&grid, l2, l1, p, &resp, &cfg.as_hybrid());
    Ok(PdeState { grid, u, v, t: 0.0 })
}

/// Zero crossings of u, linearly interpolated; `(l1, l2)` with l1 the upward crossing.
pub fn extract_interfaces(s: &PdeState, len: f64) -> Option<(f64, f64)> {
    let n = s.u.len();
    let mut up = vec![];
    let mut down = vec![];
    for i in 0..n {
        let j = (i + 1) % n;
        let (a, b) = (s.u[i], s.u[j]);
        let xj = if j == 0 { s.grid[0] + len } else { s.grid[j] };
        if (a < 0.0) != (b < 0.0) {
            let x = s.grid[i] + (xj - s.grid[i]) * a / (a - b);
            if a < 0.0 {
                up.push(x)
            } else {
                down.push(x)
            }
        }
    }
    if up.len() != 1 || down.len() != 1 {
        return None;
    }
    let (l1, mut l2) = (up[0], down[0]);
    if l2 < l1 {
        l2 += len;
    }
    Some((l1, l2))
}

#[derive(Clone, Debug)]
pub struct PdeSolver {
    cfg: PdeConfig,
    u_solver: DiffusionSolver,
    v_solver: DiffusionSolver,
    delta: Vec<f64>,
    rate: f64,
}

impl PdeSolver {
    pub fn new(p: &ModelParams, het: &Heterogeneity, cfg: &PdeConfig) -> Result<Self> {
        cfg.validate(p)?;
        het.validate()?;
        let n = cfg.as_hybrid().cells();
        let dx = cfg.length() / n as f64;
        let ku = p.epsilon / p.tau * cfg.dt / (2.0 * dx * dx);
        let kv = p.d * cfg.dt / (2.0 * dx * dx);
        Ok(PdeSolver {
            cfg: *cfg,
            u_solver: DiffusionSolver::new(n, ku, true),
            v_solver: DiffusionSolver::new(n, kv, true),
            delta: cfg.grid().iter().map(|&x| het.cell_average(x, dx, p.delta0)).collect(),
            rate: 1.0 / (p.tau * p.epsilon),
        })
    }

    pub fn step(&self, s: &mut PdeState) -> Result<()> {
        let dt = self.cfg.dt;
        let n = s.u.len();
        let mut ru = vec![0.0; n];
        let mut rv = vec![0.0; n];
        self.u_solver.explicit_half(&s.u, &mut ru);
        self.v_solver.explicit_half(&s.v, &mut rv);
        for i in 0..n {
            ru[i] += dt * self.rate * reaction_f(s.u[i], s.v[i]);
            rv[i] += dt * reaction_g(s.u[i], s.v[i], self.delta[i]);
        }
        s.u = self.u_solver.solve(&ru);
        s.v = self.v_solver.solve(&rv);
        s.t += dt;
        if s.u.iter().any(|u| !(u.abs() < U_GUARD)) || s.v.iter().any(|v| !v.is_finite()) {
            return Err(Error::Blowup { t: s.t });
        }
        Ok(())
    }
}

pub fn step_pde(s: &PdeState, p: &ModelParams, het: &Heterogeneity, cfg: &PdeConfig) -> Result<PdeState> {
    let solver = PdeSolver::new(p, het, cfg)?;
    let mut next = s.clone();
    solver.step(&mut next)?;
    Ok(next)
}

#[derive(Clone, Debug)]
pub struct PdeRun {
    pub trajectory: Trajectory,
    pub snapshots: Vec<Snapshot>,
    pub final_state: PdeState,
}

/// Integrate and track the two interfaces; velocities are backward differences
/// between recorded samples. Stops when the interface count changes.
pub fn run_pde(s0: PdeState, p: &ModelParams, het: &Heterogeneity, cfg: &PdeConfig) -> Result<PdeRun> {
    let solver = PdeSolver::new(p, het, cfg)?;
    let len = cfg.length();
    let mut s = s0;
    let mut traj = Trajectory::new();
    let mut snapshots = vec![];
    let mut next_snap = cfg.snapshot_every.map(|_| 0.0);
    let mut prev: Option<(f64, f64, f64)> = None;
    let track = |s: &PdeState, traj: &mut Trajectory, prev: &mut Option<(f64, f64, f64)>| -> bool {
        let Some((a, b)) = extract_interfaces(s, len) else { return false };
        let (l1, l2, r1, r2) = match *prev {
            None => (a, b, 0.0, 0.0),
            Some((t0, p1, p2)) => {
                let l1 = p1 + min_image(a - p1, len);
                let l2 = l1 + (b - a);
                let dt = s.t - t0;
                (l1, l2, (l1 - p1) / dt, (l2 - p2) / dt)
            }
        };
        *prev = Some((s.t, l1, l2));
        traj.push(s.t, InterfaceState::new(l2, l1, r2, r1));
        true
    };
    if !track(&s, &mut traj, &mut prev) {
        return Err(Error::InvalidParameter { name: "initial state", reason: "needs exactly two interfaces".into() });
    }
    let steps = (cfg.t_end / cfg.dt).round() as usize;
    for step in 1..=steps {
        if let (Some(ts), Some(every)) = (next_snap, cfg.snapshot_every) {
            if s.t >= ts - 1e-9 {
                snapshots.push(Snapshot { t: s.t, x: s.grid.clone(), columns: vec![s.u.clone(), s.v.clone()] });
                next_snap = Some(ts + every);
            }
        }
        solver.step(&mut s)?;
        if (step.is_multiple_of(cfg.record_stride) || step == steps) && !track(&s, &mut traj, &mut prev) {
            let merged = s.u.iter().all(|&u| u < 0.0);
            let (kind, term) = if merged {
                (EventKind::InterfacesMerged, Termination::InterfacesMerged)
            } else {
                (EventKind::Decomposed, Termination::Decomposed)
            };
            traj.events.push(Event { t: s.t, kind, position: f64::NAN });
            traj.termination = term;
            break;
        }
    }
    Ok(PdeRun { trajectory: traj, snapshots, final_state: s })
}
