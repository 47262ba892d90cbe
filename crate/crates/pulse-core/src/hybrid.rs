//! Sharp-interface limit: the slow field on a grid, driven by a piecewise-constant
//! fast component that switches at two moving interfaces.

use crate::error::{Error, Result};
use crate::linalg::DiffusionSolver;
use crate::model::{box_response, response_auto, Heterogeneity, ModelParams, ResponseProfile};
use crate::reduced_ode::{Event, EventKind, InterfaceState, Termination, Trajectory};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    Periodic,
    NoFlux,
}

impl Boundary {
    pub fn as_str(&self) -> &'static str {
        match self {
            Boundary::Periodic => "periodic",
            Boundary::NoFlux => "no-flux",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HybridConfig {
    pub dx: f64,
    pub dt: f64,
    pub boundary: Boundary,
    pub t_end: f64,
    pub record_stride: usize,
    pub x_lo: f64,
    pub x_hi: f64,
    /// Interval between stored field snapshots; `None` stores none.
    pub snapshot_every: Option<f64>,
}

impl Default for HybridConfig {
    fn default() -> Self {
        HybridConfig {
            dx: 0.05,
            dt: 0.0025,
            boundary: Boundary::Periodic,
            t_end: 1000.0,
            record_stride: 40,
            x_lo: 0.0,
            x_hi: 120.0,
            snapshot_every: None,
        }
    }
}

impl HybridConfig {
    pub fn length(&self) -> f64 {
        self.x_hi - self.x_lo
    }

    /// Number of cells; nodes sit at cell centres.
    pub fn cells(&self) -> usize {
        (self.length() / self.dx).round() as usize
    }

    pub fn grid(&self) -> Vec<f64> {
        let dx = self.length() / self.cells() as f64;
        (0..self.cells()).map(|i| self.x_lo + (i as f64 + 0.5) * dx).collect()
    }

    pub fn validate(&self, p: &ModelParams) -> Result<()> {
        let bad = |name, reason: String| Err(Error::InvalidParameter { name, reason });
        if !(self.dx > 0.0) {
            return bad("dx", format!("must be positive, got {}", self.dx));
        }
        if !(self.dt > 0.0) {
            return bad("dt", format!("must be positive, got {}", self.dt));
        }
        if !(self.x_hi > self.x_lo) || self.cells() < 8 {
            return bad("domain", format!("[{}, {}] holds too few cells", self.x_lo, self.x_hi));
        }
        if self.record_stride == 0 {
            return bad("record_stride", "must be at least 1".into());
        }
        // explicit relaxation and one-cell-per-step interface motion
        let speed = 1.0 / (2f64.sqrt() * p.tau);
        if self.dt >= 1.0 || self.dt * speed >= self.dx {
            return bad("dt", format!("{} violates the explicit step limit for dx = {}", self.dt, self.dx));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FieldState {
    pub grid: Vec<f64>,
    pub v: Vec<f64>,
    pub l2: f64,
    pub l1: f64,
    pub t: f64,
}

impl FieldState {
    pub fn interfaces(&self) -> InterfaceState {
        InterfaceState::new(self.l2, self.l1, 0.0, 0.0)
    }
}

/// +1/2 on (l1, l2], -1/2 elsewhere.
pub fn u_indicator(x: f64, l2: f64, l1: f64) -> f64 {
    if x > l1 && x <= l2 {
        0.5
    } else {
        -0.5
    }
}

fn wrap(x: f64, lo: f64, len: f64) -> f64 {
    lo + (x - lo).rem_euclid(len)
}

fn pulse_images(l2: f64, l1: f64, cfg: &HybridConfig) -> Vec<(f64, f64)> {
    match cfg.boundary {
        Boundary::NoFlux => vec![(l1, l2)],
        Boundary::Periodic => {
            let len = cfg.length();
            let a = wrap(l1, cfg.x_lo, len);
            let b = a + (l2 - l1);
            vec![(a - len, b - len), (a, b), (a + len, b + len)]
        }
    }
}

/// Cell averages of the indicator (unwrapped interfaces on a periodic grid).
pub fn u_cell_average(grid: &[f64], l2: f64, l1: f64, cfg: &HybridConfig) -> Vec<f64> {
    let dx = cfg.length() / grid.len() as f64;
    let images = pulse_images(l2, l1, cfg);
    grid.iter()
        .map(|&x| {
            let (lo, hi) = (x - dx / 2.0, x + dx / 2.0);
            let cover: f64 = images.iter().map(|&(a, b)| (hi.min(b) - lo.max(a)).max(0.0)).sum();
            cover / dx - 0.5
        })
        .collect()
}

/// Steady slow field for interfaces held at (l1, l2).
pub fn stationary_field(
    grid: &[f64],
    l2: f64,
    l1: f64,
    p: &ModelParams,
    resp: &ResponseProfile,
    cfg: &HybridConfig,
) -> Vec<f64> {
    let s = p.sqrt_d();
    let images = pulse_images(l2, l1, cfg);
    grid.iter()
        .map(|&x| resp.eval(x) - 0.5 + images.iter().map(|&(a, b)| box_response(x, a, b, s)).sum::<f64>())
        .collect()
}

/// Slow field linearly interpolated between nodes.
pub fn sample(v: &[f64], x: f64, cfg: &HybridConfig) -> f64 {
    let n = v.len();
    let dx = cfg.length() / n as f64;
    let pos = match cfg.boundary {
        Boundary::Periodic => (wrap(x, cfg.x_lo, cfg.length()) - cfg.x_lo) / dx - 0.5,
        Boundary::NoFlux => ((x - cfg.x_lo) / dx - 0.5).clamp(0.0, (n - 1) as f64),
    };
    let j = pos.floor();
    let t = pos - j;
    let j = j as isize;
    let at = |i: isize| v[i.rem_euclid(n as isize) as usize];
    (1.0 - t) * at(j) + t * at(j + 1)
}

/// Pre-factored stepper for one parameter set.
#[derive(Clone, Debug)]
pub struct HybridSolver {
    cfg: HybridConfig,
    solver: DiffusionSolver,
    delta: Vec<f64>,
    speed: f64,
}

impl HybridSolver {
    pub fn new(p: &ModelParams, het: &Heterogeneity, cfg: &HybridConfig) -> Result<Self> {
        cfg.validate(p)?;
        het.validate()?;
        let n = cfg.cells();
        let dx = cfg.length() / n as f64;
        let k = p.d * cfg.dt / (2.0 * dx * dx);
        let grid = cfg.grid();
        Ok(HybridSolver {
            cfg: *cfg,
            solver: DiffusionSolver::new(n, k, cfg.boundary == Boundary::Periodic),
            delta: grid.iter().map(|&x| het.cell_average(x, dx, p.delta0)).collect(),
            speed: 1.0 / (2f64.sqrt() * p.tau),
        })
    }

    /// Interface velocities (r2, r1) for the current field.
    pub fn velocities(&self, s: &FieldState) -> (f64, f64) {
        (-self.speed * sample(&s.v, s.l2, &self.cfg), self.speed * sample(&s.v, s.l1, &self.cfg))
    }

    pub fn step(&self, s: &mut FieldState) -> Result<()> {
        let dt = self.cfg.dt;
        let u = u_cell_average(&s.grid, s.l2, s.l1, &self.cfg);
        let mut rhs = vec![0.0; s.v.len()];
        self.solver.explicit_half(&s.v, &mut rhs);
        for i in 0..rhs.len() {
            rhs[i] += dt * (u[i] - s.v[i] + self.delta[i]);
        }
        s.v = self.solver.solve(&rhs);
        let (r2, r1) = self.velocities(s);
        s.l2 += dt * r2;
        s.l1 += dt * r1;
        s.t += dt;
        if !(s.l1.is_finite() && s.l2.is_finite()) || s.v.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { t: s.t });
        }
        if self.cfg.boundary == Boundary::NoFlux {
            if s.l1 <= self.cfg.x_lo {
                return Err(Error::DomainExit { side: "left", t: s.t });
            }
            if s.l2 >= self.cfg.x_hi {
                return Err(Error::DomainExit { side: "right", t: s.t });
            }
        }
        Ok(())
    }
}

pub fn initial_state(
    l2: f64,
    l1: f64,
    p: &ModelParams,
    resp: &ResponseProfile,
    cfg: &HybridConfig,
) -> Result<FieldState> {
    if !(l2 > l1) {
        return Err(Error::InvalidParameter { name: "l2", reason: format!("{l2} must exceed l1 = {l1}") });
    }
    if cfg.boundary == Boundary::NoFlux && (l1 <= cfg.x_lo || l2 >= cfg.x_hi) {
        return Err(Error::InvalidParameter { name: "l1", reason: "interfaces must lie inside the domain".into() });
    }
    let grid = cfg.grid();
    let v = stationary_field(&grid, l2, l1, p, resp, cfg);
    Ok(FieldState { grid, v, l2, l1, t: 0.0 })
}

pub fn step_hybrid(s: &FieldState, p: &ModelParams, het: &Heterogeneity, cfg: &HybridConfig) -> Result<FieldState> {
    let solver = HybridSolver::new(p, het, cfg)?;
    let mut next = s.clone();
    solver.step(&mut next)?;
    Ok(next)
}

#[derive(Clone, Debug)]
pub struct Snapshot {
    pub t: f64,
    pub x: Vec<f64>,
    pub columns: Vec<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub struct FieldRun {
    pub trajectory: Trajectory,
    pub snapshots: Vec<Snapshot>,
    pub final_state: FieldState,
}

pub fn run_hybrid(s0: FieldState, p: &ModelParams, het: &Heterogeneity, cfg: &HybridConfig) -> Result<FieldRun> {
    let solver = HybridSolver::new(p, het, cfg)?;
    let mut s = s0;
    let mut traj = Trajectory::new();
    let mut snapshots = vec![];
    let record = |s: &FieldState, traj: &mut Trajectory| {
        let (r2, r1) = solver.velocities(s);
        traj.push(s.t, InterfaceState::new(s.l2, s.l1, r2, r1));
    };
    let mut next_snap = cfg.snapshot_every.map(|_| 0.0);
    let snap = |s: &FieldState| Snapshot { t: s.t, x: s.grid.clone(), columns: vec![s.v.clone()] };
    record(&s, &mut traj);
    let steps = (cfg.t_end / cfg.dt).round() as usize;
    let dx = cfg.length() / cfg.cells() as f64;
    for step in 1..=steps {
        if let (Some(ts), Some(every)) = (next_snap, cfg.snapshot_every) {
            if s.t >= ts - 1e-9 {
                snapshots.push(snap(&s));
                next_snap = Some(ts + every);
            }
        }
        solver.step(&mut s)?;
        if s.l2 - s.l1 < dx {
            record(&s, &mut traj);
            traj.events.push(Event { t: s.t, kind: EventKind::InterfacesMerged, position: 0.5 * (s.l1 + s.l2) });
            traj.termination = Termination::InterfacesMerged;
            return Ok(FieldRun { trajectory: traj, snapshots, final_state: s });
        }
        if step.is_multiple_of(cfg.record_stride) || step == steps {
            record(&s, &mut traj);
        }
    }
    Ok(FieldRun { trajectory: traj, snapshots, final_state: s })
}

/// Convenience: pulse of width `h` centred at `center`, started from its stationary field.
pub fn run_hybrid_pulse(
    center: f64,
    h: f64,
    p: &ModelParams,
    het: &Heterogeneity,
    cfg: &HybridConfig,
) -> Result<FieldRun> {
    let resp = response_auto(het, p)?;
    let s0 = initial_state(center + h / 2.0, center - h / 2.0, p, &resp, cfg)?;
    run_hybrid(s0, p, het, cfg)
}
