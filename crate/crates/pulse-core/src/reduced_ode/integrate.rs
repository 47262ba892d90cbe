use super::rhs::{mass_matrix_det, rhs, InterfaceState, OdeVariant};
use crate::analysis::front_velocities_exact;
use crate::error::{Error, Result};
use crate::model::{DerivedCoefficients, ModelParams, ResponseProfile};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Rk4Fixed,
    Rk45Adaptive,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub t_end: f64,
    pub method: Method,
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Width beyond which a pulse counts as split; `None` means 50 sqrt(D).
    pub h_blowup: Option<f64>,
    pub record_stride: usize,
    /// Extra time integrated after the split is latched, so the free fronts settle.
    pub post_latch: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            dt: 0.01,
            t_end: 3000.0,
            method: Method::Rk4Fixed,
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            h_blowup: None,
            record_stride: 10,
            post_latch: 100.0,
        }
    }
}

impl IntegratorConfig {
    pub fn h_blowup(&self, p: &ModelParams) -> f64 {
        self.h_blowup.unwrap_or(50.0 * p.sqrt_d())
    }

    pub fn validate(&self, p: &ModelParams, s0: &InterfaceState) -> Result<()> {
        let bad = |name, reason: String| Err(Error::InvalidParameter { name, reason });
        if !(self.dt > 0.0) {
            return bad("dt", format!("must be positive, got {}", self.dt));
        }
        if !(self.t_end > 0.0) {
            return bad("t_end", format!("must be positive, got {}", self.t_end));
        }
        if self.record_stride == 0 {
            return bad("record_stride", "must be at least 1".into());
        }
        if self.h_blowup(p) <= s0.h() {
            return bad("h_blowup", format!("{} does not exceed the initial width {}", self.h_blowup(p), s0.h()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EventKind {
    /// Left interface crosses a heterogeneity edge.
    LeftEdge,
    RightEdge,
    Decomposed,
    MassMatrixSingular,
    InterfacesMerged,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::LeftEdge => "l1-edge",
            EventKind::RightEdge => "l2-edge",
            EventKind::Decomposed => "decomposed",
            EventKind::MassMatrixSingular => "mass-matrix-singular",
            EventKind::InterfacesMerged => "interfaces-merged",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Event {
    pub t: f64,
    pub kind: EventKind,
    pub position: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    Horizon,
    Decomposed,
    Stopped,
    MassMatrixSingular,
    InterfacesMerged,
    DomainExit,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<InterfaceState>,
    pub events: Vec<Event>,
    pub termination: Termination,
}

impl Trajectory {
    pub fn new() -> Self {
        Trajectory { times: vec![], states: vec![], events: vec![], termination: Termination::Horizon }
    }

    pub fn push(&mut self, t: f64, s: InterfaceState) {
        if self.times.last().is_some_and(|&last| t <= last) {
            return;
        }
        self.times.push(t);
        self.states.push(s);
    }

    pub fn last(&self) -> Option<(f64, InterfaceState)> {
        Some((*self.times.last()?, *self.states.last()?))
    }

    pub fn t_end(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    pub fn decomposed(&self) -> bool {
        self.events.iter().any(|e| e.kind == EventKind::Decomposed)
    }

    /// Samples with `t0 <= t <= t1`.
    pub fn window(&self, t0: f64, t1: f64) -> impl Iterator<Item = (f64, &InterfaceState)> {
        self.times.iter().copied().zip(self.states.iter()).filter(move |(t, _)| *t >= t0 && *t <= t1)
    }
}

impl Default for Trajectory {
    fn default() -> Self {
        Self::new()
    }
}

pub fn rk4_step<const N: usize, F>(f: &mut F, y: &[f64; N], dt: f64) -> Result<[f64; N]>
where
    F: FnMut(&[f64; N]) -> Result<[f64; N]>,
{
    let axpy = |a: &[f64; N], k: &[f64; N], s: f64| std::array::from_fn::<f64, N, _>(|i| a[i] + s * k[i]);
    let k1 = f(y)?;
    let k2 = f(&axpy(y, &k1, dt / 2.0))?;
    let k3 = f(&axpy(y, &k2, dt / 2.0))?;
    let k4 = f(&axpy(y, &k3, dt))?;
    Ok(std::array::from_fn(|i| y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])))
}

/// One Dormand-Prince 5(4) step; returns the fifth-order solution and the error estimate.
pub fn dopri5_step<const N: usize, F>(f: &mut F, y: &[f64; N], dt: f64) -> Result<([f64; N], [f64; N])>
where
    F: FnMut(&[f64; N]) -> Result<[f64; N]>,
{
    const A21: f64 = 1.0 / 5.0;
    const A31: f64 = 3.0 / 40.0;
    const A32: f64 = 9.0 / 40.0;
    const A41: f64 = 44.0 / 45.0;
    const A42: f64 = -56.0 / 15.0;
    const A43: f64 = 32.0 / 9.0;
    const A51: f64 = 19372.0 / 6561.0;
    const A52: f64 = -25360.0 / 2187.0;
    const A53: f64 = 64448.0 / 6561.0;
    const A54: f64 = -212.0 / 729.0;
    const A61: f64 = 9017.0 / 3168.0;
    const A62: f64 = -355.0 / 33.0;
    const A63: f64 = 46732.0 / 5247.0;
    const A64: f64 = 49.0 / 176.0;
    const A65: f64 = -5103.0 / 18656.0;
    const B1: f64 = 35.0 / 384.0;
    const B3: f64 = 500.0 / 1113.0;
    const B4: f64 = 125.0 / 192.0;
    const B5: f64 = -2187.0 / 6784.0;
    const B6: f64 = 11.0 / 84.0;
    const E1: f64 = 71.0 / 57600.0;
    const E3: f64 = -71.0 / 16695.0;
    const E4: f64 = 71.0 / 1920.0;
    const E5: f64 = -17253.0 / 339200.0;
    const E6: f64 = 22.0 / 525.0;
    const E7: f64 = -1.0 / 40.0;

    let stage = |coef: &[(f64, &[f64; N])]| -> [f64; N] {
        std::array::from_fn(|i| y[i] + dt * coef.iter().map(|(c, k)| c * k[i]).sum::<f64>())
    };
    let k1 = f(y)?;
    let k2 = f(&stage(&[(A21, &k1)]))?;
    let k3 = f(&stage(&[(A31, &k1), (A32, &k2)]))?;
    let k4 = f(&stage(&[(A41, &k1), (A42, &k2), (A43, &k3)]))?;
    let k5 = f(&stage(&[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]))?;
    let k6 = f(&stage(&[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]))?;
    let y5 = stage(&[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    let k7 = f(&y5)?;
    let err =
        std::array::from_fn(|i| dt * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]));
    Ok((y5, err))
}

/// Irreversibility test for a split pulse: both fronts beyond the heterogeneity
/// and each moving outward faster than the unstable isolated-front speed.
#[derive(Clone, Copy, Debug)]
struct SplitLatch {
    h_blowup: f64,
    zone: Option<(f64, f64)>,
    r_saddle: f64,
}

impl SplitLatch {
    fn new(p: &ModelParams, c: &DerivedCoefficients, resp: &ResponseProfile, cfg: &IntegratorConfig) -> Self {
        let margin = 10.0 * p.sqrt_d();
        let r_saddle = if p.tau < c.tau_c {
            front_velocities_exact(p, c, resp.far_field()).map(|v| v.r_zero.abs()).unwrap_or(0.0)
        } else {
            0.0
        };
        SplitLatch { h_blowup: cfg.h_blowup(p), zone: resp.support().map(|(a, b)| (a - margin, b + margin)), r_saddle }
    }

    fn split(&self, s: &InterfaceState) -> bool {
        if s.h() <= self.h_blowup {
            return false;
        }
        let clear = self.zone.is_none_or(|(a, b)| s.l1 < a && s.l2 > b);
        clear && s.r2 > self.r_saddle && s.r1 < -self.r_saddle
    }
}

pub fn integrate(
    variant: &OdeVariant,
    s0: InterfaceState,
    p: &ModelParams,
    c: &DerivedCoefficients,
    resp: &ResponseProfile,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    integrate_observed(variant, s0, p, c, resp, cfg, |_, _| false)
}

/// Like [`integrate`], with `stop(t, state)` polled after every accepted step.
pub fn integrate_observed<F>(
    variant: &OdeVariant,
    s0: InterfaceState,
    p: &ModelParams,
    c: &DerivedCoefficients,
    resp: &ResponseProfile,
    cfg: &IntegratorConfig,
    mut stop: F,
) -> Result<Trajectory>
where
    F: FnMut(f64, &InterfaceState) -> bool,
{
    let single = matches!(variant, OdeVariant::SingleFrontLeft | OdeVariant::SingleFrontRight);
    if !single {
        cfg.validate(p, &s0)?;
    }
    if !s0.is_finite() {
        return Err(Error::NonFinite { t: 0.0 });
    }
    let latch = SplitLatch::new(p, c, resp, cfg);
    let edges = resp.edges().to_vec();
    let mut f = |y: &[f64; 4]| rhs(variant, &InterfaceState::from_array(*y), p, c, resp).map(|d| d.to_array());

    let mut traj = Trajectory::new();
    let mut t = 0.0;
    let mut y = s0.to_array();
    traj.push(t, s0);
    let mut step = 0usize;
    let mut dt = cfg.dt;
    let mut latched_at: Option<f64> = None;
    let check_det = matches!(variant, OdeVariant::FullRenormalized);

    while t < cfg.t_end - 1e-12 {
        let h_try = dt.min(cfg.t_end - t);
        let (y_new, h_used) = match cfg.method {
            Method::Rk4Fixed => match rk4_step(&mut f, &y, h_try) {
                Ok(v) => (v, h_try),
                Err(Error::MassMatrixSingular { det, .. }) => {
                    return Ok(finish_singular(traj, t, y, det));
                }
                Err(e) => return Err(e),
            },
            Method::Rk45Adaptive => {
                let mut h = h_try;
                loop {
                    if h < 1e-12 * t.max(1.0) {
                        return Err(Error::StiffnessFailure { t });
                    }
                    match dopri5_step(&mut f, &y, h) {
                        Ok((cand, err)) => {
                            let norm = (0..4)
                                .map(|i| err[i].abs() / (cfg.abs_tol + cfg.rel_tol * y[i].abs().max(cand[i].abs())))
                                .fold(0.0, f64::max);
                            if norm <= 1.0 {
                                let grow = if norm == 0.0 { 5.0 } else { (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0) };
                                dt = (h * grow).min(cfg.dt * 100.0);
                                break (cand, h);
                            }
                            h *= (0.9 * norm.powf(-0.2)).clamp(0.1, 0.5);
                        }
                        Err(Error::MassMatrixSingular { det, .. }) => {
                            if h < 1e-6 {
                                return Ok(finish_singular(traj, t, y, det));
                            }
                            h *= 0.25;
                        }
                        Err(e) => return Err(e),
                    }
                }
            }
        };
        let t_new = t + h_used;
        if y_new.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { t: t_new });
        }
        let old = InterfaceState::from_array(y);
        let new = InterfaceState::from_array(y_new);
        for &e in &edges {
            for (kind, a, b) in [(EventKind::LeftEdge, old.l1, new.l1), (EventKind::RightEdge, old.l2, new.l2)] {
                if single && ((kind == EventKind::LeftEdge) != (*variant == OdeVariant::SingleFrontLeft)) {
                    continue;
                }
                if (a - e) * (b - e) < 0.0 {
                    let frac = (e - a) / (b - a);
                    traj.events.push(Event { t: t + frac * h_used, kind, position: e });
                }
            }
        }
        t = t_new;
        y = y_new;
        step += 1;
        if check_det && new.h() >= 1.0 {
            let det = mass_matrix_det(&new, p);
            if !(det > 0.0) {
                return Ok(finish_singular(traj, t, y, det));
            }
        }
        let mut done = false;
        if !single && new.h() <= 0.0 {
            traj.events.push(Event { t, kind: EventKind::InterfacesMerged, position: new.center() });
            traj.termination = Termination::InterfacesMerged;
            done = true;
        }
        if !single && latched_at.is_none() && latch.split(&new) {
            latched_at = Some(t);
            traj.events.push(Event { t, kind: EventKind::Decomposed, position: new.center() });
        }
        if let Some(t0) = latched_at {
            if t - t0 >= cfg.post_latch {
                traj.termination = Termination::Decomposed;
                done = true;
            }
        }
        if !done && stop(t, &new) {
            traj.termination = Termination::Stopped;
            done = true;
        }
        if done || step.is_multiple_of(cfg.record_stride) || t >= cfg.t_end - 1e-12 {
            traj.push(t, new);
        }
        if done {
            return Ok(traj);
        }
    }
    if latched_at.is_some() {
        traj.termination = Termination::Decomposed;
    }
    Ok(traj)
}

fn finish_singular(mut traj: Trajectory, t: f64, y: [f64; 4], det: f64) -> Trajectory {
    let s = InterfaceState::from_array(y);
    traj.push(t, s);
    traj.events.push(Event { t, kind: EventKind::MassMatrixSingular, position: det });
    traj.termination = Termination::MassMatrixSingular;
    traj
}
