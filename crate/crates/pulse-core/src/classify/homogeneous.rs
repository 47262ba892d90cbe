use crate::analysis::{bifurcation_points, tp_exact};
use crate::model::{DerivedCoefficients, ModelParams};
use crate::reduced_ode::{Termination, Trajectory};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BehaviorClass {
    Sp,
    Sb,
    Tb,
    TpPlus,
    TpMinus,
    Unresolved,
}

impl BehaviorClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            BehaviorClass::Sp => "SP",
            BehaviorClass::Sb => "SB",
            BehaviorClass::Tb => "TB",
            BehaviorClass::TpPlus => "TP+",
            BehaviorClass::TpMinus => "TP-",
            BehaviorClass::Unresolved => "UNRESOLVED",
        }
    }

    pub fn is_tp(&self) -> bool {
        matches!(self, BehaviorClass::TpPlus | BehaviorClass::TpMinus)
    }

    pub fn reflect(&self) -> Self {
        match self {
            BehaviorClass::TpPlus => BehaviorClass::TpMinus,
            BehaviorClass::TpMinus => BehaviorClass::TpPlus,
            other => *other,
        }
    }
}

impl std::fmt::Display for BehaviorClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassifyConfig {
    pub transient_skip: f64,
    pub window: f64,
    /// Drift threshold; `None` means 5% of the traveling-pulse speed (floored at 1e-3).
    pub v_tol: Option<f64>,
    /// Width-oscillation threshold; `None` means 2% of the standing width.
    pub a_tol: Option<f64>,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig { transient_skip: 500.0, window: 1000.0, v_tol: None, a_tol: None }
    }
}

pub const V_TOL_FLOOR: f64 = 1e-3;

impl ClassifyConfig {
    pub fn thresholds(&self, p: &ModelParams, c: &DerivedCoefficients) -> (f64, f64) {
        let v_tol = self.v_tol.unwrap_or_else(|| {
            let below_pitchfork = bifurcation_points(p, c).map(|b| p.tau < b.tau_d).unwrap_or(false);
            let r = if below_pitchfork { tp_exact(p, c).map(|tp| tp.r_star).unwrap_or(0.0) } else { 0.0 };
            (0.05 * r.abs()).max(V_TOL_FLOOR)
        });
        let a_tol = self.a_tol.unwrap_or_else(|| {
            let h = if c.h0.is_finite() { c.h0 } else { 50.0 * p.sqrt_d() };
            0.02 * h
        });
        (v_tol, a_tol)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindowStats {
    /// Least-squares slope of the pulse centre.
    pub drift: f64,
    /// Peak-to-peak width oscillation.
    pub amplitude: f64,
    pub h_mean: f64,
    pub h_max: f64,
}

pub fn window_stats(traj: &Trajectory, t0: f64, t1: f64) -> Option<WindowStats> {
    let (mut n, mut st, mut sx, mut stt, mut stx) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let (mut hmin, mut hmax, mut hsum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
    for (t, s) in traj.window(t0, t1) {
        let x = s.center();
        n += 1.0;
        st += t;
        sx += x;
        stt += t * t;
        stx += t * x;
        let h = s.h();
        hmin = hmin.min(h);
        hmax = hmax.max(h);
        hsum += h;
    }
    if n < 3.0 {
        return None;
    }
    let denom = n * stt - st * st;
    let drift = if denom > 0.0 { (n * stx - st * sx) / denom } else { 0.0 };
    Some(WindowStats { drift, amplitude: hmax - hmin, h_mean: hsum / n, h_max: hmax })
}

fn label(stats: &WindowStats, v_tol: f64, a_tol: f64) -> BehaviorClass {
    let moving = stats.drift.abs() >= v_tol;
    let breathing = stats.amplitude >= a_tol;
    match (moving, breathing) {
        (false, false) => BehaviorClass::Sp,
        (false, true) => BehaviorClass::Sb,
        (true, true) => BehaviorClass::Tb,
        (true, false) if stats.drift > 0.0 => BehaviorClass::TpPlus,
        (true, false) => BehaviorClass::TpMinus,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HomogeneousReport {
    pub class: BehaviorClass,
    pub stats: Option<WindowStats>,
    pub v_tol: f64,
    pub a_tol: f64,
}

pub fn classify_homogeneous_report(
    traj: &Trajectory,
    p: &ModelParams,
    c: &DerivedCoefficients,
    cfg: &ClassifyConfig,
) -> HomogeneousReport {
    let (v_tol, a_tol) = cfg.thresholds(p, c);
    let t0 = cfg.transient_skip;
    let t1 = t0 + cfg.window;
    let unresolved = |stats| HomogeneousReport { class: BehaviorClass::Unresolved, stats, v_tol, a_tol };
    if traj.termination != Termination::Horizon || traj.t_end() < t1 - 1e-9 {
        return unresolved(None);
    }
    let Some(all) = window_stats(traj, t0, t1) else { return unresolved(None) };
    let mid = 0.5 * (t0 + t1);
    let (Some(a), Some(b)) = (window_stats(traj, t0, mid), window_stats(traj, mid, t1)) else {
        return unresolved(Some(all));
    };
    let (la, lb) = (label(&a, v_tol, a_tol), label(&b, v_tol, a_tol));
    let growing = a.amplitude >= a_tol
        && b.amplitude >= a_tol
        && (a.amplitude / b.amplitude > 2.0 || b.amplitude / a.amplitude > 2.0);
    if la != lb || growing {
        return unresolved(Some(all));
    }
    HomogeneousReport { class: label(&all, v_tol, a_tol), stats: Some(all), v_tol, a_tol }
}

pub fn classify_homogeneous(
    traj: &Trajectory,
    p: &ModelParams,
    c: &DerivedCoefficients,
    cfg: &ClassifyConfig,
) -> BehaviorClass {
    classify_homogeneous_report(traj, p, c, cfg).class
}
