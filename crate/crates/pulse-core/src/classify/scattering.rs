use crate::analysis::{tp_exact, StationaryPulse};
use crate::error::{Error, Result};
use crate::model::{response_auto, DerivedCoefficients, Heterogeneity, ModelParams, ResponseProfile};
use crate::reduced_ode::{
    incoming_tp, integrate_observed, IntegratorConfig, InterfaceState, OdeVariant, Termination, Trajectory,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ScatterLabel {
    Pen,
    Reb,
    Dec1,
    Dec2,
    Unresolved,
}

impl ScatterLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScatterLabel::Pen => "PEN",
            ScatterLabel::Reb => "REB",
            ScatterLabel::Dec1 => "DEC1",
            ScatterLabel::Dec2 => "DEC2",
            ScatterLabel::Unresolved => "UNRESOLVED",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "PEN" => ScatterLabel::Pen,
            "REB" => ScatterLabel::Reb,
            "DEC1" => ScatterLabel::Dec1,
            "DEC2" => ScatterLabel::Dec2,
            "UNRESOLVED" => ScatterLabel::Unresolved,
            _ => return None,
        })
    }

    pub fn is_resolved(&self) -> bool {
        *self != ScatterLabel::Unresolved
    }
}

impl std::fmt::Display for ScatterLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScatterOutcome {
    pub label: ScatterLabel,
    /// Position where the left interface first reverses, for split pulses.
    pub turning_point: Option<f64>,
    pub t_final: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScatterConfig {
    pub variant: OdeVariant,
    pub integrator: IntegratorConfig,
    /// Relative velocity/width tolerance for recognising the outgoing pulse.
    pub rel_tol: f64,
    /// Clearance beyond the heterogeneity, in units of sqrt(D), before a pulse counts as out.
    pub clearance: f64,
    /// Turning points closer than this (units of sqrt(D)) to the left edge count as DEC1.
    pub turn_margin: f64,
}

impl Default for ScatterConfig {
    fn default() -> Self {
        ScatterConfig {
            variant: OdeVariant::Truncated,
            integrator: IntegratorConfig { t_end: 5000.0, ..Default::default() },
            rel_tol: 0.1,
            clearance: 5.0,
            turn_margin: 0.5,
        }
    }
}

fn near(s: &InterfaceState, tp: &StationaryPulse, rel_tol: f64) -> bool {
    let close = |x: f64, y: f64| (x - y).abs() <= rel_tol * y.abs();
    close(s.h(), tp.h_star) && close(s.r1, tp.r_star) && close(s.r2, tp.r_star)
}

#[derive(Clone, Copy, Debug)]
struct Outgoing {
    zone: (f64, f64),
    clear: f64,
    tp: StationaryPulse,
    rel_tol: f64,
}

impl Outgoing {
    fn label(&self, s: &InterfaceState) -> Option<ScatterLabel> {
        let (a, b) = self.zone;
        if s.l1 > b + self.clear && near(s, &self.tp, self.rel_tol) {
            Some(ScatterLabel::Pen)
        } else if s.l2 < a - self.clear && near(s, &self.tp.reflect(), self.rel_tol) {
            Some(ScatterLabel::Reb)
        } else {
            None
        }
    }
}

/// First position where the left interface switches from moving right to moving left.
pub fn turning_point(traj: &Trajectory) -> Option<f64> {
    traj.states.windows(2).find_map(|w| {
        let (a, b) = (&w[0], &w[1]);
        (a.r1 > 0.0 && b.r1 <= 0.0).then(|| {
            let frac = a.r1 / (a.r1 - b.r1);
            a.l1 + frac * (b.l1 - a.l1)
        })
    })
}

/// Label a scattering trajectory after the fact.
pub fn classify_scattering(
    traj: &Trajectory,
    het: &Heterogeneity,
    resp: &ResponseProfile,
    p: &ModelParams,
    c: &DerivedCoefficients,
    cfg: &ScatterConfig,
) -> Result<ScatterOutcome> {
    let t_final = traj.t_end();
    if traj.decomposed() {
        let turn = turning_point(traj);
        let (lo, _) = het.support().unwrap_or((0.0, 0.0));
        let dec2 = turn.is_some_and(|x| x > lo + cfg.turn_margin * p.sqrt_d() && resp.eval(x) < p.delta0);
        return Ok(ScatterOutcome {
            label: if dec2 { ScatterLabel::Dec2 } else { ScatterLabel::Dec1 },
            turning_point: turn,
            t_final,
        });
    }
    let tp = tp_exact(p, c)?;
    let out = Outgoing {
        zone: het.support().unwrap_or((0.0, 0.0)),
        clear: cfg.clearance * p.sqrt_d(),
        tp,
        rel_tol: cfg.rel_tol,
    };
    let label = match (traj.termination, traj.last()) {
        (Termination::Horizon | Termination::Stopped, Some((_, s))) => {
            out.label(&s).unwrap_or(ScatterLabel::Unresolved)
        }
        _ => ScatterLabel::Unresolved,
    };
    Ok(ScatterOutcome { label, turning_point: None, t_final })
}

#[derive(Clone, Debug)]
pub struct ScatterRun {
    pub outcome: ScatterOutcome,
    pub trajectory: Trajectory,
}

/// Send a traveling pulse into the heterogeneity and integrate until the outcome is settled.
pub fn run_scattering(
    p: &ModelParams,
    c: &DerivedCoefficients,
    het: &Heterogeneity,
    cfg: &ScatterConfig,
) -> Result<ScatterRun> {
    het.validate()?;
    let zone = het.support().ok_or_else(|| Error::InvalidParameter {
        name: "heterogeneity",
        reason: "scattering needs a heterogeneity with finite support".into(),
    })?;
    let resp = response_auto(het, p)?;
    let (s0, tp) = incoming_tp(p, c, &resp)?;
    let out = Outgoing { zone, clear: cfg.clearance * p.sqrt_d(), tp, rel_tol: cfg.rel_tol };
    let traj = integrate_observed(&cfg.variant, s0, p, c, &resp, &cfg.integrator, |_, s| out.label(s).is_some())?;
    let outcome = classify_scattering(&traj, het, &resp, p, c, cfg)?;
    Ok(ScatterRun { outcome, trajectory: traj })
}

/// Time spent with both interfaces inside the heterogeneity support.
pub fn residence_time(traj: &Trajectory, het: &Heterogeneity) -> Result<f64> {
    let (a, b) = het.support().ok_or(Error::NoEntry)?;
    let inside = |s: &InterfaceState| (s.l1 - a).min(b - s.l2);
    let cross = |i: usize, g0: f64, g1: f64| {
        let (t0, t1) = (traj.times[i], traj.times[i + 1]);
        t0 + (t1 - t0) * g0 / (g0 - g1)
    };
    let g: Vec<f64> = traj.states.iter().map(inside).collect();
    if g.first().is_some_and(|&v| v >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "trajectory",
            reason: "pulse starts inside the heterogeneity".into(),
        });
    }
    let entry = (0..g.len().saturating_sub(1)).find(|&i| g[i] < 0.0 && g[i + 1] >= 0.0).ok_or(Error::NoEntry)?;
    let t_in = cross(entry, g[entry], g[entry + 1]);
    let t_out = (entry + 1..g.len().saturating_sub(1))
        .find(|&i| g[i] >= 0.0 && g[i + 1] < 0.0)
        .map(|i| cross(i, g[i], g[i + 1]))
        .unwrap_or(traj.t_end());
    Ok(t_out - t_in)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrapOutcome {
    Trapped,
    EscapedLeft,
    EscapedRight,
}

impl TrapOutcome {
    pub fn as_str(&self) -> &'static str {
        match self {
            TrapOutcome::Trapped => "trapped",
            TrapOutcome::EscapedLeft => "escaped-left",
            TrapOutcome::EscapedRight => "escaped-right",
        }
    }
}

/// Whether the pulse leaves the heterogeneity support before `horizon`.
pub fn trap_check(traj: &Trajectory, het: &Heterogeneity, horizon: f64) -> TrapOutcome {
    let Some((a, b)) = het.support() else { return TrapOutcome::Trapped };
    for (t, s) in traj.times.iter().zip(&traj.states) {
        if *t > horizon {
            break;
        }
        if s.l2 < a {
            return TrapOutcome::EscapedLeft;
        }
        if s.l1 > b {
            return TrapOutcome::EscapedRight;
        }
    }
    if traj.decomposed() {
        let s = traj.states.last().unwrap();
        return if s.center() < 0.5 * (a + b) { TrapOutcome::EscapedLeft } else { TrapOutcome::EscapedRight };
    }
    TrapOutcome::Trapped
}

/// Launch a right-moving traveling pulse at the centre of the heterogeneity.
pub fn run_trap(
    p: &ModelParams,
    c: &DerivedCoefficients,
    het: &Heterogeneity,
    variant: &OdeVariant,
    integrator: &IntegratorConfig,
) -> Result<(TrapOutcome, Trajectory)> {
    let resp = response_auto(het, p)?;
    let tp = tp_exact(p, c)?;
    let (a, b) = het.support().unwrap_or((0.0, 0.0));
    let s0 = InterfaceState::centered(0.5 * (a + b), tp.h_star, tp.r_star);
    let traj = integrate_observed(variant, s0, p, c, &resp, integrator, |_, s| s.l2 < a || s.l1 > b)?;
    Ok((trap_check(&traj, het, integrator.t_end), traj))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (ModelParams, DerivedCoefficients) {
        let p = ModelParams::new(0.17, 1.0, 0.001).unwrap();
        (p, DerivedCoefficients::for_params(&p))
    }

    fn bump(eps0: f64, d0: f64) -> Heterogeneity {
        Heterogeneity::SharpBump { eps0, d0, xc: 0.0 }
    }

    #[test]
    fn labels_round_trip() {
        for l in
            [ScatterLabel::Pen, ScatterLabel::Reb, ScatterLabel::Dec1, ScatterLabel::Dec2, ScatterLabel::Unresolved]
        {
            assert_eq!(ScatterLabel::parse(l.as_str()), Some(l));
        }
    }

    #[test]
    fn flat_bump_is_penetrated() {
        let (p, c) = setup();
        let run = run_scattering(&p, &c, &bump(0.0, 20.0), &ScatterConfig::default()).unwrap();
        assert_eq!(run.outcome.label, ScatterLabel::Pen);
        let t = residence_time(&run.trajectory, &bump(0.0, 20.0)).unwrap();
        let tp = tp_exact(&p, &c).unwrap();
        assert!((t - (20.0 - tp.h_star) / tp.r_star).abs() < 0.5, "{t}");
    }

    #[test]
    fn strong_barrier_rebounds_and_deep_well_splits() {
        let (p, c) = setup();
        let cfg = ScatterConfig::default();
        assert_eq!(run_scattering(&p, &c, &bump(0.02, 10.0), &cfg).unwrap().outcome.label, ScatterLabel::Reb);
        let dec = run_scattering(&p, &c, &bump(-0.02, 10.0), &cfg).unwrap().outcome;
        assert!(matches!(dec.label, ScatterLabel::Dec1 | ScatterLabel::Dec2), "{dec:?}");
    }

    #[test]
    fn rebound_never_enters() {
        let (p, c) = setup();
        let het = bump(0.02, 70.0);
        let run = run_scattering(&p, &c, &het, &ScatterConfig::default()).unwrap();
        assert_eq!(residence_time(&run.trajectory, &het).unwrap_err(), Error::NoEntry);
    }

    #[test]
    fn empty_well_lets_pulse_escape_right() {
        let (p, c) = setup();
        let het = Heterogeneity::SquareWell { eps1: 0.0, eps2: 0.0, d0: 50.0, d1: 10.0, xc: 0.0 };
        let integ = IntegratorConfig { t_end: 2000.0, ..Default::default() };
        let (out, _) = run_trap(&p, &c, &het, &OdeVariant::FullRenormalized, &integ).unwrap();
        assert_eq!(out, TrapOutcome::EscapedRight);
    }
}
