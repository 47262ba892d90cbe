use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use pulse_core::analysis::*;
use pulse_core::classify::*;
use pulse_core::hybrid::{initial_state, run_hybrid, stationary_field, Snapshot};
use pulse_core::io::{self, fmt_f64};
use pulse_core::model::*;
use pulse_core::pde::{initial_pulse, run_pde};
use pulse_core::reduced_ode::*;

use crate::config::{RunConfig, Tier};
use crate::error::CliError;

type Res<T> = Result<T, CliError>;

pub struct Context {
    pub cfg: RunConfig,
    pub out: PathBuf,
    pub jobs: usize,
    pub svg: bool,
}

impl Context {
    fn create(&self, name: &str) -> Res<BufWriter<File>> {
        let path = self.out.join(name);
        File::create(&path).map(BufWriter::new).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }

    fn write_text(&self, name: &str, text: &str) -> Res<()> {
        let path = self.out.join(name);
        std::fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }

    fn setup(&self) -> Res<(ModelParams, DerivedCoefficients, Heterogeneity)> {
        let p = self.cfg.params()?;
        Ok((p, DerivedCoefficients::for_params(&p), self.cfg.heterogeneity()?))
    }
}

/// Create the output directory and persist the resolved configuration.
pub fn prepare(ctx: &mut Context) -> Res<()> {
    std::fs::create_dir_all(&ctx.out).map_err(|e| CliError::Io(format!("{}: {e}", ctx.out.display())))?;
    ctx.cfg.out = Some(ctx.out.clone());
    ctx.write_text("resolved_config.toml", &ctx.cfg.to_toml()?)
}

struct Run {
    trajectory: Trajectory,
    snapshots: Vec<(Snapshot, &'static [&'static str])>,
}

struct Initial {
    kind: String,
    center: Option<f64>,
    h: Option<f64>,
    r: Option<f64>,
    kick: f64,
}

fn initial(cfg: &RunConfig) -> Initial {
    let ini = cfg.initial.clone().unwrap_or_default();
    Initial {
        kind: ini.kind.unwrap_or_else(|| "standing".into()),
        center: ini.center,
        h: ini.h,
        r: ini.r,
        kick: ini.kick.unwrap_or(0.1),
    }
}

/// Interfaces (l2, l1) and a signed speed for the configured initial pulse.
/// The field tiers turn the speed into a lag of the inhibitor behind the interfaces.
fn initial_pulse_geometry(
    cfg: &RunConfig,
    p: &ModelParams,
    c: &DerivedCoefficients,
    resp: &ResponseProfile,
    default_center: f64,
) -> Res<InterfaceState> {
    let ini = initial(cfg);
    let center = ini.center.unwrap_or(default_center);
    Ok(match ini.kind.as_str() {
        "standing" => InterfaceState::centered(center, ini.h.unwrap_or(c.h0), ini.kick),
        "traveling" => {
            let tp = tp_exact(p, c)?;
            InterfaceState::centered(center, ini.h.unwrap_or(tp.h_star), ini.r.unwrap_or(tp.r_star))
        }
        "incoming" => {
            let (s, tp) = incoming_tp(p, c, resp)?;
            let r = ini.r.unwrap_or(tp.r_star);
            InterfaceState::centered(s.center(), ini.h.unwrap_or(tp.h_star), r)
        }
        _ => InterfaceState::centered(
            center,
            ini.h.ok_or(CliError::MissingParameter("initial.h"))?,
            ini.r.ok_or(CliError::MissingParameter("initial.r"))?,
        ),
    })
}

fn simulate_run(ctx: &Context, p: &ModelParams, c: &DerivedCoefficients, het: &Heterogeneity) -> Res<Run> {
    let cfg = &ctx.cfg;
    let resp = response_auto(het, p)?;
    match cfg.tier() {
        Tier::Hybrid => {
            let hc = cfg.hybrid_config()?;
            let s = initial_pulse_geometry(cfg, p, c, &resp, 0.5 * (hc.x_lo + hc.x_hi))?;
            let mut s0 = initial_state(s.l2, s.l1, p, &resp, &hc)?;
            s0.v = stationary_field(&s0.grid, s.l2 - s.r1, s.l1 - s.r1, p, &resp, &hc);
            let run = run_hybrid(s0, p, het, &hc)?;
            Ok(Run {
                trajectory: run.trajectory,
                snapshots: run.snapshots.into_iter().map(|s| (s, &["v"][..])).collect(),
            })
        }
        Tier::Pde => {
            let pc = cfg.pde_config()?;
            let s = initial_pulse_geometry(cfg, p, c, &resp, 0.5 * (pc.x_lo + pc.x_hi))?;
            let mut s0 = initial_pulse(s.l2, s.l1, p, het, &pc)?;
            s0.v = stationary_field(&s0.grid, s.l2 - s.r1, s.l1 - s.r1, p, &resp, &pc.as_hybrid());
            let run = run_pde(s0, p, het, &pc)?;
            Ok(Run {
                trajectory: run.trajectory,
                snapshots: run.snapshots.into_iter().map(|s| (s, &["u", "v"][..])).collect(),
            })
        }
        _ => {
            let s0 = initial_pulse_geometry(cfg, p, c, &resp, 0.0)?;
            let traj = integrate(&cfg.variant(), s0, p, c, &resp, &cfg.integrator_config()?)?;
            Ok(Run { trajectory: traj, snapshots: vec![] })
        }
    }
}

/// Label a finished trajectory; returns the label and report rows.
fn label_trajectory(
    ctx: &Context,
    traj: &Trajectory,
    p: &ModelParams,
    c: &DerivedCoefficients,
    het: &Heterogeneity,
) -> Res<(String, Vec<(String, String)>)> {
    let mut rows = vec![("termination".to_string(), format!("{:?}", traj.termination))];
    match het {
        Heterogeneity::Constant => {
            let r = classify_homogeneous_report(traj, p, c, &ctx.cfg.classify_config());
            rows.push(("class".into(), r.class.to_string()));
            rows.push(("v_tol".into(), fmt_f64(r.v_tol)));
            rows.push(("a_tol".into(), fmt_f64(r.a_tol)));
            let mut label = r.class.to_string();
            if let Some(s) = r.stats {
                rows.extend([
                    ("mean_velocity".into(), fmt_f64(s.drift)),
                    ("width_amplitude".into(), fmt_f64(s.amplitude)),
                    ("mean_width".into(), fmt_f64(s.h_mean)),
                    ("max_width".into(), fmt_f64(s.h_max)),
                ]);
                label = format!(
                    "{label} mean velocity {:.5} mean width {:.5}",
                    if s.drift.abs() < 5e-6 { 0.0 } else { s.drift },
                    s.h_mean
                );
            }
            if r.class.is_tp() {
                if let Ok(tp) = tp_exact(p, c) {
                    rows.push(("r_star".into(), fmt_f64(tp.r_star)));
                    label = format!("{label} (r* {:.5})", tp.r_star);
                }
            }
            Ok((label, rows))
        }
        Heterogeneity::SquareWell { .. } => {
            let horizon = ctx.cfg.trap.as_ref().and_then(|t| t.horizon).unwrap_or(5000.0);
            let out = trap_check(traj, het, horizon);
            rows.push(("trap".into(), out.as_str().into()));
            Ok((out.as_str().into(), rows))
        }
        _ => {
            let resp = response_auto(het, p)?;
            let o = classify_scattering(traj, het, &resp, p, c, &ctx.cfg.scatter_config()?)?;
            rows.push(("label".into(), o.label.to_string()));
            if let Some(x) = o.turning_point {
                rows.push(("turning_point".into(), fmt_f64(x)));
            }
            if let Ok(t) = residence_time(traj, het) {
                rows.push(("residence".into(), fmt_f64(t)));
            }
            Ok((o.label.to_string(), rows))
        }
    }
}

fn write_run(ctx: &Context, traj: &Trajectory, snaps: &[(Snapshot, &[&str])]) -> Res<()> {
    io::write_trajectory(traj, ctx.create("trajectory.csv")?)?;
    io::write_events(traj, ctx.create("events.csv")?)?;
    for (i, (s, names)) in snaps.iter().enumerate() {
        io::write_snapshot(s, names, ctx.create(&format!("snapshot_{i:04}.csv"))?)?;
    }
    if ctx.svg {
        let pick =
            |f: fn(&InterfaceState) -> f64| traj.times.iter().zip(&traj.states).map(|(t, s)| (*t, f(s))).collect();
        let svg = io::svg_lines("interfaces", "t", "x", &[("l1", pick(|s| s.l1)), ("l2", pick(|s| s.l2))]);
        ctx.write_text("trajectory.svg", &svg)?;
    }
    Ok(())
}

pub fn simulate(ctx: &Context) -> Res<String> {
    let (p, c, het) = ctx.setup()?;
    let run = simulate_run(ctx, &p, &c, &het)?;
    write_run(ctx, &run.trajectory, &run.snapshots)?;
    let (label, _) = label_trajectory(ctx, &run.trajectory, &p, &c, &het)?;
    Ok(label)
}

pub fn classify(ctx: &Context) -> Res<String> {
    let (p, c, het) = ctx.setup()?;
    let ode = matches!(ctx.cfg.tier(), Tier::OdeFull | Tier::OdeTruncated | Tier::OdeLegacy);
    let (traj, label, rows) = match &het {
        Heterogeneity::SquareWell { .. } if ode => {
            let horizon = ctx.cfg.trap.as_ref().and_then(|t| t.horizon).unwrap_or(5000.0);
            let integ = IntegratorConfig { t_end: horizon, ..ctx.cfg.integrator_config()? };
            let (out, traj) = run_trap(&p, &c, &het, &ctx.cfg.variant(), &integ)?;
            let rows =
                vec![("termination".into(), format!("{:?}", traj.termination)), ("trap".into(), out.as_str().into())];
            (traj, out.as_str().to_string(), rows)
        }
        Heterogeneity::Constant => {
            let mut run_ctx = Context { cfg: ctx.cfg.clone(), out: ctx.out.clone(), jobs: ctx.jobs, svg: ctx.svg };
            let k = ctx.cfg.classify_config();
            if let Some(i) = run_ctx.cfg.integrator.as_mut() {
                i.t_end = Some(i.t_end.unwrap_or(0.0).max(k.transient_skip + k.window));
            }
            for g in [run_ctx.cfg.hybrid.as_mut(), run_ctx.cfg.pde.as_mut()].into_iter().flatten() {
                g.t_end = Some(g.t_end.unwrap_or(0.0).max(k.transient_skip + k.window));
            }
            let run = simulate_run(&run_ctx, &p, &c, &het)?;
            let (label, rows) = label_trajectory(&run_ctx, &run.trajectory, &p, &c, &het)?;
            (run.trajectory, label, rows)
        }
        _ if ode => {
            let sc = ctx.cfg.scatter_config()?;
            let run = run_scattering(&p, &c, &het, &sc)?;
            let mut rows = vec![
                ("termination".into(), format!("{:?}", run.trajectory.termination)),
                ("label".into(), run.outcome.label.to_string()),
            ];
            if let Some(x) = run.outcome.turning_point {
                rows.push(("turning_point".into(), fmt_f64(x)));
            }
            if let Ok(t) = residence_time(&run.trajectory, &het) {
                rows.push(("residence".into(), fmt_f64(t)));
            }
            (run.trajectory, run.outcome.label.to_string(), rows)
        }
        _ => {
            let run = simulate_run(ctx, &p, &c, &het)?;
            let (label, rows) = label_trajectory(ctx, &run.trajectory, &p, &c, &het)?;
            (run.trajectory, label, rows)
        }
    };
    write_run(ctx, &traj, &[])?;
    io::write_report(&rows, ctx.create("classification.csv")?)?;
    Ok(label)
}

pub fn analyze(ctx: &Context) -> Res<String> {
    let (p, c, het) = ctx.setup()?;
    let mut rows: Vec<(String, String)> = vec![];
    let mut put = |k: &str, v: f64| rows.push((k.to_string(), fmt_f64(v)));
    put("tau", p.tau);
    put("d", p.d);
    put("delta0", p.delta0);
    put("h_star", c.h0);
    put("tau_c", c.tau_c);
    put("m0", c.m0);
    put("g3", c.g3);
    put("g3_tilde", c.g3_tilde);
    let b = bifurcation_points(&p, &c)?;
    put("tau_d", b.tau_d);
    put("tau_h", b.tau_h);
    put("hopf_frequency", b.k_h);
    put("p", b.p);
    put("r", b.r);
    for (i, z) in sp_eigenvalues(&p, &c, p.tau)?.iter().enumerate() {
        put(&format!("eig{}_re", i + 1), z.re);
        put(&format!("eig{}_im", i + 1), z.im);
    }
    if p.tau < b.tau_d {
        let tp = tp_exact(&p, &c)?;
        put("tp_h", tp.h_star);
        put("tp_r", tp.r_star);
        if let Ok(a) = tp_perturbative(&p, &c, p.tau) {
            put("tp_h_leading", a.h_star);
            put("tp_r_leading", a.r_star);
        }
    }
    if let Ok(v) = front_velocities(Side::Left, &p, &c) {
        put("front_r_plus", v.r_plus);
        put("front_r_minus", v.r_minus);
        put("front_r_zero", v.r_zero);
        put("front_r_plus_expansion", v.approx_plus);
        put("front_r_minus_expansion", v.approx_minus);
        put("front_r_zero_expansion", v.approx_zero);
    }
    if let Heterogeneity::SharpBump { .. } = het {
        if let Ok(f) = stationary_front(&p, &c, &het) {
            put("front_l_star", f.l_star);
            put("front_trace", f.trace);
            put("front_det", f.det);
            rows.push(("front_type".into(), format!("{:?}", f.stability).to_lowercase()));
            rows.push(("front_branch".into(), format!("{:?}", f.branch).to_lowercase()));
        }
        if let Ok((sp, xc)) = het_sp(&p, &c, &het) {
            rows.push(("het_sp_h".into(), fmt_f64(sp.h_star)));
            rows.push(("het_sp_center".into(), fmt_f64(xc)));
            if let Ok(t) = het_hopf_sweep(&p, &c, &het, (0.15, 0.25)) {
                rows.push(("het_tau_h".into(), fmt_f64(t)));
            }
        }
    }
    if ctx.cfg.tier() == Tier::OdeLegacy {
        if let OdeVariant::LegacyWeakInteraction(k) = ctx.cfg.variant() {
            let n = scan_bifurcations(|t| legacy_jacobian(&p.with_tau(t), &k).ok(), c.tau_c - 0.02, c.tau_c + 0.02);
            if let Some(t) = n.tau_pitchfork {
                rows.push(("legacy_tau_pitchfork".into(), fmt_f64(t)));
            }
            if let Some(t) = n.tau_hopf {
                rows.push(("legacy_tau_hopf".into(), fmt_f64(t)));
            }
        }
    }
    io::write_report(&rows, ctx.create("report.csv")?)?;
    Ok(format!("h*={:.7} tau_c={:.7} tau_d={:.7} tau_H={:.7}", c.h0, c.tau_c, b.tau_d, b.tau_h))
}

pub fn phase_diagram(ctx: &Context) -> Res<String> {
    let (p, c, _) = ctx.setup()?;
    let (d0s, eps0s) = ctx.cfg.sweep_axes();
    let diag = sweep_phase_diagram(&p, &c, &d0s, &eps0s, &ctx.cfg.sweep_config()?, ctx.jobs)?;
    io::write_phase(&diag.cells, ctx.create("phase.csv")?)?;
    io::write_boundaries(&diag.boundaries, ctx.create("boundaries.csv")?)?;
    if ctx.svg {
        ctx.write_text("phase.svg", &io::svg_phase("scattering outcome", &diag.cells))?;
    }
    let mut counts: Vec<(String, usize)> = vec![];
    for l in [ScatterLabel::Pen, ScatterLabel::Reb, ScatterLabel::Dec1, ScatterLabel::Dec2, ScatterLabel::Unresolved] {
        let n = diag.cells.iter().filter(|x| x.outcome.label == l).count();
        if n > 0 {
            counts.push((l.to_string(), n));
        }
    }
    let counts: Vec<String> = counts.iter().map(|(l, n)| format!("{l} {n}")).collect();
    Ok(format!("{} cells ({}), {} boundaries", diag.cells.len(), counts.join(", "), diag.boundaries.len()))
}

pub fn residence(ctx: &Context) -> Res<String> {
    let (p, c, _) = ctx.setup()?;
    let sec = ctx.cfg.residence.clone().unwrap_or_default();
    let d0 = sec.d0.unwrap_or(70.0);
    let sweep = ctx.cfg.sweep_config()?;
    let (eps0s, star) = match sec.eps0 {
        Some(v) if !v.is_empty() => (v, None),
        _ => {
            let lo = scatter_label(&p, &c, d0, 0.0, &sweep)?.label;
            let hi = scatter_label(&p, &c, d0, 0.01, &sweep)?.label;
            if !(lo.is_resolved() && hi.is_resolved() && lo != hi) {
                return Err(CliError::Inconsistent(format!(
                    "no label change in eps0 [0, 0.01] at d0 = {d0}; give residence.eps0 explicitly"
                )));
            }
            let b = bisect_boundary(&p, &c, d0, (0.0, 0.01), (lo, hi), 1e-7, &sweep)?;
            let star = b.bracket.0;
            ((0..7).map(|k| star * (1.0 - 0.13 * (7 - k) as f64 / 7.0)).collect(), Some(star))
        }
    };
    let mut rows = vec![];
    let mut series = vec![];
    for &e in &eps0s {
        let het = bump(d0, e);
        let run = run_scattering(&p, &c, &het, &sweep.scatter)?;
        let t = residence_time(&run.trajectory, &het).ok();
        if let Some(t) = t {
            series.push((e, t));
        }
        rows.push((e, run.outcome.label, t));
    }
    io::write_residence(d0, &rows, ctx.create("residence.csv")?)?;
    if ctx.svg {
        ctx.write_text("residence.svg", &io::svg_lines("residence time", "eps0", "T", &[("T", series.clone())]))?;
    }
    let increasing = series.len() == rows.len() && series.windows(2).all(|w| w[1].1 > w[0].1);
    let edge = star.map_or(String::new(), |s| format!(", boundary eps0* {s:.7}"));
    Ok(format!(
        "{} samples at d0={d0}, residence {}{edge}",
        rows.len(),
        if increasing { "strictly increasing" } else { "not monotone" }
    ))
}

pub fn out_dir(cli_out: Option<&Path>, cfg: &RunConfig) -> PathBuf {
    cli_out.map(Path::to_path_buf).or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("out"))
}
