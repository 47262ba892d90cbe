use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use pulse_core::classify::{ClassifyConfig, ScatterConfig, SweepConfig};
use pulse_core::hybrid::{Boundary, HybridConfig};
use pulse_core::model::{Heterogeneity, ModelParams};
use pulse_core::pde::PdeConfig;
use pulse_core::reduced_ode::{IntegratorConfig, LegacyCoefficients, Method, OdeVariant};

use crate::error::CliError;

pub const ENV_PREFIX: &str = "PULSE_";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tier {
    Pde,
    Hybrid,
    OdeFull,
    OdeTruncated,
    OdeLegacy,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub tau: Option<f64>,
    pub d: Option<f64>,
    pub delta0: Option<f64>,
    pub epsilon: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum HetSection {
    Constant,
    SmoothBump {
        eps0: f64,
        d0: f64,
        gamma: f64,
        #[serde(default)]
        xc: f64,
    },
    SharpBump {
        eps0: f64,
        d0: f64,
        #[serde(default)]
        xc: f64,
    },
    SquareWell {
        eps1: f64,
        eps2: f64,
        d0: f64,
        d1: f64,
        #[serde(default)]
        xc: f64,
    },
    Tabulated {
        file: PathBuf,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    /// `rk4` or `rk45`
    pub method: Option<String>,
    pub abs_tol: Option<f64>,
    pub rel_tol: Option<f64>,
    pub h_blowup: Option<f64>,
    pub record_stride: Option<usize>,
    pub post_latch: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub dx: Option<f64>,
    pub dt: Option<f64>,
    /// `periodic` or `no-flux` (hybrid only)
    pub boundary: Option<String>,
    pub t_end: Option<f64>,
    pub record_stride: Option<usize>,
    pub x_lo: Option<f64>,
    pub x_hi: Option<f64>,
    pub snapshot_every: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LegacySection {
    pub m0: Option<f64>,
    pub m0_tilde: Option<f64>,
    pub beta1: Option<f64>,
    pub beta2: Option<f64>,
    pub m1: Option<f64>,
    pub m2: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    /// `standing` (kicked standing pulse), `traveling` (traveling pulse at `center`),
    /// `incoming` (traveling pulse left of the heterogeneity) or `custom`.
    pub kind: Option<String>,
    pub center: Option<f64>,
    pub h: Option<f64>,
    pub r: Option<f64>,
    pub kick: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifySection {
    pub transient_skip: Option<f64>,
    pub window: Option<f64>,
    pub v_tol: Option<f64>,
    pub a_tol: Option<f64>,
    pub rel_tol: Option<f64>,
    pub clearance: Option<f64>,
    pub turn_margin: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub d0_min: Option<f64>,
    pub d0_max: Option<f64>,
    pub d0_n: Option<usize>,
    pub eps0_min: Option<f64>,
    pub eps0_max: Option<f64>,
    pub eps0_n: Option<usize>,
    pub refine: Option<bool>,
    pub boundary_tol: Option<f64>,
    pub horizon_retries: Option<u32>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResidenceSection {
    pub d0: Option<f64>,
    pub eps0: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapSection {
    pub horizon: Option<f64>,
}

/// One run configuration. After [`RunConfig::resolve`] every optional field holds
/// its effective value, so the serialized form is self-describing.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub tier: Option<Tier>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub params: ParamsSection,
    pub heterogeneity: Option<HetSection>,
    pub integrator: Option<IntegratorSection>,
    pub hybrid: Option<GridSection>,
    pub pde: Option<GridSection>,
    pub legacy: Option<LegacySection>,
    pub initial: Option<InitialSection>,
    pub classify: Option<ClassifySection>,
    pub sweep: Option<SweepSection>,
    pub residence: Option<ResidenceSection>,
    pub trap: Option<TrapSection>,
}

fn locate(text: &str, span: Option<std::ops::Range<usize>>) -> String {
    match span {
        Some(r) => {
            let before = &text[..r.start.min(text.len())];
            let line = before.matches('\n').count() + 1;
            let col = before.rsplit('\n').next().map_or(0, |s| s.chars().count()) + 1;
            format!("line {line}, column {col}")
        }
        None => "environment override".into(),
    }
}

fn classify_toml_error(e: toml::de::Error, text: &str) -> CliError {
    let msg = e.message().to_string();
    let location = locate(text, e.span());
    if let Some(rest) = msg.strip_prefix("unknown field `") {
        let key = rest.split('`').next().unwrap_or("").to_string();
        return CliError::UnknownKey { key, location };
    }
    if msg.starts_with("unknown variant") {
        return CliError::Parse(format!("{msg} at {location}"));
    }
    CliError::Parse(format!("{} at {location}", msg.trim()))
}

fn env_value(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match toml::from_str::<toml::Table>(&doc) {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.into())),
        Err(_) => toml::Value::String(raw.into()),
    }
}

/// Apply `PULSE_SECTION__KEY=value` overrides; `__` separates path segments.
pub fn apply_env(table: &mut toml::Table, vars: &BTreeMap<String, String>) -> Result<(), CliError> {
    for (name, raw) in vars {
        let Some(path) = name.strip_prefix(ENV_PREFIX) else { continue };
        let segs: Vec<String> = path.split("__").map(|s| s.to_ascii_lowercase()).collect();
        if segs.iter().any(|s| s.is_empty()) {
            return Err(CliError::UnknownKey { key: name.clone(), location: "environment".into() });
        }
        let mut cur = &mut *table;
        for seg in &segs[..segs.len() - 1] {
            let entry = cur.entry(seg.clone()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
            cur = entry
                .as_table_mut()
                .ok_or_else(|| CliError::Inconsistent(format!("{name}: `{seg}` is not a section")))?;
        }
        cur.insert(segs[segs.len() - 1].clone(), env_value(raw));
    }
    Ok(())
}

pub fn env_overrides() -> BTreeMap<String, String> {
    std::env::vars().filter(|(k, _)| k.starts_with(ENV_PREFIX)).collect()
}

/// Parse, apply overrides, fill defaults and validate.
pub fn parse_config_with(text: &str, env: &BTreeMap<String, String>) -> Result<RunConfig, CliError> {
    let direct: RunConfig = toml::from_str(text).map_err(|e| classify_toml_error(e, text))?;
    let cfg = if env.keys().any(|k| k.starts_with(ENV_PREFIX)) {
        let mut table: toml::Table = toml::from_str(text).map_err(|e| classify_toml_error(e, text))?;
        apply_env(&mut table, env)?;
        let merged = toml::to_string(&table).map_err(|e| CliError::Parse(e.to_string()))?;
        toml::from_str(&merged).map_err(|e| match classify_toml_error(e, &merged) {
            CliError::UnknownKey { key, .. } => CliError::UnknownKey { key, location: "environment override".into() },
            other => other,
        })?
    } else {
        direct
    };
    cfg.resolve()
}

#[cfg(test)]
fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    parse_config_with(text, &BTreeMap::new())
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut cfg = parse_config_with(&text, &env_overrides())?;
    if let Some(HetSection::Tabulated { file }) = &mut cfg.heterogeneity {
        if file.is_relative() {
            if let Some(dir) = path.parent() {
                *file = dir.join(&*file);
            }
        }
    }
    Ok(cfg)
}

fn or<T: Clone>(v: &Option<T>, d: T) -> Option<T> {
    Some(v.clone().unwrap_or(d))
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Rk4Fixed => "rk4",
        Method::Rk45Adaptive => "rk45",
    }
}

impl RunConfig {
    /// Fill defaults and check consistency. Idempotent.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut c = self.clone();
        c.tier = or(&c.tier, Tier::OdeTruncated);
        c.out = or(&c.out, PathBuf::from("out"));
        let tau = c.params.tau.ok_or(CliError::MissingParameter("tau"))?;
        let d = c.params.d.ok_or(CliError::MissingParameter("d"))?;
        c.params.delta0 = or(&c.params.delta0, 0.001);
        c.params.epsilon = or(&c.params.epsilon, ModelParams::DEFAULT_EPSILON);
        let p = ModelParams::new(tau, d, c.params.delta0.unwrap())?.with_epsilon(c.params.epsilon.unwrap())?;
        p.validate()?;
        c.heterogeneity = or(&c.heterogeneity, HetSection::Constant);

        let di = IntegratorConfig::default();
        let i = c.integrator.take().unwrap_or_default();
        c.integrator = Some(IntegratorSection {
            dt: or(&i.dt, di.dt),
            // long enough for slow passages near the scattering thresholds
            t_end: or(&i.t_end, ScatterConfig::default().integrator.t_end),
            method: or(&i.method, method_name(di.method).into()),
            abs_tol: or(&i.abs_tol, di.abs_tol),
            rel_tol: or(&i.rel_tol, di.rel_tol),
            h_blowup: or(&i.h_blowup, di.h_blowup(&p)),
            record_stride: or(&i.record_stride, di.record_stride),
            post_latch: or(&i.post_latch, di.post_latch),
        });

        let grid =
            |g: Option<GridSection>, def_dx: f64, def_dt: f64, periodic_only: bool| -> Result<GridSection, CliError> {
                let g = g.unwrap_or_default();
                let boundary = g.boundary.clone().unwrap_or_else(|| "periodic".into());
                if periodic_only && boundary != "periodic" {
                    return Err(CliError::Inconsistent("the pde tier supports only a periodic boundary".into()));
                }
                let h = HybridConfig::default();
                Ok(GridSection {
                    dx: or(&g.dx, def_dx),
                    dt: or(&g.dt, def_dt),
                    boundary: Some(boundary),
                    t_end: or(&g.t_end, h.t_end),
                    record_stride: or(&g.record_stride, h.record_stride),
                    x_lo: or(&g.x_lo, h.x_lo),
                    x_hi: or(&g.x_hi, h.x_hi),
                    snapshot_every: g.snapshot_every,
                })
            };
        let (hd, pd) = (HybridConfig::default(), PdeConfig::default());
        c.hybrid = Some(grid(c.hybrid.take(), hd.dx, hd.dt, false)?);
        c.pde = Some(grid(c.pde.take(), pd.dx, pd.dt, true)?);

        let dl = LegacyCoefficients::defaults(d);
        let l = c.legacy.take().unwrap_or_default();
        c.legacy = Some(LegacySection {
            m0: or(&l.m0, dl.m0),
            m0_tilde: or(&l.m0_tilde, dl.m0_tilde),
            beta1: or(&l.beta1, dl.beta1),
            beta2: or(&l.beta2, dl.beta2),
            m1: or(&l.m1, dl.m1),
            m2: or(&l.m2, dl.m2),
        });

        let ini = c.initial.take().unwrap_or_default();
        let kind = ini.kind.clone().unwrap_or_else(|| {
            if matches!(c.heterogeneity, Some(HetSection::Constant)) {
                "standing".into()
            } else {
                "incoming".into()
            }
        });
        if !["standing", "traveling", "incoming", "custom"].contains(&kind.as_str()) {
            return Err(CliError::Inconsistent(format!("unknown initial kind `{kind}`")));
        }
        c.initial =
            Some(InitialSection { kind: Some(kind), center: ini.center, h: ini.h, r: ini.r, kick: or(&ini.kick, 0.1) });

        let dc = ClassifyConfig::default();
        let ds = ScatterConfig::default();
        let k = c.classify.take().unwrap_or_default();
        c.classify = Some(ClassifySection {
            transient_skip: or(&k.transient_skip, dc.transient_skip),
            window: or(&k.window, dc.window),
            v_tol: k.v_tol,
            a_tol: k.a_tol,
            rel_tol: or(&k.rel_tol, ds.rel_tol),
            clearance: or(&k.clearance, ds.clearance),
            turn_margin: or(&k.turn_margin, ds.turn_margin),
        });

        let dw = SweepConfig::default();
        let s = c.sweep.take().unwrap_or_default();
        c.sweep = Some(SweepSection {
            d0_min: or(&s.d0_min, 2.0),
            d0_max: or(&s.d0_max, 80.0),
            d0_n: or(&s.d0_n, 40),
            eps0_min: or(&s.eps0_min, -0.01),
            eps0_max: or(&s.eps0_max, 0.01),
            eps0_n: or(&s.eps0_n, 60),
            refine: or(&s.refine, true),
            boundary_tol: or(&s.boundary_tol, dw.boundary_tol.unwrap()),
            horizon_retries: or(&s.horizon_retries, dw.horizon_retries),
        });
        c.residence = Some(c.residence.take().unwrap_or_default());
        let t = c.trap.take().unwrap_or_default();
        c.trap = Some(TrapSection { horizon: or(&t.horizon, 5000.0) });

        c.check(&p)?;
        Ok(c)
    }

    fn check(&self, p: &ModelParams) -> Result<(), CliError> {
        let het = self.heterogeneity()?;
        het.validate()?;
        let integ = self.integrator_config()?;
        if let Some(h0) = self.initial_width(p) {
            if integ.h_blowup(p) <= h0 {
                return Err(CliError::Inconsistent(format!(
                    "integrator.h_blowup = {} does not exceed the initial width {h0}",
                    integ.h_blowup(p)
                )));
            }
        }
        let sw = self.sweep.as_ref().unwrap();
        if sw.d0_n.unwrap() == 0 || sw.eps0_n.unwrap() == 0 {
            return Err(CliError::Inconsistent("sweep grids need at least one point per axis".into()));
        }
        if sw.eps0_n.unwrap() > 1
            && sw.eps0_max.unwrap().partial_cmp(&sw.eps0_min.unwrap()) != Some(std::cmp::Ordering::Greater)
        {
            return Err(CliError::Inconsistent("sweep.eps0_max must exceed sweep.eps0_min".into()));
        }
        self.hybrid_config()?;
        self.pde_config()?;
        Ok(())
    }

    fn initial_width(&self, p: &ModelParams) -> Option<f64> {
        let ini = self.initial.as_ref()?;
        ini.h.or_else(|| (p.delta0 > 0.0).then(|| -p.sqrt_d() * (2.0 * p.delta0).ln()))
    }

    pub fn tier(&self) -> Tier {
        self.tier.unwrap_or(Tier::OdeTruncated)
    }

    pub fn params(&self) -> Result<ModelParams, CliError> {
        let q = &self.params;
        let p = ModelParams::new(
            q.tau.ok_or(CliError::MissingParameter("tau"))?,
            q.d.ok_or(CliError::MissingParameter("d"))?,
            q.delta0.unwrap_or(0.001),
        )?
        .with_epsilon(q.epsilon.unwrap_or(ModelParams::DEFAULT_EPSILON))?;
        Ok(p)
    }

    pub fn heterogeneity(&self) -> Result<Heterogeneity, CliError> {
        Ok(match self.heterogeneity.clone().unwrap_or(HetSection::Constant) {
            HetSection::Constant => Heterogeneity::Constant,
            HetSection::SmoothBump { eps0, d0, gamma, xc } => Heterogeneity::SmoothBump { eps0, d0, gamma, xc },
            HetSection::SharpBump { eps0, d0, xc } => Heterogeneity::SharpBump { eps0, d0, xc },
            HetSection::SquareWell { eps1, eps2, d0, d1, xc } => Heterogeneity::SquareWell { eps1, eps2, d0, d1, xc },
            HetSection::Tabulated { file } => {
                let f = std::fs::File::open(&file).map_err(|e| CliError::Io(format!("{}: {e}", file.display())))?;
                pulse_core::io::read_tabulated(f)?
            }
        })
    }

    pub fn integrator_config(&self) -> Result<IntegratorConfig, CliError> {
        let d = IntegratorConfig::default();
        let i = self.integrator.clone().unwrap_or_default();
        let method = match i.method.as_deref().unwrap_or("rk4") {
            "rk4" => Method::Rk4Fixed,
            "rk45" => Method::Rk45Adaptive,
            other => return Err(CliError::Inconsistent(format!("integrator.method `{other}` is not rk4 or rk45"))),
        };
        Ok(IntegratorConfig {
            dt: i.dt.unwrap_or(d.dt),
            t_end: i.t_end.unwrap_or(d.t_end),
            method,
            abs_tol: i.abs_tol.unwrap_or(d.abs_tol),
            rel_tol: i.rel_tol.unwrap_or(d.rel_tol),
            h_blowup: i.h_blowup,
            record_stride: i.record_stride.unwrap_or(d.record_stride),
            post_latch: i.post_latch.unwrap_or(d.post_latch),
        })
    }

    pub fn variant(&self) -> OdeVariant {
        match self.tier() {
            Tier::OdeFull => OdeVariant::FullRenormalized,
            Tier::OdeLegacy => {
                let l = self.legacy.clone().unwrap_or_default();
                let d = LegacyCoefficients::defaults(self.params.d.unwrap_or(1.0));
                OdeVariant::LegacyWeakInteraction(LegacyCoefficients {
                    m0: l.m0.unwrap_or(d.m0),
                    m0_tilde: l.m0_tilde.unwrap_or(d.m0_tilde),
                    beta1: l.beta1.unwrap_or(d.beta1),
                    beta2: l.beta2.unwrap_or(d.beta2),
                    m1: l.m1.unwrap_or(d.m1),
                    m2: l.m2.unwrap_or(d.m2),
                })
            }
            _ => OdeVariant::Truncated,
        }
    }

    pub fn hybrid_config(&self) -> Result<HybridConfig, CliError> {
        let g = self.hybrid.clone().unwrap_or_default();
        let d = HybridConfig::default();
        let boundary = match g.boundary.as_deref().unwrap_or("periodic") {
            "periodic" => Boundary::Periodic,
            "no-flux" => Boundary::NoFlux,
            other => {
                return Err(CliError::Inconsistent(format!("hybrid.boundary `{other}` is not periodic or no-flux")))
            }
        };
        Ok(HybridConfig {
            dx: g.dx.unwrap_or(d.dx),
            dt: g.dt.unwrap_or(d.dt),
            boundary,
            t_end: g.t_end.unwrap_or(d.t_end),
            record_stride: g.record_stride.unwrap_or(d.record_stride),
            x_lo: g.x_lo.unwrap_or(d.x_lo),
            x_hi: g.x_hi.unwrap_or(d.x_hi),
            snapshot_every: g.snapshot_every,
        })
    }

    pub fn pde_config(&self) -> Result<PdeConfig, CliError> {
        let g = self.pde.clone().unwrap_or_default();
        let d = PdeConfig::default();
        Ok(PdeConfig {
            dx: g.dx.unwrap_or(d.dx),
            dt: g.dt.unwrap_or(d.dt),
            t_end: g.t_end.unwrap_or(d.t_end),
            record_stride: g.record_stride.unwrap_or(d.record_stride),
            x_lo: g.x_lo.unwrap_or(d.x_lo),
            x_hi: g.x_hi.unwrap_or(d.x_hi),
            snapshot_every: g.snapshot_every,
        })
    }

    pub fn classify_config(&self) -> ClassifyConfig {
        let k = self.classify.clone().unwrap_or_default();
        let d = ClassifyConfig::default();
        ClassifyConfig {
            transient_skip: k.transient_skip.unwrap_or(d.transient_skip),
            window: k.window.unwrap_or(d.window),
            v_tol: k.v_tol,
            a_tol: k.a_tol,
        }
    }

    pub fn scatter_config(&self) -> Result<ScatterConfig, CliError> {
        let k = self.classify.clone().unwrap_or_default();
        let d = ScatterConfig::default();
        let integrator = self.integrator_config()?;
        // field tiers only use the labelling thresholds
        Ok(ScatterConfig {
            variant: self.variant(),
            integrator,
            rel_tol: k.rel_tol.unwrap_or(d.rel_tol),
            clearance: k.clearance.unwrap_or(d.clearance),
            turn_margin: k.turn_margin.unwrap_or(d.turn_margin),
        })
    }

    pub fn sweep_config(&self) -> Result<SweepConfig, CliError> {
        let s = self.sweep.clone().unwrap_or_default();
        let d = SweepConfig::default();
        Ok(SweepConfig {
            scatter: self.scatter_config()?,
            boundary_tol: if s.refine.unwrap_or(true) { Some(s.boundary_tol.unwrap_or(1e-5)) } else { None },
            horizon_retries: s.horizon_retries.unwrap_or(d.horizon_retries),
        })
    }

    pub fn sweep_axes(&self) -> (Vec<f64>, Vec<f64>) {
        let s = self.sweep.clone().unwrap_or_default();
        let lin = |a: f64, b: f64, n: usize| -> Vec<f64> {
            if n == 1 {
                vec![a]
            } else {
                (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
            }
        };
        (
            lin(s.d0_min.unwrap_or(2.0), s.d0_max.unwrap_or(80.0), s.d0_n.unwrap_or(40)),
            lin(s.eps0_min.unwrap_or(-0.01), s.eps0_max.unwrap_or(0.01), s.eps0_n.unwrap_or(60)),
        )
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Parse(e.to_string()))
    }
}
