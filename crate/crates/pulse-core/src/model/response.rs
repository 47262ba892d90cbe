use std::sync::Arc;

use super::heterogeneity::{interp_clamped, Heterogeneity, Plateau};
use super::params::ModelParams;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Analytic,
    Numeric,
}

#[derive(Clone, Debug)]
enum Evaluator {
    Plateaus { delta0: f64, s: f64, plateaus: Vec<Plateau> },
    Grid { x: Arc<Vec<f64>>, values: Arc<Vec<f64>> },
}

/// Diffusive response Delta0(x) of the inhibitor to the source profile,
/// i.e. the bounded solution of D u'' - u + delta(x) = 0.
#[derive(Clone, Debug)]
pub struct ResponseProfile {
    eval: Evaluator,
    delta0: f64,
    support: Option<(f64, f64)>,
    edges: Vec<f64>,
}

/// Response to a unit plateau on [a, b] with decay length s.
pub fn box_response(x: f64, a: f64, b: f64, s: f64) -> f64 {
    if x <= a {
        0.5 * (((x - a) / s).exp() - ((x - b) / s).exp())
    } else if x >= b {
        0.5 * (((b - x) / s).exp() - ((a - x) / s).exp())
    } else {
        1.0 - 0.5 * ((a - x) / s).exp() - 0.5 * ((x - b) / s).exp()
    }
}

pub fn box_response_deriv(x: f64, a: f64, b: f64, s: f64) -> f64 {
    if x <= a {
        0.5 * (((x - a) / s).exp() - ((x - b) / s).exp()) / s
    } else if x >= b {
        -0.5 * (((b - x) / s).exp() - ((a - x) / s).exp()) / s
    } else {
        (0.5 * ((a - x) / s).exp() - 0.5 * ((x - b) / s).exp()) / s
    }
}

impl ResponseProfile {
    pub fn constant(delta0: f64) -> Self {
        ResponseProfile {
            eval: Evaluator::Plateaus { delta0, s: 1.0, plateaus: vec![] },
            delta0,
            support: None,
            edges: vec![],
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match &self.eval {
            Evaluator::Plateaus { delta0, s, plateaus } => {
                delta0 + plateaus.iter().map(|p| p.height * box_response(x, p.a, p.b, *s)).sum::<f64>()
            }
            Evaluator::Grid { x: xs, values } => interp_clamped(xs, values, x),
        }
    }

    pub fn deriv(&self, x: f64) -> f64 {
        match &self.eval {
            Evaluator::Plateaus { s, plateaus, .. } => {
                plateaus.iter().map(|p| p.height * box_response_deriv(x, p.a, p.b, *s)).sum()
            }
            Evaluator::Grid { x: xs, values } => {
                let n = xs.len();
                if x <= xs[0] || x >= xs[n - 1] {
                    return 0.0;
                }
                let i = (xs.partition_point(|&v| v <= x) - 1).min(n - 2);
                (values[i + 1] - values[i]) / (xs[i + 1] - xs[i])
            }
        }
    }

    pub fn provenance(&self) -> Provenance {
        match self.eval {
            Evaluator::Plateaus { .. } => Provenance::Analytic,
            Evaluator::Grid { .. } => Provenance::Numeric,
        }
    }

    pub fn far_field(&self) -> f64 {
        self.delta0
    }

    pub fn support(&self) -> Option<(f64, f64)> {
        self.support
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn is_homogeneous(&self) -> bool {
        self.support.is_none()
    }
}

pub fn response_analytic(het: &Heterogeneity, p: &ModelParams) -> Result<ResponseProfile> {
    het.validate()?;
    let plateaus = het.plateaus().ok_or(Error::UseNumeric(het.name()))?;
    Ok(ResponseProfile {
        eval: Evaluator::Plateaus { delta0: p.delta0, s: p.sqrt_d(), plateaus },
        delta0: p.delta0,
        support: het.support(),
        edges: het.edges(),
    })
}

/// Second-order finite-difference solve on `grid_n` nodes over `domain`, with
/// the far-field value imposed at both ends.
pub fn response_numeric(
    het: &Heterogeneity,
    p: &ModelParams,
    domain: (f64, f64),
    grid_n: usize,
) -> Result<ResponseProfile> {
    het.validate()?;
    if grid_n < 16 || !(domain.1 > domain.0) {
        return Err(Error::InvalidParameter {
            name: "grid_n",
            reason: format!("need at least 16 nodes on a non-empty domain, got {grid_n}"),
        });
    }
    let far = match het {
        Heterogeneity::Tabulated { delta, .. } => delta[0],
        _ => p.delta0,
    };
    let dx = (domain.1 - domain.0) / (grid_n - 1) as f64;
    let xs: Vec<f64> = (0..grid_n).map(|i| domain.0 + i as f64 * dx).collect();
    let k = p.d / (dx * dx);
    let m = grid_n - 2;
    let sub = vec![-k; m];
    let diag = vec![2.0 * k + 1.0; m];
    let sup = vec![-k; m];
    let mut rhs: Vec<f64> = xs[1..grid_n - 1].iter().map(|&x| het.cell_average(x, dx, p.delta0)).collect();
    rhs[0] += k * far;
    rhs[m - 1] += k * far;
    let inner = crate::linalg::solve_tridiagonal(&sub, &diag, &sup, &rhs);
    let mut values = Vec::with_capacity(grid_n);
    values.push(far);
    values.extend(inner);
    values.push(far);

    // One decay length in from each end the solution must already sit at the far field.
    let probe = (p.sqrt_d() / dx).ceil() as usize;
    if probe >= grid_n / 2 {
        return Err(Error::FarFieldViolation(f64::INFINITY));
    }
    let dev = (values[probe] - far).abs().max((values[grid_n - 1 - probe] - far).abs());
    if dev > 1e-6 {
        return Err(Error::FarFieldViolation(dev));
    }
    Ok(ResponseProfile {
        eval: Evaluator::Grid { x: Arc::new(xs), values: Arc::new(values) },
        delta0: far,
        support: het.support(),
        edges: het.edges(),
    })
}

/// Analytic profile when one exists, otherwise a numeric solve on a domain
/// padded by 40 sqrt(D) around the support.
pub fn response_auto(het: &Heterogeneity, p: &ModelParams) -> Result<ResponseProfile> {
    match response_analytic(het, p) {
        Err(Error::UseNumeric(_)) => {
            let (a, b) = het.support().unwrap_or((-1.0, 1.0));
            let pad = 40.0 * p.sqrt_d();
            let n = (((b - a + 2.0 * pad) / 0.01).ceil() as usize).clamp(1024, 1 << 20);
            response_numeric(het, p, (a - pad, b + pad), n)
        }
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ModelParams {
        ModelParams::new(0.17, 1.0, 0.001).unwrap()
    }

    #[test]
    fn constant_is_flat() {
        let r = response_analytic(&Heterogeneity::Constant, &params()).unwrap();
        for x in [-100.0, 0.0, 3.3] {
            assert_eq!(r.eval(x), 0.001);
        }
        let n = response_numeric(&Heterogeneity::Constant, &params(), (-20.0, 20.0), 64).unwrap();
        assert!((n.eval(1.234) - 0.001).abs() < 1e-10);
    }

    #[test]
    fn bump_centre_value() {
        let het = Heterogeneity::SharpBump { eps0: 0.005, d0: 10.0, xc: 0.0 };
        let r = response_analytic(&het, &params()).unwrap();
        let expect = 0.001 + 0.005 * (1.0 - (-5.0f64).exp());
        assert!((r.eval(0.0) - expect).abs() < 1e-15);
        let zero = Heterogeneity::SharpBump { eps0: 0.0, d0: 10.0, xc: 0.0 };
        assert_eq!(response_analytic(&zero, &params()).unwrap().eval(2.0), 0.001);
    }

    #[test]
    fn numeric_matches_closed_form() {
        let het = Heterogeneity::SharpBump { eps0: 0.005, d0: 10.0, xc: 0.0 };
        let a = response_analytic(&het, &params()).unwrap();
        let n = response_numeric(&het, &params(), (-40.0, 40.0), 4096).unwrap();
        assert_eq!(n.provenance(), Provenance::Numeric);
        let err =
            (0..2000).map(|i| -39.0 + i as f64 * 0.039).map(|x| (a.eval(x) - n.eval(x)).abs()).fold(0.0, f64::max);
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn smooth_bump_response_converges() {
        let sharp = response_analytic(&Heterogeneity::SharpBump { eps0: 0.005, d0: 10.0, xc: 0.0 }, &params()).unwrap();
        let mut last = f64::INFINITY;
        for gamma in [10.0, 100.0, 1000.0] {
            let het = Heterogeneity::SmoothBump { eps0: 0.005, d0: 10.0, gamma, xc: 0.0 };
            let n = response_numeric(&het, &params(), (-40.0, 40.0), 16001).unwrap();
            let err = (0..800)
                .map(|i| -20.0 + i as f64 * 0.05)
                .map(|x| (sharp.eval(x) - n.eval(x)).abs())
                .fold(0.0, f64::max);
            assert!(err < last, "gamma {gamma}: {err} vs {last}");
            last = err;
        }
    }

    #[test]
    fn small_domain_is_rejected() {
        let het = Heterogeneity::SharpBump { eps0: 0.005, d0: 10.0, xc: 0.0 };
        let e = response_numeric(&het, &params(), (-6.0, 6.0), 256).unwrap_err();
        assert_eq!(e.kind(), "far-field-violation");
    }

    #[test]
    fn smooth_needs_numeric() {
        let het = Heterogeneity::SmoothBump { eps0: 0.005, d0: 10.0, gamma: 5.0, xc: 0.0 };
        assert_eq!(response_analytic(&het, &params()).unwrap_err().kind(), "use-response-numeric");
        let r = response_auto(&het, &params()).unwrap();
        assert_eq!(r.provenance(), Provenance::Numeric);
    }

    #[test]
    fn ode_residual_of_closed_form() {
        let het = Heterogeneity::SquareWell { eps1: 0.0048, eps2: -0.008, d0: 10.0, d1: 30.0, xc: 0.0 };
        let p = ModelParams::new(0.17, 2.0, 0.001).unwrap();
        let r = response_analytic(&het, &p).unwrap();
        let hstep = 1e-3;
        for i in 0..400 {
            let x = -60.0 + 0.3 * i as f64 + 0.0123;
            if het.edges().iter().any(|e| (x - e).abs() < 2.0 * hstep) {
                continue;
            }
            let d2 = (r.eval(x + hstep) - 2.0 * r.eval(x) + r.eval(x - hstep)) / (hstep * hstep);
            let res = p.d * d2 - r.eval(x) + het.delta(x, p.delta0);
            assert!(res.abs() < 1e-8, "x={x} res={res}");
        }
    }

    #[test]
    fn derivative_is_continuous_at_edges() {
        let het = Heterogeneity::SharpBump { eps0: 0.01, d0: 4.0, xc: 1.0 };
        let r = response_analytic(&het, &params()).unwrap();
        for e in het.edges() {
            assert!((r.deriv(e - 1e-12) - r.deriv(e + 1e-12)).abs() < 1e-10);
            assert!((r.eval(e - 1e-12) - r.eval(e + 1e-12)).abs() < 1e-12);
        }
    }
}
