use crate::error::{Error, Result};

/// Physical parameters shared by every model tier.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    pub tau: f64,
    /// Diffusion coefficient of the inhibitor field.
    pub d: f64,
    pub delta0: f64,
    /// Interface width; only the full PDE uses it.
    pub epsilon: f64,
}

impl ModelParams {
    pub const DEFAULT_EPSILON: f64 = 0.05;

    pub fn new(tau: f64, d: f64, delta0: f64) -> Result<Self> {
        let p = ModelParams { tau, d, delta0, epsilon: Self::DEFAULT_EPSILON };
        p.validate()?;
        Ok(p)
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        self.epsilon = epsilon;
        self.validate()?;
        Ok(self)
    }

    pub fn with_tau(self, tau: f64) -> Self {
        ModelParams { tau, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [("tau", self.tau), ("D", self.d), ("epsilon", self.epsilon)];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter { name, reason: format!("must be positive, got {v}") });
            }
        }
        if !(self.delta0 >= 0.0 && self.delta0 < 0.5) {
            return Err(Error::InvalidParameter {
                name: "delta0",
                reason: format!("must lie in [0, 1/2), got {}", self.delta0),
            });
        }
        Ok(())
    }

    pub fn sqrt_d(&self) -> f64 {
        self.d.sqrt()
    }
}

/// Closed-form constants of the reduced interface equations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DerivedCoefficients {
    pub m0: f64,
    pub tau_c: f64,
    pub g3: f64,
    pub g0: f64,
    pub g1: f64,
    pub phi0: f64,
    pub phi1: f64,
    pub phi2: f64,
    /// Reference width -sqrt(D) ln(2 delta0); infinite when delta0 = 0.
    pub h0: f64,
    /// Cubic correction of the traveling-pulse branch; NaN when delta0 = 0.
    pub g3_tilde: f64,
}

impl DerivedCoefficients {
    /// Constants that depend on D only. `h0` and `g3_tilde` are filled when
    /// delta0 > 0 and left as infinity / NaN otherwise.
    pub fn for_params(p: &ModelParams) -> Self {
        let s = p.sqrt_d();
        let d = p.d;
        let mut c = DerivedCoefficients {
            m0: 3.0 / (16.0 * s),
            tau_c: 1.0 / (4.0 * (2.0 * d).sqrt()),
            g3: 1.0 / (32.0 * d * s),
            g0: 0.5,
            g1: 1.0 / (4.0 * s),
            phi0: 1.0 / s,
            phi1: 1.0 / (2.0 * d),
            phi2: 1.0 / (8.0 * d * s),
            h0: f64::INFINITY,
            g3_tilde: f64::NAN,
        };
        if p.delta0 > 0.0 {
            c.h0 = -s * (2.0 * p.delta0).ln();
            let y = c.h0 / s;
            c.g3_tilde = p.delta0 * y * (2.0 * y * y + 3.0 * y + 3.0) / (48.0 * d * s);
        }
        c
    }

    /// Width correction coefficient of the traveling-pulse branch:
    /// h* = h0 + h2 (tau_d - tau).
    pub fn h2(&self, p: &ModelParams) -> f64 {
        let s = p.sqrt_d();
        let y = self.h0 / s;
        let r1_sq = 2f64.sqrt() / (self.g3 - self.g3_tilde);
        r1_sq * y * (y + 1.0) / (8.0 * s)
    }
}

pub fn derive_coefficients(p: &ModelParams) -> Result<DerivedCoefficients> {
    p.validate()?;
    if p.delta0 == 0.0 {
        return Err(Error::DegenerateBaseline);
    }
    Ok(DerivedCoefficients::for_params(p))
}

/// phi(r) = sqrt(r^2 + 4D).
pub fn kinematic_phi(r: f64, d: f64) -> f64 {
    (r * r + 4.0 * d).sqrt()
}

/// Decay rate Phi(r) = (r + phi(r)) / (2D) of the inhibitor ahead of a moving front.
pub fn decay_rate(r: f64, d: f64) -> f64 {
    (r + kinematic_phi(r, d)) / (2.0 * d)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prefactors {
    pub m: f64,
    pub big_m: f64,
    pub g: f64,
    pub big_g: f64,
}

pub fn prefactors(r: f64, h: f64, tau: f64, d: f64) -> Prefactors {
    let phi = kinematic_phi(r, d);
    let phi2 = phi * phi;
    let phi3 = phi2 * phi;
    let phi4 = phi3 * phi;
    let phi5 = phi4 * phi;
    let m = 6.0 * d * d / phi5;
    Prefactors {
        m,
        big_m: m + 3.0 * d * h / phi4 + h * h / (2.0 * phi3),
        g: -(2f64.sqrt()) * tau * r + r / (2.0 * phi),
        big_g: (r + phi) / (2.0 * phi),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn base() -> ModelParams {
        ModelParams::new(0.17, 1.0, 0.001).unwrap()
    }

    #[test]
    fn unit_diffusion_constants() {
        let c = derive_coefficients(&base()).unwrap();
        assert_relative_eq!(c.tau_c, 0.176_776_695_296_636_9, epsilon = 1e-15);
        assert_eq!((c.m0, c.g3, c.g0, c.g1), (0.1875, 0.03125, 0.5, 0.25));
        assert_relative_eq!(c.h0, 6.214_608_098_422_191, epsilon = 1e-12);
        assert_relative_eq!(c.g3_tilde, 0.012_802_938_378_170_627, epsilon = 1e-12);
    }

    #[test]
    fn zero_baseline_is_degenerate() {
        let p = ModelParams::new(0.17, 1.0, 0.0).unwrap();
        assert_eq!(derive_coefficients(&p), Err(Error::DegenerateBaseline));
        assert!(DerivedCoefficients::for_params(&p).h0.is_infinite());
    }

    #[test]
    fn rejects_bad_params() {
        assert!(ModelParams::new(0.0, 1.0, 0.001).is_err());
        assert!(ModelParams::new(0.1, -1.0, 0.001).is_err());
        assert!(ModelParams::new(0.1, 1.0, 0.5).is_err());
        assert!(base().with_epsilon(0.0).is_err());
    }

    #[test]
    fn phi_values() {
        assert_eq!(kinematic_phi(0.0, 1.0), 2.0);
        assert_eq!(decay_rate(0.0, 1.0), 1.0);
        assert_eq!(decay_rate(0.0, 4.0), 0.5);
        let c = DerivedCoefficients::for_params(&base());
        let series = c.phi0 + c.phi1 * 0.1;
        assert!((decay_rate(0.1, 1.0) - series).abs() < 2.0 * c.phi2 * 0.01);
    }

    #[test]
    fn prefactors_at_rest() {
        let pf = prefactors(0.0, 0.0, 0.17, 1.0);
        assert_eq!(pf.m, 0.1875);
        assert_eq!(pf.big_m, pf.m);
        assert_eq!(pf.big_g, 0.5);
        assert_eq!(pf.g, 0.0);
    }

    #[test]
    fn g_series_is_fifth_order() {
        let p = base();
        let c = DerivedCoefficients::for_params(&p);
        let err = |r: f64| {
            let g = prefactors(r, 0.0, p.tau, p.d).g;
            (g - (-(2f64.sqrt()) * (p.tau - c.tau_c) * r - c.g3 * r.powi(3))).abs()
        };
        let ratio1 = err(0.1) / err(0.05);
        let ratio2 = err(0.05) / err(0.025);
        assert!((ratio1 - 32.0).abs() < 1.0, "{ratio1}");
        assert!((ratio2 - 32.0).abs() < 1.0, "{ratio2}");
    }
}
