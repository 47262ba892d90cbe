use crate::error::{Error, Result};

/// Spatial profile of the source term delta(x) in the inhibitor equation.
///
/// Heights are measured relative to the far-field value `delta0` carried by
/// [`crate::model::ModelParams`].
#[derive(Clone, Debug, PartialEq)]
pub enum Heterogeneity {
    Constant,
    SmoothBump {
        eps0: f64,
        d0: f64,
        gamma: f64,
        xc: f64,
    },
    SharpBump {
        eps0: f64,
        d0: f64,
        xc: f64,
    },
    SquareWell {
        eps1: f64,
        eps2: f64,
        d0: f64,
        d1: f64,
        xc: f64,
    },
    /// Absolute delta values sampled at increasing positions.
    Tabulated {
        x: Vec<f64>,
        delta: Vec<f64>,
    },
}

/// Plateau of height `height` on [a, b].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Plateau {
    pub a: f64,
    pub b: f64,
    pub height: f64,
}

fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl Heterogeneity {
    pub fn validate(&self) -> Result<()> {
        let pos = |name: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter { name, reason: format!("must be positive, got {v}") })
            }
        };
        match self {
            Heterogeneity::Constant => Ok(()),
            Heterogeneity::SmoothBump { d0, gamma, .. } => {
                pos("d0", *d0)?;
                pos("gamma", *gamma)
            }
            Heterogeneity::SharpBump { d0, .. } => pos("d0", *d0),
            Heterogeneity::SquareWell { d0, d1, .. } => {
                pos("d0", *d0)?;
                pos("d1", *d1)
            }
            Heterogeneity::Tabulated { x, delta } => {
                if x.len() != delta.len() || x.len() < 2 {
                    return Err(Error::InvalidParameter {
                        name: "samples",
                        reason: "need at least two (x, delta) pairs".into(),
                    });
                }
                if x.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::InvalidParameter {
                        name: "samples",
                        reason: "positions must be strictly increasing".into(),
                    });
                }
                Ok(())
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Heterogeneity::Constant => "constant",
            Heterogeneity::SmoothBump { .. } => "smooth-bump",
            Heterogeneity::SharpBump { .. } => "sharp-bump",
            Heterogeneity::SquareWell { .. } => "square-well",
            Heterogeneity::Tabulated { .. } => "tabulated",
        }
    }

    /// Piecewise-constant decomposition, when one exists.
    pub fn plateaus(&self) -> Option<Vec<Plateau>> {
        match *self {
            Heterogeneity::Constant => Some(vec![]),
            Heterogeneity::SharpBump { eps0, d0, xc } => {
                Some(vec![Plateau { a: xc - d0 / 2.0, b: xc + d0 / 2.0, height: eps0 }])
            }
            Heterogeneity::SquareWell { eps1, eps2, d0, d1, xc } => Some(vec![
                Plateau { a: xc - d0 / 2.0 - d1, b: xc - d0 / 2.0, height: eps1 },
                Plateau { a: xc - d0 / 2.0, b: xc + d0 / 2.0, height: eps2 },
                Plateau { a: xc + d0 / 2.0, b: xc + d0 / 2.0 + d1, height: eps1 },
            ]),
            _ => None,
        }
    }

    /// Interval outside of which delta equals its far-field value (up to the
    /// logistic tails for the smooth bump).
    pub fn support(&self) -> Option<(f64, f64)> {
        match *self {
            Heterogeneity::Constant => None,
            Heterogeneity::SmoothBump { d0, xc, .. } | Heterogeneity::SharpBump { d0, xc, .. } => {
                Some((xc - d0 / 2.0, xc + d0 / 2.0))
            }
            Heterogeneity::SquareWell { d0, d1, xc, .. } => Some((xc - d0 / 2.0 - d1, xc + d0 / 2.0 + d1)),
            Heterogeneity::Tabulated { ref x, .. } => Some((x[0], x[x.len() - 1])),
        }
    }

    /// Positions where delta jumps (or has its steepest change).
    pub fn edges(&self) -> Vec<f64> {
        match *self {
            Heterogeneity::SquareWell { d0, d1, xc, .. } => {
                vec![xc - d0 / 2.0 - d1, xc - d0 / 2.0, xc + d0 / 2.0, xc + d0 / 2.0 + d1]
            }
            _ => self.support().map(|(a, b)| vec![a, b]).unwrap_or_default(),
        }
    }

    /// delta(x) including the far-field value.
    pub fn delta(&self, x: f64, delta0: f64) -> f64 {
        match self {
            Heterogeneity::SmoothBump { eps0, d0, gamma, xc } => {
                let rise = logistic(gamma * (x - xc + d0 / 2.0));
                let fall = logistic(gamma * (x - xc - d0 / 2.0));
                delta0 + eps0 * (rise - fall)
            }
            Heterogeneity::Tabulated { x: xs, delta } => interp_clamped(xs, delta, x),
            other => {
                let plateaus = other.plateaus().unwrap_or_default();
                delta0 + plateaus.iter().filter(|p| x >= p.a && x < p.b).map(|p| p.height).sum::<f64>()
            }
        }
    }

    /// Mean of delta over [x - w/2, x + w/2]; exact for piecewise-constant profiles.
    pub fn cell_average(&self, x: f64, w: f64, delta0: f64) -> f64 {
        match self.plateaus() {
            Some(ps) => {
                let (lo, hi) = (x - w / 2.0, x + w / 2.0);
                delta0 + ps.iter().map(|p| p.height * ((hi.min(p.b) - lo.max(p.a)).max(0.0)) / w).sum::<f64>()
            }
            None => {
                const K: usize = 8;
                (0..K).map(|k| self.delta(x - w / 2.0 + (k as f64 + 0.5) * w / K as f64, delta0)).sum::<f64>()
                    / K as f64
            }
        }
    }
}

pub(crate) fn interp_clamped(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let i = xs.partition_point(|&v| v <= x) - 1;
    let t = (x - xs[i]) / (xs[i + 1] - xs[i]);
    ys[i] + t * (ys[i + 1] - ys[i])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sharp_bump_levels() {
        let h = Heterogeneity::SharpBump { eps0: 0.005, d0: 10.0, xc: 0.0 };
        assert_eq!(h.delta(0.0, 0.001), 0.006);
        assert_eq!(h.delta(-5.1, 0.001), 0.001);
        assert_eq!(h.edges(), vec![-5.0, 5.0]);
    }

    #[test]
    fn smooth_bump_approaches_plateau() {
        let h = Heterogeneity::SmoothBump { eps0: 0.005, d0: 10.0, gamma: 50.0, xc: 0.0 };
        assert!((h.delta(0.0, 0.001) - 0.006).abs() < 1e-12);
        assert!((h.delta(-20.0, 0.001) - 0.001).abs() < 1e-12);
        assert!((h.delta(20.0, 0.001) - 0.001).abs() < 1e-12);
        assert!((h.delta(-5.0, 0.001) - 0.0035).abs() < 1e-12);
    }

    #[test]
    fn square_well_levels() {
        let h = Heterogeneity::SquareWell { eps1: 0.0048, eps2: -0.004, d0: 10.0, d1: 30.0, xc: 0.0 };
        assert_eq!(h.delta(0.0, 0.001), 0.001 - 0.004);
        assert_eq!(h.delta(-20.0, 0.001), 0.001 + 0.0048);
        assert_eq!(h.delta(36.0, 0.001), 0.001);
        assert_eq!(h.support(), Some((-35.0, 35.0)));
    }

    #[test]
    fn cell_average_straddles_edge() {
        let h = Heterogeneity::SharpBump { eps0: 1.0, d0: 2.0, xc: 0.0 };
        assert!((h.cell_average(1.0, 0.5, 0.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn tabulated_interpolates() {
        let h = Heterogeneity::Tabulated { x: vec![0.0, 1.0, 2.0], delta: vec![0.0, 1.0, 0.0] };
        h.validate().unwrap();
        assert_eq!(h.delta(0.5, 9.0), 0.5);
        assert_eq!(h.delta(-3.0, 9.0), 0.0);
        let bad = Heterogeneity::Tabulated { x: vec![0.0, 0.0], delta: vec![0.0, 1.0] };
        assert!(bad.validate().is_err());
    }
}
