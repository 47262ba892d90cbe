use crate::error::{Error, Result};
use crate::linalg::cubic_roots;
use crate::model::{DerivedCoefficients, Heterogeneity, ModelParams, ResponseProfile};
use crate::reduced_ode::Side;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrontVelocities {
    pub side: Side,
    pub r_plus: f64,
    pub r_minus: f64,
    pub r_zero: f64,
    /// Second-order small-delta0 approximations of the same three roots.
    pub approx_plus: f64,
    pub approx_minus: f64,
    pub approx_zero: f64,
}

impl FrontVelocities {
    pub fn roots(&self) -> [f64; 3] {
        [self.r_plus, self.r_minus, self.r_zero]
    }
}

/// Exact roots of sqrt(2)(tau_c - tau) r - g3 r^3 + drive = 0, in the left-front
/// orientation (drive > 0): returns (plus, minus, zero) with minus < zero < 0 < plus.
pub fn front_velocities_exact(p: &ModelParams, c: &DerivedCoefficients, drive: f64) -> Result<FrontVelocities> {
    let a = 2f64.sqrt() * (c.tau_c - p.tau);
    if a <= 0.0 {
        return Err(Error::FoldCollision);
    }
    let roots = cubic_roots(0.0, -a / c.g3, -drive / c.g3);
    if roots.iter().any(|z| z.im.abs() > 1e-12 * (1.0 + z.re.abs())) {
        return Err(Error::FoldCollision);
    }
    let mut re: Vec<f64> = roots.iter().map(|z| z.re).collect();
    re.sort_by(f64::total_cmp);
    let rs = (a / c.g3).sqrt();
    let x2 = 3.0 * c.g3 * rs / (8.0 * a.powi(3));
    let (lo, mid, hi) = (re[0], re[1], re[2]);
    Ok(FrontVelocities {
        side: Side::Left,
        r_plus: hi,
        r_minus: lo,
        r_zero: mid,
        approx_plus: rs + drive / (2.0 * a) - x2 * drive * drive,
        approx_minus: -rs + drive / (2.0 * a) + x2 * drive * drive,
        approx_zero: -drive / a,
    })
}

/// Traveling-front velocities of an isolated front in the homogeneous medium.
/// The right front is the mirror image of the left one.
pub fn front_velocities(side: Side, p: &ModelParams, c: &DerivedCoefficients) -> Result<FrontVelocities> {
    let left = front_velocities_exact(p, c, p.delta0)?;
    Ok(match side {
        Side::Left => left,
        Side::Right => FrontVelocities {
            side: Side::Right,
            r_plus: -left.r_minus,
            r_minus: -left.r_plus,
            r_zero: -left.r_zero,
            approx_plus: -left.approx_minus,
            approx_minus: -left.approx_plus,
            approx_zero: -left.approx_zero,
        },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrontBranch {
    /// Zero of the response lies outside the plateau.
    Edge,
    Interior,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FixedPointType {
    Saddle,
    UnstableNode,
    UnstableFocus,
    Stable,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StationaryFront {
    pub l_star: f64,
    pub branch: FrontBranch,
    pub z0: f64,
    pub z_star: f64,
    /// Response slope at the front divided by m0.
    pub p0: f64,
    pub trace: f64,
    pub det: f64,
    pub stability: FixedPointType,
}

fn classify_2x2(trace: f64, det: f64) -> FixedPointType {
    if det < 0.0 {
        FixedPointType::Saddle
    } else if trace <= 0.0 {
        FixedPointType::Stable
    } else if trace * trace >= 4.0 * det {
        FixedPointType::UnstableNode
    } else {
        FixedPointType::UnstableFocus
    }
}

/// Stationary left front at the zero of the response to a depressed plateau,
/// on the side x >= x_c. The mirror zero is at 2 x_c - l_star.
pub fn stationary_front(p: &ModelParams, c: &DerivedCoefficients, het: &Heterogeneity) -> Result<StationaryFront> {
    let Heterogeneity::SharpBump { eps0, d0, xc } = *het else {
        return Err(Error::NoStationaryFront(format!("requires a sharp bump, got {}", het.name())));
    };
    let s = p.sqrt_d();
    let z0 = (-d0 / (2.0 * s)).exp();
    let delta0 = p.delta0;
    if !(delta0 > 0.0) || eps0 > -delta0 / (1.0 - z0) {
        return Err(Error::NoStationaryFront(format!("eps0 = {eps0} above the threshold {}", -delta0 / (1.0 - z0))));
    }
    let (branch, z_star) = if eps0 <= -2.0 * delta0 / (1.0 - z0 * z0) {
        (FrontBranch::Edge, -2.0 * z0 * delta0 / (eps0 * (1.0 - z0 * z0)))
    } else {
        let a = (delta0 + eps0) / (eps0 * z0);
        (FrontBranch::Interior, 1.0 / (a * (1.0 + (1.0 - 1.0 / (a * a)).max(0.0).sqrt())))
    };
    let l_star = xc - s * z_star.ln();
    let resp = crate::model::response_analytic(het, p)?;
    let p0 = resp.deriv(l_star) / c.m0;
    let trace = 2f64.sqrt() * (c.tau_c - p.tau) / c.m0;
    let det = -p0;
    Ok(StationaryFront { l_star, branch, z0, z_star, p0, trace, det, stability: classify_2x2(trace, det) })
}

/// Linearization type of the mirror zero at 2 x_c - l_star.
pub fn mirror_front_type(front: &StationaryFront) -> FixedPointType {
    classify_2x2(front.trace, front.p0)
}

/// Plateau height whose stationary front (edge branch) sits at `l_star`.
pub fn eps0_for_front(p: &ModelParams, d0: f64, l_star: f64) -> f64 {
    let s = p.sqrt_d();
    let z0 = (-d0 / (2.0 * s)).exp();
    let z = (-l_star / s).exp();
    -2.0 * z0 * p.delta0 / (z * (1.0 - z0 * z0))
}

/// Response residual at a stationary front.
pub fn front_residual(front: &StationaryFront, resp: &ResponseProfile) -> f64 {
    resp.eval(front.l_star)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::response_analytic;

    fn setup() -> (ModelParams, DerivedCoefficients) {
        let p = ModelParams::new(0.17, 1.0, 0.001).unwrap();
        (p, DerivedCoefficients::for_params(&p))
    }

    #[test]
    fn left_roots_and_expansion() {
        let (p, c) = setup();
        let v = front_velocities(Side::Left, &p, &c).unwrap();
        assert!(v.r_minus < v.r_zero && v.r_zero < 0.0 && 0.0 < v.r_plus);
        assert!((v.approx_plus - 0.5985).abs() < 5e-4);
        assert!((v.approx_minus + 0.4942).abs() < 5e-4);
        assert!((v.approx_zero + 0.1043).abs() < 5e-4);
        assert!((v.r_plus - 0.600_01).abs() < 1e-4);
        // Vieta: sum of roots 0, product = drive / g3
        assert!((v.r_plus + v.r_minus + v.r_zero).abs() < 1e-12);
        assert!((v.r_plus * v.r_minus * v.r_zero - p.delta0 / c.g3).abs() < 1e-12);
    }

    #[test]
    fn right_is_mirror() {
        let (p, c) = setup();
        let l = front_velocities(Side::Left, &p, &c).unwrap();
        let r = front_velocities(Side::Right, &p, &c).unwrap();
        assert_eq!(r.r_zero, -l.r_zero);
        assert!(r.r_minus < 0.0 && 0.0 < r.r_zero && r.r_zero < r.r_plus);
    }

    #[test]
    fn fold_when_drive_large() {
        let (p, c) = setup();
        assert_eq!(front_velocities_exact(&p, &c, 0.01).unwrap_err(), Error::FoldCollision);
        let above = p.with_tau(0.18);
        assert_eq!(front_velocities(Side::Left, &above, &c).unwrap_err(), Error::FoldCollision);
    }

    #[test]
    fn interior_root_on_wide_bumps() {
        let (p, _) = setup();
        let c = DerivedCoefficients::for_params(&p);
        for d0 in [40.0, 60.0, 80.0] {
            let z0 = (-d0 / 2.0f64).exp();
            let het = Heterogeneity::SharpBump { eps0: -1.2 * p.delta0 / (1.0 - z0), d0, xc: 0.0 };
            let f = stationary_front(&p, &c, &het).unwrap();
            assert_eq!(f.branch, FrontBranch::Interior);
            assert!(f.l_star.is_finite() && f.l_star < d0 / 2.0);
            assert!(front_residual(&f, &response_analytic(&het, &p).unwrap()).abs() < 1e-15);
        }
    }

    #[test]
    fn reference_front_position() {
        let (p, c) = setup();
        let het = Heterogeneity::SharpBump { eps0: -0.005206, d0: 10.0, xc: 0.0 };
        let f = stationary_front(&p, &c, &het).unwrap();
        assert_eq!(f.branch, FrontBranch::Edge);
        assert!((f.l_star - 5.9565).abs() < 1e-3, "{}", f.l_star);
        let resp = response_analytic(&het, &p).unwrap();
        assert!(front_residual(&f, &resp).abs() < 1e-12);
        assert_eq!(f.stability, FixedPointType::Saddle);
        assert!(matches!(mirror_front_type(&f), FixedPointType::UnstableNode | FixedPointType::UnstableFocus));
        let eps = eps0_for_front(&p, 10.0, f.l_star);
        assert!((eps + 0.005206).abs() < 1e-12);
    }

    #[test]
    fn branches_meet_continuously() {
        let (p, c) = setup();
        let z0 = (-5.0f64).exp();
        let eps = -2.0 * p.delta0 / (1.0 - z0 * z0);
        let edge = stationary_front(&p, &c, &Heterogeneity::SharpBump { eps0: eps, d0: 10.0, xc: 0.0 }).unwrap();
        let inner =
            stationary_front(&p, &c, &Heterogeneity::SharpBump { eps0: eps * (1.0 - 1e-13), d0: 10.0, xc: 0.0 })
                .unwrap();
        assert_eq!(inner.branch, FrontBranch::Interior);
        assert!((edge.l_star - 5.0).abs() < 1e-9);
        assert!((inner.l_star - 5.0).abs() < 1e-6);
    }

    #[test]
    fn interior_residual_and_threshold() {
        let (p, c) = setup();
        let het = Heterogeneity::SharpBump { eps0: -0.0015, d0: 10.0, xc: 2.0 };
        let f = stationary_front(&p, &c, &het).unwrap();
        assert_eq!(f.branch, FrontBranch::Interior);
        let resp = response_analytic(&het, &p).unwrap();
        assert!(front_residual(&f, &resp).abs() < 1e-12);
        let shallow = Heterogeneity::SharpBump { eps0: -0.0005, d0: 10.0, xc: 0.0 };
        assert_eq!(stationary_front(&p, &c, &shallow).unwrap_err().kind(), "no-stationary-front");
    }
}
