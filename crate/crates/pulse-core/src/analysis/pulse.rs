use nalgebra::Matrix3;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::cubic_roots;
use crate::model::{decay_rate, DerivedCoefficients, ModelParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PulseKind {
    Sp,
    TpPlus,
    TpMinus,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StationaryPulse {
    pub h_star: f64,
    pub r_star: f64,
    pub kind: PulseKind,
}

impl StationaryPulse {
    /// Mirror-image pulse moving the other way.
    pub fn reflect(&self) -> Self {
        let kind = match self.kind {
            PulseKind::Sp => PulseKind::Sp,
            PulseKind::TpPlus => PulseKind::TpMinus,
            PulseKind::TpMinus => PulseKind::TpPlus,
        };
        StationaryPulse { h_star: self.h_star, r_star: -self.r_star, kind }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BifurcationPoints {
    pub tau_d: f64,
    pub tau_h: f64,
    pub k_h: f64,
    /// Linearization entries: P (width restoring), R (velocity cross-coupling).
    pub p: f64,
    pub r: f64,
}

impl BifurcationPoints {
    /// Velocity self-coupling at a given tau.
    pub fn q(&self, c: &DerivedCoefficients, tau: f64) -> f64 {
        2f64.sqrt() * (c.tau_c - tau) / c.m0
    }
}

pub fn sp_homogeneous(p: &ModelParams) -> Result<StationaryPulse> {
    if !(p.delta0 > 0.0 && p.delta0 < 0.5) {
        return Err(Error::NoStationaryPulse(format!("delta0 = {} outside (0, 1/2)", p.delta0)));
    }
    Ok(StationaryPulse { h_star: -p.sqrt_d() * (2.0 * p.delta0).ln(), r_star: 0.0, kind: PulseKind::Sp })
}

/// Pitchfork and Hopf points from the closed forms, with the velocity dependence
/// of the interaction weighted by `g1` and `phi1` (pass the defaults from `c`, or
/// zeros for the constant-interaction limit).
pub fn bifurcation_points_with(
    p: &ModelParams,
    c: &DerivedCoefficients,
    g1: f64,
    phi1: f64,
) -> Result<BifurcationPoints> {
    let h = sp_homogeneous(p)?.h_star;
    let gap = 2f64.sqrt() * (g1 + c.g0 * phi1 * h) * p.delta0;
    let pp = 2.0 * c.g0 * c.phi0 * p.delta0 / c.m0;
    Ok(BifurcationPoints {
        tau_d: c.tau_c - gap,
        tau_h: c.tau_c + gap,
        k_h: (2.0 * pp).sqrt(),
        p: pp,
        r: 2.0 * (g1 + c.g0 * phi1 * h) * p.delta0 / c.m0,
    })
}

pub fn bifurcation_points(p: &ModelParams, c: &DerivedCoefficients) -> Result<BifurcationPoints> {
    bifurcation_points_with(p, c, c.g1, c.phi1)
}

/// Linearization of the width-velocity system at the standing pulse.
pub fn sp_jacobian(p: &ModelParams, c: &DerivedCoefficients, tau: f64) -> Result<Matrix3<f64>> {
    let b = bifurcation_points(p, c)?;
    let q = b.q(c, tau);
    Ok(Matrix3::new(0.0, 1.0, -1.0, -b.p, q, -b.r, b.p, -b.r, q))
}

/// Roots of det(lambda I - J) = lambda (lambda - Q)^2 + 2P (lambda - Q) - R^2 lambda + 2PR.
pub fn sp_eigenvalues(p: &ModelParams, c: &DerivedCoefficients, tau: f64) -> Result<[Complex64; 3]> {
    let b = bifurcation_points(p, c)?;
    let q = b.q(c, tau);
    Ok(cubic_roots(-2.0 * q, q * q + 2.0 * b.p - b.r * b.r, 2.0 * b.p * (b.r - q)))
}

/// Leading-order traveling pulse just below the pitchfork (right-moving branch).
pub fn tp_perturbative(p: &ModelParams, c: &DerivedCoefficients, tau: f64) -> Result<StationaryPulse> {
    let b = bifurcation_points(p, c)?;
    let eta2 = b.tau_d - tau;
    if eta2 < 0.0 {
        return Err(Error::NoStationaryPulse(format!("tau = {tau} lies above the pitchfork {}", b.tau_d)));
    }
    let denom = c.g3 - c.g3_tilde;
    if denom <= 0.0 {
        return Err(Error::SubcriticalRegime(denom));
    }
    let r1 = (2f64.sqrt() / denom).sqrt();
    Ok(StationaryPulse { h_star: c.h0 + c.h2(p) * eta2, r_star: r1 * eta2.sqrt(), kind: PulseKind::TpPlus })
}

/// Stationarity residual of the homogeneous truncated system for a pulse of width
/// `h` with both interfaces moving at `r`, and its Jacobian in (h, r).
fn tp_residual(p: &ModelParams, c: &DerivedCoefficients, h: f64, r: f64) -> ([f64; 2], [[f64; 2]; 2]) {
    let a = 2f64.sqrt() * (c.tau_c - p.tau);
    let drive = a * r - c.g3 * r.powi(3);
    let ddrive = a - 3.0 * c.g3 * r * r;
    let phi_dr = |x: f64| (1.0 + x / (x * x + 4.0 * p.d).sqrt()) / (2.0 * p.d);
    let (k1, k2) = (decay_rate(r, p.d), decay_rate(-r, p.d));
    let e1 = (-k1 * h).exp();
    let e2 = (-k2 * h).exp();
    let w1 = c.g0 - c.g1 * r;
    let w2 = c.g0 + c.g1 * r;
    let f = [drive + w1 * e1 - p.delta0, drive - w2 * e2 + p.delta0];
    let j = [
        [-w1 * k1 * e1, ddrive - c.g1 * e1 - w1 * phi_dr(r) * h * e1],
        [w2 * k2 * e2, ddrive - c.g1 * e2 - w2 * phi_dr(-r) * h * e2],
    ];
    (f, j)
}

fn newton_tp(p: &ModelParams, c: &DerivedCoefficients, mut h: f64, mut r: f64) -> Result<(f64, f64)> {
    let norm = |f: [f64; 2]| f[0].abs().max(f[1].abs());
    for _ in 0..200 {
        let (f, j) = tp_residual(p, c, h, r);
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(Error::NoConvergence("traveling-pulse Newton"));
        }
        let dh = (f[0] * j[1][1] - f[1] * j[0][1]) / det;
        let dr = (j[0][0] * f[1] - j[1][0] * f[0]) / det;
        let f0 = norm(f);
        let mut lam = 1.0;
        loop {
            let (fn_, _) = tp_residual(p, c, h - lam * dh, r - lam * dr);
            if norm(fn_) < f0 || lam < 1e-6 {
                break;
            }
            lam *= 0.5;
        }
        h -= lam * dh;
        r -= lam * dr;
        if (lam * dh).abs() < 1e-14 * h.abs().max(1.0) && (lam * dr).abs() < 1e-15 {
            return Ok((h, r));
        }
    }
    let (f, _) = tp_residual(p, c, h, r);
    if norm(f) < 1e-13 {
        Ok((h, r))
    } else {
        Err(Error::NoConvergence("traveling-pulse Newton"))
    }
}

/// Right-moving traveling pulse of the homogeneous truncated system, continued
/// from the pitchfork in sqrt(tau_d - tau).
pub fn tp_exact(p: &ModelParams, c: &DerivedCoefficients) -> Result<StationaryPulse> {
    let b = bifurcation_points(p, c)?;
    let eta_target = (b.tau_d - p.tau).max(0.0).sqrt();
    if eta_target <= 0.0 {
        return Err(Error::NoStationaryPulse(format!("tau = {} is not below the pitchfork {}", p.tau, b.tau_d)));
    }
    let eta0 = eta_target.min(0.01);
    let start = tp_perturbative(&p.with_tau(b.tau_d - eta0 * eta0), c, b.tau_d - eta0 * eta0)?;
    let (mut h, mut r) = newton_tp(&p.with_tau(b.tau_d - eta0 * eta0), c, start.h_star, start.r_star)?;
    let steps = ((eta_target - eta0) / 0.002).ceil() as usize;
    let mut eta = eta0;
    for k in 1..=steps {
        let next = eta0 + (eta_target - eta0) * k as f64 / steps as f64;
        let guess_r = r * next / eta;
        let (hn, rn) = newton_tp(&p.with_tau(b.tau_d - next * next), c, h, guess_r)?;
        h = hn;
        r = rn;
        eta = next;
    }
    if steps == 0 {
        let (hn, rn) = newton_tp(p, c, h, r)?;
        h = hn;
        r = rn;
    }
    if r <= 0.0 {
        return Err(Error::NoConvergence("traveling-pulse continuation"));
    }
    Ok(StationaryPulse { h_star: h, r_star: r, kind: PulseKind::TpPlus })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduced_ode::rhs_homogeneous3d;

    fn setup() -> (ModelParams, DerivedCoefficients) {
        let p = ModelParams::new(0.17, 1.0, 0.001).unwrap();
        (p, DerivedCoefficients::for_params(&p))
    }

    #[test]
    fn closed_forms() {
        let (p, c) = setup();
        let b = bifurcation_points(&p, &c).unwrap();
        assert!((b.tau_d - 0.174_225_946_1).abs() < 1e-9);
        assert!((b.tau_h - 0.179_327_444_5).abs() < 1e-9);
        assert!(b.tau_d < c.tau_c && c.tau_c < b.tau_h);
        let flat = bifurcation_points_with(&p, &c, 0.0, 0.0).unwrap();
        assert_eq!(flat.tau_d, c.tau_c);
        assert_eq!(flat.tau_h, c.tau_c);
    }

    #[test]
    fn sp_limits() {
        let p = ModelParams::new(0.17, 1.0, 0.5 - 1e-9).unwrap();
        let h = sp_homogeneous(&p).unwrap().h_star;
        assert!(h > 0.0 && h < 1e-8);
        let zero = ModelParams::new(0.17, 1.0, 0.0).unwrap();
        assert_eq!(sp_homogeneous(&zero).unwrap_err().kind(), "no-stationary-pulse");
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let (p, c) = setup();
        let h = c.h0;
        let j = sp_jacobian(&p, &c, p.tau).unwrap();
        let step = 1e-6;
        for col in 0..3 {
            let mut yp = [h, 0.0, 0.0];
            let mut ym = yp;
            yp[col] += step;
            ym[col] -= step;
            let fp = rhs_homogeneous3d(yp, &p, &c);
            let fm = rhs_homogeneous3d(ym, &p, &c);
            for row in 0..3 {
                let fd = (fp[row] - fm[row]) / (2.0 * step);
                assert!((fd - j[(row, col)]).abs() < 1e-5, "({row},{col}) {fd} vs {}", j[(row, col)]);
            }
        }
    }

    #[test]
    fn tp_branch_matches_newton() {
        let (p, c) = setup();
        let b = bifurcation_points(&p, &c).unwrap();
        let mut ratios = vec![];
        for eta2 in [1e-4, 4e-4] {
            let q = p.with_tau(b.tau_d - eta2);
            let approx = tp_perturbative(&q, &c, q.tau).unwrap();
            let exact = tp_exact(&q, &c).unwrap();
            assert!((approx.r_star - exact.r_star).abs() / exact.r_star < 0.05);
        }
        // the exact branch bends away from the square-root law linearly in sqrt(tau_d - tau)
        for eta2 in [2.5e-5, 1e-4] {
            let exact = tp_exact(&p.with_tau(b.tau_d - eta2), &c).unwrap();
            ratios.push(exact.r_star / eta2.sqrt());
        }
        assert!((ratios[0] - ratios[1]).abs() / ratios[0] < 0.02, "{ratios:?}");
        let onset = tp_perturbative(&p, &c, b.tau_d).unwrap();
        assert_eq!((onset.r_star, onset.h_star), (0.0, c.h0));
    }

    #[test]
    fn tp_at_reference_tau() {
        let (p, c) = setup();
        let tp = tp_exact(&p, &c).unwrap();
        assert!((tp.h_star - 7.352_897).abs() < 1e-5, "{}", tp.h_star);
        assert!((tp.r_star - 0.493_888).abs() < 1e-5, "{}", tp.r_star);
        let res = rhs_homogeneous3d([tp.h_star, tp.r_star, tp.r_star], &p, &c);
        assert!(res.iter().all(|v| v.abs() < 1e-10));
    }
}
