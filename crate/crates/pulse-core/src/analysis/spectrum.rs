use nalgebra::DMatrix;
use num_complex::Complex64;

use super::pulse::{PulseKind, StationaryPulse};
use crate::error::{Error, Result};
use crate::model::{response_analytic, DerivedCoefficients, Heterogeneity, ModelParams, ResponseProfile};
use crate::reduced_ode::{rhs_legacy, rhs_truncated, InterfaceState, LegacyCoefficients};

pub const FD_STEP: f64 = 1e-6;
/// Eigenvalues with |Im| above this count as part of a complex pair.
pub const COMPLEX_EPS: f64 = 1e-8;

/// Central-difference Jacobian of `f` at `x`.
pub fn numeric_jacobian<F>(f: F, x: &[f64], step: f64) -> DMatrix<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n = x.len();
    let mut j = DMatrix::zeros(n, n);
    let mut xp = x.to_vec();
    for col in 0..n {
        xp[col] = x[col] + step;
        let fp = f(&xp);
        xp[col] = x[col] - step;
        let fm = f(&xp);
        xp[col] = x[col];
        for row in 0..n {
            j[(row, col)] = (fp[row] - fm[row]) / (2.0 * step);
        }
    }
    j
}

pub fn eigenvalues(j: &DMatrix<f64>) -> Vec<Complex64> {
    j.clone().complex_eigenvalues().iter().copied().collect()
}

/// Largest real part among eigenvalues belonging to complex pairs.
pub fn leading_complex_real(eigs: &[Complex64]) -> Option<f64> {
    eigs.iter().filter(|z| z.im.abs() > COMPLEX_EPS).map(|z| z.re).max_by(f64::total_cmp)
}

/// Largest real part among real eigenvalues.
pub fn leading_real(eigs: &[Complex64]) -> Option<f64> {
    eigs.iter().filter(|z| z.im.abs() <= COMPLEX_EPS).map(|z| z.re).max_by(f64::total_cmp)
}

/// Inverse of the stationarity map eps0 = f(z), z = exp(-h / (2 sqrt D)).
fn het_sp_map(z: f64, z0: f64, g0: f64, delta0: f64) -> f64 {
    if z >= z0 {
        (g0 * z * z - delta0) / (1.0 - z0 * (z + 1.0 / z) / 2.0)
    } else {
        (g0 * z * z - delta0) / (z * (1.0 / z0 - z0) / 2.0)
    }
}

/// Standing pulse centred on a sharp bump.
pub fn het_sp(p: &ModelParams, c: &DerivedCoefficients, het: &Heterogeneity) -> Result<(StationaryPulse, f64)> {
    let Heterogeneity::SharpBump { eps0, d0, xc } = *het else {
        return Err(Error::NoStationaryPulse(format!("requires a sharp bump, got {}", het.name())));
    };
    let s = p.sqrt_d();
    let z0 = (-d0 / (2.0 * s)).exp();
    let threshold = (c.g0 - p.delta0) / (1.0 - z0);
    if eps0 >= threshold {
        return Err(Error::NoStationaryPulse(format!("eps0 = {eps0} at or above {threshold}")));
    }
    let f = |z: f64| het_sp_map(z, z0, c.g0, p.delta0);
    let (mut lo, mut hi) = (1e-300f64, 1.0 - 1e-15);
    if !(f(lo) < eps0 && eps0 < f(hi)) {
        return Err(Error::NoStationaryPulse("root not bracketed".into()));
    }
    while hi - lo > 1e-12 * hi.max(1e-300) {
        let mid = if hi / lo > 4.0 { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
        if f(mid) < eps0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    for _ in 0..100 {
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < eps0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let z = 0.5 * (lo + hi);
    Ok((StationaryPulse { h_star: -2.0 * s * z.ln(), r_star: 0.0, kind: PulseKind::Sp }, xc))
}

/// Jacobian of the truncated 4D system at a standing pulse of width `h` centred at `xc`.
pub fn truncated_jacobian(
    p: &ModelParams,
    c: &DerivedCoefficients,
    resp: &ResponseProfile,
    h: f64,
    xc: f64,
) -> DMatrix<f64> {
    let x = [xc + h / 2.0, xc - h / 2.0, 0.0, 0.0];
    numeric_jacobian(
        |y| rhs_truncated(&InterfaceState::new(y[0], y[1], y[2], y[3]), p, c, resp).to_array().to_vec(),
        &x,
        FD_STEP,
    )
}

/// Locates a sign change of `g(tau)` on a uniform grid, then bisects. Points
/// where `g` is undefined are skipped.
pub fn find_crossing<G>(g: G, lo: f64, hi: f64, n: usize, tol: f64) -> Option<f64>
where
    G: Fn(f64) -> Option<f64>,
{
    let grid: Vec<(f64, Option<f64>)> =
        (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).map(|t| (t, g(t))).collect();
    for w in grid.windows(2) {
        let ((ta, Some(ga)), (tb, Some(gb))) = (w[0], w[1]) else { continue };
        if ga == 0.0 {
            return Some(ta);
        }
        if ga * gb < 0.0 {
            let (mut a, mut b, mut fa) = (ta, tb, ga);
            while b - a > tol {
                let m = 0.5 * (a + b);
                match g(m) {
                    Some(fm) if fm * fa > 0.0 => {
                        a = m;
                        fa = fm;
                    }
                    Some(_) => b = m,
                    None => break,
                }
            }
            return Some(0.5 * (a + b));
        }
    }
    None
}

/// Hopf point of the standing pulse pinned at the centre of a sharp bump.
pub fn het_hopf_sweep(
    p: &ModelParams,
    c: &DerivedCoefficients,
    het: &Heterogeneity,
    tau_range: (f64, f64),
) -> Result<f64> {
    let (sp, xc) = het_sp(p, c, het)?;
    let resp = response_analytic(het, p)?;
    let g = |tau: f64| {
        let q = p.with_tau(tau);
        let j = truncated_jacobian(&q, c, &resp, sp.h_star, xc);
        leading_complex_real(&eigenvalues(&j))
    };
    find_crossing(g, tau_range.0, tau_range.1, 400, 1e-10)
        .ok_or(Error::NoHopfFound { lo: tau_range.0, hi: tau_range.1 })
}

/// Stationary state of the constant-interaction model: symmetric pulse whose
/// interfaces move at -rho and +rho relative to the drift terms.
pub fn legacy_sp(p: &ModelParams, k: &LegacyCoefficients) -> Result<(f64, f64)> {
    let s = p.sqrt_d();
    let tau_c = 1.0 / (4.0 * (2.0 * p.d).sqrt());
    let rho = |e: f64| -k.m0_tilde * e - p.delta0 * k.beta1;
    let f = |e: f64| {
        let r = rho(e);
        -k.m1 * r.powi(3) + k.m2 * (tau_c - p.tau) * r + k.m0 * e - p.delta0 * k.beta2
    };
    let (mut lo, mut hi) = (-60.0f64, 0.0f64);
    if f(lo.exp()) * f(hi.exp() * (1.0 - 1e-12)) > 0.0 {
        return Err(Error::NoStationaryPulse("constant-interaction balance not bracketed".into()));
    }
    let sign_lo = f(lo.exp()).signum();
    while hi - lo > 1e-15 {
        let m = 0.5 * (lo + hi);
        if f(m.exp()).signum() == sign_lo {
            lo = m;
        } else {
            hi = m;
        }
    }
    let e = (0.5 * (lo + hi)).exp();
    Ok((-s * e.ln(), rho(e)))
}

/// Width-velocity Jacobian of the constant-interaction model at its standing pulse.
pub fn legacy_jacobian(p: &ModelParams, k: &LegacyCoefficients) -> Result<DMatrix<f64>> {
    let (h, rho) = legacy_sp(p, k)?;
    let resp = ResponseProfile::constant(p.delta0);
    let f = |y: &[f64]| {
        let s = InterfaceState::new(y[0], 0.0, y[1], y[2]);
        let d = rhs_legacy(&s, p, k, &resp);
        vec![d.l2 - d.l1, d.r2, d.r1]
    };
    Ok(numeric_jacobian(f, &[h, rho, -rho], FD_STEP))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NumericBifurcations {
    pub tau_pitchfork: Option<f64>,
    pub tau_hopf: Option<f64>,
}

/// Scans a tau range for the real-eigenvalue and complex-pair crossings of `jac`.
pub fn scan_bifurcations<J>(jac: J, lo: f64, hi: f64) -> NumericBifurcations
where
    J: Fn(f64) -> Option<DMatrix<f64>>,
{
    let eig = |tau: f64| jac(tau).map(|j| eigenvalues(&j));
    NumericBifurcations {
        tau_pitchfork: find_crossing(|t| eig(t).and_then(|e| leading_real(&e)), lo, hi, 400, 1e-11),
        tau_hopf: find_crossing(|t| eig(t).and_then(|e| leading_complex_real(&e)), lo, hi, 400, 1e-11),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::bifurcation_points;

    fn setup() -> (ModelParams, DerivedCoefficients) {
        let p = ModelParams::new(0.18, 1.0, 0.001).unwrap();
        (p, DerivedCoefficients::for_params(&p))
    }

    #[test]
    fn flat_bump_recovers_homogeneous_width() {
        let (p, c) = setup();
        let (sp, _) = het_sp(&p, &c, &Heterogeneity::SharpBump { eps0: 0.0, d0: 40.0, xc: 0.0 }).unwrap();
        assert!((sp.h_star - c.h0).abs() < 1e-9);
    }

    #[test]
    fn het_sp_residual() {
        let (p, c) = setup();
        for eps0 in [-0.003, 0.002, 0.01, 0.3] {
            let het = Heterogeneity::SharpBump { eps0, d0: 40.0, xc: 1.5 };
            let (sp, xc) = het_sp(&p, &c, &het).unwrap();
            let resp = response_analytic(&het, &p).unwrap();
            let res = c.g0 * (-sp.h_star / p.sqrt_d()).exp() - resp.eval(xc + sp.h_star / 2.0);
            assert!(res.abs() < 1e-12, "eps0 {eps0}: {res}");
        }
        let too_high = Heterogeneity::SharpBump { eps0: 0.5, d0: 40.0, xc: 0.0 };
        assert_eq!(het_sp(&p, &c, &too_high).unwrap_err().kind(), "no-stationary-pulse");
    }

    #[test]
    fn numeric_eigenvalues_match_cubic() {
        let (p, c) = setup();
        let j = crate::analysis::sp_jacobian(&p, &c, 0.178).unwrap();
        let jd = DMatrix::from_iterator(3, 3, j.iter().copied());
        let mut a = eigenvalues(&jd);
        let mut b = crate::analysis::sp_eigenvalues(&p, &c, 0.178).unwrap().to_vec();
        let key = |z: &Complex64| (z.re * 1e6).round() as i64 * 1000 + (z.im * 1e3).round() as i64;
        a.sort_by_key(key);
        b.sort_by_key(key);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-9);
        }
    }

    #[test]
    fn drift_free_baseline_bifurcates_at_critical_tau() {
        let (p, c) = setup();
        let k = LegacyCoefficients::drift_free(p.d);
        let (h, rho) = legacy_sp(&p, &k).unwrap();
        assert!((h - c.h0).abs() < 1e-9 && rho == 0.0);
        let b = scan_bifurcations(|t| legacy_jacobian(&p.with_tau(t), &k).ok(), 0.17, 0.185);
        assert!((b.tau_pitchfork.unwrap() - c.tau_c).abs() < 1e-6);
        assert!((b.tau_hopf.unwrap() - c.tau_c).abs() < 1e-6);
    }

    #[test]
    fn truncated_scan_recovers_closed_forms() {
        let (p, c) = setup();
        let b = bifurcation_points(&p, &c).unwrap();
        let resp = ResponseProfile::constant(p.delta0);
        let reduced = |t: f64| {
            let j4 = truncated_jacobian(&p.with_tau(t), &c, &resp, c.h0, 0.0);
            // drop the translation mode: (h, r2, r1) coordinates
            let mut j3 = DMatrix::zeros(3, 3);
            for col in 0..3 {
                let src = if col == 0 { 0 } else { col + 1 };
                j3[(0, col)] = j4[(0, src)] - j4[(1, src)];
                j3[(1, col)] = j4[(2, src)];
                j3[(2, col)] = j4[(3, src)];
            }
            Some(j3)
        };
        let n = scan_bifurcations(reduced, 0.17, 0.185);
        assert!((n.tau_pitchfork.unwrap() - b.tau_d).abs() < 1e-6);
        assert!((n.tau_hopf.unwrap() - b.tau_h).abs() < 1e-6);
    }
}
