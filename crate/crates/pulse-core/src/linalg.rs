//! Banded solvers and polynomial roots.

use num_complex::Complex64;

/// Thomas algorithm. `sub[0]` and `sup[n-1]` are ignored.
pub fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - sub[i] * c[i - 1];
        c[i] = if i + 1 < n { sup[i] / m } else { 0.0 };
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / m;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    d
}

/// Pre-factored solver for the constant-coefficient system
/// `(1 + 2k) x_i - k x_{i-1} - k x_{i+1} = b_i` with either periodic or
/// reflecting (no-flux) closure.
#[derive(Clone, Debug)]
pub struct DiffusionSolver {
    n: usize,
    k: f64,
    periodic: bool,
    // forward-sweep multipliers of the (modified) tridiagonal part
    c: Vec<f64>,
    inv_m: Vec<f64>,
    // Sherman-Morrison correction for the periodic corners
    z: Vec<f64>,
    gamma: f64,
    corr_denom: f64,
}

impl DiffusionSolver {
    pub fn new(n: usize, k: f64, periodic: bool) -> Self {
        assert!(n >= 3);
        let a = -k;
        let b = 1.0 + 2.0 * k;
        let mut diag = vec![b; n];
        let gamma = -b;
        if periodic {
            diag[0] = b - gamma;
            diag[n - 1] = b - a * a / gamma;
        } else {
            diag[0] = 1.0 + k;
            diag[n - 1] = 1.0 + k;
        }
        let mut c = vec![0.0; n];
        let mut inv_m = vec![0.0; n];
        inv_m[0] = 1.0 / diag[0];
        c[0] = a * inv_m[0];
        for i in 1..n {
            let m = diag[i] - a * c[i - 1];
            inv_m[i] = 1.0 / m;
            c[i] = a * inv_m[i];
        }
        let mut s = DiffusionSolver { n, k, periodic, c, inv_m, z: vec![], gamma, corr_denom: 1.0 };
        if periodic {
            let mut u = vec![0.0; n];
            u[0] = gamma;
            u[n - 1] = a;
            let z = s.sweep(&u);
            // v = (1, 0, ..., 0, a/gamma)
            s.corr_denom = 1.0 + z[0] + a / gamma * z[n - 1];
            s.z = z;
        }
        s
    }

    fn sweep(&self, rhs: &[f64]) -> Vec<f64> {
        let a = -self.k;
        let n = self.n;
        let mut d = vec![0.0; n];
        d[0] = rhs[0] * self.inv_m[0];
        for i in 1..n {
            d[i] = (rhs[i] - a * d[i - 1]) * self.inv_m[i];
        }
        for i in (0..n - 1).rev() {
            d[i] -= self.c[i] * d[i + 1];
        }
        d
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut y = self.sweep(rhs);
        if self.periodic {
            let a = -self.k;
            let n = self.n;
            let f = (y[0] + a / self.gamma * y[n - 1]) / self.corr_denom;
            for (yi, zi) in y.iter_mut().zip(&self.z) {
                *yi -= f * zi;
            }
        }
        y
    }

    /// Applies `(1 - 2k) x_i + k x_{i-1} + k x_{i+1}` with the same closure.
    pub fn explicit_half(&self, x: &[f64], out: &mut [f64]) {
        let n = self.n;
        let k = self.k;
        for i in 1..n - 1 {
            out[i] = (1.0 - 2.0 * k) * x[i] + k * (x[i - 1] + x[i + 1]);
        }
        if self.periodic {
            out[0] = (1.0 - 2.0 * k) * x[0] + k * (x[n - 1] + x[1]);
            out[n - 1] = (1.0 - 2.0 * k) * x[n - 1] + k * (x[n - 2] + x[0]);
        } else {
            out[0] = (1.0 - k) * x[0] + k * x[1];
            out[n - 1] = (1.0 - k) * x[n - 1] + k * x[n - 2];
        }
    }
}

/// Roots of `x^3 + a x^2 + b x + c`, polished by Newton steps in complex arithmetic.
pub fn cubic_roots(a: f64, b: f64, c: f64) -> [Complex64; 3] {
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let shift = -a / 3.0;
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    let mut roots = if disc > 0.0 {
        let sq = disc.sqrt();
        let u = (-q / 2.0 + sq).cbrt();
        let v = (-q / 2.0 - sq).cbrt();
        let re = -(u + v) / 2.0 + shift;
        let im = (u - v) * 3f64.sqrt() / 2.0;
        [Complex64::new(u + v + shift, 0.0), Complex64::new(re, im), Complex64::new(re, -im)]
    } else if p == 0.0 {
        [Complex64::new(shift, 0.0); 3]
    } else {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        let two_pi_3 = 2.0 * std::f64::consts::PI / 3.0;
        [0.0, 1.0, 2.0].map(|k| Complex64::new(m * (theta - k * two_pi_3).cos() + shift, 0.0))
    };
    for r in roots.iter_mut() {
        for _ in 0..3 {
            let f = ((*r + a) * *r + b) * *r + c;
            let df = (3.0 * *r + 2.0 * a) * *r + b;
            if df.norm() == 0.0 {
                break;
            }
            let step = f / df;
            if !step.re.is_finite() || !step.im.is_finite() {
                break;
            }
            *r -= step;
        }
    }
    roots
}
