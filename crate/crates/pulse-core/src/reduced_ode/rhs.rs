use crate::error::{Error, Result};
use crate::model::{decay_rate, prefactors, DerivedCoefficients, ModelParams, ResponseProfile};

/// Reduced pulse state: positions `l2 > l1` of the back and front interfaces and
/// their velocities. The same layout carries time derivatives.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct InterfaceState {
    pub l2: f64,
    pub l1: f64,
    pub r2: f64,
    pub r1: f64,
}

impl InterfaceState {
    pub fn new(l2: f64, l1: f64, r2: f64, r1: f64) -> Self {
        InterfaceState { l2, l1, r2, r1 }
    }

    /// Pulse of width `h` centred at `center` with both interfaces moving at `r`.
    pub fn centered(center: f64, h: f64, r: f64) -> Self {
        InterfaceState { l2: center + h / 2.0, l1: center - h / 2.0, r2: r, r1: r }
    }

    pub fn h(&self) -> f64 {
        self.l2 - self.l1
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.l1 + self.l2)
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.l2, self.l1, self.r2, self.r1]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        InterfaceState { l2: a[0], l1: a[1], r2: a[2], r1: a[3] }
    }

    /// Mirror image x -> -x: the back becomes the front.
    pub fn reflect(&self) -> Self {
        InterfaceState { l2: -self.l1, l1: -self.l2, r2: -self.r1, r1: -self.r2 }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

/// Coefficients of the constant-interaction baseline model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LegacyCoefficients {
    pub m0: f64,
    pub m0_tilde: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub m1: f64,
    pub m2: f64,
}

impl LegacyCoefficients {
    pub fn defaults(d: f64) -> Self {
        let s = d.sqrt();
        LegacyCoefficients {
            m0: 8.0 * s / 3.0,
            m0_tilde: 20.0 * s / 9.0,
            beta1: 8.0 * s / 9.0,
            beta2: 16.0 * s / 3.0,
            m1: 1.0 / (6.0 * d),
            m2: 16.0 * (2.0 * d).sqrt() / 3.0,
        }
    }

    /// The drift-free member of the family: identical to the truncated model
    /// with the velocity dependence of the interaction switched off.
    pub fn drift_free(d: f64) -> Self {
        LegacyCoefficients { m0_tilde: 0.0, beta1: 0.0, ..Self::defaults(d) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OdeVariant {
    FullRenormalized,
    Truncated,
    /// Truncated model with the response replaced by its far-field value.
    Homogeneous3D,
    SingleFrontLeft,
    SingleFrontRight,
    LegacyWeakInteraction(LegacyCoefficients),
}

impl OdeVariant {
    pub fn name(&self) -> &'static str {
        match self {
            OdeVariant::FullRenormalized => "ode-full",
            OdeVariant::Truncated => "ode-truncated",
            OdeVariant::Homogeneous3D => "ode-homogeneous",
            OdeVariant::SingleFrontLeft => "single-front-left",
            OdeVariant::SingleFrontRight => "single-front-right",
            OdeVariant::LegacyWeakInteraction(_) => "ode-legacy",
        }
    }
}

/// Interaction weights E1 = exp(-Phi(r1) h), E2 = exp(-Phi(-r2) h).
fn interaction(s: &InterfaceState, d: f64) -> (f64, f64) {
    let h = s.h();
    ((-decay_rate(s.r1, d) * h).exp(), (-decay_rate(-s.r2, d) * h).exp())
}

pub fn mass_matrix_det(s: &InterfaceState, p: &ModelParams) -> f64 {
    let h = s.h();
    let (e1, e2) = interaction(s, p.d);
    let a2 = prefactors(s.r2, h, p.tau, p.d);
    let a1 = prefactors(s.r1, h, p.tau, p.d);
    a2.m * a1.m - a1.big_m * e1 * a2.big_m * e2
}

pub fn rhs_full(s: &InterfaceState, p: &ModelParams, resp: &ResponseProfile) -> Result<InterfaceState> {
    let h = s.h();
    let d = p.d;
    let (e1, e2) = interaction(s, d);
    let f2 = prefactors(s.r2, h, p.tau, d);
    let f1 = prefactors(s.r1, h, p.tau, d);
    let g_back = prefactors(-s.r1, h, p.tau, d).big_g;
    let b0 = f2.g + g_back * e1 - resp.eval(s.l2);
    let b1 = f1.g - f2.big_g * e2 + resp.eval(s.l1);
    let c01 = f1.big_m * e1;
    let c10 = f2.big_m * e2;
    let det = f2.m * f1.m - c01 * c10;
    if !(det > 1e-12) {
        return Err(Error::MassMatrixSingular { t: f64::NAN, det });
    }
    Ok(InterfaceState { l2: s.r2, l1: s.r1, r2: (b0 * f1.m + c01 * b1) / det, r1: (f2.m * b1 + c10 * b0) / det })
}

fn cubic_drive(r: f64, p: &ModelParams, c: &DerivedCoefficients) -> f64 {
    2f64.sqrt() * (c.tau_c - p.tau) * r - c.g3 * r * r * r
}

fn truncated_with(s: &InterfaceState, p: &ModelParams, c: &DerivedCoefficients, d2: f64, d1: f64) -> InterfaceState {
    let (e1, e2) = interaction(s, p.d);
    InterfaceState {
        l2: s.r2,
        l1: s.r1,
        r2: (cubic_drive(s.r2, p, c) + (c.g0 - c.g1 * s.r1) * e1 - d2) / c.m0,
        r1: (cubic_drive(s.r1, p, c) - (c.g0 + c.g1 * s.r2) * e2 + d1) / c.m0,
    }
}

pub fn rhs_truncated(
    s: &InterfaceState,
    p: &ModelParams,
    c: &DerivedCoefficients,
    resp: &ResponseProfile,
) -> InterfaceState {
    truncated_with(s, p, c, resp.eval(s.l2), resp.eval(s.l1))
}

/// Width-velocity form of the homogeneous truncated system: (h, r2, r1) -> rates.
pub fn rhs_homogeneous3d(y: [f64; 3], p: &ModelParams, c: &DerivedCoefficients) -> [f64; 3] {
    let s = InterfaceState { l2: y[0], l1: 0.0, r2: y[1], r1: y[2] };
    let ds = truncated_with(&s, p, c, p.delta0, p.delta0);
    [y[1] - y[2], ds.r2, ds.r1]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Isolated front (l, r) -> (l', r'). The left front is pushed by +Delta0, the right by -Delta0.
pub fn rhs_single_front(
    side: Side,
    l: f64,
    r: f64,
    p: &ModelParams,
    c: &DerivedCoefficients,
    resp: &ResponseProfile,
) -> (f64, f64) {
    let sign = match side {
        Side::Left => 1.0,
        Side::Right => -1.0,
    };
    (r, (cubic_drive(r, p, c) + sign * resp.eval(l)) / c.m0)
}

pub fn rhs_legacy(
    s: &InterfaceState,
    p: &ModelParams,
    k: &LegacyCoefficients,
    resp: &ResponseProfile,
) -> InterfaceState {
    let e = (-s.h() / p.sqrt_d()).exp();
    let tau_c = 1.0 / (4.0 * (2.0 * p.d).sqrt());
    let (d2, d1) = (resp.eval(s.l2), resp.eval(s.l1));
    let drive = |r: f64| -k.m1 * r * r * r + k.m2 * (tau_c - p.tau) * r;
    InterfaceState {
        l2: s.r2 + k.m0_tilde * e + d2 * k.beta1,
        l1: s.r1 - k.m0_tilde * e - d1 * k.beta1,
        r2: drive(s.r2) + k.m0 * e - d2 * k.beta2,
        r1: drive(s.r1) - k.m0 * e + d1 * k.beta2,
    }
}

/// Dispatches on the variant. Unused components of the single-front variants have zero rate.
pub fn rhs(
    variant: &OdeVariant,
    s: &InterfaceState,
    p: &ModelParams,
    c: &DerivedCoefficients,
    resp: &ResponseProfile,
) -> Result<InterfaceState> {
    Ok(match variant {
        OdeVariant::FullRenormalized => rhs_full(s, p, resp)?,
        OdeVariant::Truncated => rhs_truncated(s, p, c, resp),
        OdeVariant::Homogeneous3D => truncated_with(s, p, c, resp.far_field(), resp.far_field()),
        OdeVariant::SingleFrontLeft => {
            let (dl, dr) = rhs_single_front(Side::Left, s.l1, s.r1, p, c, resp);
            InterfaceState { l2: 0.0, l1: dl, r2: 0.0, r1: dr }
        }
        OdeVariant::SingleFrontRight => {
            let (dl, dr) = rhs_single_front(Side::Right, s.l2, s.r2, p, c, resp);
            InterfaceState { l2: dl, l1: 0.0, r2: dr, r1: 0.0 }
        }
        OdeVariant::LegacyWeakInteraction(k) => rhs_legacy(s, p, k, resp),
    })
}
