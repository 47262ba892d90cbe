//! Parameters, reduction constants, heterogeneity profiles and their diffusive response.

mod heterogeneity;
mod params;
mod response;

pub use heterogeneity::{Heterogeneity, Plateau};
pub use params::{
    decay_rate, derive_coefficients, kinematic_phi, prefactors, DerivedCoefficients, ModelParams, Prefactors,
};
pub use response::{
    box_response, box_response_deriv, response_analytic, response_auto, response_numeric, Provenance, ResponseProfile,
};
