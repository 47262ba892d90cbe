//! Python module `pulsedyn`: thin wrappers over `pulse-core` returning plain
//! floats, tuples, dicts and lists.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use num_complex::Complex64;
use pulse_core::analysis::{bifurcation_points, front_velocities, sp_eigenvalues, tp_exact};
use pulse_core::classify::{
    bump, classify_homogeneous, residence_time, run_scattering, sweep_phase_diagram, ClassifyConfig, ScatterConfig,
    SweepConfig,
};
use pulse_core::model::{DerivedCoefficients, ModelParams, ResponseProfile};
use pulse_core::reduced_ode::{integrate, kicked_sp, IntegratorConfig, LegacyCoefficients, OdeVariant, Side};

fn err(e: pulse_core::Error) -> PyErr {
    PyValueError::new_err(format!("[{}] {e}", e.kind()))
}

fn setup(tau: f64, d: f64, delta0: f64) -> PyResult<(ModelParams, DerivedCoefficients)> {
    let p = ModelParams::new(tau, d, delta0).map_err(err)?;
    Ok((p, DerivedCoefficients::for_params(&p)))
}

fn variant(name: &str, d: f64) -> PyResult<OdeVariant> {
    match name {
        "full" => Ok(OdeVariant::FullRenormalized),
        "truncated" => Ok(OdeVariant::Truncated),
        "legacy" => Ok(OdeVariant::LegacyWeakInteraction(LegacyCoefficients::defaults(d))),
        other => Err(PyValueError::new_err(format!("unknown variant `{other}` (full, truncated, legacy)"))),
    }
}

/// Standing-pulse width and the three critical relaxation times.
#[pyfunction]
#[pyo3(signature = (tau, d = 1.0, delta0 = 0.001))]
fn coefficients<'py>(py: Python<'py>, tau: f64, d: f64, delta0: f64) -> PyResult<Bound<'py, PyDict>> {
    let (p, c) = setup(tau, d, delta0)?;
    let b = bifurcation_points(&p, &c).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("h_star", c.h0)?;
    out.set_item("tau_c", c.tau_c)?;
    out.set_item("tau_d", b.tau_d)?;
    out.set_item("tau_h", b.tau_h)?;
    out.set_item("hopf_frequency", b.k_h)?;
    Ok(out)
}

/// Eigenvalues of the standing pulse linearization, as complex numbers.
#[pyfunction]
#[pyo3(signature = (tau, d = 1.0, delta0 = 0.001))]
fn eigenvalues(tau: f64, d: f64, delta0: f64) -> PyResult<Vec<Complex64>> {
    let (p, c) = setup(tau, d, delta0)?;
    Ok(sp_eigenvalues(&p, &c, tau).map_err(err)?.to_vec())
}

/// Width and speed `(h, r)` of the traveling pulse.
#[pyfunction]
#[pyo3(signature = (tau, d = 1.0, delta0 = 0.001))]
fn traveling_pulse(tau: f64, d: f64, delta0: f64) -> PyResult<(f64, f64)> {
    let (p, c) = setup(tau, d, delta0)?;
    let tp = tp_exact(&p, &c).map_err(err)?;
    Ok((tp.h_star, tp.r_star))
}

/// Left-front velocities `(r_plus, r_minus, r_zero)`.
#[pyfunction]
#[pyo3(signature = (tau, d = 1.0, delta0 = 0.001))]
fn front_speeds(tau: f64, d: f64, delta0: f64) -> PyResult<(f64, f64, f64)> {
    let (p, c) = setup(tau, d, delta0)?;
    let v = front_velocities(Side::Left, &p, &c).map_err(err)?;
    Ok((v.r_plus, v.r_minus, v.r_zero))
}

/// Integrate a kicked standing pulse in a homogeneous medium.
///
/// Returns a dict with the behavior class and the columns `t, l1, l2, r1, r2`.
#[pyfunction]
#[pyo3(signature = (tau, kick = 0.1, t_end = 1500.0, variant = "truncated", d = 1.0, delta0 = 0.001))]
fn simulate<'py>(
    py: Python<'py>,
    tau: f64,
    kick: f64,
    t_end: f64,
    variant: &str,
    d: f64,
    delta0: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let (p, c) = setup(tau, d, delta0)?;
    let v = self::variant(variant, d)?;
    let flat = ResponseProfile::constant(delta0);
    let integ = IntegratorConfig { t_end, ..Default::default() };
    let traj = py.detach(|| integrate(&v, kicked_sp(&c, kick), &p, &c, &flat, &integ)).map_err(err)?;
    let class = classify_homogeneous(&traj, &p, &c, &ClassifyConfig::default());
    let out = PyDict::new(py);
    out.set_item("class", class.as_str())?;
    out.set_item("t", traj.times.clone())?;
    out.set_item("l1", traj.states.iter().map(|s| s.l1).collect::<Vec<_>>())?;
    out.set_item("l2", traj.states.iter().map(|s| s.l2).collect::<Vec<_>>())?;
    out.set_item("r1", traj.states.iter().map(|s| s.r1).collect::<Vec<_>>())?;
    out.set_item("r2", traj.states.iter().map(|s| s.r2).collect::<Vec<_>>())?;
    Ok(out)
}

/// Send a traveling pulse into a sharp bump; returns `(label, residence)`.
#[pyfunction]
#[pyo3(signature = (d0, eps0, tau = 0.17, d = 1.0, delta0 = 0.001))]
fn scatter(py: Python<'_>, d0: f64, eps0: f64, tau: f64, d: f64, delta0: f64) -> PyResult<(String, Option<f64>)> {
    let (p, c) = setup(tau, d, delta0)?;
    let het = bump(d0, eps0);
    let run = py.detach(|| run_scattering(&p, &c, &het, &ScatterConfig::default())).map_err(err)?;
    Ok((run.outcome.label.to_string(), residence_time(&run.trajectory, &het).ok()))
}

/// Scattering labels on the grid `d0s x eps0s`, as `(d0, eps0, label)` rows.
#[pyfunction]
#[pyo3(signature = (d0s, eps0s, tau = 0.17, jobs = 1, d = 1.0, delta0 = 0.001))]
fn phase_diagram(
    py: Python<'_>,
    d0s: Vec<f64>,
    eps0s: Vec<f64>,
    tau: f64,
    jobs: usize,
    d: f64,
    delta0: f64,
) -> PyResult<Vec<(f64, f64, String)>> {
    let (p, c) = setup(tau, d, delta0)?;
    let cfg = SweepConfig { boundary_tol: None, ..Default::default() };
    let pd = py.detach(|| sweep_phase_diagram(&p, &c, &d0s, &eps0s, &cfg, jobs)).map_err(err)?;
    Ok(pd.cells.into_iter().map(|c| (c.d0, c.eps0, c.outcome.label.to_string())).collect())
}

#[pymodule]
fn pulsedyn(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(coefficients, m)?)?;
    m.add_function(wrap_pyfunction!(eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(traveling_pulse, m)?)?;
    m.add_function(wrap_pyfunction!(front_speeds, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(scatter, m)?)?;
    m.add_function(wrap_pyfunction!(phase_diagram, m)?)?;
    Ok(())
}
