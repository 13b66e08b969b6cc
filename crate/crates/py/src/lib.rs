//! Python bindings: schedule compilation, noisy beta sweeps and the
//! mitigation pipeline. Couplings in MHz, times in µs.

use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use daqc::circuit::{build_qft, CircuitParams, Paradigm};
use daqc::compiler::{solve_block_times, CouplingSpec};
use daqc::engine::{beta_grid, sweep_average, sweep_beta, NoiseConfig};
use daqc::mitigation::{
    published_report, run_mitigation_experiment, stage1_zero_decoherence, stage2_zero_bang, Method, MitigationReport,
    MitigationSpec,
};

fn to_py(e: daqc::Error) -> PyErr {
    if e.is_numerical() {
        PyArithmeticError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn paradigm(name: &str) -> PyResult<Paradigm> {
    name.parse().map_err(to_py)
}

fn params(g_mhz: f64, sqg_factor: f64) -> CircuitParams {
    CircuitParams::new(g_mhz * 1e6, sqg_factor)
}

/// Event count, total time in µs and the event dump of a QFT schedule.
#[pyfunction]
#[pyo3(signature = (paradigm_name, qubits, g_mhz = 10.0, sqg_factor = 0.01))]
fn compile<'py>(py: Python<'py>, paradigm_name: &str, qubits: usize, g_mhz: f64, sqg_factor: f64) -> PyResult<Bound<'py, PyDict>> {
    let s = build_qft(paradigm(paradigm_name)?, qubits, &params(g_mhz, sqg_factor)).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("events", s.events.len())?;
    d.set_item("total_time_us", s.total_time() * 1e6)?;
    d.set_item("dump", s.dump())?;
    Ok(d)
}

/// Analog block times (units of 1/g) for a target coupling vector in flat pair order.
#[pyfunction]
fn block_times(qubits: usize, couplings: Vec<f64>) -> PyResult<Vec<(usize, usize, f64)>> {
    let spec = CouplingSpec { n_qubits: qubits, couplings, base_coupling: 1.0, total_time: 1.0 };
    let s = solve_block_times(&spec).map_err(to_py)?;
    Ok(s.blocks.iter().map(|b| (b.pair.0, b.pair.1, b.duration)).collect())
}

/// Noisy sweep over sin β|W⟩ + cos β|GHZ⟩ with the standard noise model.
#[pyfunction]
#[pyo3(signature = (
    paradigm_name, qubits, trajectories = 1000, seed = 1, beta_points = 33, g_mhz = 10.0, sqg_factor = 0.01,
    control_noise = true, bitflip = true, decoherence = true, measurement_error = true
))]
#[allow(clippy::too_many_arguments)]
fn sweep<'py>(
    py: Python<'py>,
    paradigm_name: &str,
    qubits: usize,
    trajectories: usize,
    seed: u64,
    beta_points: usize,
    g_mhz: f64,
    sqg_factor: f64,
    control_noise: bool,
    bitflip: bool,
    decoherence: bool,
    measurement_error: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let p = paradigm(paradigm_name)?;
    let g = g_mhz * 1e6;
    let cfg = NoiseConfig { control_noise, bitflip, decoherence_on: decoherence, measurement: measurement_error, ..NoiseConfig::standard(g) };
    let betas = beta_grid(beta_points);
    let points = py
        .detach(|| build_qft(p, qubits, &params(g_mhz, sqg_factor)).and_then(|s| sweep_beta(&s, &betas, &cfg, trajectories, seed)))
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("beta", betas.clone())?;
    d.set_item("fidelity", points.iter().map(|x| x.result.mean_fidelity).collect::<Vec<_>>())?;
    d.set_item("stderr", points.iter().map(|x| x.result.std_error).collect::<Vec<_>>())?;
    d.set_item("z0", points.iter().map(|x| x.result.mean_z0).collect::<Vec<_>>())?;
    d.set_item("average", sweep_average(&points))?;
    Ok(d)
}

/// Least-squares intercept at time 0.
#[pyfunction]
fn stage1(times: Vec<f64>, values: Vec<f64>) -> PyResult<f64> {
    if times.len() != values.len() {
        return Err(PyValueError::new_err("times and values differ in length"));
    }
    let pts: Vec<(f64, f64)> = times.into_iter().zip(values).collect();
    Ok(stage1_zero_decoherence(&pts).map_err(to_py)?.intercept)
}

/// Extrapolation to b = 0: "linear", "quadratic", "cubic" or "richardson".
#[pyfunction]
fn stage2(b: Vec<f64>, values: Vec<f64>, method: &str) -> PyResult<f64> {
    if b.len() != values.len() {
        return Err(PyValueError::new_err("b and values differ in length"));
    }
    let m = match method {
        "linear" => Method::Polynomial(1),
        "quadratic" => Method::Polynomial(2),
        "cubic" => Method::Polynomial(3),
        "richardson" => Method::Richardson,
        other => return Err(PyValueError::new_err(format!("unknown method '{other}'"))),
    };
    let pts: Vec<(f64, f64)> = b.into_iter().zip(values).collect();
    Ok(stage2_zero_bang(&pts, m).map_err(to_py)?.intercept)
}

fn report_dict<'py>(py: Python<'py>, r: &MitigationReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("b_values", r.grid.b_values.clone())?;
    d.set_item("a_values", r.grid.a_values.clone())?;
    d.set_item("fidelity", r.grid.fidelity.clone())?;
    d.set_item("z0", r.grid.z0.clone())?;
    d.set_item("ideal_fidelity", r.grid.ideal_fidelity.clone())?;
    d.set_item("ideal_z0", r.grid.ideal_z0.clone())?;
    d.set_item("zero_fidelity", r.fidelity.zero_decoherence.iter().map(|x| x.intercept).collect::<Vec<_>>())?;
    d.set_item("zero_z0", r.z0.zero_decoherence.iter().map(|x| x.intercept).collect::<Vec<_>>())?;
    let s2 = |p: &daqc::mitigation::Pipeline| -> PyResult<Bound<'py, PyDict>> {
        let m = PyDict::new(py);
        for (k, v) in &p.stage2 {
            m.set_item(k.name().to_ascii_lowercase(), v.intercept)?;
        }
        Ok(m)
    };
    d.set_item("stage2_fidelity", s2(&r.fidelity)?)?;
    d.set_item("stage2_z0", s2(&r.z0)?)?;
    Ok(d)
}

/// Two-stage mitigation on the simulated 6-qubit grid or on the published values.
#[pyfunction]
#[pyo3(signature = (from_paper_values = false))]
fn mitigate<'py>(py: Python<'py>, from_paper_values: bool) -> PyResult<Bound<'py, PyDict>> {
    let r = py
        .detach(|| {
            if from_paper_values {
                published_report()
            } else {
                let spec = MitigationSpec::standard();
                run_mitigation_experiment(&spec, &NoiseConfig::decoherence_only(spec.g0))
            }
        })
        .map_err(to_py)?;
    report_dict(py, &r)
}

#[pymodule]
fn daqc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(compile, m)?)?;
    m.add_function(wrap_pyfunction!(block_times, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(stage1, m)?)?;
    m.add_function(wrap_pyfunction!(stage2, m)?)?;
    m.add_function(wrap_pyfunction!(mitigate, m)?)?;
    Ok(())
}
