//! Python bindings: the main trajectory, level-map, extremal-function, BVP,
//! and zero-spacing operations, with trajectories wrapped in a small class.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use painleve1::bvp;
use painleve1::extremal;
use painleve1::integrals;
use painleve1::integrate::{self, Direction, SolveConfig};
use painleve1::level;
use painleve1::report;
use painleve1::spacing;

fn err(e: painleve1::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn direction(name: &str) -> PyResult<Direction> {
    match name {
        "left" => Ok(Direction::Left),
        "right" => Ok(Direction::Right),
        _ => Err(PyValueError::new_err("direction must be 'left' or 'right'")),
    }
}

fn side(name: &str) -> PyResult<level::Side> {
    match name {
        "left" => Ok(level::Side::MinLeft),
        "right" => Ok(level::Side::MinRight),
        _ => Err(PyValueError::new_err("side must be 'left' or 'right'")),
    }
}

fn config(rk_tol: Option<f64>) -> SolveConfig {
    let mut cfg = SolveConfig::default();
    if let Some(t) = rk_tol {
        cfg.rk_rel_tol = t;
        cfg.rk_abs_tol = t;
    }
    cfg
}

/// One solution on its explored interval.
#[pyclass(name = "Trajectory")]
struct PyTrajectory {
    inner: integrate::Trajectory,
}

#[pymethods]
impl PyTrajectory {
    /// Left end of the explored interval.
    #[getter]
    fn a(&self) -> f64 {
        self.inner.interval.a
    }

    /// Right end of the explored interval.
    #[getter]
    fn b(&self) -> f64 {
        self.inner.interval.b
    }

    #[getter]
    fn v_left(&self) -> Option<f64> {
        self.inner.v_left
    }

    #[getter]
    fn v_right(&self) -> Option<f64> {
        self.inner.v_right
    }

    /// Zeros as (x, slope) pairs, ascending in x.
    fn zeros(&self) -> Vec<(f64, f64)> {
        self.inner.zeros().iter().map(|e| (e.x, e.payload)).collect()
    }

    /// The interior minimum as (x_min, y_min), when one exists.
    fn minimum(&self) -> Option<(f64, f64)> {
        self.inner.minimum()
    }

    fn left_pole(&self) -> Option<(f64, f64)> {
        self.inner.left_pole()
    }

    fn right_pole(&self) -> Option<(f64, f64)> {
        self.inner.right_pole()
    }

    /// Canonical JSON record of the trajectory.
    fn to_json(&self) -> String {
        integrate::trajectory_json(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "Trajectory(a={:.9}, b={:.9}, events={})",
            self.inner.interval.a,
            self.inner.interval.b,
            self.inner.events.len()
        )
    }
}

/// Quadrature constants as a dict: C, v_min_max, x_max, C0.
#[pyfunction]
fn constants(py: Python<'_>) -> PyResult<Py<PyDict>> {
    let b = integrals::constants();
    let d = PyDict::new(py);
    d.set_item("C", b.c)?;
    d.set_item("v_min_max", b.v_min_max)?;
    d.set_item("x_max", b.x_max)?;
    d.set_item("C0", b.c0)?;
    Ok(d.into())
}

#[pyfunction]
#[pyo3(signature = (x0, y0, y1, direction="left", rk_tol=None))]
fn integrate_ivp(
    x0: f64,
    y0: f64,
    y1: f64,
    direction: &str,
    rk_tol: Option<f64>,
) -> PyResult<PyTrajectory> {
    let dir = self::direction(direction)?;
    let t = integrate::integrate_ivp(x0, y0, y1, dir, &config(rk_tol)).map_err(err)?;
    Ok(PyTrajectory { inner: t })
}

#[pyfunction]
#[pyo3(signature = (x_pole, v, direction="left", rk_tol=None))]
fn integrate_from_pole(
    x_pole: f64,
    v: f64,
    direction: &str,
    rk_tol: Option<f64>,
) -> PyResult<PyTrajectory> {
    let dir = self::direction(direction)?;
    let t = integrate::integrate_from_pole(x_pole, v, dir, &config(rk_tol)).map_err(err)?;
    Ok(PyTrajectory { inner: t })
}

#[pyfunction]
#[pyo3(signature = (x_pole, v, x_eval, rk_tol=None))]
fn wronskian_j(x_pole: f64, v: f64, x_eval: f64, rk_tol: Option<f64>) -> PyResult<f64> {
    integrate::wronskian_j(x_pole, v, x_eval, &config(rk_tol)).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (x0, y0, y_l, side="left"))]
fn slope_f(x0: f64, y0: f64, y_l: f64, side: &str) -> PyResult<f64> {
    level::slope_f(x0, y0, y_l, self::side(side)?, &config(None)).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (x0, y0, y_l, side="left"))]
fn delta_sym(x0: f64, y0: f64, y_l: f64, side: &str) -> PyResult<f64> {
    level::delta_sym(x0, y0, y_l, self::side(side)?, &config(None)).map_err(err)
}

/// (y_l, x_min) of the pole solution (x_pole, v).
#[pyfunction]
fn level_from_pole(x_pole: f64, v: f64) -> PyResult<(f64, f64)> {
    level::level_from_pole(level::PoleDatum { x_pole, v }, &config(None)).map_err(err)
}

#[pyfunction]
fn v_from_level(x_pole: f64, y_l: f64) -> PyResult<f64> {
    level::v_from_level(x_pole, y_l, &config(None)).map_err(err)
}

#[pyfunction]
fn cal_x_min(x0: f64, y_l: f64) -> PyResult<f64> {
    level::cal_x_min(x0, y_l, &config(None)).map_err(err)
}

#[pyfunction]
fn cal_x(x0: f64, y_l: f64) -> PyResult<f64> {
    level::cal_x(x0, y_l, &config(None)).map_err(err)
}

/// (xi_min_level, xi_level) of the right-launched family.
#[pyfunction]
fn var_xi(x0: f64, y_l: f64) -> PyResult<(f64, f64)> {
    level::var_xi(x0, y_l, &config(None)).map_err(err)
}

fn extremal_tuple(r: extremal::ExtremalResult) -> (f64, f64, PyTrajectory) {
    (r.value, r.arg, PyTrajectory { inner: r.witness })
}

/// (value, optimal_level, witness) of X_min(x0).
#[pyfunction]
fn x_min_fn(x0: f64) -> PyResult<(f64, f64, PyTrajectory)> {
    extremal::x_min_fn(x0, &config(None)).map(extremal_tuple).map_err(err)
}

/// (value, optimal_y0, witness) of X_-(x0).
#[pyfunction]
fn x_minus_fn(x0: f64) -> PyResult<(f64, f64, PyTrajectory)> {
    extremal::x_minus_fn(x0, &config(None)).map(extremal_tuple).map_err(err)
}

/// (value, optimal_level, witness) of X(x0).
#[pyfunction]
fn x_fn(x0: f64) -> PyResult<(f64, f64, PyTrajectory)> {
    extremal::x_fn(x0, &config(None)).map(extremal_tuple).map_err(err)
}

/// ((xi_min, level, witness), (xi, level, witness)) at x0 <= X(0).
#[pyfunction]
#[allow(clippy::type_complexity)]
fn xi_fns(x0: f64) -> PyResult<((f64, f64, PyTrajectory), (f64, f64, PyTrajectory))> {
    let (a, b) = extremal::xi_fns(x0, &config(None)).map_err(err)?;
    Ok((extremal_tuple(a), extremal_tuple(b)))
}

#[pyfunction]
fn maximal_solution(x0: f64) -> PyResult<PyTrajectory> {
    extremal::maximal_solution(x0, &config(None))
        .map(|t| PyTrajectory { inner: t })
        .map_err(err)
}

/// (z, optimal_level, slope_at_x0).
#[pyfunction]
fn z_fn(x0: f64, y0: f64, y_up: f64) -> PyResult<(f64, f64, f64)> {
    let z = bvp::z_fn(x0, y0, y_up, &config(None)).map_err(err)?;
    Ok((z.value, z.y_l, z.slope))
}

#[pyfunction]
fn count_solutions(x0: f64, y0: f64, x1: f64, y_up: f64) -> PyResult<usize> {
    let p = bvp::BvpProblem::new(x0, y0, x1, y_up).map_err(err)?;
    bvp::count_solutions(&p, &config(None)).map_err(err)
}

/// (count, z, slopes, solutions).
#[pyfunction]
fn solve_bvp(
    x0: f64,
    y0: f64,
    x1: f64,
    y_up: f64,
) -> PyResult<(usize, f64, Vec<f64>, Vec<PyTrajectory>)> {
    let p = bvp::BvpProblem::new(x0, y0, x1, y_up).map_err(err)?;
    let out = bvp::solve_bvp(&p, &config(None)).map_err(err)?;
    let sols = out.solutions.into_iter().map(|t| PyTrajectory { inner: t }).collect();
    Ok((out.count, out.z_value, out.slopes, sols))
}

#[pyfunction]
#[pyo3(signature = (x0, y0, y_l, side="left"))]
fn delta_level(x0: f64, y0: f64, y_l: f64, side: &str) -> PyResult<f64> {
    spacing::delta_level(x0, y0, y_l, self::side(side)?, &config(None)).map_err(err)
}

/// (value, optimal_level).
#[pyfunction]
#[pyo3(signature = (x0, y0, side="left"))]
fn delta_sup(x0: f64, y0: f64, side: &str) -> PyResult<(f64, f64)> {
    let r = spacing::delta_sup(x0, y0, self::side(side)?, &config(None)).map_err(err)?;
    Ok((r.value, r.arg))
}

/// (value, optimal_v).
#[pyfunction]
#[pyo3(signature = (x0, side="left"))]
fn delta_pole_sup(x0: f64, side: &str) -> PyResult<(f64, f64)> {
    let r = spacing::delta_pole_sup(x0, self::side(side)?, &config(None)).map_err(err)?;
    Ok((r.value, r.arg))
}

/// Reproduce a reference table; returns (pass, rows) with each row a dict.
#[pyfunction]
fn run_table(py: Python<'_>, n: u32) -> PyResult<(bool, Vec<Py<PyDict>>)> {
    let rep = report::run_table(n, &config(None)).map_err(err)?;
    let mut rows = Vec::with_capacity(rep.rows.len());
    for r in &rep.rows {
        let d = PyDict::new(py);
        d.set_item("quantity", &r.quantity)?;
        d.set_item("computed", r.computed)?;
        d.set_item("reference", r.reference)?;
        d.set_item("abs_error", r.abs_error)?;
        d.set_item("pass", r.pass)?;
        rows.push(d.into());
    }
    Ok((rep.pass, rows))
}

/// Scan a conjecture; returns (violations, cases, worst_margin).
#[pyfunction]
#[pyo3(signature = (id, seed=20260809))]
fn scan_conjecture(id: u32, seed: u64) -> PyResult<(usize, usize, f64)> {
    let rep = report::scan_conjecture(id, &config(None), seed).map_err(err)?;
    Ok((rep.violations, rep.cases, rep.worst_margin))
}

#[pymodule]
fn painleve1_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTrajectory>()?;
    m.add_function(wrap_pyfunction!(constants, m)?)?;
    m.add_function(wrap_pyfunction!(integrate_ivp, m)?)?;
    m.add_function(wrap_pyfunction!(integrate_from_pole, m)?)?;
    m.add_function(wrap_pyfunction!(wronskian_j, m)?)?;
    m.add_function(wrap_pyfunction!(slope_f, m)?)?;
    m.add_function(wrap_pyfunction!(delta_sym, m)?)?;
    m.add_function(wrap_pyfunction!(level_from_pole, m)?)?;
    m.add_function(wrap_pyfunction!(v_from_level, m)?)?;
    m.add_function(wrap_pyfunction!(cal_x_min, m)?)?;
    m.add_function(wrap_pyfunction!(cal_x, m)?)?;
    m.add_function(wrap_pyfunction!(var_xi, m)?)?;
    m.add_function(wrap_pyfunction!(x_min_fn, m)?)?;
    m.add_function(wrap_pyfunction!(x_minus_fn, m)?)?;
    m.add_function(wrap_pyfunction!(x_fn, m)?)?;
    m.add_function(wrap_pyfunction!(xi_fns, m)?)?;
    m.add_function(wrap_pyfunction!(maximal_solution, m)?)?;
    m.add_function(wrap_pyfunction!(z_fn, m)?)?;
    m.add_function(wrap_pyfunction!(count_solutions, m)?)?;
    m.add_function(wrap_pyfunction!(solve_bvp, m)?)?;
    m.add_function(wrap_pyfunction!(delta_level, m)?)?;
    m.add_function(wrap_pyfunction!(delta_sup, m)?)?;
    m.add_function(wrap_pyfunction!(delta_pole_sup, m)?)?;
    m.add_function(wrap_pyfunction!(run_table, m)?)?;
    m.add_function(wrap_pyfunction!(scan_conjecture, m)?)?;
    Ok(())
}
