//! Python bindings.

use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use redlight::cost;
use redlight::euler_lagrange;
use redlight::io::{parse_problem, parse_trajectory, to_json, ProblemFile, ReportFile, TrajectoryFile};
use redlight::oracle::{self, DpGrid};
use redlight::solver::{self, SolveReport};
use redlight::{validate_problem, Error, GreenDistribution, PhasePattern, ProblemSpec};

create_exception!(redlight, InputError, PyValueError, "Rejected or malformed input.");
create_exception!(redlight, SolverError, PyRuntimeError, "Numerical failure inside the solver or an oracle.");

fn err(e: Error) -> PyErr {
    match e {
        Error::InvalidParameter { .. }
        | Error::InvalidTable(_)
        | Error::Rejected(_)
        | Error::UnsupportedDistribution(..)
        | Error::Schema { .. } => InputError::new_err(e.to_string()),
        _ => SolverError::new_err(e.to_string()),
    }
}

fn json_value<'py, T: serde::Serialize + ?Sized>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = to_json(value).map_err(err)?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Instance parameters and green-time law.
#[pyclass(name = "Problem", module = "redlight", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyProblem {
    inner: ProblemSpec,
}

#[pymethods]
impl PyProblem {
    #[staticmethod]
    #[pyo3(signature = (alpha, beta, v_max, v0, d, L, q))]
    #[allow(non_snake_case)]
    fn uniform(alpha: f64, beta: f64, v_max: f64, v0: f64, d: f64, L: f64, q: f64) -> PyResult<Self> {
        let dist = GreenDistribution::uniform(q).map_err(err)?;
        Ok(Self { inner: ProblemSpec::new(alpha, beta, v_max, v0, d, L, dist).map_err(err)? })
    }

    #[staticmethod]
    #[pyo3(signature = (alpha, beta, v_max, v0, d, L, rate))]
    #[allow(non_snake_case)]
    fn exponential(alpha: f64, beta: f64, v_max: f64, v0: f64, d: f64, L: f64, rate: f64) -> PyResult<Self> {
        let dist = GreenDistribution::exponential(rate).map_err(err)?;
        Ok(Self { inner: ProblemSpec::new(alpha, beta, v_max, v0, d, L, dist).map_err(err)? })
    }

    /// Green time as the excess of a tabulated interarrival law.
    #[staticmethod]
    #[pyo3(signature = (alpha, beta, v_max, v0, d, L, interarrival_cdf, mean))]
    #[allow(non_snake_case, clippy::too_many_arguments)]
    fn excess(
        alpha: f64,
        beta: f64,
        v_max: f64,
        v0: f64,
        d: f64,
        L: f64,
        interarrival_cdf: Vec<(f64, f64)>,
        mean: f64,
    ) -> PyResult<Self> {
        let knots: Vec<[f64; 2]> = interarrival_cdf.into_iter().map(|(t, c)| [t, c]).collect();
        let dist = GreenDistribution::excess_from_interarrival(&knots, mean).map_err(err)?;
        Ok(Self { inner: ProblemSpec::new(alpha, beta, v_max, v0, d, L, dist).map_err(err)? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let file = parse_problem(text).map_err(err)?;
        Ok(Self { inner: file.to_spec().map_err(err)? })
    }

    fn to_json(&self) -> PyResult<String> {
        to_json(&ProblemFile::from_spec(&self.inner).map_err(err)?).map_err(err)
    }

    /// Same parameters with another starting speed and distance.
    fn with_start(&self, v0: f64, d: f64) -> Self {
        Self { inner: self.inner.with_start(v0, d) }
    }

    /// Reason codes; empty when the instance is solvable.
    fn validate(&self) -> Vec<String> {
        validate_problem(&self.inner).reasons.iter().map(|r| r.code.to_string()).collect()
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }
    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta
    }
    #[getter]
    fn v_max(&self) -> f64 {
        self.inner.v_max
    }
    #[getter]
    fn v0(&self) -> f64 {
        self.inner.v0
    }
    #[getter]
    fn d(&self) -> f64 {
        self.inner.d
    }
    #[getter(L)]
    fn l(&self) -> f64 {
        self.inner.l
    }

    fn pdf(&self, t: f64) -> f64 {
        self.inner.dist.pdf(t)
    }

    fn cdf(&self, t: f64) -> f64 {
        self.inner.dist.cdf(t)
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!("Problem(alpha={}, beta={}, v_max={}, v0={}, d={}, L={})", p.alpha, p.beta, p.v_max, p.v0, p.d, p.l)
    }
}

/// Piecewise speed profile.
#[pyclass(name = "Trajectory", module = "redlight", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyTrajectory {
    inner: redlight::Trajectory,
}

#[pymethods]
impl PyTrajectory {
    /// Accepts a trajectory file or a full solver report.
    #[staticmethod]
    fn from_json(problem: &PyProblem, text: &str) -> PyResult<Self> {
        let file = parse_trajectory(text).map_err(err)?;
        Ok(Self { inner: file.to_trajectory(&problem.inner).map_err(err)? })
    }

    fn to_json(&self) -> PyResult<String> {
        to_json(&TrajectoryFile::from_trajectory(&self.inner)).map_err(err)
    }

    fn velocity_at(&self, t: f64) -> f64 {
        self.inner.velocity_at(t)
    }

    fn position_at(&self, t: f64) -> f64 {
        self.inner.position_at(t)
    }

    fn total_distance(&self) -> f64 {
        self.inner.total_distance()
    }

    #[getter]
    fn pattern(&self) -> String {
        self.inner.pattern().to_string()
    }

    /// `(t, v, x)` rows every `step` seconds.
    fn sample(&self, step: f64) -> Vec<(f64, f64, f64)> {
        self.inner.sample(step).into_iter().map(|[t, v, x]| (t, v, x)).collect()
    }

    fn __repr__(&self) -> String {
        format!("Trajectory('{}')", self.inner.pattern())
    }
}

#[pyclass(name = "Report", module = "redlight", frozen)]
struct PyReport {
    inner: SolveReport,
}

#[pymethods]
impl PyReport {
    #[getter]
    fn pattern(&self) -> String {
        self.inner.pattern.to_string()
    }

    #[getter]
    fn expected_arrival(&self) -> f64 {
        self.inner.expected_arrival
    }

    /// Optimal switch speed, when the law is exponential and the pattern switches.
    #[getter]
    fn v_c_star(&self) -> Option<f64> {
        self.inner.exponential.as_ref().and_then(|e| e.v_c_star.value())
    }

    #[getter]
    fn level(&self) -> Option<f64> {
        self.inner.level
    }

    #[getter]
    fn trajectory(&self) -> PyTrajectory {
        PyTrajectory { inner: self.inner.trajectory.clone() }
    }

    fn to_json(&self) -> PyResult<String> {
        to_json(&ReportFile::new(&self.inner)).map_err(err)
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        json_value(py, &ReportFile::new(&self.inner))
    }

    fn __repr__(&self) -> String {
        format!("Report('{}', expected_arrival={})", self.inner.pattern, self.inner.expected_arrival)
    }
}

#[pyfunction]
fn solve(problem: &PyProblem) -> PyResult<PyReport> {
    Ok(PyReport { inner: solver::solve(&problem.inner).map_err(err)? })
}

#[pyfunction]
fn expected_arrival(trajectory: &PyTrajectory, problem: &PyProblem) -> PyResult<f64> {
    cost::expected_arrival(&trajectory.inner, &problem.inner).map_err(err)
}

/// Sampled estimate as `(mean, std_error)`.
#[pyfunction]
#[pyo3(signature = (trajectory, problem, n, seed=0))]
fn expected_arrival_mc(trajectory: &PyTrajectory, problem: &PyProblem, n: usize, seed: u64) -> (f64, f64) {
    let e = cost::expected_arrival_mc(&trajectory.inner, &problem.inner, n, seed);
    (e.mean, e.std_error)
}

/// Region label at `(v0, d)`.
#[pyfunction]
fn classify(problem: &PyProblem, v0: f64, d: f64) -> PyResult<String> {
    let p = problem.inner.with_start(v0, d);
    Ok(solver::classify(&p, v0, d).map_err(err)?.to_string())
}

/// Lower end of the admissible switch speeds.
#[pyfunction]
fn v_beta(problem: &PyProblem) -> PyResult<f64> {
    euler_lagrange::v_beta(&problem.inner).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (problem, steps=None, speeds=None))]
fn dp_min_cost<'py>(
    py: Python<'py>,
    problem: &PyProblem,
    steps: Option<usize>,
    speeds: Option<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    let mut grid = DpGrid::default_for(&problem.inner);
    grid.steps = steps.unwrap_or(grid.steps);
    grid.speeds = speeds.unwrap_or(grid.speeds);
    let r = py.detach(|| oracle::dp_min_cost(&problem.inner, &grid)).map_err(err)?;
    json_value(py, &r)
}

#[pyfunction]
#[pyo3(signature = (trajectory, problem, n=1000, seed=0))]
fn perturbation_test<'py>(
    py: Python<'py>,
    trajectory: &PyTrajectory,
    problem: &PyProblem,
    n: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let r = py.detach(|| oracle::perturbation_test(&trajectory.inner, &problem.inner, n, seed)).map_err(err)?;
    json_value(py, &r)
}

/// Cost against switch speed; the family defaults to the solved pattern.
#[pyfunction]
#[pyo3(signature = (problem, family=None, points=401))]
fn sweep_switch_velocity<'py>(
    py: Python<'py>,
    problem: &PyProblem,
    family: Option<&str>,
    points: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let family: PhasePattern = match family {
        Some(f) => f.parse().map_err(InputError::new_err)?,
        None => solver::solve(&problem.inner).map_err(err)?.pattern,
    };
    let curve = oracle::sweep_switch_velocity(&problem.inner, &family, points).map_err(err)?;
    json_value(py, &curve)
}

#[pymodule]
#[pyo3(name = "redlight")]
fn redlight_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("InputError", m.py().get_type::<InputError>())?;
    m.add("SolverError", m.py().get_type::<SolverError>())?;
    m.add_class::<PyProblem>()?;
    m.add_class::<PyTrajectory>()?;
    m.add_class::<PyReport>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(expected_arrival, m)?)?;
    m.add_function(wrap_pyfunction!(expected_arrival_mc, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(v_beta, m)?)?;
    m.add_function(wrap_pyfunction!(dp_min_cost, m)?)?;
    m.add_function(wrap_pyfunction!(perturbation_test, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_switch_velocity, m)?)?;
    Ok(())
}
