//! Python bindings: measures, screening, optimal transport, simulation and
//! the benchmark harness.

use ndarray::{Array1, Array2, Array3};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use screenkit::data::{PredictorArray, ResponseBlock, SimConfig, Study};
use screenkit::harness::{report_json, run_benchmark, BenchmarkOptions};
use screenkit::measures::{self, DistanceTransform, MeasureKind, MeasureOptions, WdPreprocess};
use screenkit::screening;
use screenkit::simgen;
use screenkit::transport::{self, DiscreteMeasure, OtSolver, SinkhornParams};

fn err(e: screenkit::Error) -> PyErr {
    match e {
        screenkit::Error::Io(_) | screenkit::Error::Convergence { .. } => PyRuntimeError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn matrix(rows: &[Vec<f64>]) -> PyResult<Array2<f64>> {
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(PyValueError::new_err("ragged nested list"));
    }
    Ok(Array2::from_shape_fn((rows.len(), cols), |(i, j)| rows[i][j]))
}

fn to_rows(m: &Array2<f64>) -> Vec<Vec<f64>> {
    m.rows().into_iter().map(|r| r.to_vec()).collect()
}

/// Accepts a flat list (one column) or a list of rows.
fn block(obj: &Bound<'_, PyAny>) -> PyResult<Array2<f64>> {
    if let Ok(v) = obj.extract::<Vec<f64>>() {
        return Ok(Array2::from_shape_fn((v.len(), 1), |(i, _)| v[i]));
    }
    matrix(&obj.extract::<Vec<Vec<f64>>>()?)
}

/// Accepts an `n x p` matrix or a `d x n x p` nested list.
fn predictors(obj: &Bound<'_, PyAny>) -> PyResult<PredictorArray> {
    if let Ok(m) = obj.extract::<Vec<Vec<f64>>>() {
        return PredictorArray::from_matrix(matrix(&m)?).map_err(err);
    }
    let cube: Vec<Vec<Vec<f64>>> = obj.extract()?;
    let platforms = cube.iter().map(|m| matrix(m)).collect::<PyResult<Vec<_>>>()?;
    PredictorArray::from_platforms(&platforms).map_err(err)
}

fn options(sc_transform: Option<&str>, wd_solver: Option<&str>, wd_preprocess: Option<&str>, wd_epsilon: Option<f64>) -> PyResult<MeasureOptions> {
    let mut o = MeasureOptions::default();
    if let Some(s) = sc_transform {
        o.sc_transform = s.parse::<DistanceTransform>().map_err(err)?;
    }
    if let Some(s) = wd_solver {
        o.wd.solver = s.parse::<OtSolver>().map_err(err)?;
    }
    if let Some(s) = wd_preprocess {
        o.wd.preprocess = s.parse::<WdPreprocess>().map_err(err)?;
    }
    if let Some(e) = wd_epsilon {
        o.wd.epsilon_scale = e;
    }
    o.wd.validate().map_err(err)?;
    Ok(o)
}

fn kind(method: &str) -> PyResult<MeasureKind> {
    method.parse().map_err(err)
}

/// Names of all screening methods.
#[pyfunction]
fn methods() -> Vec<&'static str> {
    MeasureKind::ALL.iter().map(|k| k.name()).collect()
}

/// Marginal utility of predictor block `x` for response `y`.
#[pyfunction]
#[pyo3(signature = (method, x, y, sc_transform=None, wd_solver=None, wd_preprocess=None, wd_epsilon=None))]
fn utility(
    method: &str,
    x: &Bound<'_, PyAny>,
    y: &Bound<'_, PyAny>,
    sc_transform: Option<&str>,
    wd_solver: Option<&str>,
    wd_preprocess: Option<&str>,
    wd_epsilon: Option<f64>,
) -> PyResult<f64> {
    let (x, y) = (block(x)?, block(y)?);
    let o = options(sc_transform, wd_solver, wd_preprocess, wd_epsilon)?;
    measures::utility(kind(method)?, x.view(), y.view(), &o).map_err(err)
}

/// Per-feature utilities with ranking helpers.
#[pyclass(name = "ScoreTable", module = "screenkit_py")]
struct PyScoreTable {
    inner: screening::ScoreTable,
}

#[pymethods]
impl PyScoreTable {
    #[new]
    fn new(method: &str, utilities: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: screening::ScoreTable::new(kind(method)?, utilities).map_err(err)?,
        })
    }

    #[getter]
    fn method(&self) -> &'static str {
        self.inner.method().name()
    }

    #[getter]
    fn utilities(&self) -> Vec<f64> {
        self.inner.utilities().to_vec()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Feature indices by decreasing utility.
    fn ranking(&self) -> Vec<usize> {
        screening::rank_features(&self.inner)
    }

    fn top_k(&self, k: usize, names: Vec<String>) -> PyResult<Vec<String>> {
        screening::top_k(&self.inner, k, &names).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("ScoreTable(method={:?}, features={})", self.inner.method().name(), self.inner.len())
    }
}

/// Scores every feature of `x` (`n x p` or `d x n x p`) against `y`.
#[pyfunction]
#[pyo3(signature = (method, x, y, sc_transform=None, wd_solver=None, wd_preprocess=None, wd_epsilon=None))]
fn score_all(
    py: Python<'_>,
    method: &str,
    x: &Bound<'_, PyAny>,
    y: &Bound<'_, PyAny>,
    sc_transform: Option<&str>,
    wd_solver: Option<&str>,
    wd_preprocess: Option<&str>,
    wd_epsilon: Option<f64>,
) -> PyResult<PyScoreTable> {
    let x = predictors(x)?;
    let y = ResponseBlock::new(block(y)?).map_err(err)?;
    let o = options(sc_transform, wd_solver, wd_preprocess, wd_epsilon)?;
    let k = kind(method)?;
    let inner = py.allow_threads(|| measures::score_all(&x, &y, k, &o)).map_err(err)?;
    Ok(PyScoreTable { inner })
}

/// `floor(n / ln n)`.
#[pyfunction]
fn cutoff(n: usize) -> PyResult<usize> {
    if n < 2 {
        return Err(PyValueError::new_err("cutoff needs n >= 2"));
    }
    Ok(screening::cutoff(n))
}

/// Exact transport between weighted point clouds; returns `(cost, plan)`.
#[pyfunction]
#[pyo3(signature = (src_points, src_weights, dst_points, dst_weights, cost=None))]
fn ot_exact(
    src_points: Vec<Vec<f64>>,
    src_weights: Vec<f64>,
    dst_points: Vec<Vec<f64>>,
    dst_weights: Vec<f64>,
    cost: Option<Vec<Vec<f64>>>,
) -> PyResult<(f64, Vec<Vec<f64>>)> {
    let src = DiscreteMeasure::new(matrix(&src_points)?, Array1::from(src_weights)).map_err(err)?;
    let dst = DiscreteMeasure::new(matrix(&dst_points)?, Array1::from(dst_weights)).map_err(err)?;
    let c = match cost {
        Some(c) => matrix(&c)?,
        None => transport::squared_euclidean_cost(&src, &dst),
    };
    let plan = transport::ot_exact(&src, &dst, c.view()).map_err(err)?;
    Ok((plan.cost, to_rows(&plan.coupling)))
}

/// Entropic transport; returns `(cost, plan)`.
#[pyfunction]
#[pyo3(signature = (src_points, src_weights, dst_points, dst_weights, epsilon, cost=None, max_iter=100_000, tol=1e-9))]
#[allow(clippy::too_many_arguments)]
fn sinkhorn(
    src_points: Vec<Vec<f64>>,
    src_weights: Vec<f64>,
    dst_points: Vec<Vec<f64>>,
    dst_weights: Vec<f64>,
    epsilon: f64,
    cost: Option<Vec<Vec<f64>>>,
    max_iter: usize,
    tol: f64,
) -> PyResult<(f64, Vec<Vec<f64>>)> {
    let src = DiscreteMeasure::new(matrix(&src_points)?, Array1::from(src_weights)).map_err(err)?;
    let dst = DiscreteMeasure::new(matrix(&dst_points)?, Array1::from(dst_weights)).map_err(err)?;
    let c = match cost {
        Some(c) => matrix(&c)?,
        None => transport::squared_euclidean_cost(&src, &dst),
    };
    let params = SinkhornParams { epsilon, max_iter, tol };
    let plan = transport::sinkhorn(&src, &dst, c.view(), params).map_err(err)?;
    Ok((plan.cost, to_rows(&plan.coupling)))
}

/// Minimum-cost assignment; returns `(columns, cost)`.
#[pyfunction]
fn assignment(cost: Vec<Vec<f64>>) -> PyResult<(Vec<usize>, f64)> {
    transport::assignment_solve(matrix(&cost)?.view()).map_err(err)
}

/// Optimal-transport ranks of the rows of `z` on a Halton grid.
#[pyfunction]
fn multivariate_rank(z: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
    Ok(to_rows(&transport::multivariate_rank(matrix(&z)?.view())))
}

fn sim_config(study: &str, replicates: Option<usize>, seed: Option<u64>, n: Option<usize>, p: Option<usize>) -> PyResult<SimConfig> {
    let study: Study = study.parse().map_err(err)?;
    let mut cfg = SimConfig::for_study(study);
    if let Some(r) = replicates {
        cfg.replicates = r;
    }
    if let Some(s) = seed {
        cfg.base_seed = s;
    }
    if let Some(n) = n {
        cfg.n = n;
    }
    if let Some(p) = p {
        cfg.p = p;
    }
    cfg.validate().map_err(err)?;
    Ok(cfg)
}

/// One simulated replicate.
#[pyclass(name = "StudyInstance", module = "screenkit_py", get_all)]
struct PyStudyInstance {
    /// `d x n x p` nested list.
    x: Vec<Vec<Vec<f64>>>,
    /// `n x q` nested list.
    y: Vec<Vec<f64>>,
    /// 0-based indices of the active features.
    true_features: Vec<usize>,
    betas: Vec<f64>,
}

#[pymethods]
impl PyStudyInstance {
    fn __repr__(&self) -> String {
        format!(
            "StudyInstance(d={}, n={}, p={}, true_features={:?})",
            self.x.len(),
            self.y.len(),
            self.x.first().and_then(|m| m.first()).map_or(0, Vec::len),
            self.true_features
        )
    }
}

fn cube_rows(a: &Array3<f64>) -> Vec<Vec<Vec<f64>>> {
    a.outer_iter().map(|m| to_rows(&m.to_owned())).collect()
}

#[pyfunction]
#[pyo3(signature = (study, replicate=0, seed=None, n=None, p=None))]
fn gen_study(study: &str, replicate: usize, seed: Option<u64>, n: Option<usize>, p: Option<usize>) -> PyResult<PyStudyInstance> {
    let cfg = sim_config(study, Some(replicate + 1), seed, n, p)?;
    let inst = simgen::gen_study(&cfg, replicate).map_err(err)?;
    Ok(PyStudyInstance {
        x: cube_rows(inst.x.values()),
        y: to_rows(inst.y.values()),
        true_features: inst.true_set.features(),
        betas: inst.betas,
    })
}

/// Runs a benchmark and returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (study, replicates, seed=None, n=None, p=None, methods=None, cutoff_override=None, wd_solver=None))]
#[allow(clippy::too_many_arguments)]
fn simulate<'py>(
    py: Python<'py>,
    study: &str,
    replicates: usize,
    seed: Option<u64>,
    n: Option<usize>,
    p: Option<usize>,
    methods: Option<Vec<String>>,
    cutoff_override: Option<usize>,
    wd_solver: Option<&str>,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = sim_config(study, Some(replicates), seed, n, p)?;
    let kinds = match methods {
        Some(m) => MeasureKind::parse_list(&m.join(",")).map_err(err)?,
        None if cfg.study.is_multivariate() => MeasureKind::multivariate(),
        None => MeasureKind::ALL.to_vec(),
    };
    let opts = BenchmarkOptions {
        measures: options(None, wd_solver, None, None)?,
        cutoff_override,
    };
    let report = py.allow_threads(|| run_benchmark(&cfg, &kinds, &opts)).map_err(err)?;
    let text = report_json(&report).map_err(err)?;
    let parsed = py.import_bound("json")?.call_method1("loads", (text,))?;
    Ok(parsed.downcast_into::<PyDict>()?)
}

#[pymodule]
fn screenkit_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyScoreTable>()?;
    m.add_class::<PyStudyInstance>()?;
    m.add_function(wrap_pyfunction!(methods, m)?)?;
    m.add_function(wrap_pyfunction!(utility, m)?)?;
    m.add_function(wrap_pyfunction!(score_all, m)?)?;
    m.add_function(wrap_pyfunction!(cutoff, m)?)?;
    m.add_function(wrap_pyfunction!(ot_exact, m)?)?;
    m.add_function(wrap_pyfunction!(sinkhorn, m)?)?;
    m.add_function(wrap_pyfunction!(assignment, m)?)?;
    m.add_function(wrap_pyfunction!(multivariate_rank, m)?)?;
    m.add_function(wrap_pyfunction!(gen_study, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
