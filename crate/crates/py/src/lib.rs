//! Python bindings: exponents, grids, weight constants, Rubio de Francia iteration,
//! experiments and the verification batteries.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use multiweight::dyadic::{Cube, DyadicGrid, GridFunction, GridShape};
use multiweight::exponents::{self as ex, ExponentVector, VectorKind};
use multiweight::harness::{self, ExperimentConfig, Suite, VerifyOptions};
use multiweight::norms;
use multiweight::operators::hl_maximal;
use multiweight::rubio::{maximal_norm_bound, rdf_iterate as rdf, BoundMode, RdfOperator, DEFAULT_K};
use multiweight::weights::{self as wt, BaseMeasure, CubeFamily, FamilyMode};

fn value_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Any serializable value as plain Python objects.
fn to_py<'py, T: Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(value_err)?;
    py.import("json")?.call_method1("loads", (text,))
}

#[pyclass(frozen, eq, hash, skip_from_py_object, module = "multiweight")]
#[derive(Clone, PartialEq, Eq, Hash)]
struct Exponent(ex::Exponent);

#[pymethods]
impl Exponent {
    /// Parses `"3/2"`, `"2"`, `"inf"`.
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        text.parse().map(Exponent).map_err(value_err)
    }

    /// `1/p` as an exact fraction string.
    #[getter]
    fn inv(&self) -> String {
        self.0.inv().to_string()
    }

    #[getter]
    fn value(&self) -> f64 {
        self.0.to_f64()
    }

    #[getter]
    fn is_infinite(&self) -> bool {
        self.0.is_infinite()
    }

    /// `1/p′ = 1 − 1/p`, possibly negative.
    fn dual_inv(&self) -> String {
        ex::dual(&self.0).inv.to_string()
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Exponent('{}')", self.0)
    }
}

/// A random (or standard) dyadic lattice on the `d`-torus with `2^L` cells per side.
#[pyclass(frozen, module = "multiweight")]
struct Grid(DyadicGrid);

#[pymethods]
impl Grid {
    #[new]
    #[pyo3(signature = (d, L, seed=None))]
    #[allow(non_snake_case)]
    fn new(d: usize, L: u32, seed: Option<u64>) -> PyResult<Self> {
        let shape = GridShape::new(d, L).map_err(value_err)?;
        Ok(Grid(match seed {
            Some(s) => DyadicGrid::random(shape, &mut ChaCha8Rng::seed_from_u64(s)),
            None => DyadicGrid::standard(shape),
        }))
    }

    #[getter]
    fn d(&self) -> usize {
        self.0.shape.d
    }

    #[getter(L)]
    fn depth(&self) -> u32 {
        self.0.shape.depth
    }

    #[getter]
    fn cells(&self) -> usize {
        self.0.shape.cells()
    }

    #[getter]
    fn omega(&self) -> Vec<Vec<u8>> {
        self.0.omega.clone()
    }

    fn __repr__(&self) -> String {
        format!("Grid(d={}, L={}, omega={:?})", self.0.shape.d, self.0.shape.depth, self.0.omega)
    }
}

impl Grid {
    fn function(&self, values: Vec<f64>) -> PyResult<GridFunction> {
        GridFunction::new(self.0.shape, values).map_err(value_err)
    }

    fn weight(&self, values: Vec<f64>) -> PyResult<wt::Weight> {
        wt::Weight::new(self.function(values)?).map_err(value_err)
    }

    fn family(&self, name: &str) -> PyResult<CubeFamily> {
        let mode: FamilyMode = serde_json::from_value(serde_json::Value::String(name.into()))
            .map_err(|_| value_err(format!("unknown family {name:?}; use dyadic, all_discrete or all_discrete_periodic")))?;
        Ok(CubeFamily::with_mode(mode, &self.0))
    }
}

fn parse(s: &str) -> PyResult<ex::Exponent> {
    s.parse().map_err(value_err)
}

fn vector(items: Vec<String>, kind: VectorKind) -> PyResult<ExponentVector> {
    let refs: Vec<&str> = items.iter().map(String::as_str).collect();
    ExponentVector::parse(kind, &refs).map_err(value_err)
}

/// `1/δᵢ`, `1/θᵢ`, `1/ϱ` and the sums for `(p⃗, r⃗)`; raises on a failed ordering.
#[pyfunction]
fn derived_scales<'py>(py: Python<'py>, p: Vec<String>, r: Vec<String>) -> PyResult<Bound<'py, PyAny>> {
    let ds = ex::derived_scales(&vector(p, VectorKind::P)?, &vector(r, VectorKind::R)?).map_err(value_err)?;
    to_py(py, &ds)
}

#[pyfunction]
fn offdiag_targets<'py>(py: Python<'py>, p0: &str, r0: &str, q0: &str, p: &str) -> PyResult<Bound<'py, PyAny>> {
    let t = ex::offdiag_targets(&parse(p0)?, &parse(r0)?, &parse(q0)?, &parse(p)?).map_err(value_err)?;
    to_py(py, &t)
}

#[pyfunction]
#[pyo3(signature = (grid, values, p, family="dyadic"))]
fn ap_constant<'py>(py: Python<'py>, grid: &Grid, values: Vec<f64>, p: &str, family: &str) -> PyResult<Bound<'py, PyAny>> {
    let leb = BaseMeasure::lebesgue(grid.0.shape);
    let c = wt::ap_constant(&grid.weight(values)?, &parse(p)?, &leb, &grid.family(family)?).map_err(value_err)?;
    to_py(py, &c)
}

#[pyfunction]
#[pyo3(signature = (grid, values, p, r, family="dyadic"))]
fn apr_constant<'py>(
    py: Python<'py>,
    grid: &Grid,
    values: Vec<f64>,
    p: &str,
    r: &str,
    family: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let leb = BaseMeasure::lebesgue(grid.0.shape);
    let c = wt::apr_constant(&grid.weight(values)?, &parse(p)?, &parse(r)?, &leb, &grid.family(family)?)
        .map_err(value_err)?;
    to_py(py, &c)
}

/// Hardy–Littlewood maximal function over a cube family.
#[pyfunction]
#[pyo3(signature = (grid, values, family="dyadic"))]
fn maximal(grid: &Grid, values: Vec<f64>, family: &str) -> PyResult<Vec<f64>> {
    let f = grid.function(values)?;
    let leb = BaseMeasure::lebesgue(grid.0.shape);
    Ok(hl_maximal(&f, &leb, &grid.family(family)?).into_values())
}

/// The Haar function of the cube at `level` with lattice coordinates `coords`.
#[pyfunction]
fn haar(grid: &Grid, level: u32, coords: Vec<usize>, eta: Vec<u8>) -> PyResult<Vec<f64>> {
    multiweight::dyadic::haar(&grid.0, &Cube::new(level, coords), &eta).map(GridFunction::into_values).map_err(value_err)
}

/// `⟨f⟩_top + Σ Δ_Q f`; reproduces `f`.
#[pyfunction]
fn telescope(grid: &Grid, values: Vec<f64>) -> PyResult<Vec<f64>> {
    let f = grid.function(values)?;
    let top = Cube::top(grid.0.shape.d);
    multiweight::dyadic::telescope(&f, &grid.0, &top).map(GridFunction::into_values).map_err(value_err)
}

#[pyfunction]
fn lp(grid: &Grid, values: Vec<f64>, p: &str) -> PyResult<f64> {
    Ok(norms::lp(&grid.function(values)?, parse(p)?.to_f64()))
}

/// One truncated Rubio de Francia iteration with its certificates.
#[pyfunction]
#[pyo3(signature = (grid, h, w, t="2", K=DEFAULT_K, mode="buckley", conjugated=false, seed=0))]
#[allow(non_snake_case, clippy::too_many_arguments)]
fn rdf_iterate<'py>(
    py: Python<'py>,
    grid: &Grid,
    h: Vec<f64>,
    w: Vec<f64>,
    t: &str,
    K: usize,
    mode: &str,
    conjugated: bool,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let (fam, mode) = match mode {
        "buckley" => (CubeFamily::dyadic(&grid.0), BoundMode::Buckley),
        "empirical" => (CubeFamily::default_for(&grid.0), BoundMode::empirical(seed)),
        other => return Err(value_err(format!("unknown mode {other:?}; use buckley or empirical"))),
    };
    let t = parse(t)?;
    let w = grid.weight(w)?;
    let op = if conjugated { RdfOperator::conjugated(fam, t, w) } else { RdfOperator::plain(fam, t, w) }
        .map_err(value_err)?;
    let b = maximal_norm_bound(&op, mode).map_err(value_err)?;
    let res = rdf(&grid.function(h)?, &op, b.b, K).map_err(value_err)?;
    let out = serde_json::json!({
        "bound": b,
        "tail_bound": res.tail_bound,
        "certs": res.certs,
        "majorant": res.majorant.values(),
    });
    to_py(py, &out)
}

/// Runs a JSON experiment config; returns `(csv, summary)`.
#[pyfunction]
fn run_experiment<'py>(py: Python<'py>, config: &str) -> PyResult<(String, Bound<'py, PyAny>)> {
    let cfg = ExperimentConfig::from_json(config).map_err(value_err)?;
    let rep = py.detach(|| harness::run_experiment(&cfg)).map_err(value_err)?;
    Ok((rep.csv().map_err(value_err)?, to_py(py, &rep.summary)?))
}

/// Runs a verification suite; the result has `batteries` and per-battery `failures`.
#[pyfunction]
#[pyo3(signature = (suite, seed=0, scale=1.0, K=DEFAULT_K, inject_violation=false))]
#[allow(non_snake_case)]
fn verify<'py>(
    py: Python<'py>,
    suite: &str,
    seed: u64,
    scale: f64,
    K: usize,
    inject_violation: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let suite: Suite = suite.parse().map_err(value_err)?;
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(value_err(format!("scale = {scale} must be positive")));
    }
    let opts = VerifyOptions { seed, grid: None, k: K, inject_violation, scale };
    let rep = py.detach(|| harness::verify_suite(suite, &opts));
    let out = to_py(py, &rep)?;
    out.set_item("passed", rep.passed())?;
    Ok(out)
}

#[pymodule(name = "multiweight")]
fn multiweight_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Exponent>()?;
    m.add_class::<Grid>()?;
    m.add_function(wrap_pyfunction!(derived_scales, m)?)?;
    m.add_function(wrap_pyfunction!(offdiag_targets, m)?)?;
    m.add_function(wrap_pyfunction!(ap_constant, m)?)?;
    m.add_function(wrap_pyfunction!(apr_constant, m)?)?;
    m.add_function(wrap_pyfunction!(maximal, m)?)?;
    m.add_function(wrap_pyfunction!(haar, m)?)?;
    m.add_function(wrap_pyfunction!(telescope, m)?)?;
    m.add_function(wrap_pyfunction!(lp, m)?)?;
    m.add_function(wrap_pyfunction!(rdf_iterate, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
