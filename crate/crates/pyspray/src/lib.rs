//! Python bindings. Exposes the chart construction plus the scene
//! commands; reports come back as the same canonical JSON strings the
//! command line prints, so results are byte-comparable across the two
//! frontends.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use sprayforge::blowup::{build_chart, epoint_to_chart, BlowupChart, Center, EPoint};
use sprayforge::error::Error;
use sprayforge::groebner::Budget;
use sprayforge::ideal::Ideal;
use sprayforge::mpoly::MPoly;
use sprayforge::parse::{canonical, parse_poly, VarTable};
use sprayforge::rat::{parse_rat, rat, rat_str, Rat};
use sprayforge::report::{emit_report, execute, Command, OutputFormat};
use sprayforge::scene::scene_from_str;

fn pyerr(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A rational argument: a Python int or a "p/q" string.
#[derive(FromPyObject)]
enum PyRat {
    Int(i64),
    Str(String),
}

fn to_rat(v: PyRat) -> PyResult<Rat> {
    match v {
        PyRat::Int(n) => Ok(rat(n)),
        PyRat::Str(s) => parse_rat(&s).map_err(pyerr),
    }
}

fn to_rats(vs: Vec<PyRat>) -> PyResult<Vec<Rat>> {
    vs.into_iter().map(to_rat).collect()
}

/// One affine chart of the blow-up of affine space along a polynomial
/// center. Polynomials go in and come out as strings in the x1..xn /
/// l1..lr grammar.
#[pyclass]
struct Chart {
    inner: BlowupChart,
}

#[pymethods]
impl Chart {
    /// Build the chart of index `chart_index` (defaults to the last
    /// generator) for the center cut out by `generators` in C^ambient.
    #[new]
    #[pyo3(signature = (ambient, generators, chart_index=None))]
    fn new(ambient: usize, generators: Vec<String>, chart_index: Option<usize>) -> PyResult<Self> {
        let table = VarTable::ambient(ambient);
        let gens = generators
            .iter()
            .map(|g| parse_poly(g, &table))
            .collect::<Result<Vec<MPoly>, _>>()
            .map_err(pyerr)?;
        let center = Center::new(ambient, gens).map_err(pyerr)?;
        let dist = chart_index.unwrap_or_else(|| center.r());
        let inner = build_chart(&center, dist).map_err(pyerr)?;
        Ok(Chart { inner })
    }

    #[getter]
    fn ambient(&self) -> usize {
        self.inner.ambient()
    }

    #[getter]
    fn nvars(&self) -> usize {
        self.inner.nvars()
    }

    #[getter]
    fn chart_index(&self) -> usize {
        self.inner.dist
    }

    #[getter]
    fn fiber_dimension(&self) -> usize {
        self.inner.fiber_dim()
    }

    fn variables(&self) -> Vec<String> {
        let t = self.inner.table();
        (0..self.inner.nvars()).map(|i| t.name(i).to_string()).collect()
    }

    fn relations(&self) -> Vec<String> {
        let t = self.inner.table();
        self.inner
            .relations()
            .iter()
            .map(|r| canonical(r, &t))
            .collect()
    }

    fn exceptional(&self) -> String {
        canonical(self.inner.exceptional_fn(), &self.inner.table())
    }

    /// Chart coordinates of the exceptional point over `base` in the
    /// normal direction of `direction`.
    fn point_to_chart(&self, base: Vec<PyRat>, direction: Vec<PyRat>) -> PyResult<Vec<String>> {
        let b = EPoint::new(to_rats(base)?, to_rats(direction)?);
        let coords = epoint_to_chart(&b, &self.inner).map_err(pyerr)?;
        Ok(coords.iter().map(rat_str).collect())
    }

    fn __repr__(&self) -> String {
        format!(
            "Chart(ambient={}, chart_index={}, nvars={})",
            self.inner.ambient(),
            self.inner.dist,
            self.inner.nvars()
        )
    }
}

/// Run a scene command (chart, spray1, spray2, embed, certify,
/// dominate-lift) and return (canonical JSON report, exit code).
#[pyfunction]
fn run(command: &str, scene_json: &str) -> PyResult<(String, i32)> {
    let cmd = Command::parse(command).ok_or_else(|| {
        PyValueError::new_err(format!(
            "unknown command `{command}`; expected chart, spray1, spray2, embed, certify, or dominate-lift"
        ))
    })?;
    let scene = scene_from_str(scene_json).map_err(pyerr)?;
    let report = execute(&scene, cmd).map_err(pyerr)?;
    let code = report.exit_code();
    Ok((emit_report(&report, OutputFormat::Json), code))
}

/// Shorthand for run("certify", ...): the report JSON alone.
#[pyfunction]
fn certify(scene_json: &str) -> PyResult<String> {
    Ok(run("certify", scene_json)?.0)
}

/// Normal form of `poly` modulo the ideal generated by `generators`
/// in C^nvars, in canonical form.
#[pyfunction]
fn normal_form(nvars: usize, generators: Vec<String>, poly: &str) -> PyResult<String> {
    let table = VarTable::ambient(nvars);
    let gens = generators
        .iter()
        .map(|g| parse_poly(g, &table))
        .collect::<Result<Vec<MPoly>, _>>()
        .map_err(pyerr)?;
    let p = parse_poly(poly, &table).map_err(pyerr)?;
    let ideal = Ideal::new(nvars, gens);
    let nf = ideal.normal_form(&p, &Budget::default()).map_err(pyerr)?;
    Ok(canonical(&nf, &table))
}

#[pyfunction]
fn version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}

#[pymodule]
fn sprayforge_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Chart>()?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    m.add_function(wrap_pyfunction!(normal_form, m)?)?;
    m.add_function(wrap_pyfunction!(version, m)?)?;
    Ok(())
}
