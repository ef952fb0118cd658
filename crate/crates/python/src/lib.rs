//! Python bindings. Reports are returned as plain dicts decoded from the
//! library's JSON serialization.

use std::collections::BTreeMap;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

use ibz_core::criteria::{self, CriteriaConfig, Criterion};
use ibz_core::families::{self, Family, FamilySpec, SweepConfig, FAMILIES};
use ibz_core::profile::json::ProfileDoc;
use ibz_core::transform::{self, Obstruction, DEFAULT_GRID_POINTS};
use ibz_core::{oracle, BodyOfRevolution, RadialProfile};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A builtin family name, or a JSON profile document.
fn resolve_profile(profile: &str, params: Option<BTreeMap<String, f64>>) -> PyResult<RadialProfile> {
    let params = params.unwrap_or_default();
    if profile.trim_start().starts_with('{') {
        let doc = match ProfileDoc::from_json(profile).map_err(value_error)? {
            ProfileDoc::Builtin { builtin, params: mut p } => {
                p.extend(params);
                ProfileDoc::Builtin { builtin, params: p }
            }
            _ if !params.is_empty() => return Err(PyValueError::new_err("params apply only to builtin families")),
            doc => doc,
        };
        doc.to_profile().map_err(value_error)
    } else {
        families::builtin_profile(profile, &params).map_err(value_error)
    }
}

fn body(profile: &str, params: Option<BTreeMap<String, f64>>, dim: usize) -> PyResult<BodyOfRevolution> {
    BodyOfRevolution::new(dim, resolve_profile(profile, params)?).map_err(value_error)
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(value_error)?;
    py.import("json")?.call_method1("loads", (text,))
}

fn parse_criterion(criterion: Option<&str>, dim: usize) -> PyResult<Criterion> {
    match criterion {
        Some(c) => c.parse().map_err(value_error),
        None => Criterion::for_dimension(dim).map_err(value_error),
    }
}

/// Names of the builtin families.
#[pyfunction]
fn builtin_families() -> Vec<&'static str> {
    FAMILIES.iter().map(|f| f.name()).collect()
}

/// Pole criterion report; the criterion defaults to prop1 in dimension 4
/// and prop4 in dimension 6.
#[pyfunction]
#[pyo3(signature = (profile, dim = 4, criterion = None, params = None))]
fn check<'py>(
    py: Python<'py>,
    profile: &str,
    dim: usize,
    criterion: Option<&str>,
    params: Option<BTreeMap<String, f64>>,
) -> PyResult<Bound<'py, PyAny>> {
    let p = resolve_profile(profile, params)?;
    let c = parse_criterion(criterion, dim)?;
    if c.dimension() != dim {
        return Err(PyValueError::new_err(format!("{} applies in dimension {}", c.name(), c.dimension())));
    }
    let report = criteria::check(&p, c, &CriteriaConfig::default()).map_err(value_error)?;
    to_py(py, &report)
}

/// Obstruction field on the default grid.
#[pyfunction]
#[pyo3(signature = (profile, dim, grid_points = DEFAULT_GRID_POINTS, params = None))]
fn field<'py>(
    py: Python<'py>,
    profile: &str,
    dim: usize,
    grid_points: usize,
    params: Option<BTreeMap<String, f64>>,
) -> PyResult<Bound<'py, PyAny>> {
    let b = body(profile, params, dim)?;
    let o = Obstruction::new(&b).map_err(value_error)?;
    let f = o.evaluate(&transform::default_grid(&o.breakpoints(), grid_points)).map_err(value_error)?;
    to_py(py, &f)
}

/// Radial function of the intersection body, normalised so that balls map
/// to unit balls.
#[pyfunction]
#[pyo3(signature = (profile, dim, x, params = None))]
fn intersection_radial(profile: &str, dim: usize, x: f64, params: Option<BTreeMap<String, f64>>) -> PyResult<f64> {
    let b = body(profile, params, dim)?;
    use ibz_core::JetFunction;
    transform::intersection_radial(&b).and_then(|r| r.value(x)).map_err(value_error)
}

/// Criterion margins over `lo, lo + step, ..., hi` with refined roots.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (family, lo, hi, step, dim, criterion = None, param = None))]
fn sweep<'py>(
    py: Python<'py>,
    family: &str,
    lo: f64,
    hi: f64,
    step: f64,
    dim: usize,
    criterion: Option<&str>,
    param: Option<&str>,
) -> PyResult<Bound<'py, PyAny>> {
    let fam: Family = family.parse().map_err(value_error)?;
    let param = param
        .or(fam.parameter())
        .ok_or_else(|| PyValueError::new_err(format!("family `{family}` has no shape parameter")))?;
    let grid = families::stepped_grid(lo, hi, step).map_err(value_error)?;
    let result = families::sweep(
        &FamilySpec::new(fam, dim),
        param,
        &grid,
        parse_criterion(criterion, dim)?,
        &SweepConfig::default(),
    )
    .map_err(value_error)?;
    to_py(py, &result)
}

/// Monte Carlo section-volume ratios against quadrature.
#[pyfunction]
#[pyo3(signature = (profile, dim, phis, samples = 1_000_000, seed = 0, params = None))]
fn oracle_ratios<'py>(
    py: Python<'py>,
    profile: &str,
    dim: usize,
    phis: Vec<f64>,
    samples: usize,
    seed: u64,
    params: Option<BTreeMap<String, f64>>,
) -> PyResult<Bound<'py, PyAny>> {
    let b = body(profile, params, dim)?;
    let report = py.detach(|| oracle::compare_ratios(&b, &phis, samples, seed)).map_err(value_error)?;
    to_py(py, &report)
}

#[pyfunction]
fn w_of_m(m: f64) -> PyResult<f64> {
    families::w_of_m(m).map_err(value_error)
}

#[pymodule]
fn ibz(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(builtin_families, m)?)?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    m.add_function(wrap_pyfunction!(field, m)?)?;
    m.add_function(wrap_pyfunction!(intersection_radial, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_ratios, m)?)?;
    m.add_function(wrap_pyfunction!(w_of_m, m)?)?;
    Ok(())
}
