use std::time::Duration;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use adt_reduce::ast::{parse, parse_with, AdtModel, Script};
use adt_reduce::backend::{emit_smtlib, BackendKind, SolverConfig};
use adt_reduce::corpus::CorpusConfig;
use adt_reduce::interp::{interpolate as interp, InterpConfig, InterpResult, InterpolationProblem};
use adt_reduce::normalize::normalize;
use adt_reduce::pipeline::{decide, mode_for, DecideConfig, DecideError, Verdict};
use adt_reduce::reduce::{reduce, ReduceOptions};
use adt_reduce::signature::{check_expanding, SortVerdict};
use adt_reduce::sizesolve::DEFAULT_FUEL;
use adt_reduce::suite::{run_suite, SuiteConfig};

fn script(text: &str) -> PyResult<Script> {
    parse(text).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn config(fuel: usize, optimize: bool, external: Option<String>) -> DecideConfig {
    DecideConfig {
        solver: SolverConfig {
            backend: match external {
                Some(cmd) => BackendKind::External(Some(cmd)),
                None => BackendKind::Builtin,
            },
            ..SolverConfig::default()
        },
        reduce: if optimize {
            ReduceOptions::default()
        } else {
            ReduceOptions::unoptimized()
        },
        fuel,
    }
}

fn decide_err(e: DecideError) -> PyErr {
    match e {
        DecideError::Reduce(e) => PyValueError::new_err(e.to_string()),
        e => PyRuntimeError::new_err(e.to_string()),
    }
}

fn model_dict<'py>(py: Python<'py>, s: &Script, m: &AdtModel) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    for (name, t) in &m.adt {
        d.set_item(name, t.display(&s.sig).to_string())?;
    }
    for (name, v) in &m.ints {
        d.set_item(name, *v)?;
    }
    Ok(d)
}

/// Decides the assertions of an SMT-LIB script.
///
/// Returns a dict with `verdict` ("sat", "unsat" or "unknown"), `model`
/// (variable -> value, or None) and `reason` (None unless unknown).
#[pyfunction]
#[pyo3(signature = (text, *, fuel = DEFAULT_FUEL, optimize = true, external_cmd = None))]
fn solve<'py>(
    py: Python<'py>,
    text: &str,
    fuel: usize,
    optimize: bool,
    external_cmd: Option<String>,
) -> PyResult<Bound<'py, PyDict>> {
    let s = script(text)?;
    let cfg = config(fuel, optimize, external_cmd);
    let d = py
        .detach(|| decide(&s.sig, &s.formula(), &cfg))
        .map_err(decide_err)?;
    let out = PyDict::new(py);
    out.set_item("verdict", d.verdict.name())?;
    match &d.verdict {
        Verdict::Sat(m) => {
            out.set_item("model", model_dict(py, &s, m)?)?;
            out.set_item("reason", py.None())?;
        }
        Verdict::Unsat => {
            out.set_item("model", py.None())?;
            out.set_item("reason", py.None())?;
        }
        Verdict::Unknown(why) => {
            out.set_item("model", py.None())?;
            out.set_item("reason", why)?;
        }
    }
    Ok(out)
}

/// The reduced EUF+LIA formula of a script as SMT-LIB text.
#[pyfunction]
#[pyo3(signature = (text, *, optimize = true))]
fn emit(text: &str, optimize: bool) -> PyResult<String> {
    let s = script(text)?;
    let f = s.formula();
    let cfg = config(DEFAULT_FUEL, optimize, None);
    let r = reduce(&s.sig, &normalize(&s.sig, &f), mode_for(&f), &cfg.reduce)
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(emit_smtlib(&r))
}

/// Per sort: cardinality, size image and expandingness.
#[pyfunction]
fn analyze<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyDict>> {
    let s = script(text)?;
    let report = check_expanding(&s.sig);
    let out = PyDict::new(py);
    for sort in s.sig.sorts() {
        let d = PyDict::new(py);
        d.set_item("cardinality", s.sig.cardinality(sort).to_string())?;
        d.set_item("size_image", s.sig.size_image(sort).to_string())?;
        match report.verdict(sort) {
            SortVerdict::NonExpanding(w) => {
                d.set_item("expanding", false)?;
                d.set_item("cycle", w.display(&s.sig).to_string())?;
            }
            _ => {
                d.set_item("expanding", true)?;
                d.set_item("cycle", py.None())?;
            }
        }
        out.set_item(s.sig.sort_name(sort), d)?;
    }
    Ok(out)
}

/// An interpolant of the assertions of `a` and `b` as SMT-LIB text, or
/// None when their conjunction is satisfiable. `b` is parsed with the
/// declarations of `a`; `cmd` runs an interpolating SMT solver.
#[pyfunction]
#[pyo3(signature = (a, b, cmd, *, timeout = 60.0))]
fn interpolate(py: Python<'_>, a: &str, b: &str, cmd: &str, timeout: f64) -> PyResult<Option<String>> {
    let sa = script(a)?;
    let sb = parse_with(b, &sa).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let prob = InterpolationProblem::new(sa.formula(), sb.formula());
    let cfg = InterpConfig {
        timeout: Duration::from_secs_f64(timeout),
        ..InterpConfig::default()
    };
    match py.detach(|| interp(&prob, &sb.sig, cmd, &cfg)) {
        Ok(InterpResult::Interpolant(i)) => Ok(Some(i.display(&sb.sig).to_string())),
        Ok(InterpResult::NotUnsat(_)) => Ok(None),
        Ok(InterpResult::Untranslatable(raw)) => {
            Err(PyRuntimeError::new_err(format!("untranslatable interpolant: {raw}")))
        }
        Err(e) => Err(PyRuntimeError::new_err(e.to_string())),
    }
}

/// Runs the agreement suite on a seeded random corpus and returns its summary.
#[pyfunction]
#[pyo3(signature = (*, seed = 1, signatures = 6, formulas = 100))]
fn corpus<'py>(py: Python<'py>, seed: u64, signatures: usize, formulas: usize) -> PyResult<Bound<'py, PyDict>> {
    let cfg = SuiteConfig {
        corpus: CorpusConfig {
            seed,
            signatures,
            formulas_per_signature: formulas,
            ..CorpusConfig::default()
        },
        ..SuiteConfig::default()
    };
    let report = py
        .detach(|| run_suite(&cfg))
        .map_err(|(name, e)| PyRuntimeError::new_err(format!("{name}: {e}")))?;
    let out = PyDict::new(py);
    out.set_item("instances", report.instances.len())?;
    for v in ["sat", "unsat", "unknown"] {
        out.set_item(v, report.count(v))?;
    }
    out.set_item("disagreements", report.disagreements().len())?;
    out.set_item("blowup_constant", report.blowup_constant())?;
    Ok(out)
}

#[pymodule]
pub fn adtreduce(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(emit, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(interpolate, m)?)?;
    m.add_function(wrap_pyfunction!(corpus, m)?)?;
    Ok(())
}
