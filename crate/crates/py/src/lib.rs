//! Python bindings: the main types and operations of the padic-heyde
//! library as an in-process extension module.
//!
//! Rationals cross the boundary as `"num/den"` strings, matching the JSON
//! interfaces; structured reports come back as plain dicts.

use num_bigint::BigUint;
use num_rational::BigRational;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyComplex, PyDict, PyList};
use serde_json::Value;

use padic_heyde::constructions::{self, Group, PairFamily};
use padic_heyde::quotient::{induced_endomorphism, Multiplier};
use padic_heyde::symmetry;
use padic_heyde::{ratio, selftest};

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_weight(a: &str) -> PyResult<BigRational> {
    ratio::parse(a).map_err(err)
}

fn parse_group(group: &str) -> PyResult<Group> {
    match group {
        "omega" => Ok(Group::Omega),
        "delta" => Ok(Group::Delta),
        other => Err(PyValueError::new_err(format!(
            "group must be omega or delta, got {other:?}"
        ))),
    }
}

/// Recursively convert a JSON value into Python objects.
fn json_to_py<'py>(py: Python<'py>, value: &Value) -> PyResult<Py<PyAny>> {
    Ok(match value {
        Value::Null => py.None(),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().unbind().into_any(),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                i.into_pyobject(py)?.unbind().into_any()
            } else if let Some(u) = n.as_u64() {
                u.into_pyobject(py)?.unbind().into_any()
            } else {
                n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.unbind().into_any()
            }
        }
        Value::String(s) => s.into_pyobject(py)?.unbind().into_any(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.unbind().into_any()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (key, item) in map {
                dict.set_item(key, json_to_py(py, item)?)?;
            }
            dict.unbind().into_any()
        }
    })
}

fn report_to_py<T: serde::Serialize>(py: Python<'_>, report: &T) -> PyResult<Py<PyAny>> {
    let value = serde_json::to_value(report).map_err(err)?;
    json_to_py(py, &value)
}

// ---------------------------------------------------------------------------
// p-adic arithmetic
// ---------------------------------------------------------------------------

/// A p-adic integer at fixed digit precision.
#[pyclass(name = "PAdicInt", skip_from_py_object)]
#[derive(Clone)]
struct PyPAdicInt {
    inner: padic_heyde::PAdicInt,
}

#[pymethods]
impl PyPAdicInt {
    #[new]
    fn new(p: u64, digits: Vec<u64>) -> PyResult<Self> {
        Ok(Self { inner: padic_heyde::PAdicInt::from_digits(p, &digits).map_err(err)? })
    }

    #[getter]
    fn p(&self) -> u64 {
        self.inner.p()
    }

    #[getter]
    fn precision(&self) -> usize {
        self.inner.precision()
    }

    fn digits(&self) -> Vec<u64> {
        self.inner.digits()
    }

    /// Canonical residue in [0, p^precision) as a Python int.
    fn value(&self) -> BigUint {
        self.inner.value().clone()
    }

    fn add(&self, other: &PyPAdicInt) -> PyResult<Self> {
        Ok(Self { inner: self.inner.add(&other.inner).map_err(err)? })
    }

    fn mul(&self, other: &PyPAdicInt) -> PyResult<Self> {
        Ok(Self { inner: self.inner.mul(&other.inner).map_err(err)? })
    }

    fn neg(&self) -> Self {
        Self { inner: self.inner.neg() }
    }

    fn inv(&self) -> PyResult<Self> {
        Ok(Self { inner: self.inner.inv().map_err(err)? })
    }

    fn is_unit(&self) -> bool {
        self.inner.is_unit()
    }

    /// Split off the power of p: returns (k, unit).
    fn decompose(&self) -> PyResult<(usize, Self)> {
        let (k, c) = self.inner.decompose().map_err(err)?;
        Ok((k, Self { inner: c }))
    }

    /// The multiplier s_n the unit induces on the level-n quotient.
    fn unit_multiplier(&self, n: u32) -> PyResult<u64> {
        self.inner.unit_multiplier(n).map_err(err)
    }

    fn __eq__(&self, other: &PyPAdicInt) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("PAdicInt(p={}, digits={:?})", self.inner.p(), self.inner.digits())
    }
}

/// An automorphism p^k c of the p-adic numbers.
#[pyclass(name = "Automorphism", skip_from_py_object)]
#[derive(Clone)]
struct PyAutomorphism {
    inner: padic_heyde::Automorphism,
}

#[pymethods]
impl PyAutomorphism {
    #[new]
    #[pyo3(signature = (p, k, c_digits, precision=None))]
    fn new(p: u64, k: i64, c_digits: Vec<u64>, precision: Option<usize>) -> PyResult<Self> {
        let precision = precision.unwrap_or(c_digits.len().max(1));
        Ok(Self {
            inner: padic_heyde::Automorphism::from_digits(p, k, &c_digits, precision)
                .map_err(err)?,
        })
    }

    #[getter]
    fn p(&self) -> u64 {
        self.inner.p()
    }

    #[getter]
    fn k(&self) -> i64 {
        self.inner.k()
    }

    fn c(&self) -> PyPAdicInt {
        PyPAdicInt { inner: self.inner.c().clone() }
    }

    fn inverse(&self) -> PyResult<Self> {
        Ok(Self { inner: self.inner.inverse().map_err(err)? })
    }

    fn compose(&self, other: &PyAutomorphism) -> PyResult<Self> {
        Ok(Self { inner: self.inner.compose(&other.inner).map_err(err)? })
    }

    /// Multiplier of the induced endomorphism on the level-n dual
    /// (requires k >= 0; normalize first otherwise).
    fn multiplier(&self, level: u32) -> PyResult<u64> {
        Ok(induced_endomorphism(&self.inner, level).map_err(err)?.t())
    }

    /// Returns (normalized automorphism with k >= 0, swapped flag).
    fn normalize(&self) -> PyResult<(Self, bool)> {
        let (alpha, swapped) = symmetry::normalize_case(&self.inner).map_err(err)?;
        Ok((Self { inner: alpha }, swapped))
    }

    fn __repr__(&self) -> String {
        format!(
            "Automorphism(p={}, k={}, c={:?})",
            self.inner.p(),
            self.inner.k(),
            self.inner.c().digits()
        )
    }
}

// ---------------------------------------------------------------------------
// Distributions
// ---------------------------------------------------------------------------

/// An exact probability distribution on the level-n quotient.
#[pyclass(name = "FiniteDistribution", skip_from_py_object)]
#[derive(Clone)]
struct PyFiniteDistribution {
    inner: padic_heyde::FiniteDistribution,
}

#[pymethods]
impl PyFiniteDistribution {
    #[new]
    fn new(p: u64, level: u32, probs: Vec<String>) -> PyResult<Self> {
        let probs = probs
            .iter()
            .map(|s| ratio::parse(s))
            .collect::<Result<Vec<_>, _>>()
            .map_err(err)?;
        Ok(Self { inner: padic_heyde::FiniteDistribution::new(p, level, probs).map_err(err)? })
    }

    #[staticmethod]
    fn point_mass(p: u64, level: u32, x: u64) -> PyResult<Self> {
        Ok(Self { inner: padic_heyde::FiniteDistribution::point_mass(p, level, x).map_err(err)? })
    }

    #[staticmethod]
    fn haar(p: u64, m: u32, level: u32) -> PyResult<Self> {
        Ok(Self {
            inner: padic_heyde::FiniteDistribution::haar_on_subgroup(p, m, level).map_err(err)?,
        })
    }

    #[getter]
    fn p(&self) -> u64 {
        self.inner.p()
    }

    #[getter]
    fn level(&self) -> u32 {
        self.inner.level()
    }

    fn probs(&self) -> Vec<String> {
        self.inner.probs().iter().map(ratio::format).collect()
    }

    fn support(&self) -> Vec<u64> {
        self.inner.support()
    }

    fn convolve(&self, other: &PyFiniteDistribution) -> PyResult<Self> {
        Ok(Self { inner: self.inner.convolve(&other.inner).map_err(err)? })
    }

    fn reflect(&self) -> Self {
        Self { inner: self.inner.reflect() }
    }

    fn symmetrize(&self) -> Self {
        Self { inner: self.inner.symmetrize() }
    }

    fn is_degenerate(&self) -> bool {
        self.inner.is_degenerate()
    }

    fn is_idempotent_shift(&self) -> bool {
        self.inner.is_idempotent_shift()
    }

    /// None, or (subgroup_index m, shift x) when the distribution is
    /// uniform on a coset of the image of p^m Δ_p.
    fn idempotent_shift(&self) -> Option<(u32, u64)> {
        self.inner.idempotent_shift().map(|s| (s.subgroup_index, s.shift))
    }

    /// Characteristic-function values as complex numbers.
    fn char_values<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyComplex>>> {
        let table = self.inner.char_fn();
        Ok((0..self.inner.order())
            .map(|y| {
                let v = table.value_float(y);
                PyComplex::from_doubles(py, v.re, v.im)
            })
            .collect())
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: serde_json::from_str(text).map_err(err)? })
    }

    fn __eq__(&self, other: &PyFiniteDistribution) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!(
            "FiniteDistribution(p={}, level={}, probs={:?})",
            self.inner.p(),
            self.inner.level(),
            self.probs()
        )
    }
}

/// A convex combination of Haar distributions of the subgroup chain.
#[pyclass(name = "SubgroupMixture", skip_from_py_object)]
#[derive(Clone)]
struct PySubgroupMixture {
    inner: padic_heyde::SubgroupMixture,
}

#[pymethods]
impl PySubgroupMixture {
    #[new]
    fn new(p: u64, level: u32, terms: Vec<(u32, String)>) -> PyResult<Self> {
        let terms = terms
            .iter()
            .map(|(m, a)| Ok((*m, ratio::parse(a).map_err(err)?)))
            .collect::<PyResult<Vec<_>>>()?;
        Ok(Self { inner: padic_heyde::SubgroupMixture::new(p, level, terms).map_err(err)? })
    }

    fn terms(&self) -> Vec<(u32, String)> {
        self.inner.terms().iter().map(|t| (t.m, ratio::format(&t.a))).collect()
    }

    fn to_distribution(&self) -> PyFiniteDistribution {
        PyFiniteDistribution { inner: self.inner.to_distribution() }
    }

    /// Exact characteristic function as "num/den" strings.
    fn char_exact(&self) -> Vec<String> {
        self.inner
            .char_fn_exact()
            .exact_values()
            .expect("mixture tables are exact")
            .iter()
            .map(ratio::format)
            .collect()
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "SubgroupMixture(p={}, level={}, terms={:?})",
            self.inner.p(),
            self.inner.level(),
            self.terms()
        )
    }
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Classify (group, p, k, c) into its case; returns a dict with the case
/// id and the degenerate-subcase flag.
#[pyfunction]
#[pyo3(signature = (group, p, k, c_digits))]
fn classify(py: Python<'_>, group: &str, p: u64, k: i64, c_digits: Vec<u64>) -> PyResult<Py<PyAny>> {
    let label = constructions::classify_case(parse_group(group)?, p, k, &c_digits).map_err(err)?;
    report_to_py(py, &label)
}

/// Build a named solution-pair family at an explicit level.
#[pyfunction]
#[pyo3(signature = (case, p, k, a, level))]
fn construct(
    case: &str,
    p: u64,
    k: i64,
    a: &str,
    level: u32,
) -> PyResult<(PySubgroupMixture, PySubgroupMixture)> {
    let family = PairFamily::parse(case).map_err(err)?;
    let weight = parse_weight(a)?;
    let (mu1, mu2) = constructions::construct_family(family, p, k, &weight, level).map_err(err)?;
    Ok((PySubgroupMixture { inner: mu1 }, PySubgroupMixture { inner: mu2 }))
}

/// Build and fully verify a family: both symmetry oracles plus the
/// idempotency expectations.  Returns the verification report as a dict.
#[pyfunction]
#[pyo3(signature = (case, p, k, c_digits, a, level))]
fn verify(
    py: Python<'_>,
    case: &str,
    p: u64,
    k: i64,
    c_digits: Vec<u64>,
    a: &str,
    level: u32,
) -> PyResult<Py<PyAny>> {
    let family = PairFamily::parse(case).map_err(err)?;
    let weight = parse_weight(a)?;
    let report =
        constructions::verify_construction(family, p, k, &c_digits, &weight, level).map_err(err)?;
    report_to_py(py, &report)
}

/// Check the symmetry equation for a distribution pair under an
/// automorphism; returns the combined oracle report as a dict.
#[pyfunction]
#[pyo3(signature = (mu1, mu2, alpha, level))]
fn check_symmetry(
    py: Python<'_>,
    mu1: &PyFiniteDistribution,
    mu2: &PyFiniteDistribution,
    alpha: &PyAutomorphism,
    level: u32,
) -> PyResult<Py<PyAny>> {
    let report = symmetry::check_pair_with_automorphism(&mu1.inner, &mu2.inner, &alpha.inner, level)
        .map_err(err)?;
    report_to_py(py, &report)
}

/// Exhaustively enumerate grid solutions; returns the full result
/// (solutions plus summary) as a dict.
#[pyfunction]
#[pyo3(signature = (p, level, t, d, budget=None, jobs=1))]
fn enumerate_solutions(
    py: Python<'_>,
    p: u64,
    level: u32,
    t: u64,
    d: u64,
    budget: Option<u128>,
    jobs: usize,
) -> PyResult<Py<PyAny>> {
    let budget = budget.unwrap_or(symmetry::DEFAULT_ENUMERATION_BUDGET);
    let result = symmetry::enumerate_grid_solutions(p, level, t, d, budget, jobs).map_err(err)?;
    report_to_py(py, &result)
}

/// Seeded Monte Carlo symmetry statistic for a distribution pair and a
/// multiplier residue.
#[pyfunction]
#[pyo3(signature = (mu1, mu2, t, samples, seed))]
fn monte_carlo(
    mu1: &PyFiniteDistribution,
    mu2: &PyFiniteDistribution,
    t: u64,
    samples: u64,
    seed: u64,
) -> PyResult<f64> {
    let t = Multiplier::from_residue(mu1.inner.p(), mu1.inner.level(), t).map_err(err)?;
    symmetry::monte_carlo_symmetry(&mu1.inner, &mu2.inner, &t, samples, seed).map_err(err)
}

/// Run one acceptance criterion (or all nine) and return the reports.
#[pyfunction]
#[pyo3(signature = (criterion=None))]
fn run_selftest(py: Python<'_>, criterion: Option<u32>) -> PyResult<Py<PyAny>> {
    let reports = match criterion {
        Some(id) => vec![selftest::run_criterion(id)
            .ok_or_else(|| PyValueError::new_err(format!("no criterion {id}")))?],
        None => selftest::run_all(),
    };
    report_to_py(py, &reports)
}

#[pymodule]
fn padic_heyde_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyPAdicInt>()?;
    m.add_class::<PyAutomorphism>()?;
    m.add_class::<PyFiniteDistribution>()?;
    m.add_class::<PySubgroupMixture>()?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(construct, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(check_symmetry, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_solutions, m)?)?;
    m.add_function(wrap_pyfunction!(monte_carlo, m)?)?;
    m.add_function(wrap_pyfunction!(run_selftest, m)?)?;
    Ok(())
}
