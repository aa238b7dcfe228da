//! Python bindings: residues mod p^m, CM q-expansions, stabilization, and the
//! generalized eigenform pipeline.

use num_bigint::BigInt;
use pyo3::exceptions::{PyValueError, PyZeroDivisionError};
use pyo3::prelude::*;

use ovmf::cmforms::{integer_coefficients, stabilize as stabilize_form, CMSpec, Grossencharacter};
use ovmf::eigen::Convention;
use ovmf::padic::{Modulus, ResidueInt};
use ovmf::pipeline::{enlarged, run, RunConfig, RunResult};
use ovmf::verify::report;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// An element of Z/p^m.
#[pyclass(name = "Residue", module = "ovmf_py", frozen, from_py_object)]
#[derive(Clone)]
struct PyResidue(ResidueInt);

#[pymethods]
impl PyResidue {
    #[new]
    fn new(value: BigInt, p: u64, m: u32) -> PyResult<Self> {
        let md = Modulus::new(p, m).map_err(value_err)?;
        Ok(Self(md.from_bigint(&value)))
    }

    #[getter]
    fn p(&self) -> u64 {
        self.0.modulus().p()
    }

    #[getter]
    fn precision(&self) -> u32 {
        self.0.modulus().precision()
    }

    #[getter]
    fn value(&self) -> BigInt {
        self.0.to_bigint()
    }

    fn valuation(&self) -> u32 {
        self.0.valuation()
    }

    fn is_unit(&self) -> bool {
        self.0.is_unit()
    }

    fn inverse(&self) -> PyResult<Self> {
        self.0
            .invert()
            .map(Self)
            .map_err(|e| PyZeroDivisionError::new_err(e.to_string()))
    }

    fn reduce(&self, k: u32) -> PyResult<Self> {
        self.0.reduce(k).map(Self).map_err(value_err)
    }

    fn __add__(&self, other: &Self) -> PyResult<Self> {
        self.0.checked_add(&other.0).map(Self).map_err(value_err)
    }

    fn __sub__(&self, other: &Self) -> PyResult<Self> {
        self.0.checked_sub(&other.0).map(Self).map_err(value_err)
    }

    fn __mul__(&self, other: &Self) -> PyResult<Self> {
        self.0.checked_mul(&other.0).map(Self).map_err(value_err)
    }

    fn __neg__(&self) -> Self {
        Self(-self.0)
    }

    fn __pow__(&self, exp: u64, _modulo: Option<u64>) -> Self {
        Self(self.0.pow(exp))
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }

    fn __int__(&self) -> BigInt {
        self.0.to_bigint()
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Residue({} mod {})", self.0, self.0.modulus())
    }
}

/// Coefficients `a_0, ..., a_terms` of the weight-`weight` CM form for `Q(sqrt(disc))`.
#[pyfunction]
#[pyo3(signature = (disc, weight, terms = 10))]
fn cm_qexpansion(disc: i64, weight: u32, terms: usize) -> PyResult<Vec<BigInt>> {
    let psi = Grossencharacter::new(disc, weight).map_err(value_err)?;
    Ok(psi.qexpansion(terms).to_integers().expect("CM coefficients are integers"))
}

/// Critical p-stabilization; returns `a_p`, both roots and the stabilized coefficients.
#[pyfunction]
#[pyo3(signature = (disc, weight, p, prec, terms = 50))]
fn stabilize(py: Python<'_>, disc: i64, weight: u32, p: u64, prec: u32, terms: usize) -> PyResult<Py<PyAny>> {
    let spec = CMSpec::new(disc, weight, p, prec).map_err(value_err)?;
    let md = Modulus::new(p, prec).map_err(value_err)?;
    let g0 = spec.qexpansion(terms.max(p as usize));
    let st = stabilize_form(&spec, &g0, &md).map_err(value_err)?;
    let out = pyo3::types::PyDict::new(py);
    out.set_item("a_p", st.a_p.clone())?;
    out.set_item("alpha", PyResidue(st.alpha))?;
    out.set_item("beta", PyResidue(st.beta))?;
    out.set_item("g0", integer_coefficients(&g0))?;
    let f: Vec<PyResidue> = st.f.coeffs().iter().map(|&c| PyResidue(c)).collect();
    out.set_item("f", f)?;
    Ok(out.into_any().unbind())
}

fn parse_convention(s: &str) -> PyResult<Convention> {
    match s {
        "table" => Ok(Convention::Table),
        "paper" => Ok(Convention::Paper),
        _ => Err(PyValueError::new_err("convention must be 'table' or 'paper'")),
    }
}

/// A finished run of the generalized eigenform computation.
#[pyclass(name = "Eigenform", module = "ovmf_py", frozen)]
struct PyEigenform(RunResult);

#[pymethods]
impl PyEigenform {
    #[new]
    #[pyo3(signature = (disc, weight, p, prec, convention = "table", lmax = 100, levels = None, terms = None, buffer = None))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        py: Python<'_>,
        disc: i64,
        weight: u32,
        p: u64,
        prec: u32,
        convention: &str,
        lmax: u64,
        levels: Option<usize>,
        terms: Option<usize>,
        buffer: Option<u32>,
    ) -> PyResult<Self> {
        let mut cfg = RunConfig::new(disc, weight, p, prec);
        cfg.convention = parse_convention(convention)?;
        cfg.lmax = lmax;
        cfg.n_levels = levels;
        cfg.t_q = terms;
        cfg.buffer = buffer;
        let result = py.detach(|| run(&cfg)).map_err(value_err)?;
        Ok(Self(result))
    }

    #[getter]
    fn m_verified(&self) -> u32 {
        self.0.m_verified
    }

    #[getter]
    fn e_f(&self) -> usize {
        self.0.eigen.e_f
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.0.system.dim()
    }

    #[getter]
    fn alpha(&self) -> PyResidue {
        PyResidue(self.0.stabilized.alpha)
    }

    /// `a_n(f')` at the reported precision.
    fn coefficient(&self, n: usize) -> PyResult<PyResidue> {
        if n > self.0.fprime.series.truncation() {
            return Err(PyValueError::new_err("index beyond the computed truncation"));
        }
        Ok(PyResidue(self.0.fprime_coeff(n)))
    }

    /// Nonzero `(l, a_l')` for primes `l <= lmax` prime to `Np`.
    fn table(&self) -> Vec<(u64, PyResidue)> {
        self.0.table().into_iter().map(|e| (e.l, PyResidue(e.value))).collect()
    }

    /// Full verification report as JSON; `stability` adds the deeper rerun.
    #[pyo3(signature = (stability = true, example = None))]
    fn report_json(&self, py: Python<'_>, stability: bool, example: Option<u8>) -> PyResult<String> {
        if example.is_some_and(|e| !(1..=2).contains(&e)) {
            return Err(PyValueError::new_err("example must be 1 or 2"));
        }
        let bigger = if stability {
            Some(py.detach(|| enlarged(&self.0)).map_err(value_err)?)
        } else {
            None
        };
        Ok(report(&self.0, bigger.as_ref(), example).to_json())
    }
}

/// Recomputes one of the two bundled reference tables and returns the JSON report.
#[pyfunction]
fn reproduce_table(py: Python<'_>, example: u8) -> PyResult<String> {
    if !(1..=2).contains(&example) {
        return Err(PyValueError::new_err("example must be 1 or 2"));
    }
    let rep = py.detach(|| ovmf::verify::reproduce_table(example)).map_err(value_err)?;
    Ok(rep.to_json())
}

#[pymodule]
fn ovmf_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyResidue>()?;
    m.add_class::<PyEigenform>()?;
    m.add_function(wrap_pyfunction!(cm_qexpansion, m)?)?;
    m.add_function(wrap_pyfunction!(stabilize, m)?)?;
    m.add_function(wrap_pyfunction!(reproduce_table, m)?)?;
    Ok(())
}
