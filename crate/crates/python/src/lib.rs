//! Python bindings: `import cohwit`.

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use cohwit::certify::{self, ClassifyOptions, ParameterPath, Verdict};
use cohwit::channels::{self, BeamsplitterParams, StateFamily};
use cohwit::support::{self, Direction, SupportOptions};
use cohwit::{hull, ExpectationVector, ObservableId};

create_exception!(cohwit, CohwitError, PyValueError);

fn err(e: cohwit::Error) -> PyErr {
    CohwitError::new_err(e.to_string())
}

fn space_of(spec: &str) -> PyResult<cohwit::ObservableSpace> {
    spec.parse().map_err(err)
}

fn family_of(name: &str) -> PyResult<StateFamily> {
    name.parse().map_err(err)
}

/// An ordered list of observables, e.g. `ObservableSpace("P0,X01")`.
#[pyclass(frozen, module = "cohwit")]
struct ObservableSpace {
    inner: cohwit::ObservableSpace,
}

#[pymethods]
impl ObservableSpace {
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        Ok(Self { inner: space_of(spec)? })
    }

    fn observables(&self) -> Vec<String> {
        self.inner.iter().map(|o| o.to_string()).collect()
    }

    fn max_index(&self) -> usize {
        self.inner.max_index()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("ObservableSpace('{}')", self.inner)
    }
}

/// Result of `classify`.
#[pyclass(frozen, get_all, module = "cohwit")]
struct Classification {
    /// "nonclassical", "classical" or "inconsistent"
    verdict: String,
    criterion: String,
    margin: f64,
    /// Unit certificate normal (nonclassical verdicts only).
    direction: Option<Vec<f64>>,
    h_classical: Option<f64>,
}

#[pymethods]
impl Classification {
    fn __repr__(&self) -> String {
        format!(
            "Classification(verdict='{}', margin={:.6e}, criterion='{}')",
            self.verdict, self.margin, self.criterion
        )
    }
}

#[pyfunction]
#[pyo3(signature = (space, values, assume_quantum = false, tol_margin = 1e-6))]
fn classify(space: &str, values: Vec<f64>, assume_quantum: bool, tol_margin: f64) -> PyResult<Classification> {
    let s = space_of(space)?;
    let x = ExpectationVector::measured(s.clone(), values).map_err(err)?;
    let mut opts = ClassifyOptions { assume_quantum, ..Default::default() };
    opts.certify.tol_margin = tol_margin;
    let c = certify::classify(&s, &x, &opts).map_err(err)?;
    let (direction, h_classical) = match &c.verdict {
        Verdict::Nonclassical(cert) => (Some(cert.direction.components().to_vec()), Some(cert.h_classical)),
        _ => (None, None),
    };
    Ok(Classification {
        verdict: c.verdict.label().to_string(),
        criterion: c.criterion,
        margin: c.margin,
        direction,
        h_classical,
    })
}

/// Classical maximum of `|X_jk|`.
#[pyfunction]
fn classical_coherence_bound(j: usize, k: usize) -> PyResult<f64> {
    hull::classical_coherence_bound(j, k).map_err(err)
}

#[pyfunction]
fn classical_x01_bound_given_p0(p0: f64) -> PyResult<f64> {
    hull::classical_x01_bound_given_p0(p0).map_err(err)
}

#[pyfunction]
fn quantum_r_bound_given_pj(pj: f64) -> PyResult<f64> {
    hull::quantum_r_bound_given_pj(pj).map_err(err)
}

/// `Tr(O rho)` for the coherent state with mean photon number `mu` and phase `phi`.
#[pyfunction]
fn coherent_expectation(observable: &str, mu: f64, phi: f64) -> PyResult<f64> {
    let o: ObservableId = observable.parse().map_err(err)?;
    let p = cohwit::CoherentParams::new(mu, phi).map_err(err)?;
    Ok(cohwit::coherent_expectation(&o, &p))
}

/// `h_C(n)`.
#[pyfunction]
fn support_classical(space: &str, direction: Vec<f64>) -> PyResult<f64> {
    let s = space_of(space)?;
    let n = Direction::new(&s, direction).map_err(err)?;
    Ok(support::support_classical(&s, &n, &SupportOptions::default()).map_err(err)?.value)
}

/// `h_Q(n)` at truncation `dim` (default: max index + 2).
#[pyfunction]
#[pyo3(signature = (space, direction, dim = None))]
fn support_quantum(space: &str, direction: Vec<f64>, dim: Option<usize>) -> PyResult<f64> {
    let s = space_of(space)?;
    let n = Direction::new(&s, direction).map_err(err)?;
    let dim = dim.unwrap_or_else(|| s.default_dim());
    Ok(support::support_quantum(&s, &n, dim).map_err(err)?.value)
}

/// Density matrix of `family` after attenuation (`t`, `phi`) and thermal noise `nbar`.
#[pyfunction]
#[pyo3(signature = (family, transmissivity, phi = 0.0, nbar = 0.0))]
fn prepare_state(family: &str, transmissivity: f64, phi: f64, nbar: f64) -> PyResult<Vec<Vec<Complex64>>> {
    let f = family_of(family)?;
    let bs = BeamsplitterParams::new(transmissivity, phi).map_err(err)?;
    let rho = channels::prepare_state(&f, &bs, nbar).map_err(err)?;
    let m = rho.matrix();
    Ok((0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect())
}

/// Expectation values of `space` on the processed family state.
#[pyfunction]
#[pyo3(signature = (family, space, transmissivity, phi = 0.0, nbar = 0.0))]
fn family_expectations(family: &str, space: &str, transmissivity: f64, phi: f64, nbar: f64) -> PyResult<Vec<f64>> {
    let f = family_of(family)?;
    let s = space_of(space)?;
    let bs = BeamsplitterParams::new(transmissivity, phi).map_err(err)?;
    let rho = channels::prepare_state(&f, &bs, nbar).map_err(err)?;
    let rho = rho.resized(rho.dim().max(s.default_dim()));
    Ok(cohwit::fock::expectations(&rho, &s).map_err(err)?.values().to_vec())
}

/// Closed-form `(P_0..P_J, X_01..X_{J,J+1})` of the thermalized zero-one family.
#[pyfunction]
fn thermal_closed_form_01(transmissivity: f64, phi: f64, nbar: f64, j_max: usize) -> PyResult<Vec<(String, f64)>> {
    let bs = BeamsplitterParams::new(transmissivity, phi).map_err(err)?;
    let v = channels::thermal_closed_form_01(&bs, nbar, j_max).map_err(err)?;
    Ok(v.space().iter().map(|o| o.to_string()).zip(v.values().iter().copied()).collect())
}

/// Critical transmissivity (or `nbar` when `vary="nbar"`) of the verdict flip.
#[pyfunction]
#[pyo3(signature = (family, space, vary = "T", fixed = 0.0, lo = 0.0, hi = 1.0, resolution = 1e-3))]
fn find_threshold(
    family: &str,
    space: &str,
    vary: &str,
    fixed: f64,
    lo: f64,
    hi: f64,
    resolution: f64,
) -> PyResult<f64> {
    let f = family_of(family)?;
    let s = space_of(space)?;
    let path = match vary {
        "T" | "t" => ParameterPath::Transmissivity { nbar: fixed, range: (lo, hi) },
        "nbar" => ParameterPath::Thermal { transmissivity: fixed, range: (lo, hi) },
        other => return Err(PyValueError::new_err(format!("vary must be 'T' or 'nbar', got '{other}'"))),
    };
    let r = certify::find_threshold(&f, &s, &path, resolution, &ClassifyOptions::default()).map_err(err)?;
    Ok(r.critical)
}

#[pymodule]
#[pyo3(name = "cohwit")]
fn cohwit_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("CohwitError", m.py().get_type::<CohwitError>())?;
    m.add_class::<ObservableSpace>()?;
    m.add_class::<Classification>()?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(classical_coherence_bound, m)?)?;
    m.add_function(wrap_pyfunction!(classical_x01_bound_given_p0, m)?)?;
    m.add_function(wrap_pyfunction!(quantum_r_bound_given_pj, m)?)?;
    m.add_function(wrap_pyfunction!(coherent_expectation, m)?)?;
    m.add_function(wrap_pyfunction!(support_classical, m)?)?;
    m.add_function(wrap_pyfunction!(support_quantum, m)?)?;
    m.add_function(wrap_pyfunction!(prepare_state, m)?)?;
    m.add_function(wrap_pyfunction!(family_expectations, m)?)?;
    m.add_function(wrap_pyfunction!(thermal_closed_form_01, m)?)?;
    m.add_function(wrap_pyfunction!(find_threshold, m)?)?;
    Ok(())
}
