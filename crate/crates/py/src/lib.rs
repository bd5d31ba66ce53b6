//! Python bindings. Rationals cross the boundary as `fractions.Fraction`,
//! structured results as plain dicts and lists.

use num_bigint::BigInt;
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use latkit::catalog;
use latkit::glue;
use latkit::harness;
use latkit::json::LatticeJson;
use latkit::linalg::RationalMatrix;
use latkit::{Isometry, IsometrySpec, Rational};

create_exception!(latkit, LatticeError, PyValueError);

fn err(e: latkit::LatticeError) -> PyErr {
    LatticeError::new_err(e.to_string())
}

fn fraction<'py>(py: Python<'py>, x: &Rational) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?.getattr("Fraction")?.call1((x.to_string(),))
}

fn matrix<'py>(py: Python<'py>, m: &RationalMatrix) -> PyResult<Vec<Vec<Bound<'py, PyAny>>>> {
    m.row_vecs()
        .iter()
        .map(|r| r.iter().map(|x| fraction(py, x)).collect())
        .collect()
}

fn from_json<'py>(py: Python<'py>, value: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (value.to_string(),))
}

/// An integral-or-rational lattice given by a basis and an ambient form.
#[pyclass(name = "Lattice", module = "latkit", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyLattice {
    inner: latkit::Lattice,
}

impl From<latkit::Lattice> for PyLattice {
    fn from(inner: latkit::Lattice) -> Self {
        Self { inner }
    }
}

#[pymethods]
impl PyLattice {
    /// A catalog lattice such as `"D4"`, `"sqrt2*E8"` or `"A3+A1^2"`.
    #[staticmethod]
    fn named(name: &str) -> PyResult<Self> {
        catalog::parse(name).map(Into::into).map_err(err)
    }

    #[staticmethod]
    fn from_gram(gram: Vec<Vec<i64>>) -> PyResult<Self> {
        latkit::Lattice::from_gram(&RationalMatrix::from_i64(&gram)).map(Into::into).map_err(err)
    }

    /// Basis rows under the standard inner product.
    #[staticmethod]
    fn from_basis(basis: Vec<Vec<i64>>) -> PyResult<Self> {
        latkit::Lattice::new(RationalMatrix::from_i64(&basis)).map(Into::into).map_err(err)
    }

    /// The lattice JSON object, rationals as integers or `"p/q"` strings.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let j: LatticeJson = serde_json::from_str(text).map_err(|e| LatticeError::new_err(e.to_string()))?;
        j.to_lattice().map(Into::into).map_err(err)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&LatticeJson::from_lattice(&self.inner)).map_err(|e| LatticeError::new_err(e.to_string()))
    }

    #[getter]
    fn rank(&self) -> usize {
        self.inner.rank()
    }

    #[getter]
    fn name(&self) -> Option<String> {
        self.inner.name().map(str::to_owned)
    }

    fn gram<'py>(&self, py: Python<'py>) -> PyResult<Vec<Vec<Bound<'py, PyAny>>>> {
        matrix(py, self.inner.gram())
    }

    fn basis<'py>(&self, py: Python<'py>) -> PyResult<Vec<Vec<Bound<'py, PyAny>>>> {
        matrix(py, self.inner.basis())
    }

    fn det<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        fraction(py, &self.inner.determinant())
    }

    fn smith(&self) -> PyResult<Vec<BigInt>> {
        harness::smith_invariants(&self.inner).map_err(err)
    }

    fn discriminant_orders(&self) -> PyResult<Vec<BigInt>> {
        self.inner.discriminant_group().map(|d| d.orders).map_err(err)
    }

    fn is_integral(&self) -> bool {
        self.inner.is_integral()
    }

    fn is_even(&self) -> bool {
        self.inner.is_even()
    }

    fn minimal_norm<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        fraction(py, &self.inner.minimal_vectors().map_err(err)?.norm)
    }

    /// Minimal vectors in basis coordinates.
    fn minimal_vectors(&self) -> PyResult<Vec<Vec<i64>>> {
        self.inner.minimal_vectors().map(|m| m.vectors).map_err(err)
    }

    fn hermite_check(&self) -> PyResult<bool> {
        self.inner.hermite_check().map_err(err)
    }

    fn dual(&self) -> PyResult<Self> {
        self.inner.dual().map(Into::into).map_err(err)
    }

    fn even_sublattice(&self) -> PyResult<Self> {
        self.inner.even_sublattice().map(Into::into).map_err(err)
    }

    /// Multiplies the form by `factor`, e.g. `2` for the `√2`-rescaling.
    fn rescale(&self, factor: i64) -> PyResult<Self> {
        self.inner.rescale(&Rational::from_integer(factor.into())).map(Into::into).map_err(err)
    }

    fn tensor(&self, other: &PyLattice) -> Self {
        self.inner.tensor(&other.inner).into()
    }

    fn orthogonal_sum(&self, other: &PyLattice) -> Self {
        self.inner.orthogonal_sum(&other.inner).into()
    }

    /// `{"verdict": ..., "certificate": [[...]] | None}`.
    fn identify<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let id = catalog::identify(&self.inner).map_err(err)?;
        let verdict = match &id.verdict {
            catalog::Verdict::Named(n) => serde_json::json!({ "named": n }),
            catalog::Verdict::Rectangular(d) => {
                serde_json::json!({ "rectangular": d.iter().map(ToString::to_string).collect::<Vec<_>>() })
            }
            catalog::Verdict::Unknown => serde_json::json!("unknown"),
        };
        let out = serde_json::json!({
            "verdict": verdict,
            "certificate": id.certificate.as_ref().map(latkit::json::matrix_to_json),
            "revalidated": id.revalidate(&self.inner),
        });
        from_json(py, &out)
    }

    /// Integral overlattices of the given index.
    fn overlattices(&self, index: u64) -> PyResult<Vec<PyLattice>> {
        glue::integral_overlattice_search(&self.inner, index)
            .map(|plans| plans.into_iter().map(|p| p.result.into()).collect())
            .map_err(err)
    }

    fn __repr__(&self) -> String {
        match self.inner.name() {
            Some(n) => format!("Lattice({n}, rank {})", self.inner.rank()),
            None => format!("Lattice(rank {}, det {})", self.inner.rank(), self.inner.determinant()),
        }
    }
}

/// `K = M + N` together with `M`, `N` and the ambient `L ⊥ L`.
#[pyclass(name = "PairSum", module = "latkit", frozen)]
pub struct PyPairSum {
    inner: latkit::PairSumResult,
}

#[pymethods]
impl PyPairSum {
    #[getter]
    fn k(&self) -> PyLattice {
        self.inner.k.clone().into()
    }

    #[getter]
    fn m(&self) -> PyLattice {
        self.inner.m.clone().into()
    }

    #[getter]
    fn n(&self) -> PyLattice {
        self.inner.n.clone().into()
    }

    #[getter]
    fn ambient(&self) -> PyLattice {
        self.inner.ambient.clone().into()
    }

    #[getter]
    fn index_in_ambient(&self) -> BigInt {
        self.inner.index_in_ambient.clone()
    }
}

/// Pair-sum of `lattice` and the isometry described by a JSON spec such as
/// `'{"kind": "perm", "cycles": [[1, 2, 3]]}'`.
#[pyfunction]
fn pair_sum(lattice: &PyLattice, spec: &str) -> PyResult<PyPairSum> {
    let spec: IsometrySpec = serde_json::from_str(spec).map_err(|e| LatticeError::new_err(e.to_string()))?;
    let h = Isometry::from_spec(&lattice.inner, &spec).map_err(err)?;
    latkit::pair_sum(&lattice.inner, &h).map(|inner| PyPairSum { inner }).map_err(err)
}

/// Certificate `X` with `X·G_b·Xᵀ = G_a`, or `None`.
#[pyfunction]
fn isometric<'py>(py: Python<'py>, a: &PyLattice, b: &PyLattice) -> PyResult<Option<Vec<Vec<Bound<'py, PyAny>>>>> {
    catalog::isometric(&a.inner, &b.inner)
        .map_err(err)?
        .map(|x| matrix(py, &x))
        .transpose()
}

/// Runs the fixture cases of one section (or `"all"`) and returns the report.
#[pyfunction]
#[pyo3(signature = (section = "all"))]
fn reproduce<'py>(py: Python<'py>, section: &str) -> PyResult<Bound<'py, PyAny>> {
    let cases = harness::load_fixtures().map_err(err)?;
    let selected = harness::select(&cases, section).map_err(err)?;
    let report = py.detach(|| harness::run_fixtures(&selected, None));
    let value = serde_json::to_value(&report).map_err(|e| LatticeError::new_err(e.to_string()))?;
    from_json(py, &value)
}

#[pymodule]
#[pyo3(name = "latkit")]
fn latkit_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("LatticeError", m.py().get_type::<LatticeError>())?;
    m.add_class::<PyLattice>()?;
    m.add_class::<PyPairSum>()?;
    m.add_function(wrap_pyfunction!(pair_sum, m)?)?;
    m.add_function(wrap_pyfunction!(isometric, m)?)?;
    m.add_function(wrap_pyfunction!(reproduce, m)?)?;
    Ok(())
}
