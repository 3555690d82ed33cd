//! Python bindings. Matrices cross the boundary as lists of rows.

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

use costdr::classify;
use costdr::costmodel;
use costdr::datagen::{self, GenerativeSpec, RngSeed};
use costdr::experiment::{self, ExperimentConfig};
use costdr::linalg::{self, Matrix};
use costdr::reducers::{self, Method};
use costdr::scatter::Dataset;

fn py_err(e: costdr::Error) -> PyErr {
    match e {
        costdr::Error::Io { .. } => PyOSError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn matrix(rows: &[Vec<f64>]) -> PyResult<Matrix> {
    if rows.is_empty() {
        return Err(PyValueError::new_err("matrix must have at least one row"));
    }
    Matrix::from_rows(rows).map_err(py_err)
}

fn dataset(features: &[Vec<f64>], labels: Vec<usize>, class_count: Option<usize>) -> PyResult<Dataset> {
    let k = class_count.unwrap_or_else(|| labels.iter().max().map_or(0, |m| m + 1));
    Dataset::new(matrix(features)?, labels, k).map_err(py_err)
}

fn method(name: &str) -> PyResult<Method> {
    name.parse().map_err(py_err)
}

/// Misclassification costs, indexed `[true][predicted]`.
#[pyclass(name = "CostMatrix", module = "pycostdr", frozen)]
pub struct PyCostMatrix {
    inner: costmodel::CostMatrix,
}

#[pymethods]
impl PyCostMatrix {
    #[new]
    fn new(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(PyCostMatrix {
            inner: costmodel::CostMatrix::from_rows(&rows).map_err(py_err)?,
        })
    }

    #[staticmethod]
    fn uniform(class_count: usize) -> Self {
        PyCostMatrix {
            inner: costmodel::CostMatrix::uniform(class_count),
        }
    }

    /// The nine-class case-study cost matrix.
    #[staticmethod]
    fn case_study() -> Self {
        PyCostMatrix {
            inner: costmodel::CostMatrix::case_study(),
        }
    }

    #[staticmethod]
    fn read_csv(path: std::path::PathBuf) -> PyResult<Self> {
        Ok(PyCostMatrix {
            inner: costmodel::CostMatrix::read_csv(path).map_err(py_err)?,
        })
    }

    #[getter]
    fn class_count(&self) -> usize {
        self.inner.class_count()
    }

    fn get(&self, true_label: usize, predicted: usize) -> PyResult<f64> {
        let k = self.inner.class_count();
        if true_label >= k || predicted >= k {
            return Err(PyValueError::new_err(format!("index outside 0..{k}")));
        }
        Ok(self.inner.get(true_label, predicted))
    }

    fn scaled(&self, alpha: f64) -> PyResult<Self> {
        Ok(PyCostMatrix {
            inner: self.inner.scaled(alpha).map_err(py_err)?,
        })
    }

    fn rows(&self) -> Vec<Vec<f64>> {
        self.inner.to_rows()
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }

    fn __repr__(&self) -> String {
        format!("CostMatrix(class_count={})", self.inner.class_count())
    }
}

/// A fitted projection; `basis` columns are the basis vectors.
#[pyclass(name = "Projection", module = "pycostdr", frozen)]
pub struct PyProjection {
    inner: reducers::Projection,
}

#[pymethods]
impl PyProjection {
    #[getter]
    fn method(&self) -> &'static str {
        self.inner.method.as_str()
    }

    #[getter]
    fn eigenvalues(&self) -> Vec<f64> {
        self.inner.eigenvalues.clone()
    }

    #[getter]
    fn basis(&self) -> Vec<Vec<f64>> {
        self.inner.basis.to_rows()
    }

    #[getter]
    fn source_dim(&self) -> usize {
        self.inner.source_dim
    }

    #[getter]
    fn ridged(&self) -> bool {
        self.inner.ridged
    }

    fn basis_vector(&self, i: usize) -> PyResult<Vec<f64>> {
        if i >= self.inner.source_dim {
            return Err(PyValueError::new_err(format!("basis index {i} out of range")));
        }
        Ok(self.inner.basis_vector(i))
    }

    /// Projects rows of `features` onto the leading `dim` basis vectors.
    fn transform(&self, features: Vec<Vec<f64>>, dim: usize) -> PyResult<Vec<Vec<f64>>> {
        let x = matrix(&features)?;
        Ok(self.inner.project(&x, dim).map_err(py_err)?.to_rows())
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        let inner = reducers::Projection::parse(text, std::path::Path::new("<string>")).map_err(py_err)?;
        Ok(PyProjection { inner })
    }

    fn save(&self, path: std::path::PathBuf) -> PyResult<()> {
        self.inner.write(path).map_err(py_err)
    }

    #[staticmethod]
    fn load(path: std::path::PathBuf) -> PyResult<Self> {
        Ok(PyProjection {
            inner: reducers::Projection::read(path).map_err(py_err)?,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "Projection(method={:?}, source_dim={}, eigenvalues={:?})",
            self.inner.method.as_str(),
            self.inner.source_dim,
            self.inner.eigenvalues
        )
    }
}

/// Confusion counts, indexed `[true][predicted]`.
#[pyclass(name = "ConfusionMatrix", module = "pycostdr", frozen)]
pub struct PyConfusionMatrix {
    inner: classify::ConfusionMatrix,
}

#[pymethods]
impl PyConfusionMatrix {
    #[new]
    fn new(rows: Vec<Vec<u64>>) -> PyResult<Self> {
        Ok(PyConfusionMatrix {
            inner: classify::ConfusionMatrix::from_rows(&rows).map_err(py_err)?,
        })
    }

    fn rows(&self) -> Vec<Vec<u64>> {
        self.inner.to_rows()
    }

    #[getter]
    fn total(&self) -> u64 {
        self.inner.total()
    }

    #[getter]
    fn correct(&self) -> u64 {
        self.inner.correct()
    }

    fn total_cost(&self, costs: PyRef<'_, PyCostMatrix>) -> PyResult<f64> {
        costmodel::total_cost(&self.inner, &costs.inner).map_err(py_err)
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }
}

/// Majority-vote k-nearest-neighbour classifier.
#[pyclass(name = "KnnClassifier", module = "pycostdr", frozen)]
pub struct PyKnn {
    inner: classify::KnnModel,
}

#[pymethods]
impl PyKnn {
    #[new]
    #[pyo3(signature = (features, labels, k = 5, class_count = None))]
    fn new(
        features: Vec<Vec<f64>>,
        labels: Vec<usize>,
        k: usize,
        class_count: Option<usize>,
    ) -> PyResult<Self> {
        let kc = class_count.unwrap_or_else(|| labels.iter().max().map_or(0, |m| m + 1));
        let inner = classify::KnnModel::new(matrix(&features)?, labels, kc, k).map_err(py_err)?;
        Ok(PyKnn { inner })
    }

    fn predict(&self, features: Vec<Vec<f64>>) -> PyResult<Vec<usize>> {
        self.inner.predict_all(&matrix(&features)?).map_err(py_err)
    }

    fn confusion(&self, features: Vec<Vec<f64>>, labels: Vec<usize>) -> PyResult<PyConfusionMatrix> {
        let test = dataset(&features, labels, Some(self.inner.class_count()))?;
        Ok(PyConfusionMatrix {
            inner: self.inner.confusion(&test).map_err(py_err)?,
        })
    }
}

/// Fits `method` ("pca", "lda" or "cost-informed") to labelled data.
#[pyfunction]
#[pyo3(signature = (method_name, features, labels, costs = None, class_count = None))]
fn fit(
    method_name: &str,
    features: Vec<Vec<f64>>,
    labels: Vec<usize>,
    costs: Option<PyRef<'_, PyCostMatrix>>,
    class_count: Option<usize>,
) -> PyResult<PyProjection> {
    let m = method(method_name)?;
    let k = class_count.or(costs.as_ref().map(|c| c.inner.class_count()));
    let data = dataset(&features, labels, k)?;
    let inner = reducers::fit(m, &data, costs.as_ref().map(|c| &c.inner)).map_err(py_err)?;
    Ok(PyProjection { inner })
}

/// Eigenvalues (descending) and eigenvectors (as columns) of a symmetric matrix.
#[pyfunction]
fn eig_symmetric(a: Vec<Vec<f64>>) -> PyResult<(Vec<f64>, Vec<Vec<f64>>)> {
    let e = linalg::eig_symmetric(&matrix(&a)?).map_err(py_err)?;
    Ok((e.eigenvalues, e.eigenvectors.to_rows()))
}

/// Solves `B v = λ M v` for symmetric `B` and positive-definite `M`.
#[pyfunction]
fn eig_generalized(b: Vec<Vec<f64>>, m: Vec<Vec<f64>>) -> PyResult<(Vec<f64>, Vec<Vec<f64>>)> {
    let e = linalg::eig_generalized(&matrix(&b)?, &matrix(&m)?).map_err(py_err)?;
    Ok((e.eigenvalues, e.eigenvectors.to_rows()))
}

/// One case-study dataset: `(features, labels)`.
#[pyfunction]
#[pyo3(signature = (points_per_class = 100, iw_scale = 0.15, iw_dof = 8.0, seed = 0, replication = 0))]
fn generate(
    points_per_class: usize,
    iw_scale: f64,
    iw_dof: f64,
    seed: u64,
    replication: u64,
) -> PyResult<(Vec<Vec<f64>>, Vec<usize>)> {
    let spec = GenerativeSpec::case_study(points_per_class, iw_scale, iw_dof);
    let (data, _) = datagen::generate_replication(&spec, &RngSeed::new(seed), replication).map_err(py_err)?;
    Ok((data.features().to_rows(), data.labels().to_vec()))
}

type Rows = Vec<Vec<f64>>;
type ResultRows = Vec<(usize, String, usize, f64)>;
type Summary<'py> = Vec<Bound<'py, pyo3::types::PyDict>>;

type Split = ((Rows, Vec<usize>), (Rows, Vec<usize>));

/// Stratified train/test split with the experiment's seeding for `replication`.
#[pyfunction]
#[pyo3(signature = (features, labels, per_class_train, seed = 0, replication = 0))]
fn split(
    features: Vec<Vec<f64>>,
    labels: Vec<usize>,
    per_class_train: usize,
    seed: u64,
    replication: u64,
) -> PyResult<Split> {
    let data = dataset(&features, labels, None)?;
    let mut rng = datagen::split_seed(&RngSeed::new(seed), replication).rng();
    let (train, test) = datagen::stratified_split(&data, per_class_train, &mut rng).map_err(py_err)?;
    Ok((
        (train.features().to_rows(), train.labels().to_vec()),
        (test.features().to_rows(), test.labels().to_vec()),
    ))
}

/// Runs the replicated comparison. Returns `(results, summary)`: results
/// as `(replication, method, dim, total_cost)` rows, summary as one dict
/// per `(method, dim)` cell.
#[pyfunction]
#[pyo3(signature = (
    replications = 500,
    seed = 0,
    per_class_train = 50,
    knn_k = 5,
    dims = vec![1, 2, 3],
    methods = None,
    costs = None,
    points_per_class = 100,
    threads = None,
))]
#[allow(clippy::too_many_arguments)]
fn run_experiment<'py>(
    py: Python<'py>,
    replications: usize,
    seed: u64,
    per_class_train: usize,
    knn_k: usize,
    dims: Vec<usize>,
    methods: Option<Vec<String>>,
    costs: Option<PyRef<'py, PyCostMatrix>>,
    points_per_class: usize,
    threads: Option<usize>,
) -> PyResult<(ResultRows, Summary<'py>)> {
    let mut cfg = ExperimentConfig {
        replications,
        root_seed: seed,
        per_class_train,
        knn_k,
        dims,
        generative: GenerativeSpec::case_study(points_per_class, 0.15, 8.0),
        ..ExperimentConfig::default()
    };
    if let Some(m) = methods {
        cfg.methods = m.iter().map(|s| method(s)).collect::<PyResult<_>>()?;
    }
    if let Some(c) = costs {
        cfg.cost_matrix = c.inner.clone();
    }
    let outcome = py.detach(|| match threads {
        Some(t) => experiment::run_experiment_with_threads(&cfg, t),
        None => experiment::run_experiment(&cfg),
    });
    let (results, summary) = outcome.map_err(py_err)?;

    let rows = results
        .iter()
        .flat_map(|r| {
            r.cells
                .iter()
                .map(move |c| (r.id, c.method.as_str().to_string(), c.dim, c.total_cost))
        })
        .collect();
    let mut entries = Vec::new();
    for ((m, d), e) in &summary.entries {
        let dict = pyo3::types::PyDict::new(py);
        dict.set_item("method", m.as_str())?;
        dict.set_item("dim", d)?;
        dict.set_item("min", e.min)?;
        dict.set_item("q1", e.q1)?;
        dict.set_item("median", e.median)?;
        dict.set_item("q3", e.q3)?;
        dict.set_item("max", e.max)?;
        dict.set_item("mean", e.mean)?;
        dict.set_item("outliers", e.outliers.clone())?;
        entries.push(dict);
    }
    Ok((rows, entries))
}

#[pymodule]
fn pycostdr(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCostMatrix>()?;
    m.add_class::<PyProjection>()?;
    m.add_class::<PyConfusionMatrix>()?;
    m.add_class::<PyKnn>()?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(eig_symmetric, m)?)?;
    m.add_function(wrap_pyfunction!(eig_generalized, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(split, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
