//! Python bindings: the corrected chi-square goodness-of-fit library as an
//! extension module. Wraps the core types 1:1 and maps errors onto
//! ValueError (bad inputs) and RuntimeError (numeric or validity refusals).

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyModule;

fn to_py_err(err: gofcorr::Error) -> PyErr {
    use gofcorr::Error::*;
    match err {
        Validity { .. } | NoRootInBracket | ConvergenceFailure(_) => {
            PyRuntimeError::new_err(err.to_string())
        }
        _ => PyValueError::new_err(err.to_string()),
    }
}

trait IntoPyResult<T> {
    fn into_py(self) -> PyResult<T>;
}

impl<T> IntoPyResult<T> for Result<T, gofcorr::Error> {
    fn into_py(self) -> PyResult<T> {
        self.map_err(to_py_err)
    }
}

/// Hypothesized category probabilities and the sample size n.
#[pyclass(name = "CategoryModel", frozen)]
struct PyCategoryModel {
    inner: gofcorr::CategoryModel,
}

#[pymethods]
impl PyCategoryModel {
    /// Build a model from probabilities and the number of draws. The
    /// probabilities are normalized if they sum to within 1e-6 of 1.
    #[new]
    fn new(probs: Vec<f64>, n: u64) -> PyResult<Self> {
        Ok(Self {
            inner: gofcorr::CategoryModel::new_lenient(&probs, n).into_py()?,
        })
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k()
    }

    #[getter]
    fn n(&self) -> u64 {
        self.inner.n()
    }

    #[getter]
    fn probs(&self) -> Vec<f64> {
        self.inner.probs().to_vec()
    }

    /// The correction coefficients for this model.
    fn coefficients(&self) -> PyCoefficients {
        PyCoefficients {
            inner: gofcorr::coefficients(&self.inner),
        }
    }

    /// Pearson statistic for observed counts (must sum to n).
    fn t_statistic(&self, counts: Vec<u64>) -> PyResult<f64> {
        let obs = gofcorr::ObservedCounts::new(&counts).into_py()?;
        gofcorr::t_statistic(&self.inner, &obs).into_py()
    }

    fn __repr__(&self) -> String {
        format!("CategoryModel(k={}, n={})", self.inner.k(), self.inner.n())
    }
}

/// The 1/n correction coefficients B and C with their validity verdict.
#[pyclass(name = "CorrectionCoefficients", frozen)]
struct PyCoefficients {
    inner: gofcorr::CorrectionCoefficients,
}

#[pymethods]
impl PyCoefficients {
    #[getter]
    fn b(&self) -> f64 {
        self.inner.b
    }

    #[getter]
    fn c(&self) -> f64 {
        self.inner.c
    }

    /// Sum of reciprocal probabilities.
    #[getter]
    fn q(&self) -> f64 {
        self.inner.q
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k
    }

    #[getter]
    fn n(&self) -> u64 {
        self.inner.n
    }

    /// 0.15 k, the bound both |B| and |C| must respect.
    #[getter]
    fn threshold(&self) -> f64 {
        self.inner.threshold
    }

    #[getter]
    fn valid(&self) -> bool {
        self.inner.valid
    }

    fn __repr__(&self) -> String {
        format!(
            "CorrectionCoefficients(B={}, C={}, valid={})",
            self.inner.b,
            self.inner.c,
            if self.inner.valid { "True" } else { "False" }
        )
    }
}

/// The corrected chi-square distribution of the Pearson statistic.
#[pyclass(name = "CorrectedDistribution", frozen)]
struct PyCorrectedDistribution {
    inner: gofcorr::CorrectedDistribution,
}

#[pymethods]
impl PyCorrectedDistribution {
    #[new]
    fn new(k: usize, b: f64, c: f64) -> PyResult<Self> {
        Ok(Self {
            inner: gofcorr::CorrectedDistribution::new(k, b, c).into_py()?,
        })
    }

    /// The corrected distribution implied by a model's coefficients.
    #[staticmethod]
    fn from_model(model: &PyCategoryModel) -> PyResult<Self> {
        let co = gofcorr::coefficients(&model.inner);
        Ok(Self {
            inner: gofcorr::CorrectedDistribution::from_coefficients(&co).into_py()?,
        })
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k()
    }

    #[getter]
    fn b(&self) -> f64 {
        self.inner.b()
    }

    #[getter]
    fn c(&self) -> f64 {
        self.inner.c()
    }

    #[getter]
    fn dof(&self) -> usize {
        self.inner.dof()
    }

    /// Corrected density at t. May be negative outside the trust region.
    fn pdf(&self, t: f64) -> PyResult<f64> {
        self.inner.pdf(t).into_py()
    }

    /// Corrected distribution function at u (unclamped).
    fn cdf(&self, u: f64) -> PyResult<f64> {
        self.inner.cdf(u).into_py()
    }

    /// Right-tail p-value at the observed statistic, clamped into [0, 1].
    fn pvalue(&self, t: f64) -> PyResult<f64> {
        self.inner.pvalue(t).into_py()
    }

    /// Corrected critical value at significance alpha. Raises RuntimeError
    /// outside the validity region unless force is true.
    #[pyo3(signature = (alpha, force = false))]
    fn critical(&self, alpha: f64, force: bool) -> PyResult<f64> {
        self.inner.critical(alpha, force).into_py()
    }

    fn __repr__(&self) -> String {
        format!(
            "CorrectedDistribution(k={}, B={}, C={})",
            self.inner.k(),
            self.inner.b(),
            self.inner.c()
        )
    }
}

/// Plain chi-square distribution with integer degrees of freedom.
#[pyclass(name = "ChiSquare", frozen)]
struct PyChiSquare {
    inner: gofcorr::ChiSquare,
}

#[pymethods]
impl PyChiSquare {
    #[new]
    fn new(dof: usize) -> PyResult<Self> {
        Ok(Self {
            inner: gofcorr::ChiSquare::new(dof).into_py()?,
        })
    }

    fn pdf(&self, t: f64) -> PyResult<f64> {
        self.inner.pdf(t).into_py()
    }

    fn cdf(&self, u: f64) -> PyResult<f64> {
        self.inner.cdf(u).into_py()
    }

    /// Survival function 1 - cdf(u).
    fn sf(&self, u: f64) -> PyResult<f64> {
        self.inner.sf(u).into_py()
    }

    fn quantile(&self, q: f64) -> PyResult<f64> {
        self.inner.quantile(q).into_py()
    }

    fn __repr__(&self) -> String {
        format!("ChiSquare(dof={})", self.inner.dof())
    }
}

/// Everything a goodness-of-fit run reports.
#[pyclass(name = "TestReport", frozen)]
struct PyTestReport {
    inner: gofcorr::TestReport,
}

#[pymethods]
impl PyTestReport {
    #[getter]
    fn t_value(&self) -> f64 {
        self.inner.t_value
    }

    #[getter]
    fn dof(&self) -> usize {
        self.inner.dof
    }

    #[getter]
    fn p_plain(&self) -> f64 {
        self.inner.p_plain
    }

    #[getter]
    fn p_corrected(&self) -> f64 {
        self.inner.p_corrected
    }

    #[getter]
    fn b(&self) -> f64 {
        self.inner.b
    }

    #[getter]
    fn c(&self) -> f64 {
        self.inner.c
    }

    #[getter]
    fn validity(&self) -> bool {
        self.inner.validity
    }

    #[getter]
    fn warnings(&self) -> Vec<String> {
        self.inner.warnings.clone()
    }

    fn __repr__(&self) -> String {
        format!(
            "TestReport(t={}, dof={}, p_plain={}, p_corrected={})",
            self.inner.t_value, self.inner.dof, self.inner.p_plain, self.inner.p_corrected
        )
    }
}

/// Exact distribution of the statistic from full enumeration.
#[pyclass(name = "ExactDistribution", frozen)]
struct PyExactDistribution {
    inner: gofcorr::ExactDistribution,
}

#[pymethods]
impl PyExactDistribution {
    /// The support as (t, probability) pairs, t ascending.
    fn atoms(&self) -> Vec<(f64, f64)> {
        self.inner.atoms().to_vec()
    }

    #[getter]
    fn atom_count(&self) -> usize {
        self.inner.atom_count()
    }

    fn cdf(&self, u: f64) -> f64 {
        self.inner.cdf(u)
    }

    fn mean(&self) -> f64 {
        self.inner.mean()
    }

    fn __repr__(&self) -> String {
        format!("ExactDistribution(atoms={})", self.inner.atom_count())
    }
}

/// Sorted simulated values of the statistic.
#[pyclass(name = "EmpiricalDistribution", frozen)]
struct PyEmpiricalDistribution {
    inner: gofcorr::EmpiricalDistribution,
}

#[pymethods]
impl PyEmpiricalDistribution {
    #[getter]
    fn sample_count(&self) -> u64 {
        self.inner.sample_count()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed()
    }

    /// Fraction of simulated values at or below u.
    fn cdf(&self, u: f64) -> f64 {
        self.inner.cdf(u)
    }

    fn mean(&self) -> f64 {
        self.inner.mean()
    }

    /// All simulated values, ascending. A large list for large runs.
    fn values(&self) -> Vec<f64> {
        self.inner.sorted_t().to_vec()
    }

    fn __repr__(&self) -> String {
        format!(
            "EmpiricalDistribution(samples={}, seed={})",
            self.inner.sample_count(),
            self.inner.seed()
        )
    }
}

/// How the plain and corrected approximations each fit a simulation.
#[pyclass(name = "ComparisonReport", frozen)]
struct PyComparisonReport {
    inner: gofcorr::ComparisonReport,
}

#[pymethods]
impl PyComparisonReport {
    #[getter]
    fn sup_dist_plain(&self) -> f64 {
        self.inner.sup_dist_plain
    }

    #[getter]
    fn sup_dist_corrected(&self) -> f64 {
        self.inner.sup_dist_corrected
    }

    /// Rows of (alpha, plain_rate, corrected_rate).
    #[getter]
    fn tail_errors(&self) -> Vec<(f64, f64, f64)> {
        self.inner
            .tail_errors
            .iter()
            .map(|te| (te.alpha, te.plain_rate, te.corrected_rate))
            .collect()
    }

    #[getter]
    fn grid(&self) -> Vec<f64> {
        self.inner.grid.clone()
    }

    fn coefficients(&self) -> PyCoefficients {
        PyCoefficients {
            inner: self.inner.coefficients,
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "ComparisonReport(sup_plain={}, sup_corrected={})",
            self.inner.sup_dist_plain, self.inner.sup_dist_corrected
        )
    }
}

/// Run the corrected goodness-of-fit test.
#[pyfunction]
#[pyo3(signature = (model, counts, alpha = 0.05))]
fn run_test(model: &PyCategoryModel, counts: Vec<u64>, alpha: f64) -> PyResult<PyTestReport> {
    let obs = gofcorr::ObservedCounts::new(&counts).into_py()?;
    Ok(PyTestReport {
        inner: gofcorr::run_test(&model.inner, &obs, alpha).into_py()?,
    })
}

/// Enumerate the exact distribution (guarded at 1e7 count vectors).
#[pyfunction]
fn enumerate_exact(model: &PyCategoryModel) -> PyResult<PyExactDistribution> {
    Ok(PyExactDistribution {
        inner: gofcorr::enumerate_exact(&model.inner).into_py()?,
    })
}

/// Simulate the statistic; output is a pure function of (model, samples,
/// seed), independent of workers.
#[pyfunction]
#[pyo3(signature = (model, samples, seed = 0, workers = 1))]
fn simulate(
    model: &PyCategoryModel,
    samples: u64,
    seed: u64,
    workers: usize,
) -> PyResult<PyEmpiricalDistribution> {
    Ok(PyEmpiricalDistribution {
        inner: gofcorr::simulate(&model.inner, samples, seed, workers).into_py()?,
    })
}

/// Compare both approximations against a simulation.
#[pyfunction]
fn compare(
    empirical: &PyEmpiricalDistribution,
    model: &PyCategoryModel,
) -> PyResult<PyComparisonReport> {
    Ok(PyComparisonReport {
        inner: gofcorr::compare(&empirical.inner, &model.inner).into_py()?,
    })
}

/// Density histogram of a simulation: (bin_center, density) rows.
#[pyfunction]
fn histogram(
    empirical: &PyEmpiricalDistribution,
    bins: usize,
    upper: f64,
) -> PyResult<Vec<(f64, f64)>> {
    gofcorr::histogram(&empirical.inner, bins, upper).into_py()
}

/// k equal probabilities.
#[pyfunction]
fn uniform_probs(k: usize) -> PyResult<Vec<f64>> {
    gofcorr::presets::uniform(k).into_py()
}

/// k probabilities in geometric progression with last/first = ratio.
#[pyfunction]
fn geometric_probs(k: usize, ratio: f64) -> PyResult<Vec<f64>> {
    gofcorr::presets::geometric(k, ratio).into_py()
}

/// Named demonstration regime (fig1..fig4), or raise ValueError.
#[pyfunction]
fn figure_regime(name: &str) -> PyResult<PyCategoryModel> {
    gofcorr::presets::figure_regime(name)
        .map(|inner| PyCategoryModel { inner })
        .ok_or_else(|| PyValueError::new_err(format!("unknown regime '{name}'")))
}

/// Round to 12 significant decimal digits (the output canonicalization).
#[pyfunction]
fn sig12(x: f64) -> f64 {
    gofcorr::sig12(x)
}

#[pymodule]
fn gofcorr_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCategoryModel>()?;
    m.add_class::<PyCoefficients>()?;
    m.add_class::<PyCorrectedDistribution>()?;
    m.add_class::<PyChiSquare>()?;
    m.add_class::<PyTestReport>()?;
    m.add_class::<PyExactDistribution>()?;
    m.add_class::<PyEmpiricalDistribution>()?;
    m.add_class::<PyComparisonReport>()?;
    m.add_function(wrap_pyfunction!(run_test, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_exact, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(histogram, m)?)?;
    m.add_function(wrap_pyfunction!(uniform_probs, m)?)?;
    m.add_function(wrap_pyfunction!(geometric_probs, m)?)?;
    m.add_function(wrap_pyfunction!(figure_regime, m)?)?;
    m.add_function(wrap_pyfunction!(sig12, m)?)?;
    Ok(())
}
