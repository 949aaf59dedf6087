//! Python bindings. Build with `maturin develop` from `crates/py`.

use noiseless_core::adversary::{bound_for_plan, plan_for};
use noiseless_core::binomial::{binomial_delta_given_eps, binomial_eps_given_delta, BinomialCase};
use noiseless_core::config::parse_config;
use noiseless_core::curves::{emit_curve, CurveParams, Figure};
use noiseless_core::dependent::{dependent_bound as stein_bound, DependentAggregate};
use noiseless_core::independent::{independent_bound as be_bound, IndependentAggregate};
use noiseless_core::oracle::mc::mc_estimate_delta;
use noiseless_core::oracle::{exact_np_delta, exact_sum_pmf};
use noiseless_core::plan::{plan as run_plan, PlanInput, Target};
use noiseless_core::synergy;
use noiseless_core::{
    AdversaryModel, BerryEsseenConstant, BoundConstants, DataVectorSpec, DependencyBlock,
    DistributionSpec, Family, PrivacyBound, SteinConstant,
};
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

create_exception!(noiseless, NoiselessError, PyValueError);

fn err(e: noiseless_core::Error) -> PyErr {
    NoiselessError::new_err(e.to_string())
}

fn constants(be_constant: f64, stein_k: u32) -> PyResult<BoundConstants> {
    let berry_esseen = if be_constant == 1.12 {
        BerryEsseenConstant::Rounded
    } else if be_constant == 1.1182 {
        BerryEsseenConstant::Tight
    } else {
        return Err(PyValueError::new_err("be_constant must be 1.12 or 1.1182"));
    };
    let stein = match stein_k {
        28 => SteinConstant::K28,
        26 => SteinConstant::K26,
        _ => return Err(PyValueError::new_err("stein_k must be 26 or 28")),
    };
    Ok(BoundConstants { berry_esseen, stein })
}

/// Law of one record group (`count` i.i.d. copies).
#[pyclass(frozen, skip_from_py_object, name = "Distribution", module = "noiseless")]
#[derive(Clone)]
pub struct PyDistribution {
    inner: DistributionSpec,
}

#[pymethods]
impl PyDistribution {
    #[staticmethod]
    #[pyo3(signature = (p, count = 1))]
    fn bernoulli(p: f64, count: u64) -> PyResult<Self> {
        let inner = DistributionSpec::bernoulli(p, count).map_err(err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (values, probs, count = 1))]
    fn discrete(values: Vec<f64>, probs: Vec<f64>, count: u64) -> PyResult<Self> {
        if values.len() != probs.len() {
            return Err(PyValueError::new_err("values and probs differ in length"));
        }
        let support = values.into_iter().zip(probs).collect();
        let inner = DistributionSpec::discrete(support, count).map_err(err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (mean, variance, abs_third, fourth = None, support_bounds = None, count = 1))]
    fn moments(
        mean: f64,
        variance: f64,
        abs_third: f64,
        fourth: Option<f64>,
        support_bounds: Option<(f64, f64)>,
        count: u64,
    ) -> PyResult<Self> {
        let family = Family::Moments {
            mean,
            variance,
            abs_third,
            fourth,
            bounds: support_bounds,
        };
        let inner = DistributionSpec::new(family, count).map_err(err)?;
        Ok(Self { inner })
    }

    /// Empirical law of `data`. Results built on it are estimates.
    #[staticmethod]
    #[pyo3(signature = (data, count = 1))]
    fn empirical(data: Vec<f64>, count: u64) -> PyResult<Self> {
        let inner = DistributionSpec::fit_empirical(&data, count).map_err(err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn family(&self) -> &'static str {
        self.inner.family().name()
    }

    #[getter]
    fn count(&self) -> u64 {
        self.inner.count()
    }

    #[getter]
    fn fitted(&self) -> bool {
        self.inner.is_fitted()
    }

    /// `(mean, variance, E|X-μ|³, E(X-μ)⁴ or None)`
    fn central_moments(&self) -> (f64, f64, f64, Option<f64>) {
        let m = self.inner.moments();
        (m.mean, m.variance, m.abs_third_central, m.fourth_central)
    }

    fn __repr__(&self) -> String {
        format!("Distribution(family={:?}, count={})", self.family(), self.count())
    }
}

/// `(indices, outcomes, probs)` of one dependency block.
type BlockArg = (Vec<usize>, Vec<Vec<f64>>, Vec<f64>);

/// A data vector together with the adversary settings read from a config.
#[pyclass(frozen, name = "DataVector", module = "noiseless")]
pub struct PyDataVector {
    spec: DataVectorSpec,
    adversary: AdversaryModel,
    remaining_total_variance: Option<f64>,
}

#[pymethods]
impl PyDataVector {
    /// `blocks` is a list of `(indices, outcomes, probs)` joint laws.
    #[new]
    #[pyo3(signature = (records, sensitivity = None, dependency_bound = 1, total_variance = None, blocks = None))]
    fn new(
        records: Vec<PyRef<'_, PyDistribution>>,
        sensitivity: Option<f64>,
        dependency_bound: u64,
        total_variance: Option<f64>,
        blocks: Option<Vec<BlockArg>>,
    ) -> PyResult<Self> {
        let blocks = blocks
            .unwrap_or_default()
            .into_iter()
            .map(|(idx, outcomes, probs)| {
                if outcomes.len() != probs.len() {
                    return Err(PyValueError::new_err("block outcomes and probs differ in length"));
                }
                DependencyBlock::new(idx, outcomes.into_iter().zip(probs).collect()).map_err(err)
            })
            .collect::<PyResult<Vec<_>>>()?;
        let spec = DataVectorSpec::builder(records.iter().map(|r| r.inner.clone()).collect())
            .maybe_sensitivity(sensitivity)
            .dependency_bound(dependency_bound)
            .maybe_total_variance(total_variance)
            .blocks(blocks)
            .build()
            .map_err(err)?;
        let adversary = AdversaryModel::new(dependency_bound, 0.0, None).map_err(err)?;
        Ok(Self {
            spec,
            adversary,
            remaining_total_variance: None,
        })
    }

    /// Parses a TOML config document, keeping its `gamma`, `compromised`
    /// and `remaining_total_variance` as defaults.
    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        let c = parse_config(text).map_err(err)?;
        Ok(Self {
            spec: c.spec,
            adversary: c.adversary,
            remaining_total_variance: c.remaining_total_variance,
        })
    }

    #[getter]
    fn n(&self) -> u64 {
        self.spec.n()
    }

    #[getter]
    fn sensitivity(&self) -> f64 {
        self.spec.sensitivity()
    }

    #[getter]
    fn dependency_bound(&self) -> u64 {
        self.spec.dependency_bound()
    }

    #[getter]
    fn total_variance(&self) -> f64 {
        self.spec.total_variance()
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.adversary.gamma()
    }

    #[getter]
    fn records(&self) -> Vec<PyDistribution> {
        self.spec
            .records()
            .iter()
            .map(|r| PyDistribution { inner: r.clone() })
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "DataVector(n={}, sensitivity={}, dependency_bound={})",
            self.spec.n(),
            self.spec.sensitivity(),
            self.spec.dependency_bound()
        )
    }
}

impl PyDataVector {
    fn adversary_with(&self, gamma: Option<f64>, compromised: Option<Vec<u64>>) -> PyResult<AdversaryModel> {
        if gamma.is_none() && compromised.is_none() {
            return Ok(self.adversary.clone());
        }
        let gamma = gamma.unwrap_or(self.adversary.gamma());
        let set = compromised.or_else(|| self.adversary.compromised().map(<[u64]>::to_vec));
        AdversaryModel::new(self.spec.dependency_bound(), gamma, set).map_err(err)
    }
}

/// An `(ε, δ)` guarantee. δ is reported raw; `vacuous` flags δ ≥ 1.
#[pyclass(frozen, get_all, name = "Bound", module = "noiseless")]
pub struct PyBound {
    epsilon: f64,
    delta: f64,
    source: String,
    preconditions_ok: bool,
    vacuous: bool,
    diagnostics: Vec<String>,
}

impl From<PrivacyBound> for PyBound {
    fn from(b: PrivacyBound) -> Self {
        PyBound {
            epsilon: b.epsilon,
            delta: b.delta,
            source: b.source.to_string(),
            preconditions_ok: b.preconditions_ok,
            vacuous: b.is_vacuous(),
            diagnostics: b.diagnostics.iter().map(ToString::to_string).collect(),
        }
    }
}

#[pymethods]
impl PyBound {
    fn __repr__(&self) -> String {
        format!(
            "Bound(epsilon={}, delta={}, source={:?})",
            self.epsilon, self.delta, self.source
        )
    }
}

#[pyclass(frozen, get_all, name = "Plan", module = "noiseless")]
pub struct PyPlan {
    chosen_path: String,
    bound: Py<PyBound>,
    noise_variance: Option<f64>,
    regime: Option<String>,
    laplace_baseline_variance: Option<f64>,
    delta_adversarial: Option<Py<PyBound>>,
    diagnostics: Vec<String>,
}

#[pymethods]
impl PyPlan {
    fn __repr__(&self) -> String {
        let noise = self.noise_variance.map_or_else(|| "None".to_string(), |v| v.to_string());
        format!("Plan(chosen_path={:?}, noise_variance={noise})", self.chosen_path)
    }
}

/// Binomial bound for `n` i.i.d. Bernoulli(p) records. Give exactly one of
/// `epsilon` or `delta`.
#[pyfunction]
#[pyo3(signature = (n, p, *, epsilon = None, delta = None))]
fn binomial_bound(n: u64, p: f64, epsilon: Option<f64>, delta: Option<f64>) -> PyResult<PyBound> {
    let case = BinomialCase::new(n, p).map_err(err)?;
    let b = match (epsilon, delta) {
        (Some(e), None) => binomial_delta_given_eps(case, e),
        (None, Some(d)) => binomial_eps_given_delta(case, d),
        _ => return Err(PyValueError::new_err("give exactly one of epsilon or delta")),
    };
    Ok(b.map_err(err)?.into())
}

#[pyfunction]
#[pyo3(signature = (n, mean_variance, sum_abs_third, sensitivity, *, be_constant = 1.12))]
fn independent_bound(
    n: u64,
    mean_variance: f64,
    sum_abs_third: f64,
    sensitivity: f64,
    be_constant: f64,
) -> PyResult<PyBound> {
    let agg = IndependentAggregate {
        n,
        mean_variance,
        sum_abs_third,
        sensitivity,
    };
    let c = constants(be_constant, 28)?;
    Ok(be_bound(&agg, c.berry_esseen).map_err(err)?.into())
}

#[pyfunction]
#[pyo3(signature = (n, total_variance, sum_abs_third, sum_fourth, dependency_bound, sensitivity, *, stein_k = 28))]
fn dependent_bound(
    n: u64,
    total_variance: f64,
    sum_abs_third: f64,
    sum_fourth: f64,
    dependency_bound: u64,
    sensitivity: f64,
    stein_k: u32,
) -> PyResult<PyBound> {
    let agg = DependentAggregate {
        n,
        total_variance,
        sum_abs_third,
        sum_fourth,
        dependency_bound,
        sensitivity,
    };
    let c = constants(1.12, stein_k)?;
    Ok(stein_bound(&agg, c.stein).map_err(err)?.into())
}

/// Bound for a data vector, picking the route from its dependency bound.
/// `gamma` and `compromised` override the values the vector was built with.
#[pyfunction]
#[pyo3(signature = (data, *, gamma = None, compromised = None, remaining_total_variance = None, be_constant = 1.12, stein_k = 28))]
fn data_bound(
    data: &PyDataVector,
    gamma: Option<f64>,
    compromised: Option<Vec<u64>>,
    remaining_total_variance: Option<f64>,
    be_constant: f64,
    stein_k: u32,
) -> PyResult<PyBound> {
    let adversary = data.adversary_with(gamma, compromised)?;
    let c = constants(be_constant, stein_k)?;
    let rtv = remaining_total_variance.or(data.remaining_total_variance);
    let plan = plan_for(&data.spec, &adversary).map_err(err)?;
    Ok(bound_for_plan(&data.spec, &plan, c, rtv).map_err(err)?.into())
}

/// Runs the planner. Without `data` only `sensitivity` is assumed and the
/// answer is plain Laplace DP.
#[pyfunction]
#[pyo3(signature = (*, target_epsilon = None, target_delta = None, data = None, sensitivity = None, gamma = None, be_constant = 1.12, stein_k = 28))]
#[allow(clippy::too_many_arguments)]
fn plan(
    py: Python<'_>,
    target_epsilon: Option<f64>,
    target_delta: Option<f64>,
    data: Option<&PyDataVector>,
    sensitivity: Option<f64>,
    gamma: Option<f64>,
    be_constant: f64,
    stein_k: u32,
) -> PyResult<PyPlan> {
    let target = Target {
        epsilon: target_epsilon,
        delta: target_delta,
    };
    let c = constants(be_constant, stein_k)?;
    let report = match data {
        Some(d) => {
            let adversary = d.adversary_with(gamma, None)?;
            let input = PlanInput::Data {
                spec: &d.spec,
                adversary: &adversary,
                remaining_total_variance: d.remaining_total_variance,
            };
            run_plan(input, target, c)
        }
        None => {
            let sensitivity = sensitivity
                .ok_or_else(|| PyValueError::new_err("give data or sensitivity"))?;
            run_plan(PlanInput::NoAssumptions { sensitivity }, target, c)
        }
    }
    .map_err(err)?;
    let delta_adversarial = report
        .delta_adversarial
        .map(|b| Py::new(py, PyBound::from(b)))
        .transpose()?;
    Ok(PyPlan {
        chosen_path: report.chosen_path.to_string(),
        bound: Py::new(py, PyBound::from(report.bounds))?,
        noise_variance: report.noise_plan.as_ref().map(|p| p.noise_variance),
        regime: report.noise_plan.as_ref().map(|p| format!("{:?}", p.regime)),
        laplace_baseline_variance: report
            .laplace_baseline_variance
            .or(report.noise_plan.as_ref().map(|p| p.baseline_laplace_variance)),
        delta_adversarial,
        diagnostics: report.diagnostics.iter().map(ToString::to_string).collect(),
    })
}

#[pyfunction]
fn eps_with_noise(sensitivity: f64, n: u64, total_variance: f64, noise_variance: f64) -> PyResult<f64> {
    synergy::eps_with_noise(sensitivity, n, total_variance, noise_variance).map_err(err)
}

#[pyfunction]
fn required_noise_variance(sensitivity: f64, n: u64, total_variance: f64, target_epsilon: f64) -> PyResult<f64> {
    synergy::required_noise_variance(sensitivity, n, total_variance, target_epsilon).map_err(err)
}

#[pyfunction]
fn laplace_baseline_variance(sensitivity: f64, epsilon: f64) -> PyResult<f64> {
    synergy::laplace_baseline_variance(sensitivity, epsilon).map_err(err)
}

/// Exact δ at `epsilon`, over every single-record removal and the default
/// insertion, in both directions.
#[pyfunction]
fn exact_delta(data: &PyDataVector, epsilon: f64) -> PyResult<f64> {
    exact_np_delta(&data.spec, epsilon, None).map_err(err)
}

/// Law of the sum as `(value, probability)` pairs in increasing value order.
#[pyfunction]
fn sum_pmf(data: &PyDataVector) -> PyResult<Vec<(f64, f64)>> {
    Ok(exact_sum_pmf(&data.spec).map_err(err)?.atoms().collect())
}

/// Sampling estimate of δ as `(estimate, ci95_half_width)`.
#[pyfunction]
#[pyo3(signature = (data, epsilon, *, samples = 100_000, seed = 0))]
fn mc_delta(py: Python<'_>, data: &PyDataVector, epsilon: f64, samples: u64, seed: u64) -> PyResult<(f64, f64)> {
    let est = py
        .detach(|| mc_estimate_delta(&data.spec, epsilon, None, samples, seed))
        .map_err(err)?;
    Ok((est.estimate, est.ci95))
}

/// Data series of a figure as `(header, rows)`, each row `[n, values...]`.
#[pyfunction]
#[pyo3(signature = (figure, *, n_min = None, n_max = None, points = None))]
fn curve(
    figure: u32,
    n_min: Option<u64>,
    n_max: Option<u64>,
    points: Option<usize>,
) -> PyResult<(Vec<String>, Vec<Vec<f64>>)> {
    let fig = Figure::from_id(figure).map_err(err)?;
    let mut params = CurveParams::defaults(fig);
    params.n_min = n_min.unwrap_or(params.n_min);
    params.n_max = n_max.unwrap_or(params.n_max);
    params.points = points.unwrap_or(params.points);
    let c = emit_curve(fig, &params).map_err(err)?;
    let header = c.header.iter().map(|h| h.to_string()).collect();
    let rows = c
        .rows
        .into_iter()
        .map(|(n, vals)| std::iter::once(n as f64).chain(vals).collect())
        .collect();
    Ok((header, rows))
}

#[pymodule]
fn noiseless(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("NoiselessError", m.py().get_type::<NoiselessError>())?;
    m.add_class::<PyDistribution>()?;
    m.add_class::<PyDataVector>()?;
    m.add_class::<PyBound>()?;
    m.add_class::<PyPlan>()?;
    m.add_function(wrap_pyfunction!(binomial_bound, m)?)?;
    m.add_function(wrap_pyfunction!(independent_bound, m)?)?;
    m.add_function(wrap_pyfunction!(dependent_bound, m)?)?;
    m.add_function(wrap_pyfunction!(data_bound, m)?)?;
    m.add_function(wrap_pyfunction!(plan, m)?)?;
    m.add_function(wrap_pyfunction!(eps_with_noise, m)?)?;
    m.add_function(wrap_pyfunction!(required_noise_variance, m)?)?;
    m.add_function(wrap_pyfunction!(laplace_baseline_variance, m)?)?;
    m.add_function(wrap_pyfunction!(exact_delta, m)?)?;
    m.add_function(wrap_pyfunction!(sum_pmf, m)?)?;
    m.add_function(wrap_pyfunction!(mc_delta, m)?)?;
    m.add_function(wrap_pyfunction!(curve, m)?)?;
    Ok(())
}
