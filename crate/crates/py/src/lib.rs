//! Python bindings: channel bounds, Gaussian entropies, simulation budgets,
//! QKD thresholds and the self-test runner.

use std::collections::BTreeMap;

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use qcap::bounds::{self, StrongConverseParams, StrongConverseVariant};
use qcap::symplectic::{CovMatrix, GaussianState};
use qcap::{BoundResult, CanonicalForm, DVChannelSpec};

create_exception!(qcap_py, QcapError, PyException);

fn err(e: qcap::Error) -> PyErr {
    QcapError::new_err(e.to_string())
}

enum Channel {
    Cv(CanonicalForm),
    Dv(DVChannelSpec),
}

fn channel(name: &str, params: Option<&Bound<'_, PyDict>>) -> PyResult<Channel> {
    let mut p: BTreeMap<String, Bound<'_, PyAny>> = BTreeMap::new();
    if let Some(d) = params {
        for (k, v) in d.iter() {
            p.insert(k.extract()?, v);
        }
    }
    let num = |key: &str| -> PyResult<f64> {
        p.get(key)
            .ok_or_else(|| PyValueError::new_err(format!("channel '{name}' requires {key}")))?
            .extract()
    };
    let (ch, used): (Channel, &[&str]) = match name {
        "pure-loss" => (Channel::Cv(CanonicalForm::PureLoss { eta: num("eta")? }), &["eta"]),
        "thermal-loss" => (
            Channel::Cv(CanonicalForm::ThermalLoss {
                eta: num("eta")?,
                nbar: num("nbar")?,
            }),
            &["eta", "nbar"],
        ),
        "amplifier" => (
            Channel::Cv(CanonicalForm::Amplifier {
                g: num("g")?,
                nbar: num("nbar")?,
            }),
            &["g", "nbar"],
        ),
        "ql-amplifier" => (Channel::Cv(CanonicalForm::QLimAmplifier { g: num("g")? }), &["g"]),
        "additive-noise" => (Channel::Cv(CanonicalForm::AdditiveNoise { xi: num("xi")? }), &["xi"]),
        "identity" => (Channel::Cv(CanonicalForm::Identity), &[]),
        "b1" => (Channel::Cv(CanonicalForm::B1Form), &[]),
        "depolarizing" => (Channel::Dv(DVChannelSpec::Depolarizing(num("p")?)), &["p"]),
        "dephasing" => (Channel::Dv(DVChannelSpec::Dephasing(num("p")?)), &["p"]),
        "erasure" => (Channel::Dv(DVChannelSpec::Erasure(num("p")?)), &["p"]),
        "amplitude-damping" => (Channel::Dv(DVChannelSpec::AmplitudeDamping(num("p")?)), &["p"]),
        "pauli" => {
            let probs: [f64; 4] = p
                .get("probs")
                .ok_or_else(|| PyValueError::new_err("channel 'pauli' requires probs"))?
                .extract()?;
            (Channel::Dv(DVChannelSpec::Pauli(probs)), &["probs"])
        }
        other => return Err(PyValueError::new_err(format!("unknown channel '{other}'"))),
    };
    if let Some(extra) = p.keys().find(|k| !used.contains(&k.as_str())) {
        return Err(PyValueError::new_err(format!(
            "{extra} does not apply to channel '{name}'"
        )));
    }
    Ok(ch)
}

fn cv_channel(name: &str, params: Option<&Bound<'_, PyDict>>) -> PyResult<CanonicalForm> {
    match channel(name, params)? {
        Channel::Cv(f) => Ok(f),
        Channel::Dv(_) => Err(PyValueError::new_err(format!("'{name}' is not a bosonic channel"))),
    }
}

fn result_dict<'py>(py: Python<'py>, r: &BoundResult) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("value", r.value.as_f64())?;
    d.set_item("kind", r.kind.as_str())?;
    d.set_item("channel", &r.channel)?;
    d.set_item("formula_id", r.formula_id)?;
    d.set_item("zero_clamped", r.zero_clamped)?;
    d.set_item("hierarchy", r.hierarchy)?;
    d.set_item("residual", r.residual)?;
    d.set_item("params", r.params.clone())?;
    Ok(d)
}

fn state(mean: Option<Vec<f64>>, cov: Vec<Vec<f64>>) -> PyResult<GaussianState> {
    let dim = cov.len();
    if cov.iter().any(|row| row.len() != dim) {
        return Err(PyValueError::new_err("covariance matrix must be square"));
    }
    let flat: Vec<f64> = cov.into_iter().flatten().collect();
    let cm = CovMatrix::from_rows(dim, &flat).map_err(err)?;
    let mean = mean.unwrap_or_else(|| vec![0.0; dim]);
    GaussianState::new(qcap::nalgebra::DVector::from_vec(mean), cm).map_err(err)
}

/// Flux bound (or capacity) of a channel, e.g. `bound("pure-loss", eta=0.5)`.
/// Infinite bounds are returned as `float("inf")`.
#[pyfunction]
#[pyo3(signature = (name, **params))]
fn bound<'py>(py: Python<'py>, name: &str, params: Option<&Bound<'py, PyDict>>) -> PyResult<Bound<'py, PyDict>> {
    let r = match channel(name, params)? {
        Channel::Cv(f) => bounds::bound_cv(&f),
        Channel::Dv(c) => bounds::flux_dv(&c),
    }
    .map_err(err)?;
    result_dict(py, &r)
}

/// Finite-n strong-converse bound; `variant` is "chebyshev",
/// "gaussian-quantile" or "distillable".
#[pyfunction]
#[pyo3(signature = (name, n, eps, variant = "chebyshev", **params))]
fn strong_converse<'py>(
    py: Python<'py>,
    name: &str,
    n: u64,
    eps: f64,
    variant: &str,
    params: Option<&Bound<'py, PyDict>>,
) -> PyResult<Bound<'py, PyDict>> {
    let form = cv_channel(name, params)?;
    let variant: StrongConverseVariant = variant.parse().map_err(err)?;
    let p = StrongConverseParams::for_form(&form, n, eps, variant).map_err(err)?;
    result_dict(py, &bounds::sc_bound(&form, &p).map_err(err)?)
}

/// Strong-converse bound corrected for a finite-energy teleportation
/// simulation with resource energy `mu` and photon constraint `n_photons`.
#[pyfunction]
#[pyo3(signature = (name, n, eps, mu, n_photons, **params))]
fn corrected_pipeline<'py>(
    py: Python<'py>,
    name: &str,
    n: u64,
    eps: f64,
    mu: f64,
    n_photons: f64,
    params: Option<&Bound<'py, PyDict>>,
) -> PyResult<Bound<'py, PyDict>> {
    let form = cv_channel(name, params)?;
    let (r, budget) = bounds::corrected_pipeline(&form, n, eps, mu, n_photons).map_err(err)?;
    let d = result_dict(py, &r)?;
    d.set_item("delta", budget.delta)?;
    d.set_item("eps_tp", budget.eps_tp)?;
    d.set_item("eps_composed", budget.eps_composed)?;
    d.set_item("saturated", budget.saturated())?;
    Ok(d)
}

/// Per-use simulation error `δ̂(μ, N)`.
#[pyfunction]
#[pyo3(signature = (mu, n_photons, name = "identity", **params))]
fn sim_error(mu: f64, n_photons: f64, name: &str, params: Option<&Bound<'_, PyDict>>) -> PyResult<f64> {
    let form = cv_channel(name, params)?;
    qcap::telesim::sim_error_budget(&form, mu, n_photons).map_err(err)
}

/// Symplectic eigenvalues of a covariance matrix (vacuum = 1/2).
#[pyfunction]
fn symplectic_eigenvalues(cov: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
    let st = state(None, cov)?;
    qcap::symplectic::symplectic_eigenvalues(st.cov()).map_err(err)
}

/// Von Neumann entropy in bits.
#[pyfunction]
fn von_neumann_entropy(cov: Vec<Vec<f64>>) -> PyResult<f64> {
    let st = state(None, cov)?;
    qcap::entropy::von_neumann_entropy(st.cov()).map_err(err)
}

/// Relative entropy `S(ρ1 || ρ2)` in bits of two Gaussian states.
#[pyfunction]
#[pyo3(signature = (cov1, cov2, mean1 = None, mean2 = None))]
fn relative_entropy(
    cov1: Vec<Vec<f64>>,
    cov2: Vec<Vec<f64>>,
    mean1: Option<Vec<f64>>,
    mean2: Option<Vec<f64>>,
) -> PyResult<f64> {
    qcap::entropy::relative_entropy(&state(mean1, cov1)?, &state(mean2, cov2)?).map_err(err)
}

/// Fock-sum relative entropy of two thermal states.
#[pyfunction]
fn thermal_relative_entropy_fock(nbar1: f64, nbar2: f64) -> PyResult<f64> {
    Ok(qcap::fock::thermal_relative_entropy(nbar1, nbar2).map_err(err)?.value)
}

/// Security thresholds (maximal excess noise) of every protocol on a loss
/// grid in dB, keyed by protocol.
#[pyfunction]
fn qkd_thresholds(db: Vec<f64>) -> PyResult<BTreeMap<&'static str, Vec<f64>>> {
    let curves = qcap::qkd::sweep_thresholds(&db).map_err(err)?;
    Ok(curves
        .into_iter()
        .map(|c| (c.protocol, c.points.iter().map(|p| p.excess_noise).collect()))
        .collect())
}

/// Run the verification suites; returns `(suite, check, passed, detail)`.
#[pyfunction]
fn selftest() -> Vec<(u32, String, bool, String)> {
    qcap::selftest::run_all()
        .into_iter()
        .flat_map(|r| r.checks.into_iter().map(move |c| (r.id, c.label, c.passed, c.detail)))
        .collect()
}

/// Output bytes of the `qcap` command line for `argv` (without program
/// name), decoded as text.
#[pyfunction]
fn cli(argv: Vec<String>) -> PyResult<String> {
    let argv: Vec<String> = std::iter::once("qcap".to_string()).chain(argv).collect();
    let bytes = qcap::cli::render(&argv).map_err(|code| QcapError::new_err(format!("qcap exited with {code}")))?;
    String::from_utf8(bytes).map_err(|e| QcapError::new_err(e.to_string()))
}

#[pymodule]
fn qcap_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("QcapError", m.py().get_type::<QcapError>())?;
    m.add_function(wrap_pyfunction!(bound, m)?)?;
    m.add_function(wrap_pyfunction!(strong_converse, m)?)?;
    m.add_function(wrap_pyfunction!(corrected_pipeline, m)?)?;
    m.add_function(wrap_pyfunction!(sim_error, m)?)?;
    m.add_function(wrap_pyfunction!(symplectic_eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(von_neumann_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(relative_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(thermal_relative_entropy_fock, m)?)?;
    m.add_function(wrap_pyfunction!(qkd_thresholds, m)?)?;
    m.add_function(wrap_pyfunction!(selftest, m)?)?;
    m.add_function(wrap_pyfunction!(cli, m)?)?;
    Ok(())
}
