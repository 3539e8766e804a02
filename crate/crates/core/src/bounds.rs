//! Weak-converse bounds, two-way capacities and finite-`n` strong-converse
//! bounds.
//!
//! Single-letter bounds come from the entanglement flux of the channel's
//! (quasi-)Choi state. Where a matching lower bound exists (pure loss,
//! quantum-limited amplifier, dephasing, erasure) the result is tagged as a
//! capacity, and all four two-way capacities coincide.

use std::collections::BTreeMap;
use std::f64::consts::{LN_2, LOG2_E};
use std::fmt;

use crate::channels::{CanonicalForm, DVChannelSpec};
use crate::error::{invalid, Error, Result};
use crate::symplectic::{h2, h_unchecked, s};
use crate::telesim::{peel, sim_error_budget, ErrorBudget};

/// A bound in bits per channel use; `Infinite` for noiseless channels and
/// for saturated finite-size budgets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundValue {
    Finite(f64),
    Infinite,
}

impl BoundValue {
    pub fn as_f64(&self) -> f64 {
        match *self {
            BoundValue::Finite(v) => v,
            BoundValue::Infinite => f64::INFINITY,
        }
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            BoundValue::Finite(v) => Some(v),
            BoundValue::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, BoundValue::Infinite)
    }
}

impl fmt::Display for BoundValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundValue::Finite(v) => write!(f, "{v}"),
            BoundValue::Infinite => f.write_str("INF"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    Weak,
    Strong,
    Capacity,
}

impl BoundKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundKind::Weak => "weak",
            BoundKind::Strong => "strong",
            BoundKind::Capacity => "capacity",
        }
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Capacity hierarchy recorded on results that pin all two-way capacities.
pub const CAPACITY_HIERARCHY: &str = "Q2 = D2 = K = P2";

#[derive(Debug, Clone, PartialEq)]
pub struct BoundResult {
    pub value: BoundValue,
    pub kind: BoundKind,
    /// Human-readable channel descriptor.
    pub channel: String,
    pub formula_id: &'static str,
    pub params: BTreeMap<String, f64>,
    /// The closed form was negative and the bound was clamped to 0.
    pub zero_clamped: bool,
    /// [`CAPACITY_HIERARCHY`] when `kind` is `Capacity`.
    pub hierarchy: Option<&'static str>,
    /// Terms of unknown constant omitted from `value`, e.g. `O(log n / n)`.
    pub residual: Option<&'static str>,
}

impl BoundResult {
    fn new(value: BoundValue, kind: BoundKind, channel: String, formula_id: &'static str) -> Self {
        Self {
            value,
            kind,
            channel,
            formula_id,
            params: BTreeMap::new(),
            zero_clamped: false,
            hierarchy: (kind == BoundKind::Capacity).then_some(CAPACITY_HIERARCHY),
            residual: None,
        }
    }

    fn param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    fn clamped(mut self, clamped: bool) -> Self {
        self.zero_clamped = clamped;
        self
    }
}

/// Clamp a closed form to 0 where it is nonpositive.
fn clamp(v: f64) -> (BoundValue, bool) {
    if v > 0.0 {
        (BoundValue::Finite(v), false)
    } else {
        (BoundValue::Finite(0.0), true)
    }
}

/// `-log2(1 - x)` for `x` in `[0, 1)`.
fn neg_log2_1m(x: f64) -> f64 {
    -(-x).ln_1p() / LN_2
}

/// Entanglement flux of a qubit channel.
pub fn flux_dv(channel: &DVChannelSpec) -> Result<BoundResult> {
    channel.validate()?;
    let name = channel.to_string();
    let r = match *channel {
        DVChannelSpec::Pauli(ps) => {
            let p_max = ps.iter().copied().fold(0.0, f64::max);
            let (v, clamped) = if p_max >= 0.5 {
                (BoundValue::Finite(1.0 - h2(p_max)?), false)
            } else {
                (BoundValue::Finite(0.0), true)
            };
            BoundResult::new(v, BoundKind::Weak, name, "pauli-flux")
                .param("p_max", p_max)
                .clamped(clamped)
        }
        DVChannelSpec::Depolarizing(p) => {
            let (v, clamped) = if p <= 2.0 / 3.0 {
                (BoundValue::Finite(1.0 - h2(0.75 * p)?), false)
            } else {
                (BoundValue::Finite(0.0), true)
            };
            BoundResult::new(v, BoundKind::Weak, name, "depolarizing-flux")
                .param("p", p)
                .clamped(clamped)
        }
        DVChannelSpec::Dephasing(p) => BoundResult::new(
            BoundValue::Finite(1.0 - h2(p)?),
            BoundKind::Capacity,
            name,
            "dephasing-capacity",
        )
        .param("p", p),
        DVChannelSpec::Erasure(p) => BoundResult::new(
            BoundValue::Finite(1.0 - p),
            BoundKind::Capacity,
            name,
            "erasure-capacity",
        )
        .param("p", p),
        DVChannelSpec::AmplitudeDamping(p) => {
            // -log2(0) = ∞ saturates at the qubit dimension bound
            let v = if p > 0.0 { (-p.log2()).min(1.0) } else { 1.0 };
            BoundResult::new(BoundValue::Finite(v), BoundKind::Weak, name, "amplitude-damping-bound").param("p", p)
        }
    };
    Ok(r)
}

/// Flux bound (or capacity) of a single-mode phase-insensitive Gaussian
/// channel.
///
/// | form | value | zero region |
/// |---|---|---|
/// | thermal loss | `-log2[(1-η)η^n̄] - h(n̄)` | `n̄ ≥ η/(1-η)` |
/// | amplifier | `log2[g^(n̄+1)/(g-1)] - h(n̄)` | `n̄ ≥ 1/(g-1)` |
/// | additive noise | `(ξ-1)/ln 2 - log2 ξ` | `ξ ≥ 1` |
///
/// With `n̄ = 0` these are the capacities `-log2(1-η)` and `-log2(1-1/g)`.
/// Noiseless channels (identity, `η = 1`, `ξ = 0`) give `Infinite`.
pub fn bound_cv(form: &CanonicalForm) -> Result<BoundResult> {
    form.validate()?;
    let name = form.to_string();
    let r = match form.normalized() {
        CanonicalForm::ThermalLoss { eta, nbar } => {
            let capacity = nbar == 0.0;
            let (kind, id) = if capacity {
                (BoundKind::Capacity, "pure-loss-capacity")
            } else {
                (BoundKind::Weak, "thermal-loss-bound")
            };
            let (value, clamped) = if nbar * (1.0 - eta) >= eta {
                (BoundValue::Finite(0.0), nbar > 0.0)
            } else if eta == 1.0 {
                (BoundValue::Infinite, false)
            } else {
                clamp(neg_log2_1m(eta) - nbar * eta.log2() - h_unchecked(nbar))
            };
            BoundResult::new(value, kind, name, id)
                .param("eta", eta)
                .param("nbar", nbar)
                .clamped(clamped)
        }
        CanonicalForm::Amplifier { g, nbar } => {
            let capacity = nbar == 0.0;
            let (kind, id) = if capacity {
                (BoundKind::Capacity, "ql-amplifier-capacity")
            } else {
                (BoundKind::Weak, "amplifier-bound")
            };
            let (value, clamped) = if nbar * (g - 1.0) >= 1.0 {
                (BoundValue::Finite(0.0), true)
            } else if capacity {
                clamp(neg_log2_1m(1.0 / g))
            } else {
                clamp((nbar + 1.0) * g.log2() - (g - 1.0).log2() - h_unchecked(nbar))
            };
            BoundResult::new(value, kind, name, id)
                .param("g", g)
                .param("nbar", nbar)
                .clamped(clamped)
        }
        CanonicalForm::AdditiveNoise { xi } => {
            let (value, clamped) = if xi >= 1.0 {
                (BoundValue::Finite(0.0), true)
            } else if xi == 0.0 {
                (BoundValue::Infinite, false)
            } else {
                clamp((xi - 1.0) / LN_2 - xi.log2())
            };
            BoundResult::new(value, BoundKind::Weak, name, "additive-noise-bound")
                .param("xi", xi)
                .clamped(clamped)
        }
        CanonicalForm::B1Form => {
            return Err(invalid("no closed-form flux bound is available for the B1 form"));
        }
        CanonicalForm::PureLoss { .. } | CanonicalForm::QLimAmplifier { .. } | CanonicalForm::Identity => {
            unreachable!("normalized away")
        }
    };
    Ok(r)
}

/// `-log2(1-η) / η`, which tends to `log2 e ≈ 1.4427` as `η → 0`.
pub fn pure_loss_scaling(eta: f64) -> Result<f64> {
    if !(eta > 0.0 && eta <= 0.01) {
        return Err(invalid(format!("pure_loss_scaling: eta = {eta} must lie in (0, 0.01]")));
    }
    Ok(neg_log2_1m(eta) / eta)
}

/// Reverse coherent information of the thermal-loss channel, expressed in
/// the thermal variance `ω = n̄ + 1/2`: `-log2(1-η) - s(ω)`. May be
/// negative.
pub fn rev_coherent_info(eta: f64, omega: f64) -> Result<f64> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(invalid(format!("rev_coherent_info: eta = {eta} must lie in (0, 1)")));
    }
    Ok(neg_log2_1m(eta) - s(omega)?)
}

/// Relative-entropy variance of the channel's (asymptotic) Choi state.
///
/// Pure loss and the quantum-limited amplifier have zero variance (the
/// `n̄ → 0` limit).
pub fn relent_variance(form: &CanonicalForm) -> Result<f64> {
    form.validate()?;
    let log2_sq = |x: f64| x.log2().powi(2);
    match form.normalized() {
        CanonicalForm::ThermalLoss { eta, nbar } => {
            if nbar == 0.0 {
                return Ok(0.0);
            }
            if eta == 0.0 {
                return Err(Error::Domain("relative-entropy variance diverges at eta = 0".into()));
            }
            Ok(nbar * (nbar + 1.0) * log2_sq(eta * (nbar + 1.0) / nbar))
        }
        CanonicalForm::Amplifier { g, nbar } => {
            if nbar == 0.0 {
                return Ok(0.0);
            }
            Ok(nbar * (nbar + 1.0) * log2_sq((nbar + 1.0) / (g * nbar)))
        }
        CanonicalForm::AdditiveNoise { xi } => Ok((1.0 - xi).powi(2) / (LN_2 * LN_2)),
        _ => Err(invalid("no relative-entropy variance is available for the B1 form")),
    }
}

/// `C(ε) = log2 6 + 2 log2[(1+ε)/(1-ε)]`.
pub fn c_eps(security_eps: f64) -> Result<f64> {
    if !(security_eps > 0.0 && security_eps < 1.0) {
        return Err(invalid(format!("c_eps: epsilon = {security_eps} must lie in (0, 1)")));
    }
    let e = security_eps;
    // log((1+ε)/(1-ε)) = ln_1p(ε) - ln_1p(-ε)
    Ok(6f64.log2() + 2.0 * (e.ln_1p() - (-e).ln_1p()) * LOG2_E)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrongConverseVariant {
    /// `Φ + √(V/n) φ⁻¹(ε)`, with an `O(log n / n)` term of unknown constant
    /// reported as a residual.
    GaussianQuantile,
    /// `Φ + √(V/(n(1-ε))) + C(ε)/n`; fully explicit.
    Chebyshev,
    /// `Φ + C(ε)/n`, for distillable channels.
    Distillable,
}

impl StrongConverseVariant {
    pub fn as_str(&self) -> &'static str {
        match self {
            StrongConverseVariant::GaussianQuantile => "gaussian-quantile",
            StrongConverseVariant::Chebyshev => "chebyshev",
            StrongConverseVariant::Distillable => "distillable",
        }
    }
}

impl std::str::FromStr for StrongConverseVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian-quantile" => Ok(Self::GaussianQuantile),
            "chebyshev" => Ok(Self::Chebyshev),
            "distillable" => Ok(Self::Distillable),
            _ => Err(invalid(format!(
                "unknown strong-converse variant '{s}' (expected gaussian-quantile, chebyshev or distillable)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrongConverseParams {
    pub n_uses: u64,
    pub security_eps: f64,
    pub variance: f64,
    pub variant: StrongConverseVariant,
}

impl StrongConverseParams {
    /// Parameters with the variance of `form` filled in.
    pub fn for_form(
        form: &CanonicalForm,
        n_uses: u64,
        security_eps: f64,
        variant: StrongConverseVariant,
    ) -> Result<Self> {
        Ok(Self {
            n_uses,
            security_eps,
            variance: relent_variance(form)?,
            variant,
        })
    }

    fn validate(&self) -> Result<()> {
        if self.n_uses == 0 {
            return Err(invalid("n_uses must be at least 1"));
        }
        if !(self.security_eps > 0.0 && self.security_eps < 1.0) {
            return Err(invalid(format!(
                "security epsilon {} must lie in (0, 1)",
                self.security_eps
            )));
        }
        if !(self.variance >= 0.0) || !self.variance.is_finite() {
            return Err(invalid(format!("variance {} must be finite and ≥ 0", self.variance)));
        }
        Ok(())
    }
}

fn is_distillable(form: &CanonicalForm) -> bool {
    matches!(
        form.normalized(),
        CanonicalForm::ThermalLoss { nbar, .. } | CanonicalForm::Amplifier { nbar, .. } if nbar == 0.0
    )
}

/// Finite-`n` strong-converse bound on the secret-key capacity.
pub fn sc_bound(form: &CanonicalForm, params: &StrongConverseParams) -> Result<BoundResult> {
    params.validate()?;
    if matches!(form, CanonicalForm::B1Form) {
        return Err(invalid(
            "strong-converse bounds need a relative-entropy variance; none is available for B1",
        ));
    }
    if params.variant == StrongConverseVariant::Distillable && !is_distillable(form) {
        return Err(invalid(format!(
            "the distillable variant applies to pure loss and the quantum-limited amplifier, not {form}"
        )));
    }
    let flux = bound_cv(form)?;
    let n = params.n_uses as f64;
    let eps = params.security_eps;
    let v = params.variance;
    let mut residual = None;
    let value = match flux.value {
        BoundValue::Infinite => BoundValue::Infinite,
        BoundValue::Finite(phi) => BoundValue::Finite(match params.variant {
            StrongConverseVariant::Chebyshev => phi + (v / (n * (1.0 - eps))).sqrt() + c_eps(eps)? / n,
            StrongConverseVariant::GaussianQuantile => {
                residual = Some("O(log n / n)");
                phi + (v / n).sqrt() * normal_quantile(eps)?
            }
            StrongConverseVariant::Distillable => phi + c_eps(eps)? / n,
        }),
    };
    let (value, clamped) = match value {
        BoundValue::Finite(x) if x < 0.0 => (BoundValue::Finite(0.0), true),
        other => (other, false),
    };
    let mut r = BoundResult::new(value, BoundKind::Strong, form.to_string(), params.variant.as_str())
        .param("n", n)
        .param("eps", eps)
        .param("variance", v)
        .clamped(clamped);
    if let Some(phi) = flux.value.finite() {
        r = r.param("flux", phi);
    }
    r.residual = residual;
    Ok(r)
}

/// Strong-converse bound for a teleportation-simulated protocol.
///
/// The simulation error `δ̂(μ, N)` is peeled over `n` uses and composed
/// with `ε`; the Chebyshev bound is then evaluated at the composed error
/// with variance `2V`. A saturated budget yields `Infinite`. `O(1/μ)`
/// corrections to the variance are dropped and reported as a residual.
pub fn corrected_pipeline(
    form: &CanonicalForm,
    n_uses: u64,
    security_eps: f64,
    mu: f64,
    n_constraint: f64,
) -> Result<(BoundResult, ErrorBudget)> {
    let delta = sim_error_budget(form, mu, n_constraint)?;
    let (result, mut budget) = corrected_pipeline_with_delta(form, n_uses, security_eps, delta)?;
    budget.mu = Some(mu);
    budget.n_constraint = Some(n_constraint);
    let result = result.param("mu", mu).param("N", n_constraint);
    Ok((result, budget))
}

/// [`corrected_pipeline`] with the per-use simulation error given directly.
pub fn corrected_pipeline_with_delta(
    form: &CanonicalForm,
    n_uses: u64,
    security_eps: f64,
    delta: f64,
) -> Result<(BoundResult, ErrorBudget)> {
    let budget = peel(n_uses, delta, security_eps)?;
    let variance = 2.0 * relent_variance(form)?;
    let mut result = if budget.saturated() {
        let mut r = BoundResult::new(
            BoundValue::Infinite,
            BoundKind::Strong,
            form.to_string(),
            "corrected-chebyshev",
        )
        .param("n", n_uses as f64)
        .param("eps", security_eps)
        .param("variance", variance);
        if let Some(phi) = bound_cv(form)?.value.finite() {
            r = r.param("flux", phi);
        }
        r
    } else {
        let params = StrongConverseParams {
            n_uses,
            security_eps: budget.eps_composed,
            variance,
            variant: StrongConverseVariant::Chebyshev,
        };
        let mut r = sc_bound(form, &params)?;
        r.formula_id = "corrected-chebyshev";
        r.param("eps", security_eps)
    };
    result = result
        .param("delta", delta)
        .param("eps_tp", budget.eps_tp)
        .param("eps_composed", budget.eps_composed);
    result.residual = Some("O(1/mu) variance correction");
    Ok((result, budget))
}

/// Continuity measure used by [`finite_n_weak_bound`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    /// Relative entropy of entanglement: `g = 4ε`, `h = 2H2(ε)`.
    Ree,
    /// Squashed entanglement: `g = 16√ε`, `h = 2H2(2√ε)`.
    Squashed,
}

/// Rate bound `E + α g(ε) + h(ε)/n` for `n` uses with output error `ε`.
pub fn finite_n_weak_bound(e_value: f64, security_eps: f64, n_uses: u64, alpha: f64, measure: Measure) -> Result<f64> {
    if !(e_value >= 0.0) || !e_value.is_finite() {
        return Err(invalid(format!(
            "entanglement measure value {e_value} must be finite and ≥ 0"
        )));
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(invalid(format!("alpha = {alpha} must be positive")));
    }
    if n_uses == 0 {
        return Err(invalid("n_uses must be at least 1"));
    }
    if !(security_eps >= 0.0) {
        return Err(invalid(format!("epsilon = {security_eps} must be ≥ 0")));
    }
    let n = n_uses as f64;
    let (g, arg) = match measure {
        Measure::Ree => (4.0 * security_eps, security_eps),
        Measure::Squashed => (16.0 * security_eps.sqrt(), 2.0 * security_eps.sqrt()),
    };
    if arg > 1.0 {
        return Err(invalid(format!("binary-entropy argument {arg} exceeds 1")));
    }
    Ok(e_value + alpha * g + 2.0 * h2(arg)? / n)
}

/// Inverse of the standard normal CDF, `φ⁻¹(p)`.
///
/// Acklam's rational approximation (relative error ~1e-9) on the lower
/// half, followed by one Halley refinement step against `erfc`.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid(format!("normal_quantile: p = {p} must lie in (0, 1)")));
    }
    if p > 0.5 {
        // 1 - p is exact here; the lower tail keeps the refinement accurate
        return Ok(-normal_quantile(1.0 - p)?);
    }
    #[allow(clippy::excessive_precision)]
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;
    let tail = |q: f64| {
        let t = (-2.0 * q.ln()).sqrt();
        (((((C[0] * t + C[1]) * t + C[2]) * t + C[3]) * t + C[4]) * t + C[5])
            / ((((D[0] * t + D[1]) * t + D[2]) * t + D[3]) * t + 1.0)
    };
    let x = if p < P_LOW {
        tail(p)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    // Halley step on Φ(x) - p
    let cdf = 0.5 * libm::erfc(-x / std::f64::consts::SQRT_2);
    let u = (cdf - p) * (2.0 * std::f64::consts::PI).sqrt() * (x * x / 2.0).exp();
    Ok(x - u / (1.0 + x * u / 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn val(r: &BoundResult) -> f64 {
        r.value.finite().expect("finite bound")
    }

    /// Independent binary entropy via natural logs.
    fn h2_ref(p: f64) -> f64 {
        -(p * p.ln() + (1.0 - p) * (1.0 - p).ln()) / 2f64.ln()
    }

    #[test]
    fn dv_fluxes() {
        let r = flux_dv(&DVChannelSpec::Dephasing(0.1)).unwrap();
        assert_abs_diff_eq!(val(&r), 1.0 - h2_ref(0.1), epsilon = 1e-12);
        assert_abs_diff_eq!(val(&r), 0.531_004_406_410_719, epsilon = 1e-12);
        assert_eq!(r.kind, BoundKind::Capacity);
        assert_eq!(r.hierarchy, Some(CAPACITY_HIERARCHY));
        let r = flux_dv(&DVChannelSpec::Depolarizing(2.0 / 3.0)).unwrap();
        assert_abs_diff_eq!(val(&r), 0.0, epsilon = 1e-15);
        assert_eq!(val(&flux_dv(&DVChannelSpec::Depolarizing(0.9)).unwrap()), 0.0);
        let r = flux_dv(&DVChannelSpec::Erasure(0.25)).unwrap();
        assert_eq!(val(&r), 0.75);
        assert_eq!(r.kind, BoundKind::Capacity);
        assert_eq!(val(&flux_dv(&DVChannelSpec::AmplitudeDamping(0.25)).unwrap()), 1.0);
        assert_abs_diff_eq!(
            val(&flux_dv(&DVChannelSpec::AmplitudeDamping(0.8)).unwrap()),
            -(0.8f64).log2(),
            epsilon = 1e-15
        );
        assert_eq!(
            flux_dv(&DVChannelSpec::AmplitudeDamping(0.25)).unwrap().kind,
            BoundKind::Weak
        );
        // depolarizing as a Pauli channel
        let p = 0.3;
        let a = flux_dv(&DVChannelSpec::Depolarizing(p)).unwrap();
        let b = flux_dv(&DVChannelSpec::Pauli(
            DVChannelSpec::Depolarizing(p).pauli_probs().unwrap(),
        ))
        .unwrap();
        assert_abs_diff_eq!(val(&a), val(&b), epsilon = 1e-14);
        assert!(flux_dv(&DVChannelSpec::Erasure(1.5)).is_err());
    }

    #[test]
    fn cv_capacities() {
        let r = bound_cv(&CanonicalForm::PureLoss { eta: 0.5 }).unwrap();
        assert_abs_diff_eq!(val(&r), 1.0, epsilon = 1e-12);
        assert_eq!(r.kind, BoundKind::Capacity);
        let r = bound_cv(&CanonicalForm::QLimAmplifier { g: 2.0 }).unwrap();
        assert_abs_diff_eq!(val(&r), 1.0, epsilon = 1e-12);
        assert_eq!(r.kind, BoundKind::Capacity);
        let r = bound_cv(&CanonicalForm::ThermalLoss { eta: 0.5, nbar: 0.2 }).unwrap();
        assert_eq!(r.kind, BoundKind::Weak);
        assert_eq!(r.hierarchy, None);
    }

    #[test]
    fn cv_zero_boundaries() {
        for k in 1..10 {
            let eta = k as f64 / 10.0;
            let at = bound_cv(&CanonicalForm::ThermalLoss {
                eta,
                nbar: eta / (1.0 - eta),
            })
            .unwrap();
            assert!(val(&at) <= 1e-9);
            let below = bound_cv(&CanonicalForm::ThermalLoss {
                eta,
                nbar: eta / (1.0 - eta) - 1e-6,
            })
            .unwrap();
            assert!(val(&below) < 1e-5 && !below.zero_clamped, "{eta}");
        }
        let r = bound_cv(&CanonicalForm::ThermalLoss { eta: 0.5, nbar: 1.0 }).unwrap();
        assert_eq!(val(&r), 0.0);
        assert!(r.zero_clamped);
        assert_eq!(val(&bound_cv(&CanonicalForm::AdditiveNoise { xi: 1.0 }).unwrap()), 0.0);
        assert_eq!(
            val(&bound_cv(&CanonicalForm::Amplifier { g: 3.0, nbar: 0.5 }).unwrap()),
            0.0
        );
        assert!(bound_cv(&CanonicalForm::Identity).unwrap().value.is_infinite());
        assert!(bound_cv(&CanonicalForm::AdditiveNoise { xi: 0.0 })
            .unwrap()
            .value
            .is_infinite());
        assert!(bound_cv(&CanonicalForm::B1Form).is_err());
    }

    #[test]
    fn cv_aliases_agree() {
        for eta in [0.1, 0.5, 0.93] {
            let a = bound_cv(&CanonicalForm::ThermalLoss { eta, nbar: 0.0 }).unwrap();
            let b = bound_cv(&CanonicalForm::PureLoss { eta }).unwrap();
            assert_eq!(a.value, b.value);
        }
        for g in [1.5, 2.0, 10.0] {
            let a = bound_cv(&CanonicalForm::Amplifier { g, nbar: 0.0 }).unwrap();
            let b = bound_cv(&CanonicalForm::QLimAmplifier { g }).unwrap();
            assert_abs_diff_eq!(val(&a), val(&b), epsilon = 1e-14);
        }
        // small-n̄ amplifier bound approaches the capacity
        let a = bound_cv(&CanonicalForm::Amplifier { g: 2.0, nbar: 1e-9 }).unwrap();
        assert_abs_diff_eq!(val(&a), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn rate_loss_scaling() {
        let r = pure_loss_scaling(1e-3).unwrap();
        assert!((r / LOG2_E - 1.0).abs() < 1e-3);
        let r = pure_loss_scaling(1e-6).unwrap();
        assert!((r / LOG2_E - 1.0).abs() < 1e-6);
        assert!(pure_loss_scaling(0.01).unwrap() > LOG2_E);
        assert!(pure_loss_scaling(0.1).is_err());
    }

    #[test]
    fn reverse_coherent_information() {
        for eta in [0.1, 0.5, 0.9] {
            let rci = rev_coherent_info(eta, 0.5).unwrap();
            let cap = val(&bound_cv(&CanonicalForm::PureLoss { eta }).unwrap());
            assert_abs_diff_eq!(rci, cap, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(
            rev_coherent_info(0.9, 1.5).unwrap(),
            10f64.log2() - 2.0,
            epsilon = 1e-13
        );
        assert!(rev_coherent_info(1.0, 0.5).is_err());
        assert!(rev_coherent_info(0.5, 0.4).is_err());
    }

    #[test]
    fn variances() {
        assert_eq!(relent_variance(&CanonicalForm::PureLoss { eta: 0.3 }).unwrap(), 0.0);
        assert_eq!(relent_variance(&CanonicalForm::QLimAmplifier { g: 3.0 }).unwrap(), 0.0);
        assert_eq!(relent_variance(&CanonicalForm::AdditiveNoise { xi: 1.0 }).unwrap(), 0.0);
        let v = relent_variance(&CanonicalForm::ThermalLoss { eta: 0.8, nbar: 0.1 }).unwrap();
        assert_abs_diff_eq!(v, 0.11 * 8.8f64.log2().powi(2), epsilon = 1e-13);
        assert_abs_diff_eq!(v, 1.0829, epsilon = 1e-3);
        assert!(relent_variance(&CanonicalForm::B1Form).is_err());
    }

    #[test]
    fn c_eps_values() {
        assert_abs_diff_eq!(c_eps(1e-12).unwrap(), 6f64.log2(), epsilon = 1e-10);
        assert_abs_diff_eq!(c_eps(0.5).unwrap(), 6f64.log2() + 2.0 * 3f64.log2(), epsilon = 1e-13);
        assert_abs_diff_eq!(c_eps(0.01).unwrap(), 2.642_67, epsilon = 1e-5);
        assert!(c_eps(0.0).is_err() && c_eps(1.0).is_err());
        assert!(c_eps(0.2).unwrap() > c_eps(0.1).unwrap());
    }

    #[test]
    fn strong_converse_variants() {
        let pl = CanonicalForm::PureLoss { eta: 0.5 };
        let p = StrongConverseParams::for_form(&pl, 100, 0.01, StrongConverseVariant::Distillable).unwrap();
        let r = sc_bound(&pl, &p).unwrap();
        assert_abs_diff_eq!(val(&r), 1.0 + c_eps(0.01).unwrap() / 100.0, epsilon = 1e-14);
        assert_abs_diff_eq!(val(&r), 1.026_43, epsilon = 1e-5);

        let tl = CanonicalForm::ThermalLoss { eta: 0.8, nbar: 0.1 };
        let p = StrongConverseParams::for_form(&tl, 10_000, 0.1, StrongConverseVariant::Chebyshev).unwrap();
        let phi = val(&bound_cv(&tl).unwrap());
        let expect = phi + (p.variance / 9000.0).sqrt() + c_eps(0.1).unwrap() / 1e4;
        assert_abs_diff_eq!(val(&sc_bound(&tl, &p).unwrap()), expect, epsilon = 1e-14);

        for variant in [
            StrongConverseVariant::Chebyshev,
            StrongConverseVariant::GaussianQuantile,
        ] {
            let p = StrongConverseParams::for_form(&tl, 100_000_000, 0.1, variant).unwrap();
            assert!((val(&sc_bound(&tl, &p).unwrap()) - phi).abs() < 1e-3);
        }
        let p = StrongConverseParams::for_form(&tl, 100, 0.1, StrongConverseVariant::GaussianQuantile).unwrap();
        let r = sc_bound(&tl, &p).unwrap();
        assert!(r.residual.is_some());
        assert!(val(&r) < phi);

        let p = StrongConverseParams::for_form(&tl, 100, 0.1, StrongConverseVariant::Distillable).unwrap();
        assert!(sc_bound(&tl, &p).is_err());
        let mut prev = f64::INFINITY;
        for n in [1u64, 10, 100, 1000, 10_000] {
            let p = StrongConverseParams::for_form(&tl, n, 0.05, StrongConverseVariant::Chebyshev).unwrap();
            let v = val(&sc_bound(&tl, &p).unwrap());
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn pipeline_limits() {
        let pl = CanonicalForm::PureLoss { eta: 0.5 };
        let target = 1.0 + c_eps(0.01).unwrap() / 100.0;
        let (r, b) = corrected_pipeline(&pl, 100, 0.01, 1e3, 10.0).unwrap();
        assert!(r.value.is_infinite());
        assert!(b.saturated());
        let mut prev = f64::INFINITY;
        for k in 8..=20 {
            let (r, _) = corrected_pipeline(&pl, 100, 0.01, 10f64.powi(k), 10.0).unwrap();
            let v = r.value.as_f64();
            assert!(v <= prev);
            prev = v;
        }
        assert!((prev - target).abs() < 1e-5, "{prev}");

        let tl = CanonicalForm::ThermalLoss { eta: 0.8, nbar: 0.1 };
        let (r, _) = corrected_pipeline_with_delta(&tl, 500, 0.05, 0.0).unwrap();
        let p = StrongConverseParams {
            n_uses: 500,
            security_eps: 0.05,
            variance: 2.0 * relent_variance(&tl).unwrap(),
            variant: StrongConverseVariant::Chebyshev,
        };
        assert_eq!(r.value, sc_bound(&tl, &p).unwrap().value);
    }

    #[test]
    fn weak_composer() {
        assert_eq!(finite_n_weak_bound(1.0, 0.0, 10, 1.0, Measure::Ree).unwrap(), 1.0);
        let v = finite_n_weak_bound(1.0, 0.01, 100, 1.0, Measure::Ree).unwrap();
        assert_abs_diff_eq!(v, 1.04 + 2.0 * h2_ref(0.01) / 100.0, epsilon = 1e-14);
        assert_abs_diff_eq!(v, 1.041_62, epsilon = 1e-5);
        let sq = finite_n_weak_bound(1.0, 0.01, 100, 1.0, Measure::Squashed).unwrap();
        assert!(sq >= v);
        assert!(finite_n_weak_bound(1.0, 0.3, 100, 1.0, Measure::Squashed).is_err());
        assert!(finite_n_weak_bound(1.0, 0.01, 0, 1.0, Measure::Ree).is_err());
    }

    #[test]
    fn quantile_basics() {
        assert_abs_diff_eq!(normal_quantile(0.5).unwrap(), 0.0, epsilon = 1e-15);
        for p in [0.1, 0.25, 0.4] {
            assert_abs_diff_eq!(
                normal_quantile(p).unwrap() + normal_quantile(1.0 - p).unwrap(),
                0.0,
                epsilon = 1e-12
            );
        }
        assert_abs_diff_eq!(normal_quantile(0.975).unwrap(), 1.959_963_984_540_054, epsilon = 1e-12);
        assert_abs_diff_eq!(normal_quantile(1e-6).unwrap(), -4.753_424_308_822_899, epsilon = 1e-9);
        assert!(normal_quantile(0.0).is_err());
    }
}
