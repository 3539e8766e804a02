//! Teleportation simulation of bosonic channels.
//!
//! Covers the BK channel (teleportation over a finite-energy TMSV), the
//! composition `E ∘ I^μ`, finite-resource simulations of phase-insensitive
//! channels, the energy-constrained simulation error surrogate and the
//! peeling bookkeeping that propagates it over `n` channel uses.

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};

use crate::channels::{apply, to_spec, CanonicalForm, GaussianChannelSpec};
use crate::entropy::{bk_fidelity, bk_infidelity, bk_infidelity_sq};
use crate::error::{invalid, Error, Result};
use crate::symplectic::{is_physical, two_mode_matrix, CovMatrix, GaussianState};

/// Added noise of the BK channel, `ξ(μ) = 2μ - √(4μ² - 1)`.
pub fn bk_noise(mu: f64) -> Result<f64> {
    if !(mu >= 0.5) || !mu.is_finite() {
        return Err(invalid(format!("bk_noise: mu = {mu} must be finite and ≥ 1/2")));
    }
    // rationalized: 1 / (2μ + √(4μ² - 1))
    Ok(1.0 / (2.0 * mu + (4.0 * mu * mu - 1.0).sqrt()))
}

/// Teleportation simulation `E^μ = E ∘ I^μ`: `N → N + ξ(μ)TTᵀ`.
pub fn simulate_compose(form: &CanonicalForm, mu: f64) -> Result<GaussianChannelSpec> {
    let spec = to_spec(form)?;
    let xi = bk_noise(mu)?;
    let t = *spec.t();
    spec.with_noise(spec.n() + t * t.transpose() * xi)
}

/// Resource state `σ_ν` simulating `E_{η,ν}` through BK teleportation with
/// gain `√η`.
///
/// `ν = e^{-2r}(η+1)/2` fixes the entanglement parameter `r ≥ 0`; the CM is
/// `½[[aI, cZ], [cZ, bI]]` with
///
/// ```text
/// b = (-|η-1| + ηe^{2r} + e^{-2r}) / (-e^{2r}|η-1| + η + 1)
/// a = (b + (η-1)e^{-2r}) / η,   c = (b - e^{-2r}) / √η
/// ```
///
/// The `b` denominator vanishes at quantum-limited points
/// (`ν = |η-1|/2`), where [`pure_loss_resource`] must be used instead.
pub fn finite_resource_state(form: &CanonicalForm) -> Result<GaussianState> {
    form.validate()?;
    let (eta, nu) = match form.normalized() {
        f @ (CanonicalForm::ThermalLoss { .. }
        | CanonicalForm::Amplifier { .. }
        | CanonicalForm::AdditiveNoise { .. }) => f.phase_insensitive_params().expect("phase insensitive"),
        _ => {
            return Err(invalid(format!(
                "finite_resource_state: {form} is not a phase-insensitive channel"
            )))
        }
    };
    finite_resource_from_params(eta, nu)
}

/// [`finite_resource_state`] from the transmission `η` and added noise `ν`.
pub fn finite_resource_from_params(eta: f64, nu: f64) -> Result<GaussianState> {
    if !(eta > 0.0) || !(nu > 0.0) {
        return Err(invalid(format!(
            "finite resource requires η > 0 and ν > 0, got η = {eta}, ν = {nu}"
        )));
    }
    let em2r = 2.0 * nu / (eta + 1.0);
    // the edge ν = (η+1)/2 (zero squeezing) is valid; allow rounding slack
    if em2r > 1.0 + 1e-12 {
        return Err(invalid(format!(
            "ν = {nu} exceeds (η+1)/2 = {}: entanglement parameter would be negative",
            (eta + 1.0) / 2.0
        )));
    }
    let em2r = em2r.min(1.0);
    let e2r = 1.0 / em2r;
    let gap = (eta - 1.0).abs();
    let denom = -e2r * gap + eta + 1.0;
    if denom.abs() < 1e-9 {
        return Err(Error::QuantumLimitedSingularity(format!(
            "b diverges at ν = |η-1|/2 = {} (η = {eta})",
            gap / 2.0
        )));
    }
    if denom < 0.0 {
        return Err(invalid(format!(
            "ν = {nu} is below the quantum limit |η-1|/2 = {}",
            gap / 2.0
        )));
    }
    let b = (-gap + eta * e2r + em2r) / denom;
    let a = (b + (eta - 1.0) * em2r) / eta;
    let c = (b - em2r) / eta.sqrt();
    let cov = CovMatrix::new(two_mode_matrix(a / 2.0, c / 2.0, b / 2.0))?;
    if !is_physical(&cov) {
        return Err(Error::InternalConsistency(format!(
            "finite resource for η = {eta}, ν = {nu} is unphysical"
        )));
    }
    GaussianState::zero_mean(cov)
}

/// Resource `σ_η` for the pure-loss channel: a TMSV-like CM with
/// `a = (η+1)/(2(1-η))`, teleported with gain `√η`.
pub fn pure_loss_resource(eta: f64) -> Result<GaussianState> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(invalid(format!("pure_loss_resource: eta = {eta} must lie in (0, 1)")));
    }
    let a = (eta + 1.0) / (2.0 * (1.0 - eta));
    let c = (a * a - 0.25).sqrt();
    GaussianState::zero_mean(CovMatrix::new(two_mode_matrix(a, c, a))?)
}

/// Channel realized by BK teleportation with gain `k` over a two-mode
/// resource (mode 0 is the sender's half).
///
/// With `q_out = k q_in + q_B - k q_A` and `p_out = k p_in + p_B + k p_A`,
/// the added noise is `Cov(x_B - kZx_A) = B + k²ZAZ - k(ZC + CᵀZ)` for
/// resource blocks `A`, `C = Cov(x_A, x_B)`, `B`.
pub fn bk_gain_channel(resource: &GaussianState, gain: f64) -> Result<GaussianChannelSpec> {
    if resource.nmodes() != 2 {
        return Err(invalid("BK resource must be a two-mode state"));
    }
    if !(gain > 0.0) {
        return Err(invalid(format!("gain must be positive, got {gain}")));
    }
    let v = resource.cov().matrix();
    let block = |r: usize, c: usize| Matrix2::new(v[(r, c)], v[(r, c + 1)], v[(r + 1, c)], v[(r + 1, c + 1)]);
    let a = block(0, 0);
    let c = block(0, 2);
    let b = block(2, 2);
    let z = Matrix2::new(1.0, 0.0, 0.0, -1.0);
    let noise = b + z * a * z * (gain * gain) - (z * c + c.transpose() * z) * gain;
    let m = resource.mean();
    let d = Vector2::new(m[2] - gain * m[0], m[3] + gain * m[1]);
    GaussianChannelSpec::new(Matrix2::identity() * gain, noise, d)
}

/// Maximum deviation between the BK-simulated channel and `target`, over a
/// fixed grid of single-mode input states (CM and mean entries) plus the
/// channel matrices themselves.
pub fn verify_finite_resource(resource: &GaussianState, gain: f64, target: &GaussianChannelSpec) -> Result<f64> {
    let simulated = bk_gain_channel(resource, gain)?;
    let mut worst = simulated.max_abs_diff(target);
    for input in test_inputs() {
        let a = apply(&simulated, &input, 0)?;
        let b = apply(target, &input, 0)?;
        worst = worst
            .max((a.cov().matrix() - b.cov().matrix()).amax())
            .max((a.mean() - b.mean()).amax());
    }
    Ok(worst)
}

fn test_inputs() -> Vec<GaussianState> {
    let cms: [[f64; 4]; 5] = [
        [0.5, 0.0, 0.0, 0.5],
        [1.5, 0.0, 0.0, 1.5],
        [2.0, 0.0, 0.0, 0.125],
        [1.2, 0.3, 0.3, 0.9],
        [7.0, -2.0, -2.0, 3.0],
    ];
    let means = [[0.0, 0.0], [1.0, -0.5], [0.0, 2.0], [-3.0, 0.25], [0.5, 0.5]];
    cms.iter()
        .zip(means.iter())
        .map(|(v, m)| {
            GaussianState::new(
                DVector::from_row_slice(m),
                CovMatrix::new(DMatrix::from_row_slice(2, 2, v)).expect("symmetric"),
            )
            .expect("physical test input")
        })
        .collect()
}

/// Simulation-error surrogate `δ̂ = 2√(1 - F(μ, μ̃_max)²)`, with
/// `μ̃_max = N/2 + 1/2` the TMSV input allowed by a total photon budget `N`.
///
/// By channel monotonicity the fidelity of `E ∘ I^μ` against `E` is bounded
/// by that of the identity case, and the BK fidelity decreases in `μ̃`, so
/// the witness with maximal energy is the worst case over TMSV inputs. The
/// upper Fuchs–van de Graaf bound turns it into a trace-distance bound. This
/// is a diagnostic, not a certified energy-constrained diamond norm.
pub fn sim_error_budget(form: &CanonicalForm, mu: f64, n_constraint: f64) -> Result<f64> {
    form.validate()?;
    if !(mu > 0.5) {
        return Err(invalid(format!("sim_error_budget: mu = {mu} must exceed 1/2")));
    }
    if !(n_constraint >= 0.0) || !n_constraint.is_finite() {
        return Err(invalid(format!(
            "sim_error_budget: N = {n_constraint} must be finite and ≥ 0"
        )));
    }
    let mu_in = max_input_energy(n_constraint);
    Ok(2.0 * bk_infidelity_sq(mu, mu_in)?.sqrt())
}

/// `μ̃` of a TMSV with `N` total photons over both modes.
pub fn max_input_energy(n_constraint: f64) -> f64 {
    n_constraint / 2.0 + 0.5
}

/// Error ledger for a teleportation-simulated protocol of `n_uses`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorBudget {
    pub mu: Option<f64>,
    pub n_constraint: Option<f64>,
    pub n_uses: u64,
    /// Per-use trace-distance error.
    pub delta: f64,
    /// Output infidelity bound `min{1, nδ/2}`.
    pub eps_tp: f64,
    pub security_eps: f64,
    /// `min{1, (√ε + √ε_TP)²}`.
    pub eps_composed: f64,
}

impl ErrorBudget {
    pub fn saturated(&self) -> bool {
        self.eps_composed >= 1.0
    }
}

/// Peeling: `n` uses with per-use error `δ` give output trace distance at
/// most `nδ`, hence infidelity `ε_TP ≤ nδ/2`, composed with the security
/// parameter.
pub fn peel(n_uses: u64, delta: f64, security_eps: f64) -> Result<ErrorBudget> {
    if n_uses == 0 {
        return Err(invalid("peel: n_uses must be at least 1"));
    }
    if !(delta >= 0.0) {
        return Err(invalid(format!("peel: delta = {delta} must be ≥ 0")));
    }
    if !(security_eps > 0.0 && security_eps < 1.0) {
        return Err(invalid(format!(
            "peel: security_eps = {security_eps} must lie in (0, 1)"
        )));
    }
    let eps_tp = (n_uses as f64 * delta / 2.0).min(1.0);
    let eps_composed = ((security_eps.sqrt() + eps_tp.sqrt()).powi(2)).min(1.0);
    Ok(ErrorBudget {
        mu: None,
        n_constraint: None,
        n_uses,
        delta,
        eps_tp,
        security_eps,
        eps_composed,
    })
}

/// Infidelity matrix of the BK channel against the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub mu_grid: Vec<f64>,
    pub mu_in_grid: Vec<f64>,
    /// `infidelity[i][j] = 1 - F(mu_grid[i], mu_in_grid[j])`.
    pub infidelity: Vec<Vec<f64>>,
    /// Infidelity at the largest `μ`, per input energy (strong convergence
    /// drives these to 0).
    pub limit_in_mu: Vec<f64>,
    /// Infidelity at the largest `μ̃`, per resource energy (non-uniform
    /// convergence drives these to 1).
    pub limit_in_mu_in: Vec<f64>,
    /// Least-squares slope of `ln F` against `ln μ̃` at the largest `μ`,
    /// over inputs with `μ̃ ≥ 100 μ` (the asymptotic regime); `None` with
    /// fewer than two such inputs.
    pub fitted_decay_exponent: Option<f64>,
}

pub fn convergence_diagnostic(mu_grid: &[f64], mu_in_grid: &[f64]) -> Result<ConvergenceReport> {
    if mu_grid.is_empty() || mu_in_grid.is_empty() {
        return Err(invalid("convergence_diagnostic: grids must be nonempty"));
    }
    let infidelity = mu_grid
        .iter()
        .map(|&mu| {
            mu_in_grid
                .iter()
                .map(|&mt| bk_infidelity(mu, mt))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let last_row = infidelity.last().expect("nonempty").clone();
    let limit_in_mu_in = infidelity.iter().map(|row| *row.last().expect("nonempty")).collect();
    let mu_max = *mu_grid.last().expect("nonempty");
    let tail: Vec<f64> = mu_in_grid.iter().copied().filter(|&mt| mt >= 100.0 * mu_max).collect();
    let fitted_decay_exponent = if tail.len() >= 2 {
        let pts = tail
            .iter()
            .map(|&mt| Ok((mt.ln(), bk_fidelity(mu_max, mt)?.ln())))
            .collect::<Result<Vec<_>>>()?;
        least_squares_slope(&pts)
    } else {
        None
    };
    Ok(ConvergenceReport {
        mu_grid: mu_grid.to_vec(),
        mu_in_grid: mu_in_grid.to_vec(),
        infidelity,
        limit_in_mu: last_row,
        limit_in_mu_in,
        fitted_decay_exponent,
    })
}

fn least_squares_slope(pts: &[(f64, f64)]) -> Option<f64> {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
