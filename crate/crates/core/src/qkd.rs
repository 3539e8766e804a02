//! CV-QKD key rates over thermal-loss channels and security thresholds in
//! terms of the maximum tolerable excess noise.
//!
//! Noise is parametrized by the excess noise `ε = η⁻¹(1-η)n̄` referred to the
//! channel input; the thermal variance seen by the eavesdropper is
//! `ω = n̄ + 1/2`. A protocol is secure below its threshold, the largest `ε`
//! with positive rate.

use std::f64::consts::LOG2_E;

use rayon::prelude::*;

use crate::bounds::rev_coherent_info;
use crate::error::{invalid, Result};
use crate::symplectic::s;

/// Largest transmissivity used by sweeps; `η = 1` is a pole of the rates.
pub const ETA_MAX: f64 = 1.0 - 1e-9;
/// Variance used for the "largely thermal" two-way protocol.
pub const V0_THERMAL: f64 = 1e3;
/// Variance of the coherent-state two-way protocol.
pub const V0_COHERENT: f64 = 0.5;
/// Trusted-noise values used to extrapolate the `ξ → ∞` threshold.
pub const TRUSTED_XI: [f64; 3] = [1e2, 1e3, 1e4];

/// Transmissivity of a channel with `db` loss, `η = 10^{-db/10}`.
pub fn db_to_eta(db: f64) -> f64 {
    10f64.powf(-db / 10.0)
}

/// Loss in dB, `-10 log10 η`.
pub fn eta_to_db(eta: f64) -> f64 {
    -10.0 * eta.log10()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExcessMap {
    pub nbar: f64,
    pub omega: f64,
}

fn check_eta(eta: f64) -> Result<()> {
    if eta > 0.0 && eta < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("transmissivity {eta} must lie in (0, 1)")))
    }
}

fn check_excess(eps: f64) -> Result<()> {
    if eps >= 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("excess noise {eps} must be finite and ≥ 0")))
    }
}

/// Thermal number and variance of the environment for excess noise `ε`:
/// `n̄ = ηε/(1-η)`, `ω = n̄ + 1/2`.
pub fn excess_map(eta: f64, excess_noise: f64) -> Result<ExcessMap> {
    check_eta(eta)?;
    check_excess(excess_noise)?;
    let nbar = eta * excess_noise / (1.0 - eta);
    Ok(ExcessMap {
        nbar,
        omega: nbar + 0.5,
    })
}

/// Inverse of [`excess_map`]: `ε = (1-η)n̄/η`.
pub fn excess_from_nbar(eta: f64, nbar: f64) -> Result<f64> {
    check_eta(eta)?;
    if !(nbar >= 0.0) {
        return Err(invalid(format!("nbar = {nbar} must be ≥ 0")));
    }
    Ok((1.0 - eta) * nbar / eta)
}

/// Lower bound on the secret-key capacity: the reverse coherent information
/// `-log2(1-η) - s(ω)`.
pub fn rate_lb(eta: f64, excess_noise: f64) -> Result<f64> {
    let m = excess_map(eta, excess_noise)?;
    rev_coherent_info(eta, m.omega)
}

/// Reverse-reconciliation rate of the trusted-noise protocol (Gaussian
/// modulation, homodyne detection with basis sifting, Bob's trusted
/// additive noise `ξ_B`), in the high-modulation limit:
///
/// ```text
/// R = ¼ log2[(ω + ξ(1-η)) / ((1-η)((1-η)ω + ξ))] + [s(ν̄) - s(ω)]/2
/// ν̄ = √(ω(1 + 4ωξ(1-η)) / (4(ω + ξ(1-η))))
/// ```
///
/// At `ξ_B = 0` this is half the reverse coherent information.
pub fn rate_trusted(eta: f64, excess_noise: f64, xi_bob: f64) -> Result<f64> {
    let ExcessMap { omega, .. } = excess_map(eta, excess_noise)?;
    if !(xi_bob >= 0.0) || !xi_bob.is_finite() {
        return Err(invalid(format!("trusted noise {xi_bob} must be finite and ≥ 0")));
    }
    let t = 1.0 - eta;
    let a = omega + xi_bob * t;
    let log_term = 0.25 * (a / (t * (t * omega + xi_bob))).log2();
    let nu = (omega * (1.0 + 4.0 * omega * xi_bob * t) / (4.0 * a)).sqrt().max(0.5);
    Ok(log_term + (s(nu)? - s(omega)?) / 2.0)
}

/// [`rate_trusted`] for the coherent-state (heterodyne-free, no sifting)
/// implementation, which doubles the rate.
pub fn rate_trusted_coherent(eta: f64, excess_noise: f64, xi_bob: f64) -> Result<f64> {
    Ok(2.0 * rate_trusted(eta, excess_noise, xi_bob)?)
}

/// Ideal reverse-reconciliation rate of the no-switching protocol (coherent
/// states, heterodyne detection):
///
/// `log2[(2/e) η / ((1-η)(η + 2ω(1-η) + 1))] + s[(1 + 2ω(1-η))/(2η)] - s(ω)`.
pub fn rate_noswitching(eta: f64, excess_noise: f64) -> Result<f64> {
    let ExcessMap { omega, .. } = excess_map(eta, excess_noise)?;
    let t = 1.0 - eta;
    let log_term = (2.0 * eta / (t * (eta + 2.0 * omega * t + 1.0))).log2() - LOG2_E;
    Ok(log_term + s((1.0 + 2.0 * omega * t) / (2.0 * eta))? - s(omega)?)
}

/// Rate of the two-way protocol with Gaussian modulation of thermal states
/// of variance `V0`:
///
/// ```text
/// R = ½ log2[(η²V0 + ω + η³(ω - V0)) / ((1-η)((1-η²)ω + ηV0))] + s(ν̄₂) - s(ω)
/// ν̄₂ = √(ω(1 + 4η²V0ω + η³(1 - 4ωV0)) / (4(η²V0 + ω + η³(ω - V0))))
/// ```
///
/// Unlike the other rates this accepts `η = 0`.
pub fn rate_twoway(eta: f64, excess_noise: f64, v0: f64) -> Result<f64> {
    if !(v0 >= 0.5) || !v0.is_finite() {
        return Err(invalid(format!("thermal variance V0 = {v0} must be finite and ≥ 1/2")));
    }
    let omega = if eta == 0.0 {
        check_excess(excess_noise)?;
        0.5
    } else {
        excess_map(eta, excess_noise)?.omega
    };
    let e2 = eta * eta;
    let e3 = e2 * eta;
    let num = e2 * v0 + omega + e3 * (omega - v0);
    let den = (1.0 - eta) * ((1.0 - e2) * omega + eta * v0);
    let nu2 = (omega * (1.0 + 4.0 * e2 * v0 * omega + e3 * (1.0 - 4.0 * omega * v0)) / (4.0 * num))
        .sqrt()
        .max(0.5);
    Ok(0.5 * (num / den).log2() + s(nu2)? - s(omega)?)
}

/// Root of a rate function in excess noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdSolution {
    pub excess_noise: f64,
    pub iterations: u32,
    /// `|R|` at the returned point (0 when clamped to the bracket).
    pub residual: f64,
    /// The rate changes sign more than once on the bracket; the smallest
    /// root is returned.
    pub multiple_roots: bool,
    /// No sign change: the rate is nonpositive at the lower end (threshold
    /// is the lower end) or positive throughout (threshold is the upper
    /// end).
    pub clamped: bool,
}

const SCAN_POINTS: usize = 64;
const RESIDUAL_TOL: f64 = 1e-10;

/// Largest excess noise with positive rate on `bracket`, by a coarse sign
/// scan followed by bisection.
///
/// Returns the lower end if the rate is already nonpositive there and the
/// upper end if the rate stays positive across the bracket.
pub fn threshold_solve<F>(rate_fn: F, bracket: (f64, f64)) -> Result<ThresholdSolution>
where
    F: Fn(f64) -> Result<f64>,
{
    let (lo, hi) = bracket;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(invalid(format!("invalid bracket [{lo}, {hi}]")));
    }
    let clamped = |x: f64| ThresholdSolution {
        excess_noise: x,
        iterations: 0,
        residual: 0.0,
        multiple_roots: false,
        clamped: true,
    };
    let grid: Vec<f64> = (0..=SCAN_POINTS)
        .map(|k| lo + (hi - lo) * k as f64 / SCAN_POINTS as f64)
        .collect();
    let values = grid.iter().map(|&x| rate_fn(x)).collect::<Result<Vec<f64>>>()?;
    if values[0] <= 0.0 {
        return Ok(clamped(lo));
    }
    let changes: Vec<usize> = (1..values.len())
        .filter(|&k| (values[k - 1] > 0.0) != (values[k] > 0.0))
        .collect();
    let Some(&first) = changes.first() else {
        return Ok(clamped(hi));
    };
    // invariant: rate(a) > 0 ≥ rate(b)
    let (mut a, mut b) = (grid[first - 1], grid[first]);
    let (mut x, mut fx) = (b, values[first]);
    let mut iterations = 0;
    while iterations < 200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        iterations += 1;
        let fm = rate_fn(mid)?;
        if fm > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
        if fm.abs() < fx.abs() {
            (x, fx) = (mid, fm);
        }
        if fm.abs() < RESIDUAL_TOL && b - a < 1e-13 {
            break;
        }
    }
    Ok(ThresholdSolution {
        excess_noise: x,
        iterations,
        residual: fx.abs(),
        multiple_roots: changes.len() > 1,
        clamped: false,
    })
}

/// Threshold of the trusted-noise protocol as `ξ_B → ∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrustedLimit {
    pub value: f64,
    /// Thresholds at each of [`TRUSTED_XI`].
    pub iterates: [f64; 3],
    /// Difference between the last two iterates.
    pub residual: f64,
    /// The iterates increase with `ξ`.
    pub monotone: bool,
    pub iterations: u32,
}

/// `ε_∞(η) = lim_ξ ε(η, ξ)`, by Richardson extrapolation in `1/ξ` over
/// [`TRUSTED_XI`]. The rate's leading terms cancel at `ξ = ∞`, so the limit
/// is not evaluated directly.
pub fn threshold_trusted_inf(eta: f64) -> Result<TrustedLimit> {
    check_eta(eta)?;
    let mut iterates = [0.0; 3];
    let mut iterations = 0;
    for (slot, &xi) in iterates.iter_mut().zip(TRUSTED_XI.iter()) {
        let sol = threshold_solve(|e| rate_trusted(eta, e, xi), (0.0, 1.0))?;
        iterations += sol.iterations;
        *slot = sol.excess_noise;
    }
    let [e2, e3, e4] = iterates;
    // error ∝ 1/ξ and ξ grows tenfold: ε∞ ≈ ε4 + (ε4 - ε3)/9
    let value = (e4 + (e4 - e3) / 9.0).clamp(0.0, 1.0);
    Ok(TrustedLimit {
        value,
        iterates,
        residual: (e4 - e3).abs(),
        monotone: e2 <= e3 && e3 <= e4,
        iterations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LasotaExpansion {
    pub exact: f64,
    pub expansion: f64,
}

/// Reverse coherent information at low transmissivity and low noise
/// against its expansion `(η - n̄) log2 e + n̄ log2 n̄`.
pub fn lasota_expansion(eta: f64, nbar: f64) -> Result<LasotaExpansion> {
    if !(eta > 0.0 && eta <= 0.05) || !(0.0..=0.05).contains(&nbar) {
        return Err(invalid(format!(
            "expansion regime requires 0 < eta ≤ 0.05 and 0 ≤ nbar ≤ 0.05, got eta = {eta}, nbar = {nbar}"
        )));
    }
    let exact = rev_coherent_info(eta, nbar + 0.5)?;
    let nlogn = if nbar > 0.0 { nbar * nbar.log2() } else { 0.0 };
    Ok(LasotaExpansion {
        exact,
        expansion: (eta - nbar) * LOG2_E + nlogn,
    })
}

/// Protocols reported by [`sweep_thresholds`], in column order.
pub const PROTOCOLS: [&str; 6] = [
    "eps_ub",
    "eps_lb",
    "eps_inf_trusted",
    "no_switching",
    "two_way_coherent",
    "two_way_thermal",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdPoint {
    pub loss_db: f64,
    /// Transmissivity actually evaluated (see `eta_clamped`).
    pub eta: f64,
    pub excess_noise: f64,
    pub iterations: u32,
    pub residual: f64,
    /// `η` was capped at [`ETA_MAX`] to avoid the pole at zero loss.
    pub eta_clamped: bool,
    pub multiple_roots: bool,
    /// Trusted-noise iterates were not increasing in `ξ`.
    pub non_monotone: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdCurve {
    pub protocol: &'static str,
    /// Sorted by `loss_db`.
    pub points: Vec<ThresholdPoint>,
}

impl ThresholdCurve {
    pub fn max_iterations(&self) -> u32 {
        self.points.iter().map(|p| p.iterations).max().unwrap_or(0)
    }

    pub fn max_residual(&self) -> f64 {
        self.points.iter().map(|p| p.residual).fold(0.0, f64::max)
    }
}

fn point_thresholds(loss_db: f64) -> Result<[ThresholdPoint; 6]> {
    if !(loss_db >= 0.0) || !loss_db.is_finite() {
        return Err(invalid(format!("loss {loss_db} dB must be finite and ≥ 0")));
    }
    let raw = db_to_eta(loss_db);
    let eta = raw.min(ETA_MAX);
    let eta_clamped = raw > ETA_MAX;
    let base = ThresholdPoint {
        loss_db,
        eta,
        excess_noise: 1.0,
        iterations: 0,
        residual: 0.0,
        eta_clamped,
        multiple_roots: false,
        non_monotone: false,
    };
    let from = |sol: ThresholdSolution| ThresholdPoint {
        excess_noise: sol.excess_noise,
        iterations: sol.iterations,
        residual: sol.residual,
        multiple_roots: sol.multiple_roots,
        ..base
    };
    let unit = (0.0, 1.0);
    let lb = threshold_solve(|e| rate_lb(eta, e), unit)?;
    let inf = threshold_trusted_inf(eta)?;
    let ns = threshold_solve(|e| rate_noswitching(eta, e), unit)?;
    let coh = threshold_solve(|e| rate_twoway(eta, e, V0_COHERENT), unit)?;
    let th = threshold_solve(|e| rate_twoway(eta, e, V0_THERMAL), unit)?;
    Ok([
        base,
        from(lb),
        ThresholdPoint {
            excess_noise: inf.value,
            iterations: inf.iterations,
            residual: inf.residual,
            non_monotone: !inf.monotone,
            ..base
        },
        from(ns),
        from(coh),
        from(th),
    ])
}

/// Security thresholds of every protocol in [`PROTOCOLS`] over a grid of
/// losses in dB. Points are evaluated in parallel and returned sorted.
pub fn sweep_thresholds(db_grid: &[f64]) -> Result<Vec<ThresholdCurve>> {
    if db_grid.is_empty() {
        return Err(invalid("threshold sweep needs a nonempty loss grid"));
    }
    let mut grid = db_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    let rows = grid
        .par_iter()
        .map(|&db| point_thresholds(db))
        .collect::<Result<Vec<_>>>()?;
    Ok(PROTOCOLS
        .iter()
        .enumerate()
        .map(|(k, &protocol)| ThresholdCurve {
            protocol,
            points: rows.iter().map(|r| r[k]).collect(),
        })
        .collect())
}
