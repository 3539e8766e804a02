//! Truncated photon-number oracle for diagonal Gaussian states.
//!
//! Thermal states and the reduced states of a TMSV are diagonal in the Fock
//! basis with geometric statistics, so their relative entropies reduce to
//! classical sums. This gives an independent check on the moment-based
//! formulas in [`crate::entropy`].

use crate::error::{invalid, Error, Result};

/// Default truncation.
pub const DEFAULT_CUTOFF: usize = 400;
/// Hard cap for automatic cutoff escalation.
pub const MAX_CUTOFF: usize = 4096;
/// Largest tail mass accepted.
pub const TAIL_TOL: f64 = 1e-8;

/// Photon-number probabilities up to `cutoff`, plus the neglected tail mass.
#[derive(Debug, Clone, PartialEq)]
pub struct FockDistribution {
    probs: Vec<f64>,
    cutoff: usize,
    tail_mass: f64,
    ratio: f64,
}

impl FockDistribution {
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// Mean photon number, with the geometric tail beyond the cutoff added
    /// in closed form.
    pub fn mean_photons(&self) -> f64 {
        let head: f64 = self.probs.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
        let q = self.ratio;
        if q <= 0.0 {
            return head;
        }
        // Σ_{k≥m} k(1-q)q^k = q^m (m(1-q) + q)/(1-q)
        let m = (self.cutoff + 1) as f64;
        head + self.tail_mass * (m * (1.0 - q) + q) / (1.0 - q)
    }

    /// `log2 p_k`, computed from the geometric ratio so that levels whose
    /// probability underflows keep a finite logarithm. `-inf` only for true
    /// zeros (`n̄ = 0`, `k ≥ 1`).
    pub fn log2_prob(&self, k: usize) -> f64 {
        if k == 0 || self.ratio <= 0.0 {
            return self.probs[k].log2();
        }
        self.probs[0].log2() + k as f64 * self.ratio.log2()
    }

    /// Shannon entropy of the truncated distribution in bits.
    pub fn entropy_bits(&self) -> f64 {
        self.probs.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum()
    }
}

/// Thermal photon statistics `p_k = n̄^k / (n̄+1)^{k+1}`.
pub fn thermal_pmf(nbar: f64, cutoff: usize) -> Result<FockDistribution> {
    if !(nbar >= 0.0) || !nbar.is_finite() {
        return Err(invalid(format!("thermal_pmf: nbar = {nbar} must be finite and ≥ 0")));
    }
    if cutoff == 0 {
        return Err(invalid("thermal_pmf: cutoff must be at least 1"));
    }
    let q = nbar / (nbar + 1.0);
    let tail_mass = q.powi(cutoff as i32 + 1);
    if tail_mass > TAIL_TOL {
        return Err(Error::CutoffTooSmall {
            cutoff,
            tail_mass,
            tolerance: TAIL_TOL,
        });
    }
    let p0 = 1.0 / (nbar + 1.0);
    let mut probs = Vec::with_capacity(cutoff + 1);
    let mut p = p0;
    for _ in 0..=cutoff {
        probs.push(p);
        p *= q;
    }
    Ok(FockDistribution {
        probs,
        cutoff,
        tail_mass,
        ratio: q,
    })
}

/// Smallest cutoff in `400, 800, ..., 4096` whose tail is below tolerance.
pub fn auto_cutoff(nbar: f64) -> Result<usize> {
    let q = nbar / (nbar + 1.0);
    let mut cutoff = DEFAULT_CUTOFF;
    loop {
        if q.powi(cutoff as i32 + 1) <= TAIL_TOL {
            return Ok(cutoff);
        }
        if cutoff >= MAX_CUTOFF {
            return Err(Error::CutoffTooSmall {
                cutoff,
                tail_mass: q.powi(cutoff as i32 + 1),
                tolerance: TAIL_TOL,
            });
        }
        cutoff = (cutoff * 2).min(MAX_CUTOFF);
    }
}

/// [`thermal_pmf`] with the automatic cutoff policy.
pub fn thermal_pmf_auto(nbar: f64) -> Result<FockDistribution> {
    thermal_pmf(nbar, auto_cutoff(nbar)?)
}

/// Squared Schmidt coefficients of a TMSV with parameter `mu`, i.e. the
/// photon statistics of either reduced mode (thermal with `n̄ = μ - 1/2`).
pub fn tmsv_schmidt(mu: f64, cutoff: usize) -> Result<FockDistribution> {
    if !(mu >= 0.5) {
        return Err(invalid(format!("tmsv_schmidt: mu = {mu} must be ≥ 1/2")));
    }
    thermal_pmf(mu - 0.5, cutoff)
}

/// Classical relative entropy of two truncated distributions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagRelEntropy {
    /// `Σ_k p_k log2(p_k / q_k)` over the retained levels.
    pub value: f64,
    /// Probability mass of `p` and `q` dropped by the truncation.
    pub neglected_mass: f64,
}

/// `Σ_k p(k) log2(p(k)/q(k))` in bits.
pub fn diag_relative_entropy(p: &FockDistribution, q: &FockDistribution) -> Result<DiagRelEntropy> {
    if p.cutoff != q.cutoff {
        return Err(invalid(format!(
            "diag_relative_entropy: cutoffs differ ({} vs {})",
            p.cutoff, q.cutoff
        )));
    }
    let mut value = 0.0;
    for (k, &pk) in p.probs.iter().enumerate() {
        if pk <= 0.0 {
            continue;
        }
        let log_q = q.log2_prob(k);
        if log_q == f64::NEG_INFINITY {
            return Err(Error::Domain(format!(
                "support violation at level {k}: p = {pk:e}, q = 0"
            )));
        }
        value += pk * (p.log2_prob(k) - log_q);
    }
    Ok(DiagRelEntropy {
        value: value.max(0.0),
        neglected_mass: p.tail_mass + q.tail_mass,
    })
}

/// Relative entropy of two thermal states with a shared automatic cutoff.
pub fn thermal_relative_entropy(nbar1: f64, nbar2: f64) -> Result<DiagRelEntropy> {
    let cutoff = auto_cutoff(nbar1)?.max(auto_cutoff(nbar2)?);
    diag_relative_entropy(&thermal_pmf(nbar1, cutoff)?, &thermal_pmf(nbar2, cutoff)?)
}
