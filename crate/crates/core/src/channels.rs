//! Channel models: single-mode Gaussian channels in canonical form and
//! qubit channels.

use std::fmt;

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};

use crate::error::{invalid, Error, Result};
use crate::symplectic::{is_physical, make_tmsv, CovMatrix, GaussianState};

/// Single-mode Gaussian channel `x̄ → Tx̄ + d`, `V → TVTᵀ + N`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianChannelSpec {
    t: Matrix2<f64>,
    n: Matrix2<f64>,
    d: Vector2<f64>,
}

impl GaussianChannelSpec {
    /// Checks `N = Nᵀ ⪰ 0` and `det N ≥ (det T - 1)²/4` (vacuum noise `1/2`).
    pub fn new(t: Matrix2<f64>, n: Matrix2<f64>, d: Vector2<f64>) -> Result<Self> {
        if t.iter().chain(n.iter()).chain(d.iter()).any(|x| !x.is_finite()) {
            return Err(invalid("channel spec has non-finite entries"));
        }
        if (n - n.transpose()).amax() > 1e-12 * n.amax().max(1.0) {
            return Err(invalid("noise matrix N is not symmetric"));
        }
        let n = (n + n.transpose()) * 0.5;
        let spec = Self { t, n, d };
        if !spec.is_bona_fide() {
            return Err(invalid(format!(
                "channel is not bona fide: det N = {} < (det T - 1)²/4 = {}",
                n.determinant(),
                (t.determinant() - 1.0).powi(2) / 4.0
            )));
        }
        Ok(spec)
    }

    pub fn t(&self) -> &Matrix2<f64> {
        &self.t
    }

    pub fn n(&self) -> &Matrix2<f64> {
        &self.n
    }

    pub fn d(&self) -> &Vector2<f64> {
        &self.d
    }

    pub fn is_bona_fide(&self) -> bool {
        let min_eig = self.n.symmetric_eigenvalues().min();
        // vacuum CM is I/2, so the uncertainty bound carries a factor 1/4
        min_eig >= -1e-12 && self.n.determinant() >= (self.t.determinant() - 1.0).powi(2) / 4.0 - 1e-10
    }

    /// Rank of the noise matrix (eigenvalues above `1e-12`).
    pub fn noise_rank(&self) -> usize {
        self.n.symmetric_eigenvalues().iter().filter(|&&e| e > 1e-12).count()
    }

    /// Largest entrywise difference between two specs.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.t - other.t)
            .amax()
            .max((self.n - other.n).amax())
            .max((self.d - other.d).amax())
    }

    pub(crate) fn with_noise(&self, n: Matrix2<f64>) -> Result<Self> {
        Self::new(self.t, n, self.d)
    }
}

/// Canonical forms of single-mode Gaussian channels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CanonicalForm {
    /// Thermal-loss channel, transmissivity `eta` and thermal number `nbar`.
    ThermalLoss {
        eta: f64,
        nbar: f64,
    },
    /// Phase-insensitive amplifier with gain `g > 1`.
    Amplifier {
        g: f64,
        nbar: f64,
    },
    /// Additive-noise channel `V → V + ξI`.
    AdditiveNoise {
        xi: f64,
    },
    PureLoss {
        eta: f64,
    },
    QLimAmplifier {
        g: f64,
    },
    /// `V → V + diag(0, 1)`.
    B1Form,
    Identity,
}

impl CanonicalForm {
    pub fn validate(&self) -> Result<()> {
        use CanonicalForm::*;
        let ok = match *self {
            ThermalLoss { eta, nbar } => (0.0..=1.0).contains(&eta) && nbar >= 0.0 && nbar.is_finite(),
            Amplifier { g, nbar } => g > 1.0 && g.is_finite() && nbar >= 0.0 && nbar.is_finite(),
            AdditiveNoise { xi } => xi >= 0.0 && xi.is_finite(),
            PureLoss { eta } => (0.0..=1.0).contains(&eta),
            QLimAmplifier { g } => g > 1.0 && g.is_finite(),
            B1Form | Identity => true,
        };
        if ok {
            Ok(())
        } else {
            Err(invalid(format!("parameters out of range for {self}")))
        }
    }

    /// Reduces aliases: pure loss to thermal loss with `n̄ = 0`, the
    /// quantum-limited amplifier to `n̄ = 0`, identity to zero added noise.
    pub fn normalized(&self) -> Self {
        match *self {
            CanonicalForm::PureLoss { eta } => CanonicalForm::ThermalLoss { eta, nbar: 0.0 },
            CanonicalForm::QLimAmplifier { g } => CanonicalForm::Amplifier { g, nbar: 0.0 },
            CanonicalForm::Identity => CanonicalForm::AdditiveNoise { xi: 0.0 },
            other => other,
        }
    }

    /// Isotropic transmission factor and added noise `(τ, ν)` with
    /// `V → τV + νI`, for phase-insensitive forms.
    pub fn phase_insensitive_params(&self) -> Option<(f64, f64)> {
        match self.normalized() {
            CanonicalForm::ThermalLoss { eta, nbar } => Some((eta, (1.0 - eta) * (nbar + 0.5))),
            CanonicalForm::Amplifier { g, nbar } => Some((g, (g - 1.0) * (nbar + 0.5))),
            CanonicalForm::AdditiveNoise { xi } => Some((1.0, xi)),
            _ => None,
        }
    }
}

impl fmt::Display for CanonicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            CanonicalForm::ThermalLoss { eta, nbar } => write!(f, "thermal-loss(eta={eta}, nbar={nbar})"),
            CanonicalForm::Amplifier { g, nbar } => write!(f, "amplifier(g={g}, nbar={nbar})"),
            CanonicalForm::AdditiveNoise { xi } => write!(f, "additive-noise(xi={xi})"),
            CanonicalForm::PureLoss { eta } => write!(f, "pure-loss(eta={eta})"),
            CanonicalForm::QLimAmplifier { g } => write!(f, "ql-amplifier(g={g})"),
            CanonicalForm::B1Form => write!(f, "b1"),
            CanonicalForm::Identity => write!(f, "identity"),
        }
    }
}

/// `(T, N, d)` of a canonical form.
pub fn to_spec(form: &CanonicalForm) -> Result<GaussianChannelSpec> {
    form.validate()?;
    if let CanonicalForm::B1Form = form {
        return GaussianChannelSpec::new(Matrix2::identity(), Matrix2::new(0.0, 0.0, 0.0, 1.0), Vector2::zeros());
    }
    let (tau, nu) = form
        .phase_insensitive_params()
        .expect("every other form is phase insensitive");
    GaussianChannelSpec::new(
        Matrix2::identity() * tau.sqrt(),
        Matrix2::identity() * nu,
        Vector2::zeros(),
    )
}

/// Applies a single-mode channel to mode `mode` of `state`.
pub fn apply(spec: &GaussianChannelSpec, state: &GaussianState, mode: usize) -> Result<GaussianState> {
    let nmodes = state.nmodes();
    if mode >= nmodes {
        return Err(invalid(format!("mode {mode} out of range for {nmodes}-mode state")));
    }
    let dim = 2 * nmodes;
    let mut big_t = DMatrix::<f64>::identity(dim, dim);
    let mut big_n = DMatrix::<f64>::zeros(dim, dim);
    let mut big_d = DVector::<f64>::zeros(dim);
    let o = 2 * mode;
    for i in 0..2 {
        big_d[o + i] = spec.d[i];
        for j in 0..2 {
            big_t[(o + i, o + j)] = spec.t[(i, j)];
            big_n[(o + i, o + j)] = spec.n[(i, j)];
        }
    }
    let v = &big_t * state.cov().matrix() * big_t.transpose() + big_n;
    let v = (&v + v.transpose()) * 0.5;
    let cov = CovMatrix::new(v)?;
    if !is_physical(&cov) {
        return Err(Error::InternalConsistency(
            "channel output violates the uncertainty principle".into(),
        ));
    }
    GaussianState::new(&big_t * state.mean() + big_d, cov)
}

/// Quasi-Choi state: the channel applied to the second mode of a TMSV.
pub fn quasi_choi(form: &CanonicalForm, mu: f64) -> Result<GaussianState> {
    apply(&to_spec(form)?, &make_tmsv(mu)?, 1)
}

/// Three-valued flag for structural properties the library can only
/// certify in part of the parameter space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Yes,
    No,
    Unknown,
}

/// Structural classification of a canonical form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChannelChecks {
    pub bona_fide: bool,
    /// Certified only for thermal loss with `n̄ ≥ η/(1-η)`.
    pub entanglement_breaking: Verdict,
    /// The flux bound is identically zero (thermal loss `n̄ ≥ η/(1-η)`,
    /// amplifier `n̄ ≥ 1/(g-1)`, additive noise `ξ ≥ 1`).
    pub zero_bound_region: bool,
    pub tele_covariant: bool,
    /// Teleportation simulation converges uniformly iff `rank N = 2`.
    pub uniform_convergence: bool,
}

pub fn channel_checks(form: &CanonicalForm) -> ChannelChecks {
    let spec = to_spec(form).ok();
    let bona_fide = spec.as_ref().is_some_and(|s| s.is_bona_fide());
    let uniform_convergence = spec.as_ref().is_some_and(|s| s.noise_rank() == 2);
    let (eb, zero) = match form.normalized() {
        CanonicalForm::ThermalLoss { eta, nbar } => {
            let at_or_above = eta < 1.0 && nbar >= eta / (1.0 - eta);
            (if at_or_above { Verdict::Yes } else { Verdict::Unknown }, at_or_above)
        }
        CanonicalForm::Amplifier { g, nbar } => (Verdict::Unknown, nbar >= 1.0 / (g - 1.0)),
        CanonicalForm::AdditiveNoise { xi } => (Verdict::Unknown, xi >= 1.0),
        _ => (Verdict::Unknown, false),
    };
    ChannelChecks {
        bona_fide,
        entanglement_breaking: eb,
        zero_bound_region: zero,
        tele_covariant: bona_fide,
        uniform_convergence,
    }
}

/// Qubit channels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DVChannelSpec {
    /// Pauli channel with probabilities of `I, X, Y, Z`.
    Pauli([f64; 4]),
    /// `ρ → (1-p)ρ + pI/2`.
    Depolarizing(f64),
    /// `ρ → (1-p)ρ + pZρZ`.
    Dephasing(f64),
    /// `ρ → (1-p)ρ + p|e⟩⟨e|`.
    Erasure(f64),
    /// Damping probability `p` (Kraus `√p|0⟩⟨1|`).
    AmplitudeDamping(f64),
}

impl DVChannelSpec {
    pub fn validate(&self) -> Result<()> {
        let in_unit = |p: f64| (0.0..=1.0).contains(&p);
        match *self {
            DVChannelSpec::Pauli(ps) => {
                if !ps.iter().all(|&p| in_unit(p)) {
                    return Err(invalid("Pauli probabilities must lie in [0, 1]"));
                }
                let total: f64 = ps.iter().sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(invalid(format!("Pauli probabilities sum to {total}, not 1")));
                }
                Ok(())
            }
            DVChannelSpec::Depolarizing(p)
            | DVChannelSpec::Dephasing(p)
            | DVChannelSpec::Erasure(p)
            | DVChannelSpec::AmplitudeDamping(p) => {
                if in_unit(p) {
                    Ok(())
                } else {
                    Err(invalid(format!("probability {p} outside [0, 1]")))
                }
            }
        }
    }

    /// Bell-diagonal probability vector of the Choi matrix, for Pauli-type
    /// channels.
    pub fn pauli_probs(&self) -> Option<[f64; 4]> {
        match *self {
            DVChannelSpec::Pauli(ps) => Some(ps),
            DVChannelSpec::Depolarizing(p) => Some([1.0 - 0.75 * p, p / 4.0, p / 4.0, p / 4.0]),
            DVChannelSpec::Dephasing(p) => Some([1.0 - p, 0.0, 0.0, p]),
            _ => None,
        }
    }
}

impl fmt::Display for DVChannelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            DVChannelSpec::Pauli(ps) => write!(f, "pauli(p0={}, p1={}, p2={}, p3={})", ps[0], ps[1], ps[2], ps[3]),
            DVChannelSpec::Depolarizing(p) => write!(f, "depolarizing(p={p})"),
            DVChannelSpec::Dephasing(p) => write!(f, "dephasing(p={p})"),
            DVChannelSpec::Erasure(p) => write!(f, "erasure(p={p})"),
            DVChannelSpec::AmplitudeDamping(p) => write!(f, "amplitude-damping(p={p})"),
        }
    }
}
