//! Entropic functionals of Gaussian states.
//!
//! The relative entropy is evaluated from first and second moments through
//! the Gibbs matrix `G = 2iΩ coth⁻¹(2iVΩ)`, so no Williamson symplectic
//! matrix is ever needed.

use std::f64::consts::LN_2;

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{invalid, Error, Result};
use crate::symplectic::{
    h_unchecked, is_physical, omega_matrix, symplectic_eigenvalues, CovMatrix, GaussianState, SpectralFrame,
};

/// Symplectic eigenvalues closer than this to 1/2 make `G` singular.
pub const PURE_GUARD: f64 = 1e-9;

/// Negative relative entropies above `-NEG_CLAMP` are rounded to zero.
pub const NEG_CLAMP: f64 = 1e-9;

/// Gibbs matrix of a strictly mixed Gaussian state: `ρ ∝ exp(-xᵀGx/2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsMatrix {
    entries: DMatrix<f64>,
}

impl GibbsMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.entries
    }
}

/// `coth⁻¹(z) = ½ ln((z+1)/(z-1))` for real `z > 1`.
fn acoth(z: f64) -> f64 {
    0.5 * (2.0 / (z - 1.0)).ln_1p()
}

/// Gibbs matrix of `cm`.
///
/// The eigenvalues of `2iVΩ` are `±2ν` and `coth⁻¹` is odd, so
/// `coth⁻¹(2iVΩ) = iVΩ·φ(-(VΩ)²)` with `φ(ν²) = coth⁻¹(2ν)/ν`. Pulling this
/// through the symmetric similarity `S = V^{1/2}ΩᵀVΩV^{1/2} = UΛUᵀ` gives
///
/// ```text
/// G = 2 V^{-1/2} U diag(ν coth⁻¹(2ν)) Uᵀ V^{-1/2}
/// ```
///
/// which is real and symmetric by construction.
pub fn gibbs_matrix(cm: &CovMatrix) -> Result<GibbsMatrix> {
    if !is_physical(cm) {
        return Err(Error::Domain("gibbs_matrix: covariance matrix is unphysical".into()));
    }
    let frame = SpectralFrame::new(cm.matrix())?;
    let mut weights = DVector::zeros(frame.nu_sq.len());
    for (w, &nu_sq) in weights.iter_mut().zip(frame.nu_sq.iter()) {
        let nu = nu_sq.max(0.0).sqrt();
        if nu <= 0.5 + PURE_GUARD {
            return Err(Error::SingularState(format!(
                "symplectic eigenvalue {nu} is within {PURE_GUARD:e} of 1/2; blend with thermal noise to regularize"
            )));
        }
        *w = nu * acoth(2.0 * nu);
    }
    let inner = &frame.vectors * DMatrix::from_diagonal(&weights) * frame.vectors.transpose();
    let g = (&frame.inv_sqrt_v * inner * &frame.inv_sqrt_v) * 2.0;
    if g.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numeric("gibbs_matrix: non-finite entries".into()));
    }
    let g = (&g + g.transpose()) * 0.5;
    Ok(GibbsMatrix { entries: g })
}

/// `ln det(V + iΩ/2)`, via complex LU.
fn ln_det_uncertainty(cm: &CovMatrix) -> Result<f64> {
    let dim = cm.dim();
    let om = omega_matrix(cm.nmodes());
    let m = DMatrix::<Complex<f64>>::from_fn(dim, dim, |i, j| Complex::new(cm.get(i, j), 0.5 * om[(i, j)]));
    let det = m.determinant();
    if !(det.re > 0.0) {
        return Err(Error::Numeric(format!("det(V + iΩ/2) = {det} is not positive")));
    }
    let ln = det.ln();
    if ln.im.abs() > 1e-8 {
        return Err(Error::Numeric(format!(
            "imaginary residue {:e} in ln det(V + iΩ/2)",
            ln.im
        )));
    }
    Ok(ln.re)
}

/// The Σ functional with zero mean offset.
pub fn sigma_term(v1: &CovMatrix, v2: &CovMatrix) -> Result<f64> {
    sigma_term_with_offset(v1, v2, None)
}

/// The Σ functional of two states (mean offset `δ = x̄1 - x̄2` included).
pub fn sigma_term_states(rho1: &GaussianState, rho2: &GaussianState) -> Result<f64> {
    let delta = rho1.mean() - rho2.mean();
    sigma_term_with_offset(rho1.cov(), rho2.cov(), Some(&delta))
}

/// `Σ(V1, V2) = [ln det(V2 + iΩ/2) + Tr(V1 G2) + δᵀ G2 δ] / (2 ln 2)`.
pub fn sigma_term_with_offset(v1: &CovMatrix, v2: &CovMatrix, delta: Option<&DVector<f64>>) -> Result<f64> {
    if v1.dim() != v2.dim() {
        return Err(invalid(format!(
            "sigma_term: dimension mismatch ({} vs {})",
            v1.dim(),
            v2.dim()
        )));
    }
    if let Some(d) = delta {
        if d.len() != v1.dim() {
            return Err(invalid("sigma_term: mean offset has the wrong length"));
        }
    }
    let g2 = gibbs_matrix(v2)?;
    let g = g2.matrix();
    let ln_det = ln_det_uncertainty(v2)?;
    let trace = (v1.matrix() * g).trace();
    let quad = delta.map_or(0.0, |d| (d.transpose() * g * d)[(0, 0)]);
    Ok((ln_det + trace + quad) / (2.0 * LN_2))
}

/// Relative entropy `S(ρ1‖ρ2) = -Σ(V1, V1) + Σ(V1, V2)` in bits.
///
/// When `ρ1` has a (numerically) pure mode, `Σ(V1, V1)` is replaced by its
/// value `-S(ρ1)` from the symplectic spectrum, since `G1` does not exist.
pub fn relative_entropy(rho1: &GaussianState, rho2: &GaussianState) -> Result<f64> {
    if rho1.nmodes() != rho2.nmodes() {
        return Err(invalid("relative_entropy: states have different mode counts"));
    }
    let self_term = match sigma_term(rho1.cov(), rho1.cov()) {
        Ok(v) => v,
        Err(Error::SingularState(_)) => von_neumann_entropy(rho1.cov())?,
        Err(e) => return Err(e),
    };
    let cross = sigma_term_states(rho1, rho2)?;
    let value = cross - self_term;
    if value < -NEG_CLAMP {
        return Err(Error::Numeric(format!("relative entropy evaluated to {value:e} < 0")));
    }
    Ok(value.max(0.0))
}

/// Von Neumann entropy `Σ_k h(ν_k - 1/2)` in bits.
pub fn von_neumann_entropy(cm: &CovMatrix) -> Result<f64> {
    let nus = symplectic_eigenvalues(cm)?;
    Ok(nus.iter().map(|nu| h_unchecked((nu - 0.5).max(0.0))).sum())
}

/// Fidelity between a TMSV input of energy `mu_in` and its image under the
/// BK channel with resource energy `mu_res` (closed form).
///
/// ```text
/// F = [1 - 4μ̃(√(4μ²-1) + μ̃ - 2μ(1 + 2μ̃ξ))]^{-1/4},   ξ = 2μ - √(4μ²-1)
/// ```
///
/// Substituting `√(4μ²-1) = 2μ - ξ` and `1 - 4μξ = -ξ²` (from
/// `ξ(2μ + √(4μ²-1)) = 1`) keeps the radicand free of cancellation at large
/// `μ`; it equals `(1 + 2μ̃ξ)²`.
pub fn bk_fidelity(mu_res: f64, mu_in: f64) -> Result<f64> {
    let r = bk_radicand(mu_res, mu_in)?;
    Ok(r.powf(-0.25))
}

/// `1 - F²` for [`bk_fidelity`], evaluated without cancellation.
pub fn bk_infidelity_sq(mu_res: f64, mu_in: f64) -> Result<f64> {
    let r = bk_radicand(mu_res, mu_in)?;
    let sr = r.sqrt();
    // 1 - r^{-1/2} = (r - 1) / (√r (√r + 1))
    Ok(radicand_excess(mu_res, mu_in) / (sr * (sr + 1.0)))
}

/// `1 - F` for [`bk_fidelity`], evaluated without cancellation.
pub fn bk_infidelity(mu_res: f64, mu_in: f64) -> Result<f64> {
    let r = bk_radicand(mu_res, mu_in)?;
    let sr = r.sqrt();
    let qr = sr.sqrt();
    // 1 - r^{-1/4} = (√r - 1) / (r^{1/4}(r^{1/4} + 1)),  √r - 1 = (r - 1)/(√r + 1)
    let sr_minus_one = radicand_excess(mu_res, mu_in) / (sr + 1.0);
    Ok(sr_minus_one / (qr * (qr + 1.0)))
}

fn check_bk_args(mu_res: f64, mu_in: f64) -> Result<()> {
    if !(mu_res > 0.5) || !mu_res.is_finite() {
        return Err(invalid(format!("BK fidelity requires mu_res > 1/2, got {mu_res}")));
    }
    if !(mu_in >= 0.5) || !mu_in.is_finite() {
        return Err(invalid(format!("BK fidelity requires mu_in ≥ 1/2, got {mu_in}")));
    }
    Ok(())
}

fn bk_xi(mu: f64) -> f64 {
    1.0 / (2.0 * mu + (4.0 * mu * mu - 1.0).sqrt())
}

/// `r - 1 = 4μ̃ξ + 4μ̃²ξ²`.
fn radicand_excess(mu_res: f64, mu_in: f64) -> f64 {
    let xi = bk_xi(mu_res);
    let one_minus_4mu_xi = -xi * xi;
    -4.0 * mu_in * (mu_in * one_minus_4mu_xi - xi)
}

fn bk_radicand(mu_res: f64, mu_in: f64) -> Result<f64> {
    check_bk_args(mu_res, mu_in)?;
    let r = 1.0 + radicand_excess(mu_res, mu_in);
    if !(r >= 1.0 - 1e-12) || !r.is_finite() {
        return Err(Error::Numeric(format!("BK fidelity radicand {r} is below 1")));
    }
    Ok(r.max(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::{make_thermal, make_tmsv, random};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn thermal_cm(nbar: f64) -> CovMatrix {
        make_thermal(nbar).unwrap().cov().clone()
    }

    /// Thermal closed form: S(n1‖n2) = n1 log(n1/n2) - (n1+1) log((n1+1)/(n2+1)).
    fn thermal_kl(n1: f64, n2: f64) -> f64 {
        n1 * (n1 / n2).log2() - (n1 + 1.0) * ((n1 + 1.0) / (n2 + 1.0)).log2()
    }

    #[test]
    fn gibbs_matrix_of_thermal_state() {
        let g = gibbs_matrix(&thermal_cm(1.0)).unwrap();
        // 2 coth⁻¹(3) = ln 2
        assert_abs_diff_eq!(g.matrix()[(0, 0)], LN_2, epsilon = 1e-14);
        assert_abs_diff_eq!(g.matrix()[(1, 1)], LN_2, epsilon = 1e-14);
        assert_abs_diff_eq!(g.matrix()[(0, 1)], 0.0, epsilon = 1e-14);
        let g = gibbs_matrix(&thermal_cm(1e8)).unwrap();
        assert!(g.matrix().amax() < 1e-7);
    }

    #[test]
    fn gibbs_matrix_rejects_pure_states() {
        let t = make_tmsv(0.5 + 1e-12).unwrap();
        assert!(matches!(gibbs_matrix(t.cov()), Err(Error::SingularState(_))));
    }

    #[test]
    fn gibbs_matrix_symplectic_covariance() {
        // V = S D Sᵀ  ⇒  G = S⁻ᵀ G_D S⁻¹ with G_D = ⊕ 2coth⁻¹(2ν_k) I
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=3 {
            let (st, nus) = random::random_state(n, 0.05, 2.0, &mut rng);
            let g = gibbs_matrix(st.cov()).unwrap();
            let s = random::random_symplectic(n, &mut ChaCha8Rng::seed_from_u64(99 + n as u64));
            let d = random::williamson_diagonal(&nus);
            let v = &s * &d * s.transpose();
            let g_v = gibbs_matrix(&CovMatrix::new((&v + v.transpose()) * 0.5).unwrap()).unwrap();
            let gd: Vec<f64> = nus.iter().map(|&nu| 2.0 * acoth(2.0 * nu)).collect();
            let s_inv = s.clone().try_inverse().unwrap();
            let expect = s_inv.transpose() * random::williamson_diagonal(&gd) * &s_inv;
            assert!((g_v.matrix() - &expect).amax() < 1e-8 * expect.amax().max(1.0));
            assert!((g.matrix() - g.matrix().transpose()).amax() < 1e-9);
        }
    }

    #[test]
    fn sigma_self_term_is_entropy() {
        assert_abs_diff_eq!(
            sigma_term(&thermal_cm(1.0), &thermal_cm(1.0)).unwrap(),
            2.0,
            epsilon = 1e-12
        );
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=3 {
            for _ in 0..10 {
                let (st, nus) = random::random_state(n, 0.01, 3.0, &mut rng);
                let oracle: f64 = nus.iter().map(|nu| h_unchecked(nu - 0.5)).sum();
                let sig = sigma_term(st.cov(), st.cov()).unwrap();
                assert!((sig - oracle).abs() < 1e-8, "n={n}: {sig} vs {oracle}");
            }
        }
    }

    #[test]
    fn sigma_cross_term_thermal() {
        let v = sigma_term(&thermal_cm(1.0), &thermal_cm(2.0)).unwrap();
        assert_abs_diff_eq!(v, 2.0 + thermal_kl(1.0, 2.0), epsilon = 1e-12);
        // mean offset only adds a nonnegative quadratic form
        let r1 = make_thermal(1.0)
            .unwrap()
            .displaced(&DVector::from_vec(vec![1.0, 0.0]))
            .unwrap();
        let r2 = make_thermal(2.0).unwrap();
        let with_offset = sigma_term_states(&r1, &r2).unwrap();
        let g22 = gibbs_matrix(&thermal_cm(2.0)).unwrap().matrix()[(0, 0)];
        assert_abs_diff_eq!(with_offset - v, g22 / (2.0 * LN_2), epsilon = 1e-12);
        assert!(with_offset > v);
    }

    #[test]
    fn sigma_term_dimension_mismatch() {
        let two = make_tmsv(2.0).unwrap();
        assert!(matches!(
            sigma_term(&thermal_cm(1.0), two.cov()),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn thermal_relative_entropies() {
        let r1 = make_thermal(1.0).unwrap();
        let r2 = make_thermal(2.0).unwrap();
        let a = relative_entropy(&r1, &r2).unwrap();
        let b = relative_entropy(&r2, &r1).unwrap();
        assert_abs_diff_eq!(a, 0.169_925_001_442_312_4, epsilon = 1e-9);
        assert_abs_diff_eq!(b, 0.245_112_497_836_531_5, epsilon = 1e-9);
        assert_abs_diff_eq!(relative_entropy(&r1, &r1).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn relative_entropy_with_pure_first_argument() {
        // vacuum vs thermal n̄: S = -log2 p0 = log2(n̄ + 1)
        let vac = make_thermal(0.0).unwrap();
        let th = make_thermal(3.0).unwrap();
        assert_abs_diff_eq!(relative_entropy(&vac, &th).unwrap(), 2.0, epsilon = 1e-10);
    }

    #[test]
    fn von_neumann_examples() {
        assert_eq!(von_neumann_entropy(&thermal_cm(0.0)).unwrap(), 0.0);
        assert_abs_diff_eq!(von_neumann_entropy(&thermal_cm(1.0)).unwrap(), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            von_neumann_entropy(make_tmsv(2.0).unwrap().cov()).unwrap(),
            0.0,
            epsilon = 1e-7
        );
    }

    /// The closed form exactly as printed, evaluated naively.
    fn literal_fidelity(mu: f64, mt: f64) -> f64 {
        let sq = (4.0 * mu * mu - 1.0).sqrt();
        let xi = 2.0 * mu - sq;
        (1.0 - 4.0 * mt * (sq + mt - 2.0 * mu * (1.0 + 2.0 * mt * xi))).powf(-0.25)
    }

    #[test]
    fn bk_fidelity_matches_literal_formula() {
        for &mu in &[0.6, 1.0, 2.5, 10.0, 50.0] {
            for &mt in &[0.5, 0.8, 3.0, 20.0] {
                let f = bk_fidelity(mu, mt).unwrap();
                assert_abs_diff_eq!(f, literal_fidelity(mu, mt), epsilon = 1e-9);
                assert_abs_diff_eq!(1.0 - f * f, bk_infidelity_sq(mu, mt).unwrap(), epsilon = 1e-12);
                assert_abs_diff_eq!(1.0 - f, bk_infidelity(mu, mt).unwrap(), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn bk_fidelity_vacuum_input_reduces_to_single_mode() {
        // μ̃ = 1/2: vacuum vs additive-noise vacuum (thermal n̄ = ξ): F = 1/√(1+ξ)
        let xi = 2.0 - 3f64.sqrt();
        let f = bk_fidelity(1.0, 0.5).unwrap();
        assert_abs_diff_eq!(f, 1.0 / (1.0 + xi).sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(f, 0.888_073_833_977_114_9, epsilon = 1e-12);
    }

    #[test]
    fn bk_fidelity_limits_and_monotonicity() {
        assert!(1.0 - bk_fidelity(1e8, 3.0).unwrap() < 1e-7);
        assert!(bk_fidelity(2.0, 1e12).unwrap() < 1e-5);
        for &mu in &[0.75, 2.0, 30.0] {
            let mut prev = 1.0;
            for k in 0..40 {
                let mt = 0.5 * 1.5f64.powi(k);
                let f = bk_fidelity(mu, mt).unwrap();
                assert!(f < prev);
                prev = f;
            }
        }
        let fixed = 3.0;
        let worst = (10..=40)
            .map(|k| {
                let mu = 10f64.powf(k as f64 / 10.0);
                bk_infidelity(mu, fixed).unwrap() * mu
            })
            .fold(0.0, f64::max);
        assert!(worst < fixed, "μ(1 - F) should stay near μ̃/4, got {worst}");
        assert!(bk_fidelity(0.5, 1.0).is_err());
        assert!(bk_fidelity(1.0, 0.4).is_err());
    }
}
