//! Covariance-matrix algebra for bosonic Gaussian states.
//!
//! Quadratures are mode-interleaved, `x = (q1, p1, ..., qn, pn)`, and the
//! symplectic form is `Ω = ⊕ [[0, 1], [-1, 0]]`. The vacuum covariance matrix
//! is `I/2`. Use [`to_block_ordering`] / [`from_block_ordering`] to move to and
//! from the `(q1..qn, p1..pn)` layout.

use std::f64::consts::LN_2;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{invalid, Error, Result};

/// Minimum eigenvalue of `V + iΩ/2` accepted as physical.
pub const PHYSICALITY_TOL: f64 = -1e-10;

/// Relative tolerance on `V = Vᵀ`.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Symplectic form on `n` modes.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticForm {
    nmodes: usize,
    matrix: DMatrix<f64>,
}

impl SymplecticForm {
    pub fn nmodes(&self) -> usize {
        self.nmodes
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }
}

/// Builds `Ω` for `nmodes` modes in interleaved ordering.
pub fn omega(nmodes: usize) -> Result<SymplecticForm> {
    if nmodes == 0 {
        return Err(invalid("omega: nmodes must be at least 1"));
    }
    Ok(SymplecticForm {
        nmodes,
        matrix: omega_matrix(nmodes),
    })
}

pub(crate) fn omega_matrix(nmodes: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(2 * nmodes, 2 * nmodes);
    for k in 0..nmodes {
        m[(2 * k, 2 * k + 1)] = 1.0;
        m[(2 * k + 1, 2 * k)] = -1.0;
    }
    m
}

/// Index permutation taking interleaved position `i` to block position.
fn block_index(i: usize, nmodes: usize) -> usize {
    if i.is_multiple_of(2) {
        i / 2
    } else {
        nmodes + i / 2
    }
}

/// Reorders a `2n×2n` matrix from `(q1,p1,q2,p2,..)` to `(q1..qn,p1..pn)`.
pub fn to_block_ordering(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let dim = check_even_square(m)?;
    let n = dim / 2;
    let mut out = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            out[(block_index(i, n), block_index(j, n))] = m[(i, j)];
        }
    }
    Ok(out)
}

/// Inverse of [`to_block_ordering`].
pub fn from_block_ordering(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let dim = check_even_square(m)?;
    let n = dim / 2;
    let mut out = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            out[(i, j)] = m[(block_index(i, n), block_index(j, n))];
        }
    }
    Ok(out)
}

fn check_even_square(m: &DMatrix<f64>) -> Result<usize> {
    if m.nrows() != m.ncols() || m.nrows() == 0 || !m.nrows().is_multiple_of(2) {
        return Err(invalid(format!(
            "expected a nonempty square matrix of even dimension, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.nrows())
}

/// Real symmetric `2n×2n` covariance matrix.
///
/// Construction checks shape, finiteness and symmetry only; physicality is a
/// separate question answered by [`is_physical`].
#[derive(Debug, Clone, PartialEq)]
pub struct CovMatrix {
    entries: DMatrix<f64>,
}

impl CovMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        check_even_square(&entries)?;
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(invalid("covariance matrix has non-finite entries"));
        }
        let scale = entries.amax().max(1.0);
        let asym = (&entries - entries.transpose()).amax();
        if asym > SYMMETRY_TOL * scale {
            return Err(invalid(format!(
                "covariance matrix is not symmetric (max |V - Vᵀ| = {asym:e})"
            )));
        }
        let entries = (&entries + entries.transpose()) * 0.5;
        Ok(Self { entries })
    }

    /// Row-major construction, convenient for literals.
    pub fn from_rows(dim: usize, data: &[f64]) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(invalid("from_rows: data length does not match dimension"));
        }
        Self::new(DMatrix::from_row_slice(dim, dim, data))
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn nmodes(&self) -> usize {
        self.entries.nrows() / 2
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }
}

/// Gaussian state: mean vector plus a physical covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    mean: DVector<f64>,
    cov: CovMatrix,
}

impl GaussianState {
    pub fn new(mean: DVector<f64>, cov: CovMatrix) -> Result<Self> {
        if mean.len() != cov.dim() {
            return Err(invalid(format!(
                "mean has length {} but covariance matrix is {}x{}",
                mean.len(),
                cov.dim(),
                cov.dim()
            )));
        }
        if mean.iter().any(|x| !x.is_finite()) {
            return Err(invalid("mean vector has non-finite entries"));
        }
        if !is_physical(&cov) {
            return Err(Error::Domain(
                "covariance matrix violates the uncertainty principle V + iΩ/2 ≥ 0".into(),
            ));
        }
        Ok(Self { mean, cov })
    }

    pub fn zero_mean(cov: CovMatrix) -> Result<Self> {
        let mean = DVector::zeros(cov.dim());
        Self::new(mean, cov)
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &CovMatrix {
        &self.cov
    }

    pub fn nmodes(&self) -> usize {
        self.cov.nmodes()
    }

    /// Returns the same state displaced by `shift`.
    pub fn displaced(&self, shift: &DVector<f64>) -> Result<Self> {
        if shift.len() != self.mean.len() {
            return Err(invalid("displacement length does not match the state"));
        }
        Self::new(&self.mean + shift, self.cov.clone())
    }
}

/// Two-mode squeezed vacuum with per-mode variance `mu` (`mu = n̄ + 1/2`).
pub fn make_tmsv(mu: f64) -> Result<GaussianState> {
    if !(mu >= 0.5) || !mu.is_finite() {
        return Err(invalid(format!("make_tmsv: mu = {mu} must be finite and ≥ 1/2")));
    }
    GaussianState::zero_mean(CovMatrix::new(tmsv_matrix(mu))?)
}

pub(crate) fn tmsv_matrix(mu: f64) -> DMatrix<f64> {
    let c = (mu * mu - 0.25).max(0.0).sqrt();
    two_mode_matrix(mu, c, mu)
}

/// `[[aI, cZ], [cZ, bI]]` in interleaved ordering.
pub(crate) fn two_mode_matrix(a: f64, c: f64, b: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(
        4,
        4,
        &[
            a, 0.0, c, 0.0, //
            0.0, a, 0.0, -c, //
            c, 0.0, b, 0.0, //
            0.0, -c, 0.0, b,
        ],
    )
}

/// Single-mode thermal state with mean photon number `nbar`.
pub fn make_thermal(nbar: f64) -> Result<GaussianState> {
    if !(nbar >= 0.0) || !nbar.is_finite() {
        return Err(invalid(format!("make_thermal: nbar = {nbar} must be finite and ≥ 0")));
    }
    GaussianState::zero_mean(CovMatrix::from_diagonal(&[nbar + 0.5, nbar + 0.5])?)
}

/// `nmodes`-mode vacuum.
pub fn make_vacuum(nmodes: usize) -> Result<GaussianState> {
    if nmodes == 0 {
        return Err(invalid("make_vacuum: nmodes must be at least 1"));
    }
    GaussianState::zero_mean(CovMatrix::new(DMatrix::identity(2 * nmodes, 2 * nmodes) * 0.5)?)
}

/// Minimum eigenvalue of the Hermitian matrix `V + iΩ/2`.
///
/// Computed through the real symmetric embedding `[[V, -Ω/2], [Ω/2, V]]`,
/// which has the same spectrum with doubled multiplicities.
pub fn min_uncertainty_eigenvalue(cm: &CovMatrix) -> f64 {
    let dim = cm.dim();
    let half_omega = omega_matrix(cm.nmodes()) * 0.5;
    let mut emb = DMatrix::zeros(2 * dim, 2 * dim);
    emb.view_mut((0, 0), (dim, dim)).copy_from(cm.matrix());
    emb.view_mut((dim, dim), (dim, dim)).copy_from(cm.matrix());
    emb.view_mut((0, dim), (dim, dim)).copy_from(&(-&half_omega));
    emb.view_mut((dim, 0), (dim, dim)).copy_from(&half_omega);
    emb.symmetric_eigenvalues().min()
}

/// Whether `V + iΩ/2 ≥ 0` holds within [`PHYSICALITY_TOL`].
pub fn is_physical(cm: &CovMatrix) -> bool {
    min_uncertainty_eigenvalue(cm) >= PHYSICALITY_TOL
}

/// Symmetric-eigen data shared by the symplectic spectrum and the Gibbs
/// matrix.
///
/// With `P = ΩᵀVΩ`, the matrix `-(VΩ)² = VP` is similar to the symmetric
/// `S = V^{1/2} P V^{1/2}`, whose eigenvalues are the squared symplectic
/// eigenvalues, each twice.
pub(crate) struct SpectralFrame {
    pub inv_sqrt_v: DMatrix<f64>,
    pub nu_sq: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

impl SpectralFrame {
    pub fn new(v: &DMatrix<f64>) -> Result<Self> {
        let eig = v.clone().symmetric_eigen();
        if eig.eigenvalues.min() <= 0.0 {
            return Err(Error::Domain("covariance matrix is not positive definite".into()));
        }
        let sqrt_d = eig.eigenvalues.map(f64::sqrt);
        let q = &eig.eigenvectors;
        let sqrt_v = q * DMatrix::from_diagonal(&sqrt_d) * q.transpose();
        let inv_sqrt_v = q * DMatrix::from_diagonal(&sqrt_d.map(|x| 1.0 / x)) * q.transpose();
        let om = omega_matrix(v.nrows() / 2);
        let p = om.transpose() * v * &om;
        let s = &sqrt_v * p * &sqrt_v;
        let s = (&s + s.transpose()) * 0.5;
        let se = s.symmetric_eigen();
        Ok(Self {
            inv_sqrt_v,
            nu_sq: se.eigenvalues,
            vectors: se.eigenvectors,
        })
    }

    /// Symplectic eigenvalues in descending order, one per mode.
    pub fn symplectic_eigenvalues(&self) -> Vec<f64> {
        let mut all: Vec<f64> = self.nu_sq.iter().map(|x| x.max(0.0).sqrt()).collect();
        all.sort_by(|a, b| b.total_cmp(a));
        all.chunks(2).map(|pair| 0.5 * (pair[0] + pair[1])).collect()
    }
}

/// Symplectic eigenvalues of a physical covariance matrix, descending.
pub fn symplectic_eigenvalues(cm: &CovMatrix) -> Result<Vec<f64>> {
    if !is_physical(cm) {
        return Err(Error::Domain(
            "symplectic_eigenvalues: covariance matrix is unphysical".into(),
        ));
    }
    raw_symplectic_eigenvalues(cm.matrix())
}

/// Symplectic eigenvalues of any positive-definite matrix (no physicality
/// check), e.g. a partially transposed covariance matrix.
pub fn raw_symplectic_eigenvalues(v: &DMatrix<f64>) -> Result<Vec<f64>> {
    check_even_square(v)?;
    Ok(SpectralFrame::new(v)?.symplectic_eigenvalues())
}

/// Symplectic eigenvalues of the covariance matrix partially transposed on
/// `mode` (momentum sign flip). A value below 1/2 witnesses entanglement.
pub fn partial_transpose_eigenvalues(cm: &CovMatrix, mode: usize) -> Result<Vec<f64>> {
    if mode >= cm.nmodes() {
        return Err(invalid(format!("mode {mode} out of range")));
    }
    let mut flip = DMatrix::<f64>::identity(cm.dim(), cm.dim());
    flip[(2 * mode + 1, 2 * mode + 1)] = -1.0;
    raw_symplectic_eigenvalues(&(&flip * cm.matrix() * &flip))
}

/// Total mean photon number: `tr V / 2 - n/2 + |x̄|²/2`.
pub fn mean_photon_number(state: &GaussianState) -> f64 {
    let n = state.nmodes() as f64;
    let v = state.cov().matrix().trace() / 2.0 - n / 2.0;
    (v + state.mean().norm_squared() / 2.0).max(0.0)
}

/// `h(x) = (x+1) log2(x+1) - x log2 x`, the entropy of a thermal state with
/// mean photon number `x`.
pub fn h(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(invalid(format!("h(x) requires x ≥ 0, got {x}")));
    }
    Ok(h_unchecked(x))
}

pub(crate) fn h_unchecked(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return f64::INFINITY;
    }
    // (x+1)log(x+1) - x log x = log(x+1) + x log(1 + 1/x)
    ((x + 1.0).ln() + x * (1.0 / x).ln_1p()) / LN_2
}

/// `s(x) = (x+1/2) log2(x+1/2) - (x-1/2) log2(x-1/2)`, the entropy of a mode
/// with symplectic eigenvalue `x`.
pub fn s(x: f64) -> Result<f64> {
    if !(x >= 0.5) {
        return Err(invalid(format!("s(x) requires x ≥ 1/2, got {x}")));
    }
    Ok(s_unchecked(x))
}

pub(crate) fn s_unchecked(x: f64) -> f64 {
    let lo = x - 0.5;
    if lo <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return f64::INFINITY;
    }
    ((x + 0.5).ln() + lo * (1.0 / lo).ln_1p()) / LN_2
}

/// Binary Shannon entropy in bits.
pub fn h2(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("H2(p) requires p in [0, 1], got {p}")));
    }
    Ok(h2_unchecked(p))
}

pub(crate) fn h2_unchecked(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
}

/// Values of `h`, `s` and `H2` at one point; `None` where `x` lies outside
/// that function's domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropicValues {
    pub h: Option<f64>,
    pub s: Option<f64>,
    pub h2: Option<f64>,
}

pub fn entropic_functions(x: f64) -> Result<EntropicValues> {
    if !(x >= 0.0) {
        return Err(invalid(format!("entropic_functions: x = {x} is outside every domain")));
    }
    Ok(EntropicValues {
        h: h(x).ok(),
        s: s(x).ok(),
        h2: h2(x).ok(),
    })
}

/// Random states for tests and the self-test runner.
pub mod random {
    use super::*;

    /// Symplectic matrix built from single-mode squeezers, phase rotations and
    /// beam splitters.
    pub fn random_symplectic<R: Rng>(nmodes: usize, rng: &mut R) -> DMatrix<f64> {
        let dim = 2 * nmodes;
        let mut s = DMatrix::<f64>::identity(dim, dim);
        for _ in 0..2 {
            for k in 0..nmodes {
                s = local_rotation(dim, k, rng.gen_range(0.0..std::f64::consts::TAU)) * s;
                s = local_squeezer(dim, k, rng.gen_range(-0.8..0.8)) * s;
            }
            for k in 0..nmodes.saturating_sub(1) {
                s = beam_splitter(dim, k, k + 1, rng.gen_range(0.0..std::f64::consts::PI)) * s;
            }
        }
        s
    }

    fn local_rotation(dim: usize, k: usize, th: f64) -> DMatrix<f64> {
        let mut m = DMatrix::identity(dim, dim);
        let (sn, cs) = th.sin_cos();
        m[(2 * k, 2 * k)] = cs;
        m[(2 * k, 2 * k + 1)] = sn;
        m[(2 * k + 1, 2 * k)] = -sn;
        m[(2 * k + 1, 2 * k + 1)] = cs;
        m
    }

    fn local_squeezer(dim: usize, k: usize, r: f64) -> DMatrix<f64> {
        let mut m = DMatrix::identity(dim, dim);
        m[(2 * k, 2 * k)] = (-r).exp();
        m[(2 * k + 1, 2 * k + 1)] = r.exp();
        m
    }

    fn beam_splitter(dim: usize, a: usize, b: usize, th: f64) -> DMatrix<f64> {
        let mut m = DMatrix::identity(dim, dim);
        let (sn, cs) = th.sin_cos();
        for off in 0..2 {
            let (i, j) = (2 * a + off, 2 * b + off);
            m[(i, i)] = cs;
            m[(j, j)] = cs;
            m[(i, j)] = sn;
            m[(j, i)] = -sn;
        }
        m
    }

    /// Williamson diagonal `diag(ν1, ν1, ν2, ν2, ...)`.
    pub fn williamson_diagonal(nus: &[f64]) -> DMatrix<f64> {
        let diag: Vec<f64> = nus.iter().flat_map(|&v| [v, v]).collect();
        DMatrix::from_diagonal(&DVector::from_vec(diag))
    }

    /// Random mixed state with all symplectic eigenvalues in
    /// `[0.5 + min_excess, 0.5 + max_excess]`. Returns the state together
    /// with its symplectic spectrum.
    pub fn random_state<R: Rng>(
        nmodes: usize,
        min_excess: f64,
        max_excess: f64,
        rng: &mut R,
    ) -> (GaussianState, Vec<f64>) {
        let nus: Vec<f64> = (0..nmodes)
            .map(|_| 0.5 + rng.gen_range(min_excess..max_excess))
            .collect();
        let s = random_symplectic(nmodes, rng);
        let v = &s * williamson_diagonal(&nus) * s.transpose();
        let v = (&v + v.transpose()) * 0.5;
        let mean = DVector::from_fn(2 * nmodes, |_, _| rng.gen_range(-1.0..1.0));
        let state = GaussianState::new(mean, CovMatrix::new(v).expect("symmetric by construction"))
            .expect("physical by construction");
        (state, nus)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn omega_single_mode() {
        let om = omega(1).unwrap();
        assert_eq!(om.matrix(), &DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]));
        assert_eq!(om.matrix().transpose(), -om.matrix());
    }

    #[test]
    fn omega_squares_to_minus_identity() {
        for n in 1..=8 {
            let om = omega(n).unwrap().into_matrix();
            assert_eq!(&om * &om, -DMatrix::<f64>::identity(2 * n, 2 * n));
            assert_eq!(om.transpose(), -&om);
        }
        assert!(matches!(omega(0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn block_ordering_round_trip_and_omega_form() {
        let om = omega_matrix(3);
        let blk = to_block_ordering(&om).unwrap();
        // [[0, I], [-I, 0]] in block layout
        for i in 0..3 {
            assert_eq!(blk[(i, 3 + i)], 1.0);
            assert_eq!(blk[(3 + i, i)], -1.0);
        }
        assert_eq!(from_block_ordering(&blk).unwrap(), om);
    }

    #[test]
    fn tmsv_structure() {
        let vac = make_tmsv(0.5).unwrap();
        assert_eq!(vac.cov().matrix(), &(DMatrix::identity(4, 4) * 0.5));
        let t = make_tmsv(1.0).unwrap();
        assert_abs_diff_eq!(t.cov().get(0, 2), 0.866_025_403_784_438_6, epsilon = 1e-15);
        assert_abs_diff_eq!(t.cov().get(1, 3), -0.866_025_403_784_438_6, epsilon = 1e-15);
        let nus = symplectic_eigenvalues(make_tmsv(3.7).unwrap().cov()).unwrap();
        for nu in nus {
            assert_abs_diff_eq!(nu, 0.5, epsilon = 1e-9);
        }
        assert!(make_tmsv(0.49).is_err());
    }

    #[test]
    fn thermal_states() {
        assert_eq!(
            make_thermal(0.0).unwrap().cov().matrix(),
            &(DMatrix::identity(2, 2) * 0.5)
        );
        assert_eq!(
            make_thermal(1.0).unwrap().cov().matrix(),
            &(DMatrix::identity(2, 2) * 1.5)
        );
        assert_abs_diff_eq!(mean_photon_number(&make_thermal(2.5).unwrap()), 2.5);
        assert!(make_thermal(-0.1).is_err());
    }

    #[test]
    fn physicality() {
        assert!(is_physical(&CovMatrix::from_diagonal(&[0.5, 0.5]).unwrap()));
        assert!(!is_physical(&CovMatrix::from_diagonal(&[0.25, 0.25]).unwrap()));
        assert!(is_physical(make_tmsv(2.0).unwrap().cov()));
        assert!(CovMatrix::from_rows(2, &[1.0, 0.2, 0.3, 1.0]).is_err());
        assert!(CovMatrix::from_rows(3, &[1.0; 9]).is_err());
    }

    #[test]
    fn symplectic_spectrum_examples() {
        let nus = symplectic_eigenvalues(make_thermal(1.0).unwrap().cov()).unwrap();
        assert_abs_diff_eq!(nus[0], 1.5, epsilon = 1e-12);
        let nus = symplectic_eigenvalues(make_tmsv(5.0).unwrap().cov()).unwrap();
        assert_abs_diff_eq!(nus[0], 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(nus[1], 0.5, epsilon = 1e-9);
        // boundary state: sqrt(2 * 1/8) = 1/2
        let nus = symplectic_eigenvalues(&CovMatrix::from_diagonal(&[2.0, 0.125]).unwrap()).unwrap();
        assert_abs_diff_eq!(nus[0], 0.5, epsilon = 1e-12);
        let bad = CovMatrix::from_diagonal(&[2.0, 0.1]).unwrap();
        assert!(matches!(symplectic_eigenvalues(&bad), Err(Error::Domain(_))));
    }

    #[test]
    fn spectrum_matches_eigenvalues_of_omega_v() {
        // independent route: moduli of the (complex) eigenvalues of ΩV
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=3 {
            let (st, _) = random::random_state(n, 0.0, 3.0, &mut rng);
            let om = omega_matrix(n);
            let ev = (&om * st.cov().matrix()).complex_eigenvalues();
            let mut moduli: Vec<f64> = ev.iter().map(|z| z.norm()).collect();
            moduli.sort_by(|a, b| b.total_cmp(a));
            let nus = symplectic_eigenvalues(st.cov()).unwrap();
            for (k, nu) in nus.iter().enumerate() {
                assert_abs_diff_eq!(*nu, moduli[2 * k], epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn photon_numbers() {
        assert_abs_diff_eq!(mean_photon_number(&make_vacuum(1).unwrap()), 0.0);
        assert_abs_diff_eq!(mean_photon_number(&make_tmsv(3.0).unwrap()), 5.0, epsilon = 1e-12);
        let shifted = make_thermal(3.0)
            .unwrap()
            .displaced(&DVector::from_vec(vec![2.0, 0.0]))
            .unwrap();
        assert_abs_diff_eq!(mean_photon_number(&shifted), 5.0, epsilon = 1e-12);
    }

    #[test]
    fn entropic_limits() {
        assert_eq!(h(0.0).unwrap(), 0.0);
        assert_eq!(s(0.5).unwrap(), 0.0);
        assert_eq!(h2(0.5).unwrap(), 1.0);
        assert_eq!(h2(0.0).unwrap(), 0.0);
        assert_eq!(h2(1.0).unwrap(), 0.0);
        assert_abs_diff_eq!(h(1.0).unwrap(), 2.0, epsilon = 1e-15);
        for x in [0.7, 1.3, 4.2] {
            let direct = (x + 0.5) * (x + 0.5f64).log2() - (x - 0.5) * (x - 0.5f64).log2();
            assert_abs_diff_eq!(s(x).unwrap(), direct, epsilon = 1e-13);
            assert_abs_diff_eq!(s(x).unwrap(), h(x - 0.5).unwrap(), epsilon = 1e-13);
        }
        assert!(h(-1.0).is_err());
        assert!(s(0.4).is_err());
        assert!(h2(1.5).is_err());
        let v = entropic_functions(2.0).unwrap();
        assert!(v.h.is_some() && v.s.is_some() && v.h2.is_none());
    }

    #[test]
    fn partial_transpose_detects_tmsv_entanglement() {
        let t = make_tmsv(2.0).unwrap();
        let pt = partial_transpose_eigenvalues(t.cov(), 1).unwrap();
        // 2μ - 2√(μ² - 1/4) ... smallest PT eigenvalue μ - √(μ²-1/4)
        let expect = 2.0 - (4.0f64 - 0.25).sqrt();
        assert_abs_diff_eq!(pt[1], expect, epsilon = 1e-10);
    }
}
