//! Bipartite Gaussian entanglement of two one-mode nodes, on the finite
//! ring and on the infinite chain.
//!
//! The object of interest is `Λ = [[S₁₁, S₁₂], [S₂₁, conj(S₂₂)]]` built from
//! the two-node quantum covariance. The state is separable iff `det Λ ≥ 0`;
//! the log-negativity is reported alongside as an independent measure.

use std::ops::RangeInclusive;

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{det, eigvalsh, pinv_hermitian, sqrt_psd, CMatrix, Matrix};
use crate::model::NodeBlocks;
use crate::scalar::Real;
use crate::spectral::{lagged_average, steady_spectrum, SpatialSpectrum};

/// `det Λ` below `−DET_TOL` means entangled.
pub const DET_TOL: f64 = 1e-9;
/// Log-negativity above `LN_TOL` means entangled.
pub const LN_TOL: f64 = 1e-9;
/// Principal minors below `−MINOR_TOL` reject the input as a covariance.
pub const MINOR_TOL: f64 = 1e-6;
/// Relative eigenvalue cutoff of the generalized inverse.
pub const PINV_CUTOFF: f64 = 1e-10;
/// Relative agreement required between the LU and factored determinants.
pub const FACTOR_AGREEMENT: f64 = 1e-8;
/// Slack on `V + iΘ₂ ⪰ 0` accepted by [`log_negativity`].
pub const COVARIANCE_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Source {
    Finite,
    Infinite,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Finite => "finite",
            Source::Infinite => "infinite",
        }
    }
}

/// The 4×4 matrix `Λ` of a node pair.
#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteLambda<T: Real> {
    pub lambda: CMatrix<T>,
    /// Node indices on the finite ring; `None` on the infinite chain.
    pub pair: Option<(usize, usize)>,
    /// Lag `a = j − k`.
    pub lag: i64,
    pub source: Source,
}

impl<T: Real> BipartiteLambda<T> {
    /// Assembles `[[S₀, S_a], [S_aᴴ, conj(S₀)]]`.
    pub fn from_parts(
        s0: &CMatrix<T>,
        sa: &CMatrix<T>,
        lag: i64,
        pair: Option<(usize, usize)>,
        source: Source,
    ) -> Self {
        let mut lambda = CMatrix::zeros(4, 4);
        lambda.set_block(0, 0, s0);
        lambda.set_block(0, 2, sa);
        lambda.set_block(2, 0, &sa.adjoint());
        lambda.set_block(2, 2, &s0.conj());
        Self {
            lambda,
            pair,
            lag,
            source,
        }
    }

    pub fn l11(&self) -> CMatrix<T> {
        self.lambda.submatrix(0, 0, 2, 2)
    }

    pub fn l12(&self) -> CMatrix<T> {
        self.lambda.submatrix(0, 2, 2, 2)
    }

    pub fn l21(&self) -> CMatrix<T> {
        self.lambda.submatrix(2, 0, 2, 2)
    }

    pub fn l22(&self) -> CMatrix<T> {
        self.lambda.submatrix(2, 2, 2, 2)
    }
}

/// How the determinant test and the log-negativity relate for one sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Consistency {
    /// Both tests are outside their tolerance bands and agree.
    Consistent,
    /// At least one quantity sits inside its tolerance band.
    Ambiguous,
    /// The two tests disagree outside both bands.
    Contradiction,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EntanglementReport<T: Real> {
    pub pair: Option<(usize, usize)>,
    pub lag: i64,
    pub source: Source,
    pub det_lambda: T,
    /// `det Λ₁₁ · det(Λ₂₂ − Λ₂₁Λ₁₁⁺Λ₁₂)` and `det Λ₂₂ · det(Λ₁₁ − Λ₁₂Λ₂₂⁺Λ₂₁)`.
    pub det_factored: [T; 2],
    pub factored_agree: bool,
    pub min_minor: T,
    pub log_negativity: T,
    /// Smallest normalized symplectic eigenvalue of the partial transpose.
    pub nu_min: T,
    pub separable: bool,
    pub consistency: Consistency,
    pub tol_det: T,
    pub tol_ln: T,
}

fn check_one_mode(dim: usize) -> Result<()> {
    if dim != 2 {
        return Err(Error::NotOneMode(dim / 2));
    }
    Ok(())
}

/// `Λ(∞)` of nodes `j`, `k` on the ring of length `ring` from its spectrum on `𝕌_N`.
pub fn bipartite_lambda<T: Real>(
    spectrum: &SpatialSpectrum<T>,
    j: usize,
    k: usize,
    ring: usize,
) -> Result<BipartiteLambda<T>> {
    check_one_mode(spectrum.dim())?;
    if spectrum.grid_size() != ring {
        return Err(Error::GridMismatch {
            k: spectrum.grid_size(),
            expected: ring,
        });
    }
    for idx in [j, k] {
        if idx >= ring {
            return Err(Error::NotOnRingGrid { index: idx, ring });
        }
    }
    if j == k {
        return Err(Error::SamePair(j));
    }
    let lag = j as i64 - k as i64;
    let s0 = spectrum.mean();
    let sa = lagged_average(spectrum, lag);
    Ok(BipartiteLambda::from_parts(&s0, &sa, lag, Some((j, k)), Source::Finite))
}

/// Principal minors of orders 1 to 3, with their index sets.
pub fn principal_minors<T: Real>(m: &CMatrix<T>) -> Vec<(Vec<usize>, T)> {
    let n = m.rows();
    let mut out = Vec::new();
    for mask in 1u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        if idx.len() > 3 || idx.len() == n {
            continue;
        }
        let sub = Matrix::from_fn(idx.len(), idx.len(), |r, c| m[(idx[r], idx[c])]);
        out.push((idx, det(&sub).re));
    }
    out
}

/// Doubled real form `[[Re S, −Im S], [Im S, Re S]]`, PSD iff `S` is.
pub fn realify<T: Real>(s: &CMatrix<T>) -> Matrix<T> {
    let n = s.rows();
    Matrix::from_fn(2 * n, 2 * n, |i, j| {
        let z = s[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Smallest eigenvalue of the Hermitian matrix `s`.
pub fn min_eig<T: Real>(s: &CMatrix<T>) -> Result<T> {
    Ok(eigvalsh(s)?[0])
}

fn schur_factored<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>, c: &CMatrix<T>, d: &CMatrix<T>) -> Result<T> {
    // det [[A, B], [C, D]] = det A · det(D − C A⁺ B) when ran B ⊆ ran A.
    let ap = pinv_hermitian(a, T::lit(PINV_CUTOFF))?;
    let schur = d - &(&(c * &ap) * b);
    Ok((det(a) * det(&schur)).re)
}

fn agreement_scale<T: Real>(lambda: &CMatrix<T>, det_lu: T) -> T {
    let diag = (0..lambda.rows()).fold(T::one(), |acc, i| acc * lambda[(i, i)].re.abs());
    det_lu.abs().max(diag).max(T::min_positive_value())
}

/// Log-negativity `Σ max(0, −log₂ ν̃_j)` of the two-mode state with real
/// covariance `v` (4×4) under the CCR matrix `theta` (2×2).
///
/// Symplectic eigenvalues are normalized so the vacuum gives `ν̃ = 1`.
pub fn log_negativity<T: Real>(v: &Matrix<T>, theta: &Matrix<T>) -> Result<T> {
    symplectic_pt(v, theta).map(|(ln, _)| ln)
}

/// `(log-negativity, smallest normalized symplectic eigenvalue)` of the
/// partial transpose.
fn symplectic_pt<T: Real>(v: &Matrix<T>, theta: &Matrix<T>) -> Result<(T, T)> {
    if v.shape() != (4, 4) || theta.shape() != (2, 2) {
        return Err(Error::DimensionMismatch("log-negativity needs V 4x4 and Θ 2x2".into()));
    }
    let th = theta[(0, 1)];
    if th == T::zero() {
        return Err(Error::ThetaSingular { det: 0.0 });
    }
    let mut theta2 = Matrix::zeros(4, 4);
    theta2.set_block(0, 0, theta);
    theta2.set_block(2, 2, theta);
    let v = v.hermitian_part();
    let i = Complex::new(T::zero(), T::one());
    let uncertainty = &v.to_complex() + &theta2.to_complex().scale(i);
    let lo = min_eig(&uncertainty)?;
    if lo < -T::lit(COVARIANCE_TOL) * v.max_abs().max(T::one()) {
        return Err(Error::InvalidCovariance(lo.to_f64_lossy()));
    }
    let nus = pt_symplectic_closed(&v.scale(T::one() / th.abs()));
    let ln: T = nus
        .iter()
        .map(|&nu| {
            if nu < T::one() {
                -nu.max(T::min_positive_value()).log2()
            } else {
                T::zero()
            }
        })
        .sum();
    Ok((ln, nus[0]))
}

fn det2r<T: Real>(m: &Matrix<T>, r: usize, c: usize) -> T {
    m[(r, c)] * m[(r + 1, c + 1)] - m[(r, c + 1)] * m[(r + 1, c)]
}

/// Symplectic eigenvalues `ν̃₋ ≤ ν̃₊` of the partial transpose of a
/// two-mode covariance in vacuum units:
/// `ν̃²_± = (Δ̃ ± √(Δ̃² − 4 det V)) / 2`, `Δ̃ = det A + det B − 2 det C`.
fn pt_symplectic_closed<T: Real>(v: &Matrix<T>) -> [T; 2] {
    let two = T::lit(2.0);
    let delta = det2r(v, 0, 0) + det2r(v, 2, 2) - two * det2r(v, 0, 2);
    let dv = det(v);
    let disc = (delta * delta - T::lit(4.0) * dv).max(T::zero()).sqrt();
    let minus = ((delta - disc) / two).max(T::zero()).sqrt();
    let plus = ((delta + disc) / two).max(T::zero()).sqrt();
    [minus, plus]
}

/// Symplectic eigenvalues of the partial transpose by a Hermitian
/// eigensolve of `Ṽ^{1/2} (iΘ₂) Ṽ^{1/2}`; an independent route to
/// [`log_negativity`] used for cross-checks.
pub fn pt_symplectic_eigs<T: Real>(v: &Matrix<T>, theta: &Matrix<T>) -> Result<[T; 2]> {
    let th = theta[(0, 1)];
    let mut theta2 = Matrix::zeros(4, 4);
    theta2.set_block(0, 0, theta);
    theta2.set_block(2, 2, theta);
    let p = Matrix::diagonal(&[T::one(), T::one(), T::one(), -T::one()]);
    let vt = &(&p * v) * &p;
    let root = sqrt_psd(&vt.to_complex())?;
    let i = Complex::new(T::zero(), T::one());
    let h = &(&root * &theta2.to_complex().scale(i)) * &root;
    let ev = eigvalsh(&h)?;
    let scale = th * th;
    Ok([ev[2] / scale, ev[3] / scale])
}

fn classify<T: Real>(det_lambda: T, ln: T, nu_min: T) -> Consistency {
    let tol_det = T::lit(DET_TOL);
    let tol_ln = T::lit(LN_TOL);
    let det_neg = det_lambda < -tol_det;
    let ln_pos = ln > tol_ln;
    if (det_neg && nu_min > T::one() + tol_ln) || (det_lambda > tol_det && ln_pos) {
        Consistency::Contradiction
    } else if det_neg == ln_pos {
        Consistency::Consistent
    } else {
        Consistency::Ambiguous
    }
}

/// Determinant test with principal-minor validation, factored forms and
/// log-negativity.
pub fn separability_verdict<T: Real>(l: &BipartiteLambda<T>) -> Result<EntanglementReport<T>> {
    let lam = &l.lambda;
    if lam.shape() != (4, 4) {
        return Err(Error::NotOneMode(lam.rows() / 4));
    }
    let herm = lam.hermitian_defect();
    if herm > T::lit(1e-10) * lam.max_abs().max(T::one()) {
        return Err(Error::InvalidCovariance(herm.to_f64_lossy()));
    }
    let minors = principal_minors(lam);
    let (worst_idx, min_minor) = minors.iter().fold((Vec::new(), T::infinity()), |acc, (idx, v)| {
        if *v < acc.1 {
            (idx.clone(), *v)
        } else {
            acc
        }
    });
    if min_minor < -T::lit(MINOR_TOL) {
        return Err(Error::MinorViolation {
            value: min_minor.to_f64_lossy(),
            indices: worst_idx,
        });
    }
    let det_lambda = det(lam).re;
    let (a, b, c, d) = (l.l11(), l.l12(), l.l21(), l.l22());
    let f1 = schur_factored(&a, &b, &c, &d)?;
    let f2 = schur_factored(&d, &c, &b, &a)?;
    let scale = agreement_scale(lam, det_lambda);
    let tol = T::lit(FACTOR_AGREEMENT) * scale;
    let factored_agree = (f1 - det_lambda).abs() <= tol && (f2 - det_lambda).abs() <= tol;
    if !factored_agree {
        log::debug!(
            "factored determinants {:e}, {:e} differ from LU {:e}",
            f1.to_f64_lossy(),
            f2.to_f64_lossy(),
            det_lambda.to_f64_lossy()
        );
    }

    // The CCR matrix is read off the diagonal block: Im Λ₁₁ = Θ.
    let theta = a.imag_part();
    let theta = (&theta - &theta.transpose()).scale(T::lit(0.5));
    let v = lam.real_part();
    let (ln, nu_min) = symplectic_pt(&v, &theta)?;

    Ok(EntanglementReport {
        pair: l.pair,
        lag: l.lag,
        source: l.source,
        det_lambda,
        det_factored: [f1, f2],
        factored_agree,
        min_minor,
        log_negativity: ln,
        nu_min,
        separable: det_lambda >= -T::lit(DET_TOL),
        consistency: classify(det_lambda, ln, nu_min),
        tol_det: T::lit(DET_TOL),
        tol_ln: T::lit(LN_TOL),
    })
}

/// Fourier coefficient `S_ℓ = (2πi)⁻¹ ∮ z^{ℓ−1} S_z dz` with its
/// trapezoidal error estimate `‖S_ℓ(K) − S_ℓ(K/2)‖`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierCoefficient<T: Real> {
    pub value: CMatrix<T>,
    pub error: T,
}

/// Minimum quadrature size for Fourier coefficients.
pub const MIN_FOURIER_GRID: usize = 64;

fn coefficient_from<T: Real>(spectrum: &SpatialSpectrum<T>, lag: i64) -> FourierCoefficient<T> {
    let value = lagged_average(spectrum, lag);
    let grid = spectrum.grid_size();
    let half = SpatialSpectrum::from_samples(spectrum.s.iter().step_by(2).cloned().collect());
    let coarse = lagged_average(&half, lag);
    let error = if grid.is_multiple_of(2) {
        (&value - &coarse).max_abs()
    } else {
        T::nan()
    };
    FourierCoefficient { value, error }
}

fn check_fourier_grid(grid: usize) -> Result<()> {
    if grid < MIN_FOURIER_GRID {
        return Err(Error::GridTooCoarse {
            k: grid,
            min: MIN_FOURIER_GRID,
        });
    }
    Ok(())
}

pub fn fourier_coefficient<T: Real>(blocks: &NodeBlocks<T>, lag: i64, grid: usize) -> Result<FourierCoefficient<T>> {
    check_fourier_grid(grid)?;
    let spectrum = steady_spectrum(blocks, grid)?;
    Ok(coefficient_from(&spectrum, lag))
}

/// `Λ̂ = [[S₀, S_a], [S_aᴴ, conj(S₀)]]` from a spectrum sampled on `K` points.
pub fn infinite_chain_lambda_from<T: Real>(spectrum: &SpatialSpectrum<T>, lag: i64) -> Result<BipartiteLambda<T>> {
    check_one_mode(spectrum.dim())?;
    check_fourier_grid(spectrum.grid_size())?;
    if lag == 0 {
        return Err(Error::SamePair(0));
    }
    let s0 = coefficient_from(spectrum, 0).value;
    let sa = coefficient_from(spectrum, lag).value;
    Ok(BipartiteLambda::from_parts(&s0, &sa, lag, None, Source::Infinite))
}

pub fn infinite_chain_lambda<T: Real>(blocks: &NodeBlocks<T>, lag: i64, grid: usize) -> Result<BipartiteLambda<T>> {
    check_one_mode(blocks.dim())?;
    check_fourier_grid(grid)?;
    let spectrum = steady_spectrum(blocks, grid)?;
    infinite_chain_lambda_from(&spectrum, lag)
}

/// Finite-ring reports at every nonzero lag of `lags`, pairing node `a mod N` with node 0.
pub fn profile_from_spectrum<T: Real>(
    spectrum: &SpatialSpectrum<T>,
    ring: usize,
    lags: &[i64],
) -> Result<Vec<EntanglementReport<T>>> {
    lags.par_iter()
        .map(|&a| {
            let j = a.rem_euclid(ring as i64) as usize;
            let mut l = bipartite_lambda(spectrum, j, 0, ring)?;
            l.lag = a;
            separability_verdict(&l)
        })
        .collect()
}

/// Reports for each nonzero lag in `lags`, ordered by lag. With `infinite`
/// set to a quadrature size, each finite report is followed by its
/// infinite-chain counterpart.
pub fn entanglement_profile<T: Real>(
    blocks: &NodeBlocks<T>,
    ring: usize,
    lags: RangeInclusive<i64>,
    infinite: Option<usize>,
) -> Result<Vec<EntanglementReport<T>>> {
    check_one_mode(blocks.dim())?;
    let lags: Vec<i64> = lags.filter(|&a| a != 0).collect();
    let finite = profile_from_spectrum(&steady_spectrum(blocks, ring)?, ring, &lags)?;
    let Some(grid) = infinite else {
        return Ok(finite);
    };
    check_fourier_grid(grid)?;
    let spectrum = steady_spectrum(blocks, grid)?;
    let inf: Vec<EntanglementReport<T>> = lags
        .par_iter()
        .map(|&a| separability_verdict(&infinite_chain_lambda_from(&spectrum, a)?))
        .collect::<Result<_>>()?;
    Ok(finite.into_iter().zip(inf).flat_map(|(f, i)| [f, i]).collect())
}
