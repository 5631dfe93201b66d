//! Spatial symbol of the circulant dynamics, stability on the unit circle,
//! and the per-frequency Lyapunov equations for the covariance spectrum.

use num_complex::Complex;
use num_traits::{Float, One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{
    expm, lyapunov_certificate, solve_lyapunov, spectral_abscissa_bisect, sylvester_operator, CMatrix, Lu, Matrix,
};
use crate::model::NodeBlocks;
use crate::scalar::{unit_root, Element, Real};

/// Eigenvalue real parts must stay below `−HURWITZ_MARGIN`.
pub const HURWITZ_MARGIN: f64 = 1e-9;
/// Tolerance on `||z| − 1|` for frequencies passed by value.
pub const UNIT_CIRCLE_TOL: f64 = 1e-12;
/// Kronecker systems with a condition estimate above this are flagged.
pub const ILL_CONDITIONED: f64 = 1e12;
/// Refine the default sweep when the worst abscissa is closer to zero than this.
pub const REFINE_BAND: f64 = 1e-3;

fn check_unit<T: Real>(z: Complex<T>) -> Result<()> {
    let dev = (z.norm() - T::one()).abs();
    if dev > T::lit(UNIT_CIRCLE_TOL) || !Float::is_finite(dev) {
        return Err(Error::NotOnUnitCircle {
            modulus: z.norm().to_f64_lossy(),
        });
    }
    Ok(())
}

/// `𝒜_z = Σ_k A_k z^{−k}` at an arbitrary unit-modulus `z`.
pub fn symbol<T: Real>(blocks: &NodeBlocks<T>, z: Complex<T>) -> Result<CMatrix<T>> {
    check_unit(z)?;
    let dim = blocks.dim();
    let mut out = CMatrix::zeros(dim, dim);
    for (lag, a) in blocks.lags() {
        let w = z.powi(-(lag as i32));
        out = &out + &a.to_complex().scale(w);
    }
    Ok(out)
}

/// `𝒜_z` at `z = exp(2πi k / grid)`, using exact roots of unity so that
/// conjugate grid points give bitwise conjugate symbols.
pub fn symbol_on_grid<T: Real>(blocks: &NodeBlocks<T>, grid: usize, k: usize) -> CMatrix<T> {
    let dim = blocks.dim();
    let mut out = CMatrix::zeros(dim, dim);
    for (lag, a) in blocks.lags() {
        let w = unit_root::<T>(grid, -(k as i64) * lag);
        for i in 0..dim {
            for j in 0..dim {
                out[(i, j)] += w.scale(a[(i, j)]);
            }
        }
    }
    out
}

/// Outcome of the Hurwitz test of one matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HurwitzCheck<T> {
    pub hurwitz: bool,
    /// Largest real part of an eigenvalue; clamped at zero from below when
    /// the Lyapunov certificate does not exist.
    pub abscissa: T,
}

/// Eigenvalues of a 2×2 complex matrix.
fn eig2<T: Real>(a: &CMatrix<T>) -> [Complex<T>; 2] {
    let half = T::lit(0.5);
    let tr = a[(0, 0)] + a[(1, 1)];
    let det = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
    let m = tr.scale(half);
    let disc = (m * m - det).sqrt();
    [m + disc, m - disc]
}

/// Spectral abscissa; closed form up to 2×2, certificate bisection beyond.
pub fn spectral_abscissa<E: Element>(a: &Matrix<E>) -> E::Real {
    let ac: CMatrix<E::Real> = a.map(|x| Complex::new(x.re(), x.im()));
    match a.rows() {
        0 => E::Real::neg_infinity(),
        1 => ac[(0, 0)].re,
        2 => {
            let [l1, l2] = eig2(&ac);
            l1.re.max(l2.re)
        }
        _ => spectral_abscissa_bisect(&ac, E::Real::lit(1e-13)),
    }
}

/// Decides whether `a` is Hurwitz through the Lyapunov certificate
/// `a P + P aᴴ + I = 0`, `P ≻ 0`.
pub fn is_hurwitz<E: Element>(a: &Matrix<E>) -> HurwitzCheck<E::Real> {
    let zero = E::Real::zero();
    let certified = match lyapunov_certificate(a) {
        Ok(cert) => cert.is_positive_definite(),
        // A singular Kronecker operator means a pair of eigenvalues sums
        // to zero, which puts the spectrum on or across the imaginary axis.
        Err(_) => false,
    };
    let est = spectral_abscissa(a);
    let margin = E::Real::lit(HURWITZ_MARGIN);
    if certified {
        HurwitzCheck {
            hurwitz: est < -margin,
            abscissa: est,
        }
    } else {
        HurwitzCheck {
            hurwitz: false,
            abscissa: if est > zero { est } else { zero },
        }
    }
}

/// Smallest sweep grid: four samples per harmonic of the symbol.
pub fn min_grid(d: usize) -> usize {
    4 * (2 * d + 1)
}

/// Default sweep grid, sixteen samples per harmonic and at least 256.
pub fn default_grid(d: usize) -> usize {
    (16 * (2 * d + 1)).max(256)
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityReport<T> {
    pub stable: bool,
    pub worst_abscissa: T,
    pub argmax_index: usize,
    pub argmax_z: Complex<T>,
    pub grid_size: usize,
}

fn sweep_unchecked<T: Real>(blocks: &NodeBlocks<T>, grid: usize) -> StabilityReport<T> {
    let checks: Vec<HurwitzCheck<T>> = (0..grid)
        .into_par_iter()
        .map(|k| is_hurwitz(&symbol_on_grid(blocks, grid, k)))
        .collect();
    let mut worst = 0;
    for (k, c) in checks.iter().enumerate() {
        if c.abscissa > checks[worst].abscissa {
            worst = k;
        }
    }
    StabilityReport {
        stable: checks.iter().all(|c| c.hurwitz),
        worst_abscissa: checks[worst].abscissa,
        argmax_index: worst,
        argmax_z: unit_root(grid, worst as i64),
        grid_size: grid,
    }
}

/// Hurwitz test of `𝒜_z` at `z = exp(2πik/K)`, `k = 0…K−1`.
pub fn stability_sweep<T: Real>(blocks: &NodeBlocks<T>, grid: usize) -> Result<StabilityReport<T>> {
    let min = min_grid(blocks.d());
    if grid < min {
        return Err(Error::GridTooCoarse { k: grid, min });
    }
    Ok(sweep_unchecked(blocks, grid))
}

/// Exact stability test of the finite ring of length `ring`: the grid is
/// `𝕌_N` itself, so no resolution requirement applies.
pub fn ring_stability<T: Real>(blocks: &NodeBlocks<T>, ring: usize) -> Result<StabilityReport<T>> {
    if ring == 0 {
        return Err(Error::InvalidConfig("ring length must be positive".into()));
    }
    Ok(sweep_unchecked(blocks, ring))
}

/// Sweep at [`default_grid`], doubled once when the margin is thin.
pub fn assess_stability<T: Real>(blocks: &NodeBlocks<T>) -> StabilityReport<T> {
    let grid = default_grid(blocks.d());
    let report = sweep_unchecked(blocks, grid);
    if report.worst_abscissa > -T::lit(REFINE_BAND) {
        log::debug!("refining stability sweep to K = {}", 2 * grid);
        return sweep_unchecked(blocks, 2 * grid);
    }
    report
}

/// Unit-circle samples of the symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolGrid<T: Real> {
    pub points: Vec<Complex<T>>,
    pub values: Vec<CMatrix<T>>,
}

impl<T: Real> SymbolGrid<T> {
    pub fn new(blocks: &NodeBlocks<T>, grid: usize) -> Self {
        Self {
            points: (0..grid).map(|k| unit_root(grid, k as i64)).collect(),
            values: (0..grid).map(|k| symbol_on_grid(blocks, grid, k)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Steady-state spatial spectral density on a uniform grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SpatialSpectrum<T: Real> {
    pub points: Vec<Complex<T>>,
    pub s: Vec<CMatrix<T>>,
    /// `‖𝒜_z S_z + S_z 𝒜_z* + BΩBᵀ‖_∞`; empty for imported spectra.
    pub residuals: Vec<T>,
    /// Per-point flag for a Kronecker condition estimate above [`ILL_CONDITIONED`].
    pub ill_conditioned: Vec<bool>,
    /// Relative gap between the one-mode closed form and the Kronecker
    /// solution; `None` where the closed form does not apply.
    pub closed_form_gap: Vec<Option<T>>,
}

impl<T: Real> SpatialSpectrum<T> {
    pub fn grid_size(&self) -> usize {
        self.points.len()
    }

    pub fn dim(&self) -> usize {
        self.s.first().map_or(0, Matrix::rows)
    }

    /// Spectrum from externally supplied samples on `exp(2πik/K)`.
    pub fn from_samples(s: Vec<CMatrix<T>>) -> Self {
        let k = s.len();
        Self {
            points: (0..k).map(|j| unit_root(k, j as i64)).collect(),
            ill_conditioned: vec![false; k],
            closed_form_gap: vec![None; k],
            residuals: Vec::new(),
            s,
        }
    }

    pub fn max_residual(&self) -> T {
        self.residuals.iter().copied().fold(T::zero(), T::max)
    }

    /// `K⁻¹ Σ_k S_{z_k}`, the single-node covariance.
    pub fn mean(&self) -> CMatrix<T> {
        let dim = self.dim();
        let sum = self.s.iter().fold(CMatrix::zeros(dim, dim), |acc, s| &acc + s);
        sum.scale_real(T::one() / T::from_usize_lossy(self.grid_size()))
    }
}

struct PointSolve<T: Real> {
    s: CMatrix<T>,
    residual: T,
    ill: bool,
    gap: Option<T>,
}

fn solve_point<T: Real>(az: &CMatrix<T>, forcing: &CMatrix<T>) -> Result<PointSolve<T>> {
    let sol = solve_lyapunov(az, forcing)?;
    let s = sol.x.hermitian_part();
    let residual = (&(&(az * &s) + &(&s * &az.adjoint())) + forcing).norm_inf();
    let ill = sol.rcond < T::one() / T::lit(ILL_CONDITIONED);
    let gap = if az.rows() == 2 {
        one_mode_closed_form(az, forcing).ok().map(|cf| {
            let scale = s.max_abs();
            let diff = (&cf - &s).max_abs();
            if scale > T::zero() {
                diff / scale
            } else {
                diff
            }
        })
    } else {
        None
    };
    Ok(PointSolve { s, residual, ill, gap })
}

/// Solves `𝒜_z S_z + S_z 𝒜_z* + BΩBᵀ = 0` at `z = exp(2πik/K)` for every `k`.
///
/// Each point is checked Hurwitz first, which is the exact stability test
/// on the grid `𝕌_K`.
pub fn steady_spectrum<T: Real>(blocks: &NodeBlocks<T>, grid: usize) -> Result<SpatialSpectrum<T>> {
    if grid == 0 {
        return Err(Error::GridTooCoarse { k: 0, min: 1 });
    }
    let forcing = blocks.forcing();
    let solved: Vec<Result<PointSolve<T>>> = (0..grid)
        .into_par_iter()
        .map(|k| {
            let az = symbol_on_grid(blocks, grid, k);
            let check = is_hurwitz(&az);
            if !check.hurwitz {
                return Err(Error::NotStable {
                    abscissa: check.abscissa.to_f64_lossy(),
                    index: k,
                });
            }
            solve_point(&az, forcing)
        })
        .collect();
    let mut out = SpatialSpectrum {
        points: Vec::with_capacity(grid),
        s: Vec::with_capacity(grid),
        residuals: Vec::with_capacity(grid),
        ill_conditioned: Vec::with_capacity(grid),
        closed_form_gap: Vec::with_capacity(grid),
    };
    for (k, p) in solved.into_iter().enumerate() {
        let p = p?;
        if p.ill {
            log::warn!("ill-conditioned Lyapunov system at grid index {k}");
        }
        out.points.push(unit_root(grid, k as i64));
        out.s.push(p.s);
        out.residuals.push(p.residual);
        out.ill_conditioned.push(p.ill);
        out.closed_form_gap.push(p.gap);
    }
    Ok(out)
}

fn det2<T: Real>(m: &CMatrix<T>) -> Complex<T> {
    m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
}

/// Closed-form solution of the 2×2 Lyapunov equation `A S + S Aᴴ + F = 0`
/// by the Cayley–Hamilton theorem.
///
/// With `Ā` the entrywise conjugate, `D = A² + Tr(Ā) A + det(Ā) I` and
/// `E₁ = Ā − Tr(Ā) I`, the solution is `S = −D⁻¹ (A F − F E₁ᵀ)`.
pub fn one_mode_closed_form<T: Real>(az: &CMatrix<T>, forcing: &CMatrix<T>) -> Result<CMatrix<T>> {
    if az.shape() != (2, 2) || forcing.shape() != (2, 2) {
        return Err(Error::DimensionMismatch("closed form needs 2x2 matrices".into()));
    }
    let id = CMatrix::<T>::identity(2);
    let abar = az.conj();
    let tr_bar = abar.trace();
    let det_bar = det2(&abar);
    let d = &(&(az * az) + &az.scale(tr_bar)) + &id.scale(det_bar);
    let e1 = &abar - &id.scale(tr_bar);
    let det_d = det2(&d);
    let scale = d.max_abs();
    if det_d.norm() <= T::lit(1e-13) * scale * scale || !Float::is_finite(det_d.norm()) {
        return Err(Error::DegenerateDenominator(det_d.norm().to_f64_lossy()));
    }
    // 2×2 inverse through the adjugate.
    let adj = &id.scale(d.trace()) - &d;
    let rhs = &(az * forcing) - &(forcing * &e1.transpose());
    let s = (&adj * &rhs).scale(-Complex::<T>::one() / det_d);
    Ok(s)
}

/// Matrix of `∫₀ᵗ e^{τK} dτ · f` through the augmented exponential
/// `exp(t [[K, f], [0, 0]])`.
fn integral_augmented<T: Real>(k: &CMatrix<T>, f: &[Complex<T>], t: T) -> Result<Vec<Complex<T>>> {
    let n = k.rows();
    let mut aug = CMatrix::zeros(n + 1, n + 1);
    aug.set_block(0, 0, &k.scale_real(t));
    for i in 0..n {
        aug[(i, n)] = f[i].scale(t);
    }
    let e = expm(&aug)?;
    Ok((0..n).map(|i| e[(i, n)]).collect())
}

/// Covariance spectrum `S_{z,v}(t)` of the ring of length `ring` started
/// from `S_{z,v}(0) = s0`, with `z`, `v` given as indices into `𝕌_N`.
pub fn transient_spectrum<T: Real>(
    blocks: &NodeBlocks<T>,
    ring: usize,
    s0: &CMatrix<T>,
    z: usize,
    v: usize,
    t: T,
) -> Result<CMatrix<T>> {
    if t.is_nan() || t < T::zero() || !Float::is_finite(t) {
        return Err(Error::NegativeTime(t.to_f64_lossy()));
    }
    for idx in [z, v] {
        if idx >= ring {
            return Err(Error::NotOnRingGrid { index: idx, ring });
        }
    }
    let dim = blocks.dim();
    if s0.shape() != (dim, dim) {
        return Err(Error::DimensionMismatch(format!("S0 must be {dim}x{dim}")));
    }
    if t == T::zero() {
        return Ok(s0.clone());
    }
    let az = symbol_on_grid(blocks, ring, z);
    let av = symbol_on_grid(blocks, ring, v);
    let ez = expm(&az.scale_real(t))?;
    let ev = expm(&av.scale_real(t))?;
    let mut out = &(&ez * s0) * &ev.adjoint();
    if z != v {
        return Ok(out);
    }
    // vec ∫₀ᵗ e^{τA_z} F e^{τA_v*} dτ = K⁻¹ (e^{tK} − I) vec F.
    let k = sylvester_operator(&az, &av.adjoint());
    let f = blocks.forcing().vec();
    let lu = Lu::factor(&k);
    let integral = if lu.rcond() > T::lit(1e-10) {
        let ek = expm(&k.scale_real(t))?;
        let ekf = ek.mul_vec(&f);
        let diff: Vec<Complex<T>> = ekf.iter().zip(&f).map(|(a, b)| a - b).collect();
        lu.solve_vec(&diff)?
    } else {
        integral_augmented(&k, &f, t)?
    };
    let n_ring = T::from_usize_lossy(ring);
    let forced = CMatrix::unvec(&integral, dim, dim).scale_real(n_ring);
    out = &out + &forced;
    Ok(out)
}

/// Steady cross-covariance `E(X_j X_kᵀ) = N⁻¹ Σ_{z∈𝕌_N} z^{j−k} S_z`.
pub fn cross_covariance<T: Real>(spectrum: &SpatialSpectrum<T>, j: usize, k: usize, ring: usize) -> Result<CMatrix<T>> {
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
    Ok(lagged_average(spectrum, j as i64 - k as i64))
}

/// `K⁻¹ Σ_k z_k^{lag} S_{z_k}` over the spectrum's own grid.
pub fn lagged_average<T: Real>(spectrum: &SpatialSpectrum<T>, lag: i64) -> CMatrix<T> {
    let grid = spectrum.grid_size();
    let dim = spectrum.dim();
    let mut acc = CMatrix::zeros(dim, dim);
    for (idx, s) in spectrum.s.iter().enumerate() {
        let w = unit_root::<T>(grid, idx as i64 * lag);
        acc = &acc + &s.scale(w);
    }
    acc.scale_real(T::one() / T::from_usize_lossy(grid))
}
