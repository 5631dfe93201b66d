//! Mean-square performance: per-node cost of the finite ring and its
//! thermodynamic limit.

use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigvalsh, CMatrix, Matrix};
use crate::model::{NodeBlocks, STRUCTURE_TOL};
use crate::scalar::{unit_root, Real};
use crate::spectral::{steady_spectrum, SpatialSpectrum, UNIT_CIRCLE_TOL};

/// Finitely supported weighting sequence `σ_0…σ_kmax`; `σ_{−k} = σ_kᵀ`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightingSequence<T: Real> {
    sigma: Vec<Matrix<T>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightsFile {
    k_max: usize,
    sigma: Vec<Vec<Vec<f64>>>,
}

impl<T: Real> WeightingSequence<T> {
    pub fn new(sigma: Vec<Matrix<T>>) -> Result<Self> {
        let first = sigma
            .first()
            .ok_or_else(|| Error::DimensionMismatch("weighting sequence needs σ₀".into()))?;
        let dim = first.rows();
        if sigma.iter().any(|s| s.shape() != (dim, dim)) {
            return Err(Error::DimensionMismatch("all σ_k must be square of one size".into()));
        }
        if sigma.iter().any(|s| !s.is_finite()) {
            return Err(Error::NonFiniteEntry("sigma"));
        }
        let defect = (first - &first.transpose()).max_abs();
        if defect > T::lit(STRUCTURE_TOL) {
            return Err(Error::Sigma0NotSymmetric(defect.to_f64_lossy()));
        }
        Ok(Self { sigma })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: WeightsFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if file.sigma.len() != file.k_max + 1 {
            return Err(Error::DimensionMismatch(format!(
                "sigma has {} entries, expected k_max + 1 = {}",
                file.sigma.len(),
                file.k_max + 1
            )));
        }
        let sigma = file
            .sigma
            .iter()
            .map(|rows| {
                Matrix::from_rows(rows)
                    .map(|m| m.map(T::lit))
                    .ok_or_else(|| Error::DimensionMismatch("sigma has ragged rows".into()))
            })
            .collect::<Result<_>>()?;
        Self::new(sigma)
    }

    pub fn to_json(&self) -> String {
        let file = WeightsFile {
            k_max: self.k_max(),
            sigma: self
                .sigma
                .iter()
                .map(|m| m.map(|x| x.to_f64_lossy()).to_rows())
                .collect(),
        };
        serde_json::to_string(&file).expect("weights serialize")
    }

    /// `σ₀ = I` of the given size.
    pub fn identity(dim: usize) -> Self {
        Self {
            sigma: vec![Matrix::identity(dim)],
        }
    }

    pub fn k_max(&self) -> usize {
        self.sigma.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.sigma[0].rows()
    }

    /// `σ_k` for any integer `k`; zero outside the support.
    pub fn sigma(&self, k: i64) -> Matrix<T> {
        let idx = k.unsigned_abs() as usize;
        match self.sigma.get(idx) {
            None => Matrix::zeros(self.dim(), self.dim()),
            Some(s) if k >= 0 => s.clone(),
            Some(s) => s.transpose(),
        }
    }

    /// `Σ_k ‖σ_k‖_∞` over both sides of the support.
    pub fn total_norm(&self) -> T {
        self.sigma
            .iter()
            .enumerate()
            .map(|(k, s)| {
                if k == 0 {
                    s.norm_inf()
                } else {
                    s.norm_inf() + s.transpose().norm_inf()
                }
            })
            .sum()
    }

    /// `Σ_k c_k z^{−k} σ_k` with the triangular weights `c_k` (all ones
    /// when `ring` is `None`), `z` given through `z^{-k}`.
    fn density(&self, zpow: impl Fn(i64) -> Complex<T>, ring: Option<usize>) -> CMatrix<T> {
        let dim = self.dim();
        let mut acc = CMatrix::zeros(dim, dim);
        let km = self.k_max() as i64;
        for k in -km..=km {
            let c = match ring {
                None => T::one(),
                Some(n) => {
                    let c = T::one() - T::lit(k.abs() as f64) / T::from_usize_lossy(n);
                    if c <= T::zero() {
                        continue;
                    }
                    c
                }
            };
            let w = zpow(k).scale(c);
            let s = self.sigma(k);
            for i in 0..dim {
                for j in 0..dim {
                    acc[(i, j)] += w.scale(s[(i, j)]);
                }
            }
        }
        acc
    }

    /// Fails with `WeightNotPositive` unless `Σ_z ⪰ 0` on `grid` roots of unity.
    pub fn check_nonnegative(&self, grid: usize) -> Result<()> {
        for idx in 0..grid {
            let w = self.density(|k| unit_root(grid, -(idx as i64) * k), None);
            let min = eigvalsh(&w)?[0];
            if min < -T::lit(1e-12) * self.total_norm().max(T::one()) {
                return Err(Error::WeightNotPositive {
                    value: min.to_f64_lossy(),
                    index: idx,
                });
            }
        }
        Ok(())
    }
}

fn check_unit<T: Real>(z: Complex<T>) -> Result<()> {
    if (z.norm() - T::one()).abs() > T::lit(UNIT_CIRCLE_TOL) {
        return Err(Error::NotOnUnitCircle {
            modulus: z.norm().to_f64_lossy(),
        });
    }
    Ok(())
}

/// `Σ_z = Σ_k z^{−k} σ_k`.
pub fn spectral_weight<T: Real>(w: &WeightingSequence<T>, z: Complex<T>) -> Result<CMatrix<T>> {
    check_unit(z)?;
    Ok(w.density(|k| z.powi(-(k as i32)), None))
}

/// `Σ̂_N(z) = Σ_k (1 − |k|/N) z^{−k} σ_k`.
pub fn fejer_density<T: Real>(w: &WeightingSequence<T>, ring: usize, z: Complex<T>) -> Result<CMatrix<T>> {
    check_unit(z)?;
    if ring == 0 {
        return Err(Error::InvalidConfig("ring length must be positive".into()));
    }
    Ok(w.density(|k| z.powi(-(k as i32)), Some(ring)))
}

fn trace_product<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> Complex<T> {
    let n = a.rows();
    let mut acc = Complex::zero();
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// `N⁻¹ Σ_{z∈𝕌_N} Tr(Σ̂_N(z) S_z)` before the imaginary part is dropped.
pub fn finite_cost_complex<T: Real>(
    spectrum: &SpatialSpectrum<T>,
    w: &WeightingSequence<T>,
    ring: usize,
) -> Result<Complex<T>> {
    if spectrum.grid_size() != ring {
        return Err(Error::GridMismatch {
            k: spectrum.grid_size(),
            expected: ring,
        });
    }
    if spectrum.dim() != w.dim() {
        return Err(Error::DimensionMismatch(format!(
            "weights are {0}x{0}, spectrum is {1}x{1}",
            w.dim(),
            spectrum.dim()
        )));
    }
    let mut acc = Complex::zero();
    for (idx, s) in spectrum.s.iter().enumerate() {
        let sig = w.density(|k| unit_root(ring, -(idx as i64) * k), Some(ring));
        acc += trace_product(&sig, s);
    }
    Ok(acc.unscale(T::from_usize_lossy(ring)))
}

/// Steady per-node cost `E_N(∞)` of the ring of length `ring`.
pub fn finite_cost<T: Real>(spectrum: &SpatialSpectrum<T>, w: &WeightingSequence<T>, ring: usize) -> Result<T> {
    let c = finite_cost_complex(spectrum, w, ring)?;
    if c.im.abs() > T::lit(1e-10) * c.re.abs().max(T::one()) {
        log::warn!("cost has imaginary residue {:e}", c.im.to_f64_lossy());
    }
    Ok(c.re)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThermodynamicCost<T> {
    pub value: T,
    /// `|value_K − value_{K/2}|`.
    pub error: T,
}

/// `(2πi)⁻¹ ∮ Tr(Σ_z S_z) dz/z` by the trapezoidal rule on `grid` points.
pub fn thermodynamic_cost<T: Real>(
    blocks: &NodeBlocks<T>,
    w: &WeightingSequence<T>,
    grid: usize,
) -> Result<ThermodynamicCost<T>> {
    if grid < 2 || !grid.is_multiple_of(2) {
        return Err(Error::InvalidConfig(
            "quadrature size must be even and at least 2".into(),
        ));
    }
    if blocks.dim() != w.dim() {
        return Err(Error::DimensionMismatch("weights and blocks differ in size".into()));
    }
    let spectrum = steady_spectrum(blocks, grid)?;
    let terms: Vec<Complex<T>> = spectrum
        .s
        .iter()
        .enumerate()
        .map(|(idx, s)| {
            let sig = w.density(|k| unit_root(grid, -(idx as i64) * k), None);
            trace_product(&sig, s)
        })
        .collect();
    let full: Complex<T> = terms
        .iter()
        .copied()
        .sum::<Complex<T>>()
        .unscale(T::from_usize_lossy(grid));
    let half: Complex<T> = terms
        .iter()
        .step_by(2)
        .copied()
        .sum::<Complex<T>>()
        .unscale(T::from_usize_lossy(grid / 2));
    Ok(ThermodynamicCost {
        value: full.re,
        error: (full.re - half.re).abs(),
    })
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;

    use super::*;
    use crate::model::NetworkSpec;

    fn theta() -> Matrix<f64> {
        NetworkSpec::<f64>::canonical_theta(1)
    }

    #[test]
    fn weight_examples() {
        let id = Matrix::identity(2);
        let w = WeightingSequence::new(vec![id.clone()]).unwrap();
        let z = Complex64::new(0.6, 0.8);
        assert!((&spectral_weight(&w, z).unwrap() - &id.to_complex()).max_abs() < 1e-15);

        let w = WeightingSequence::new(vec![id.scale(3.0), id.clone()]).unwrap();
        let s = spectral_weight(&w, Complex64::new(-1.0, 0.0)).unwrap();
        assert!((&s - &id.to_complex()).max_abs() < 1e-15);
        let f = fejer_density(&w, 4, Complex64::new(1.0, 0.0)).unwrap();
        assert!((&f - &id.scale(4.5).to_complex()).max_abs() < 1e-15);

        let w = WeightingSequence::new(vec![id.clone(), theta()]).unwrap();
        let zi = Complex64::new(0.0, 1.0);
        let direct =
            &(&id.to_complex() + &theta().to_complex().scale(zi.inv())) + &theta().transpose().to_complex().scale(zi);
        assert!((&spectral_weight(&w, zi).unwrap() - &direct).max_abs() < 1e-15);
        assert!(spectral_weight(&w, zi).unwrap().hermitian_defect() < 1e-12);
    }

    #[test]
    fn weights_json() {
        let w = WeightingSequence::<f64>::from_json(r#"{"k_max":1,"sigma":[[[1,0],[0,1]],[[0,1],[0,0]]]}"#).unwrap();
        assert_eq!(w.k_max(), 1);
        assert_eq!(WeightingSequence::<f64>::from_json(&w.to_json()).unwrap(), w);
        let bad = WeightingSequence::<f64>::from_json(r#"{"k_max":0,"sigma":[[[1,2],[0,1]]]}"#);
        assert_eq!(bad.unwrap_err().code(), "Sigma0NotSymmetric");
    }

    #[test]
    fn nonnegativity_check() {
        let id = Matrix::identity(2);
        let ok = WeightingSequence::new(vec![id.scale(2.0), id.clone()]).unwrap();
        assert!(ok.check_nonnegative(64).is_ok());
        let bad = WeightingSequence::new(vec![id.clone(), id.clone()]).unwrap();
        assert_eq!(bad.check_nonnegative(64).unwrap_err().code(), "WeightNotPositive");
    }

    #[test]
    fn gauge_cost_is_two() {
        let th = theta();
        let blocks = NodeBlocks::from_raw(vec![Matrix::identity(2).scale(-2.0)], th.scale(2.0), th).unwrap();
        let w = WeightingSequence::identity(2);
        for n in [4, 64] {
            let sp = steady_spectrum(&blocks, n).unwrap();
            assert!((finite_cost(&sp, &w, n).unwrap() - 2.0).abs() < 1e-12);
        }
        let t = thermodynamic_cost(&blocks, &w, 512).unwrap();
        assert!((t.value - 2.0).abs() < 1e-12 && t.error < 1e-12);
        let sp = steady_spectrum(&blocks, 8).unwrap();
        assert_eq!(finite_cost(&sp, &w, 9).unwrap_err().code(), "GridMismatch");
    }
}
