//! Network parameters, their validation, and the derived circulant blocks.

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{det, solve_right, CMatrix, Matrix};
use crate::scalar::Real;

/// Absolute entrywise tolerance for the structural checks on user input.
pub const STRUCTURE_TOL: f64 = 1e-12;

/// Raw network parameters: node dimensions, ring geometry, CCR matrix,
/// Hamiltonian blocks `R₀…R_d` and the field coupling `M`.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkSpec<T: Real> {
    /// Modes per node.
    pub n: usize,
    /// Field channels per node.
    pub m: usize,
    /// Ring length `N`.
    pub ring: usize,
    /// Interaction range.
    pub d: usize,
    pub theta: Matrix<T>,
    /// `R₀…R_d`; the blocks at negative lags are the transposes.
    pub r: Vec<Matrix<T>>,
    pub coupling: Matrix<T>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkFile {
    n: usize,
    m: usize,
    #[serde(rename = "N")]
    ring: usize,
    d: usize,
    theta: Vec<Vec<f64>>,
    #[serde(rename = "R")]
    r: Vec<Vec<Vec<f64>>>,
    #[serde(rename = "M")]
    coupling: Vec<Vec<f64>>,
}

fn matrix_from_rows<T: Real>(rows: &[Vec<f64>], what: &str) -> Result<Matrix<T>> {
    let m = Matrix::from_rows(rows).ok_or_else(|| Error::DimensionMismatch(format!("{what} has ragged rows")))?;
    Ok(m.map(T::lit))
}

fn matrix_to_rows<T: Real>(m: &Matrix<T>) -> Vec<Vec<f64>> {
    m.map(|x| x.to_f64_lossy()).to_rows()
}

impl<T: Real> NetworkSpec<T> {
    /// Canonical CCR matrix `I_n ⊗ [[0,1],[−1,0]]`.
    pub fn canonical_theta(n: usize) -> Matrix<T> {
        symplectic_j(n)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: NetworkFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Ok(Self {
            n: file.n,
            m: file.m,
            ring: file.ring,
            d: file.d,
            theta: matrix_from_rows(&file.theta, "theta")?,
            r: file
                .r
                .iter()
                .enumerate()
                .map(|(i, rows)| matrix_from_rows(rows, &format!("R[{i}]")))
                .collect::<Result<_>>()?,
            coupling: matrix_from_rows(&file.coupling, "M")?,
        })
    }

    pub fn to_json(&self) -> String {
        let file = NetworkFile {
            n: self.n,
            m: self.m,
            ring: self.ring,
            d: self.d,
            theta: matrix_to_rows(&self.theta),
            r: self.r.iter().map(matrix_to_rows).collect(),
            coupling: matrix_to_rows(&self.coupling),
        };
        serde_json::to_string(&file).expect("network spec serializes")
    }
}

/// A [`NetworkSpec`] that passed [`validate_spec`].
#[derive(Clone, Debug, PartialEq)]
pub struct ValidatedNetworkSpec<T: Real>(NetworkSpec<T>);

impl<T: Real> ValidatedNetworkSpec<T> {
    pub fn into_inner(self) -> NetworkSpec<T> {
        self.0
    }

    /// Returns a copy with a different ring length, revalidated.
    pub fn with_ring(&self, ring: usize) -> Result<Self> {
        let mut spec = self.0.clone();
        spec.ring = ring;
        validate_spec(spec)
    }
}

impl<T: Real> Deref for ValidatedNetworkSpec<T> {
    type Target = NetworkSpec<T>;

    fn deref(&self) -> &NetworkSpec<T> {
        &self.0
    }
}

fn check_shape<T: Real>(m: &Matrix<T>, rows: usize, cols: usize, what: &str) -> Result<()> {
    if m.shape() != (rows, cols) {
        return Err(Error::DimensionMismatch(format!(
            "{what} is {}x{}, expected {rows}x{cols}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(())
}

pub fn validate_spec<T: Real>(raw: NetworkSpec<T>) -> Result<ValidatedNetworkSpec<T>> {
    if raw.n == 0 || raw.m == 0 || raw.d == 0 || raw.ring == 0 {
        return Err(Error::DimensionMismatch("n, m, N and d must be positive".into()));
    }
    let (nn, mm) = (2 * raw.n, 2 * raw.m);
    check_shape(&raw.theta, nn, nn, "theta")?;
    if raw.r.len() != raw.d + 1 {
        return Err(Error::DimensionMismatch(format!(
            "R has {} blocks, expected d + 1 = {}",
            raw.r.len(),
            raw.d + 1
        )));
    }
    for (i, r) in raw.r.iter().enumerate() {
        check_shape(r, nn, nn, &format!("R[{i}]"))?;
    }
    check_shape(&raw.coupling, mm, nn, "M")?;

    if !raw.theta.is_finite() {
        return Err(Error::NonFiniteEntry("theta"));
    }
    if raw.r.iter().any(|r| !r.is_finite()) {
        return Err(Error::NonFiniteEntry("R"));
    }
    if !raw.coupling.is_finite() {
        return Err(Error::NonFiniteEntry("M"));
    }

    let tol = T::lit(STRUCTURE_TOL);
    let defect = (&raw.theta + &raw.theta.transpose()).max_abs();
    if defect > tol {
        return Err(Error::ThetaNotAntisymmetric {
            defect: defect.to_f64_lossy(),
        });
    }
    let dt = det(&raw.theta);
    if dt.abs() < tol {
        return Err(Error::ThetaSingular { det: dt.to_f64_lossy() });
    }
    let defect = (&raw.r[0] - &raw.r[0].transpose()).max_abs();
    if defect > tol {
        return Err(Error::R0NotSymmetric {
            defect: defect.to_f64_lossy(),
        });
    }
    if raw.ring <= 2 * raw.d {
        return Err(Error::RingTooShort {
            ring: raw.ring,
            d: raw.d,
        });
    }
    Ok(ValidatedNetworkSpec(raw))
}

/// `I_m ⊗ [[0,1],[−1,0]]`.
pub fn symplectic_j<T: Real>(m: usize) -> Matrix<T> {
    Matrix::from_fn(2 * m, 2 * m, |i, j| {
        if i / 2 != j / 2 {
            T::zero()
        } else if i % 2 == 0 && j % 2 == 1 {
            T::one()
        } else if i % 2 == 1 && j % 2 == 0 {
            -T::one()
        } else {
            T::zero()
        }
    })
}

/// Itô matrix `Ω = I₂ₘ + iJ` of the vacuum input fields.
pub fn noise_ito_matrix<T: Real>(m: usize) -> CMatrix<T> {
    assert!(m >= 1, "at least one field channel");
    CMatrix::from_parts(&Matrix::identity(2 * m), &symplectic_j(m))
}

/// The derived QSDE data: `dX = Σ_ℓ A_ℓ X_{j+ℓ} dt + B dW_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeBlocks<T: Real> {
    d: usize,
    /// `A_ℓ` stored at index `ℓ + d`.
    a: Vec<Matrix<T>>,
    b: Matrix<T>,
    omega: CMatrix<T>,
    theta: Matrix<T>,
    forcing: CMatrix<T>,
}

impl<T: Real> NodeBlocks<T> {
    /// Assembles blocks directly, bypassing the Hamiltonian parametrization.
    /// `lags` holds `A₋d…A_d`; `d = 0` is allowed here.
    pub fn from_raw(lags: Vec<Matrix<T>>, b: Matrix<T>, theta: Matrix<T>) -> Result<Self> {
        if lags.len() % 2 != 1 {
            return Err(Error::DimensionMismatch(
                "need an odd number of lag blocks A₋d…A_d".into(),
            ));
        }
        let dim = theta.rows();
        check_shape(&theta, dim, dim, "theta")?;
        for (i, a) in lags.iter().enumerate() {
            check_shape(a, dim, dim, &format!("A[{i}]"))?;
        }
        if b.rows() != dim || !b.cols().is_multiple_of(2) || b.cols() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "B is {}x{}, expected {dim}x2m",
                b.rows(),
                b.cols()
            )));
        }
        let omega = noise_ito_matrix(b.cols() / 2);
        let bc = b.to_complex();
        let forcing = &(&bc * &omega) * &bc.transpose();
        Ok(Self {
            d: lags.len() / 2,
            a: lags,
            b,
            omega,
            theta,
            forcing,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// State dimension `2n` of one node.
    pub fn dim(&self) -> usize {
        self.theta.rows()
    }

    pub fn modes(&self) -> usize {
        self.dim() / 2
    }

    /// `A_ℓ` for `|ℓ| ≤ d`.
    pub fn a(&self, lag: i64) -> &Matrix<T> {
        let d = self.d as i64;
        assert!(lag.abs() <= d, "lag {lag} outside the interaction range {d}");
        &self.a[(lag + d) as usize]
    }

    pub fn a0(&self) -> &Matrix<T> {
        self.a(0)
    }

    /// `(ℓ, A_ℓ)` for `ℓ = −d…d`.
    pub fn lags(&self) -> impl Iterator<Item = (i64, &Matrix<T>)> + '_ {
        let d = self.d as i64;
        self.a.iter().enumerate().map(move |(i, a)| (i as i64 - d, a))
    }

    pub fn b(&self) -> &Matrix<T> {
        &self.b
    }

    pub fn omega(&self) -> &CMatrix<T> {
        &self.omega
    }

    pub fn theta(&self) -> &Matrix<T> {
        &self.theta
    }

    /// `B Ω Bᵀ`, the forcing term of every Lyapunov equation.
    pub fn forcing(&self) -> &CMatrix<T> {
        &self.forcing
    }

    /// `Ã = [A₋d … A₋₁ A₁ … A_d]`, of size `2n × 4nd`.
    pub fn a_tilde(&self) -> Matrix<T> {
        let dim = self.dim();
        let mut out = Matrix::zeros(dim, 2 * dim * self.d);
        let mut col = 0;
        for (lag, a) in self.lags() {
            if lag != 0 {
                out.set_block(0, col, a);
                col += dim;
            }
        }
        out
    }
}

pub fn build_blocks<T: Real>(spec: &ValidatedNetworkSpec<T>) -> Result<NodeBlocks<T>> {
    let theta = &spec.theta;
    let two = T::lit(2.0);
    let b = (theta * &spec.coupling.transpose()).scale(two);
    let j = symplectic_j::<T>(spec.m);
    let bjb = &(&b * &j) * &b.transpose();
    // A₀ = 2ΘR₀ − ½ (BJBᵀ) Θ⁻¹, the last factor through a right solve.
    let x = solve_right(theta, &bjb)?;
    let a0 = &(theta * &spec.r[0]).scale(two) - &x.scale(T::lit(0.5));

    let d = spec.d;
    let mut lags = Vec::with_capacity(2 * d + 1);
    for l in (1..=d).rev() {
        lags.push((theta * &spec.r[l].transpose()).scale(two));
    }
    lags.push(a0);
    for l in 1..=d {
        lags.push((theta * &spec.r[l]).scale(two));
    }
    NodeBlocks::from_raw(lags, b, theta.clone())
}

/// Largest entrywise deviation of `B J Bᵀ` from antisymmetry.
pub fn bjb_antisymmetry_defect<T: Real>(blocks: &NodeBlocks<T>) -> T {
    let j = symplectic_j::<T>(blocks.b().cols() / 2);
    let bjb = &(blocks.b() * &j) * &blocks.b().transpose();
    (&bjb + &bjb.transpose()).max_abs()
}
