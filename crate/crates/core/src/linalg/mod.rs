//! Small dense linear algebra over real and complex scalars.
//!
//! Sizes in this crate stay below a few hundred (Kronecker systems of
//! 2n×2n blocks), so everything is plain row-major storage with
//! straightforward O(n³) kernels.

mod eigh;
mod expm;
mod lu;
mod matrix;

pub use eigh::{eigvalsh, pinv_hermitian, sqrt_psd, Eigh};
pub use expm::{expm, expm_taylor};
pub use lu::{det, solve_right, Lu};
pub use matrix::{CMatrix, Matrix};

use num_traits::{Float, One, Zero};
use thiserror::Error;

use crate::scalar::{Element, Real};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is singular")]
    Singular,
    #[error("shape mismatch: {0}")]
    Shape(&'static str),
    #[error("non-finite entries")]
    NonFinite,
    #[error("{0} did not converge")]
    NoConvergence(&'static str),
}

/// Kronecker sum `I ⊗ A + Bᵀ ⊗ I`, the matrix of `X ↦ A X + X B` acting on `vec(X)`.
pub fn sylvester_operator<E: Element>(a: &Matrix<E>, b: &Matrix<E>) -> Matrix<E> {
    let (n, m) = (a.rows(), b.rows());
    let mut k = Matrix::identity(m).kron(a);
    let bt = b.transpose().kron(&Matrix::identity(n));
    k = &k + &bt;
    k
}

/// Solution of `A X + X B + C = 0` by vectorization.
#[derive(Clone, Debug)]
pub struct SylvesterSolution<E: Element> {
    pub x: Matrix<E>,
    /// Reciprocal condition estimate of the Kronecker operator.
    pub rcond: E::Real,
}

/// Solves `A X + X B + C = 0` through `(I ⊗ A + Bᵀ ⊗ I) vec X = −vec C`,
/// with one step of iterative refinement.
pub fn solve_sylvester<E: Element>(
    a: &Matrix<E>,
    b: &Matrix<E>,
    c: &Matrix<E>,
) -> Result<SylvesterSolution<E>, LinalgError> {
    if !a.is_square() || !b.is_square() || c.shape() != (a.rows(), b.rows()) {
        return Err(LinalgError::Shape("Sylvester operands"));
    }
    let op = sylvester_operator(a, b);
    let lu = Lu::factor(&op);
    let rhs: Vec<E> = c.vec().into_iter().map(|v| -v).collect();
    let mut x = lu.solve_vec(&rhs)?;
    let r: Vec<E> = op.mul_vec(&x).into_iter().zip(&rhs).map(|(ax, &b)| b - ax).collect();
    if let Ok(dx) = lu.solve_vec(&r) {
        for (xi, d) in x.iter_mut().zip(dx) {
            *xi += d;
        }
    }
    let x = Matrix::unvec(&x, a.rows(), b.rows());
    if !x.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    Ok(SylvesterSolution { x, rcond: lu.rcond() })
}

/// Solves the Lyapunov equation `A X + X Aᴴ + C = 0`; the result is
/// Hermitian-projected when `C` is Hermitian.
pub fn solve_lyapunov<E: Element>(a: &Matrix<E>, c: &Matrix<E>) -> Result<SylvesterSolution<E>, LinalgError> {
    let mut sol = solve_sylvester(a, &a.adjoint(), c)?;
    if c.hermitian_defect() == E::Real::zero() {
        sol.x = sol.x.hermitian_part();
    }
    Ok(sol)
}

/// `‖A X + X Aᴴ + C‖_∞`.
pub fn lyapunov_residual<E: Element>(a: &Matrix<E>, x: &Matrix<E>, c: &Matrix<E>) -> E::Real {
    let r = &(&(a * x) + &(x * &a.adjoint())) + c;
    r.norm_inf()
}

/// Lyapunov certificate `A P + P Aᴴ + I = 0` with the spectrum of `P`.
#[derive(Clone, Debug)]
pub struct LyapunovCertificate<E: Element> {
    pub p: Matrix<E>,
    pub min_eig: E::Real,
    pub max_eig: E::Real,
    pub rcond: E::Real,
}

impl<E: Element> LyapunovCertificate<E> {
    /// `A` is Hurwitz iff `P ≻ 0`.
    pub fn is_positive_definite(&self) -> bool {
        self.min_eig > E::Real::zero() && self.max_eig.is_finite()
    }

    /// `−1 / (2 λ_max(P))`, an upper bound on the spectral abscissa of a
    /// Hurwitz `A`; exact when `A` is normal.
    pub fn abscissa_bound(&self) -> E::Real {
        -E::Real::one() / (E::Real::lit(2.0) * self.max_eig)
    }
}

/// Below this reciprocal condition number the Kronecker operator is treated
/// as singular: `A` then has eigenvalues `λ_i + conj(λ_j) ≈ 0`.
pub const SINGULAR_RCOND: f64 = 1e-14;

pub fn lyapunov_certificate<E: Element>(a: &Matrix<E>) -> Result<LyapunovCertificate<E>, LinalgError> {
    let id = Matrix::identity(a.rows());
    let sol = solve_lyapunov(a, &id)?;
    if sol.rcond < E::Real::lit(SINGULAR_RCOND) {
        return Err(LinalgError::Singular);
    }
    let eig = Eigh::new(&sol.x)?;
    Ok(LyapunovCertificate {
        min_eig: eig.min(),
        max_eig: eig.max(),
        p: sol.x,
        rcond: sol.rcond,
    })
}

/// Decides whether `A` is Hurwitz by the Lyapunov certificate.
pub fn is_hurwitz_certified<E: Element>(a: &Matrix<E>) -> bool {
    lyapunov_certificate(a).is_ok_and(|c| c.is_positive_definite())
}

/// Spectral abscissa (largest real part of an eigenvalue) located by
/// bisection on the shift `s` for which `A − s I` is certified Hurwitz.
pub fn spectral_abscissa_bisect<E: Element>(a: &Matrix<E>, rel_tol: E::Real) -> E::Real {
    let n = a.rows();
    let bound = a.norm_inf() + E::Real::one();
    let shifted = |s: E::Real| {
        let mut m = a.clone();
        for i in 0..n {
            m[(i, i)] -= E::from_real(s);
        }
        is_hurwitz_certified(&m)
    };
    let (mut lo, mut hi) = (-bound, bound);
    let tol = rel_tol * bound;
    while hi - lo > tol {
        let mid = (lo + hi) * E::Real::lit(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        if shifted(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo + hi) * E::Real::lit(0.5)
}

/// Smallest eigenvalue of the Hermitian part.
pub fn min_eigenvalue<E: Element>(a: &Matrix<E>) -> Result<E::Real, LinalgError> {
    Eigh::new(a).map(|e| e.min())
}

/// Largest eigenvalue of the Hermitian part.
pub fn max_eigenvalue<E: Element>(a: &Matrix<E>) -> Result<E::Real, LinalgError> {
    Eigh::new(a).map(|e| e.max())
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;

    use super::*;

    #[test]
    fn lyapunov_scalar() {
        let a = Matrix::from_rows(&[vec![-2.0]]).unwrap();
        let c = Matrix::from_rows(&[vec![4.0]]).unwrap();
        let s = solve_lyapunov(&a, &c).unwrap();
        assert!((s.x[(0, 0)] - 1.0).abs() < 1e-15);
        assert!(lyapunov_residual(&a, &s.x, &c) < 1e-15);
    }

    #[test]
    fn certificate_decides_hurwitz() {
        let stable = Matrix::from_rows(&[vec![-1.0, 100.0], vec![0.0, -1.0]]).unwrap();
        let cert = lyapunov_certificate(&stable).unwrap();
        assert!(cert.is_positive_definite());
        assert!(cert.abscissa_bound() > -1.0);

        let unstable = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]]).unwrap();
        assert!(!is_hurwitz_certified(&unstable));

        let rotation = Matrix::from_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]]).unwrap();
        assert!(matches!(lyapunov_certificate(&rotation), Err(LinalgError::Singular)));
    }

    #[test]
    fn bisection_abscissa_nonnormal() {
        let a = Matrix::from_rows(&[
            vec![Complex64::new(-1.0, 2.0), Complex64::new(50.0, 0.0)],
            vec![Complex64::new(0.0, 0.0), Complex64::new(-3.0, -1.0)],
        ])
        .unwrap();
        let alpha = spectral_abscissa_bisect(&a, 1e-12);
        assert!((alpha + 1.0).abs() < 1e-8, "{alpha}");
        let unstable = &a + &Matrix::identity(2).scale(Complex64::new(1.5, 0.0));
        let alpha = spectral_abscissa_bisect(&unstable, 1e-12);
        assert!((alpha - 0.5).abs() < 1e-8, "{alpha}");
    }
}
