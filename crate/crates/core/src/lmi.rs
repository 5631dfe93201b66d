//! Sufficient stability certificate: a block LMI in `(S, Q)` that implies
//! the symbol is Hurwitz on the whole unit circle.
//!
//! The search reduces the LMI by a Schur complement, with `Q = εI`, to the
//! Riccati equation `A₀S + SA₀ᵀ + S² + C = 0`, `C = 2d·Σ_{j≠0} A_jA_jᵀ + εI`,
//! and solves it by Newton–Kleinman iteration.

use crate::error::{Error, Result};
use crate::linalg::{eigvalsh, solve_lyapunov, Matrix};
use crate::model::NodeBlocks;
use crate::scalar::Real;
use crate::spectral::is_hurwitz;

/// Smallest admissible eigenvalue of `S` and `Q`.
pub const PD_TOL: f64 = 1e-10;
/// Largest admissible eigenvalue of the assembled LMI matrix.
pub const SLACK_TOL: f64 = 1e-9;
pub const DEFAULT_EPSILON: f64 = 1e-6;
pub const MAX_ITERATIONS: usize = 60;
/// Riccati residual target, relative to `max(1, ‖C‖_∞)`.
pub const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct LmiCertificate<T: Real> {
    pub s: Matrix<T>,
    pub q: Matrix<T>,
    /// Largest eigenvalue of the assembled LMI matrix.
    pub slack: T,
    pub iterations: usize,
    /// Riccati residual `‖A₀S + SA₀ᵀ + S² + C‖_∞` after each iterate.
    pub residuals: Vec<T>,
}

/// Result of checking a candidate pair `(S, Q)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CertificateCheck<T> {
    pub valid: bool,
    pub slack: T,
    pub s_min_eig: T,
    pub q_min_eig: T,
}

fn square<T: Real>(m: &Matrix<T>, dim: usize, what: &str) -> Result<()> {
    if m.shape() != (dim, dim) {
        return Err(Error::DimensionMismatch(format!("{what} must be {dim}x{dim}")));
    }
    Ok(())
}

/// `[[A₀S + SA₀ᵀ + Q, S, Ã], [S, −I, 0], [Ãᵀ, 0, −I/(2d)]]`.
///
/// `Ã` has `4nd` columns; with `d = 0` the last block row and column vanish.
pub fn assemble_lmi<T: Real>(blocks: &NodeBlocks<T>, s: &Matrix<T>, q: &Matrix<T>) -> Result<Matrix<T>> {
    let dim = blocks.dim();
    square(s, dim, "S")?;
    square(q, dim, "Q")?;
    let a0 = blocks.a0();
    let at = blocks.a_tilde();
    let wide = at.cols();
    let total = 2 * dim + wide;
    let mut out = Matrix::zeros(total, total);
    let top = &(&(a0 * s) + &(s * &a0.transpose())) + q;
    out.set_block(0, 0, &top);
    out.set_block(0, dim, s);
    out.set_block(dim, 0, s);
    out.set_block(dim, dim, &Matrix::identity(dim).scale(-T::one()));
    if wide > 0 {
        let inv = T::one() / T::from_usize_lossy(2 * blocks.d());
        out.set_block(0, 2 * dim, &at);
        out.set_block(2 * dim, 0, &at.transpose());
        out.set_block(2 * dim, 2 * dim, &Matrix::identity(wide).scale(-inv));
    }
    Ok(out)
}

fn extreme_eigs<T: Real>(m: &Matrix<T>) -> Result<(T, T)> {
    let v = eigvalsh(m)?;
    Ok((v[0], v[v.len() - 1]))
}

/// `S ≻ 0`, `Q ≻ 0` and `λ_max(LMI) ≤ 1e−9`.
pub fn verify_certificate<T: Real>(
    blocks: &NodeBlocks<T>,
    s: &Matrix<T>,
    q: &Matrix<T>,
) -> Result<CertificateCheck<T>> {
    let lmi = assemble_lmi(blocks, s, q)?;
    let (s_min, _) = extreme_eigs(s)?;
    let (q_min, _) = extreme_eigs(q)?;
    let (_, slack) = extreme_eigs(&lmi)?;
    let pd = T::lit(PD_TOL);
    let symmetric = s.hermitian_defect() <= T::lit(1e-12) * s.max_abs().max(T::one())
        && q.hermitian_defect() <= T::lit(1e-12) * q.max_abs().max(T::one());
    Ok(CertificateCheck {
        valid: symmetric && s_min >= pd && q_min >= pd && slack <= T::lit(SLACK_TOL),
        slack,
        s_min_eig: s_min,
        q_min_eig: q_min,
    })
}

/// `2d·Σ_{j≠0} A_jA_jᵀ + εI`.
pub fn riccati_constant<T: Real>(blocks: &NodeBlocks<T>, epsilon: T) -> Matrix<T> {
    let dim = blocks.dim();
    let mut c = Matrix::zeros(dim, dim);
    for (lag, a) in blocks.lags() {
        if lag != 0 {
            c = &c + &(a * &a.transpose());
        }
    }
    let two_d = T::from_usize_lossy(2 * blocks.d());
    &c.scale(two_d) + &Matrix::identity(dim).scale(epsilon)
}

fn riccati_residual<T: Real>(a0: &Matrix<T>, s: &Matrix<T>, c: &Matrix<T>) -> T {
    let r = &(&(&(a0 * s) + &(s * &a0.transpose())) + &(s * s)) + c;
    r.norm_inf()
}

/// Newton–Kleinman search for a certificate with `Q = εI`.
///
/// Failure only means this search found nothing; the LMI is sufficient,
/// not necessary, for stability.
pub fn find_certificate<T: Real>(blocks: &NodeBlocks<T>, epsilon: T) -> Result<LmiCertificate<T>> {
    if epsilon.is_nan() || epsilon <= T::zero() {
        return Err(Error::InvalidConfig("epsilon must be positive".into()));
    }
    let a0 = blocks.a0();
    let check = is_hurwitz(a0);
    if !check.hurwitz {
        return Err(Error::A0NotHurwitz(check.abscissa.to_f64_lossy()));
    }
    let c = riccati_constant(blocks, epsilon);
    let tol = T::lit(RESIDUAL_TOL) * c.norm_inf().max(T::one());

    let mut s = solve_lyapunov(a0, &c)?.x.hermitian_part();
    let mut residuals = vec![riccati_residual(a0, &s, &c)];
    let mut iterations = 0;
    let give_up = |residuals: &[T], iterations: usize| Error::NoCertificateFound {
        residual: residuals.last().map_or(f64::NAN, |r| r.to_f64_lossy()),
        iterations,
    };

    while *residuals.last().expect("nonempty") >= tol {
        if iterations == MAX_ITERATIONS {
            return Err(give_up(&residuals, iterations));
        }
        let closed = a0 + &s;
        if !is_hurwitz(&closed).hurwitz {
            log::debug!("Newton iterate {iterations} lost the Hurwitz property");
            return Err(give_up(&residuals, iterations));
        }
        let rhs = &c - &(&s * &s);
        s = match solve_lyapunov(&closed, &rhs) {
            Ok(sol) => sol.x.hermitian_part(),
            Err(_) => return Err(give_up(&residuals, iterations)),
        };
        iterations += 1;
        let r = riccati_residual(a0, &s, &c);
        if !r.is_finite() {
            return Err(give_up(&residuals, iterations));
        }
        residuals.push(r);
    }

    let q = Matrix::identity(blocks.dim()).scale(epsilon);
    let check = verify_certificate(blocks, &s, &q)?;
    if !check.valid {
        log::debug!(
            "Riccati solution failed verification: slack {:e}, min eig S {:e}",
            check.slack.to_f64_lossy(),
            check.s_min_eig.to_f64_lossy()
        );
        return Err(give_up(&residuals, iterations));
    }
    Ok(LmiCertificate {
        s,
        q,
        slack: check.slack,
        iterations,
        residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::NetworkSpec;

    fn rotation_chain(r: f64) -> NodeBlocks<f64> {
        let th = NetworkSpec::<f64>::canonical_theta(1);
        let a1 = th.scale(2.0 * r);
        NodeBlocks::from_raw(vec![a1.clone(), Matrix::identity(2).scale(-2.0), a1], th.scale(2.0), th).unwrap()
    }

    #[test]
    fn assembly_shape_and_corner() {
        let b = rotation_chain(0.0);
        let id = Matrix::identity(2);
        let m = assemble_lmi(&b, &id, &id).unwrap();
        assert_eq!(m.shape(), (8, 8));
        assert_eq!(m[(0, 0)], -3.0);
        assert_eq!(m[(0, 2)], 1.0);
        assert_eq!(m[(7, 7)], -0.5);
        assert_eq!(
            assemble_lmi(&b, &Matrix::identity(3), &id).unwrap_err().code(),
            "DimensionMismatch"
        );
    }

    #[test]
    fn scalar_riccati_root() {
        for r in [0.1, 0.25, 0.4] {
            let cert = find_certificate(&rotation_chain(r), 0.1).unwrap();
            let s = 2.0 - (4.0 - 16.0 * r * r - 0.1f64).sqrt();
            assert!((&cert.s - &Matrix::identity(2).scale(s)).max_abs() < 1e-8, "r={r}");
            assert!(cert.slack <= SLACK_TOL);
            assert!(cert.residuals.windows(2).skip(1).all(|w| w[1] <= w[0]));
        }
        for r in [0.55, 0.6] {
            let err = find_certificate(&rotation_chain(r), 0.1).unwrap_err();
            assert_eq!(err.code(), "NoCertificateFound", "r={r}");
        }
    }

    #[test]
    fn decoupled_certificate() {
        let th = NetworkSpec::<f64>::canonical_theta(1);
        let b = NodeBlocks::from_raw(vec![Matrix::identity(2).scale(-2.0)], th.scale(2.0), th).unwrap();
        let cert = find_certificate(&b, 1.0).unwrap();
        let s = 2.0 - 3f64.sqrt();
        assert!((&cert.s - &Matrix::identity(2).scale(s)).max_abs() < 1e-12);
    }

    #[test]
    fn verification_rejects_bad_pairs() {
        let b = rotation_chain(0.4);
        let s = Matrix::identity(2).scale(2.0 - 1.34f64.sqrt());
        let ok = verify_certificate(&b, &s, &Matrix::identity(2).scale(0.1)).unwrap();
        assert!(ok.valid, "{ok:?}");
        let bad_q = Matrix::diagonal(&[0.1, -0.1]);
        assert!(!verify_certificate(&b, &s, &bad_q).unwrap().valid);

        let th = NetworkSpec::<f64>::canonical_theta(1);
        let unstable = NodeBlocks::from_raw(vec![Matrix::identity(2)], th.clone(), th).unwrap();
        let id = Matrix::identity(2);
        assert!(!verify_certificate(&unstable, &id, &id).unwrap().valid);
        assert_eq!(find_certificate(&unstable, 1e-6).unwrap_err().code(), "A0NotHurwitz");
    }
}
