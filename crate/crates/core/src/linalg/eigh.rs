use num_traits::{Float, One, Zero};

use super::{LinalgError, Matrix};
use crate::scalar::{Element, Real};

const MAX_SWEEPS: usize = 100;

/// Eigendecomposition `A = V diag(λ) Vᴴ` of a Hermitian matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct Eigh<E: Element> {
    pub values: Vec<E::Real>,
    pub vectors: Matrix<E>,
}

impl<E: Element> Eigh<E> {
    /// Cyclic Jacobi iteration.
    ///
    /// Only the Hermitian part of `a` is used. Each rotation first removes the
    /// phase of the pivot entry, then applies a real Givens rotation.
    pub fn new(a: &Matrix<E>) -> Result<Self, LinalgError> {
        if !a.is_square() {
            return Err(LinalgError::Shape("Hermitian eigensolve needs a square matrix"));
        }
        if !a.is_finite() {
            return Err(LinalgError::NonFinite);
        }
        let n = a.rows();
        let mut m = a.hermitian_part();
        let mut v = Matrix::<E>::identity(n);
        let scale = m.norm_fro();
        let tiny = E::Real::epsilon() * E::Real::epsilon() * scale * scale;

        let mut converged = n < 2 || scale == E::Real::zero();
        let mut prev_off = E::Real::infinity();
        for _ in 0..MAX_SWEEPS {
            if converged {
                break;
            }
            let off: E::Real = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| m[(i, j)].modulus_sqr())
                .sum();
            // Stagnation means the off-diagonal mass is at roundoff level.
            if off <= tiny || off >= prev_off {
                converged = true;
                break;
            }
            prev_off = off;
            for p in 0..n {
                for q in p + 1..n {
                    rotate(&mut m, &mut v, p, q);
                }
            }
        }
        if !converged {
            return Err(LinalgError::NoConvergence("Jacobi eigensolver"));
        }

        let mut order: Vec<usize> = (0..n).collect();
        let diag: Vec<E::Real> = (0..n).map(|i| m[(i, i)].re()).collect();
        order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap_or(std::cmp::Ordering::Equal));
        let values = order.iter().map(|&i| diag[i]).collect();
        let vectors = Matrix::from_fn(n, n, |r, c| v[(r, order[c])]);
        Ok(Self { values, vectors })
    }

    pub fn min(&self) -> E::Real {
        self.values.first().copied().unwrap_or_else(E::Real::zero)
    }

    pub fn max(&self) -> E::Real {
        self.values.last().copied().unwrap_or_else(E::Real::zero)
    }

    /// `V f(Λ) Vᴴ`.
    pub fn reconstruct_with(&self, f: impl Fn(E::Real) -> E::Real) -> Matrix<E> {
        let n = self.values.len();
        let fv: Vec<E::Real> = self.values.iter().map(|&l| f(l)).collect();
        Matrix::from_fn(n, n, |i, j| {
            (0..n)
                .map(|k| self.vectors[(i, k)] * self.vectors[(j, k)].conj() * E::from_real(fv[k]))
                .sum()
        })
    }
}

fn rotate<E: Element>(m: &mut Matrix<E>, v: &mut Matrix<E>, p: usize, q: usize) {
    let n = m.rows();
    let apq = m[(p, q)];
    let g = apq.modulus();
    if g == E::Real::zero() {
        return;
    }
    // Phase: scale column q by conj(φ) and row q by φ, φ = apq/|apq|.
    let phase = apq.scale(E::Real::one() / g);
    if phase != E::one() {
        let cphase = phase.conj();
        for k in 0..n {
            m[(k, q)] *= cphase;
        }
        for k in 0..n {
            m[(q, k)] *= phase;
        }
        for k in 0..n {
            v[(k, q)] *= cphase;
        }
    }
    let app = m[(p, p)].re();
    let aqq = m[(q, q)].re();
    let two = E::Real::lit(2.0);
    let theta = (aqq - app) / (two * g);
    let t = {
        let s = if theta < E::Real::zero() {
            -E::Real::one()
        } else {
            E::Real::one()
        };
        s / (theta.abs() + (theta * theta + E::Real::one()).sqrt())
    };
    let c = E::Real::one() / (t * t + E::Real::one()).sqrt();
    let s = t * c;
    let (ce, se) = (E::from_real(c), E::from_real(s));
    for k in 0..n {
        let akp = m[(k, p)];
        let akq = m[(k, q)];
        m[(k, p)] = ce * akp - se * akq;
        m[(k, q)] = se * akp + ce * akq;
    }
    for k in 0..n {
        let apk = m[(p, k)];
        let aqk = m[(q, k)];
        m[(p, k)] = ce * apk - se * aqk;
        m[(q, k)] = se * apk + ce * aqk;
    }
    m[(p, q)] = E::zero();
    m[(q, p)] = E::zero();
    m[(p, p)] = E::from_real(m[(p, p)].re());
    m[(q, q)] = E::from_real(m[(q, q)].re());
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = ce * vkp - se * vkq;
        v[(k, q)] = se * vkp + ce * vkq;
    }
}

/// Eigenvalues of the Hermitian part of `a`, ascending.
pub fn eigvalsh<E: Element>(a: &Matrix<E>) -> Result<Vec<E::Real>, LinalgError> {
    Eigh::new(a).map(|e| e.values)
}

/// Moore–Penrose inverse of a Hermitian matrix; eigenvalues with
/// `|λ| ≤ rel_cutoff · max|λ|` are treated as zero.
pub fn pinv_hermitian<E: Element>(a: &Matrix<E>, rel_cutoff: E::Real) -> Result<Matrix<E>, LinalgError> {
    let eig = Eigh::new(a)?;
    let lmax = eig.values.iter().map(|l| l.abs()).fold(E::Real::zero(), Float::max);
    let cut = rel_cutoff * lmax;
    Ok(eig.reconstruct_with(|l| {
        if l.abs() > cut {
            E::Real::one() / l
        } else {
            E::Real::zero()
        }
    }))
}

/// Principal square root of a Hermitian positive semidefinite matrix.
/// Slightly negative eigenvalues (roundoff) are clamped to zero.
pub fn sqrt_psd<E: Element>(a: &Matrix<E>) -> Result<Matrix<E>, LinalgError> {
    let eig = Eigh::new(a)?;
    Ok(eig.reconstruct_with(|l| l.max(E::Real::zero()).sqrt()))
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;

    use super::*;

    #[test]
    fn real_symmetric_known_spectrum() {
        let a = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let e = Eigh::new(&a).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-15);
        assert!((e.values[1] - 3.0).abs() < 1e-15);
        let back = e.reconstruct_with(|l| l);
        assert!((&back - &a).max_abs() < 1e-14);
    }

    #[test]
    fn complex_hermitian_spectrum_and_vectors() {
        // I + iJ has eigenvalues {0, 2}.
        let i = Complex64::i();
        let o = Complex64::new(1.0, 0.0);
        let a = Matrix::from_rows(&[vec![o, i], vec![-i, o]]).unwrap();
        let e = Eigh::new(&a).unwrap();
        assert!(e.values[0].abs() < 1e-15 && (e.values[1] - 2.0).abs() < 1e-15);
        let vhv = &e.vectors.adjoint() * &e.vectors;
        assert!((&vhv - &Matrix::identity(2)).max_abs() < 1e-15);
        let back = e.reconstruct_with(|l| l);
        assert!((&back - &a).max_abs() < 1e-14);
    }

    #[test]
    fn larger_complex_matrix_reconstructs() {
        let g = Matrix::from_fn(6, 6, |i, j| {
            Complex64::new(((i * 5 + j * 3) % 7) as f64 - 3.0, ((i + 2 * j) % 5) as f64 - 2.0)
        });
        let h = &g + &g.adjoint();
        let e = Eigh::new(&h).unwrap();
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        assert!((&e.reconstruct_with(|l| l) - &h).max_abs() < 1e-12);
        let tr: f64 = e.values.iter().sum();
        assert!((tr - h.trace().re).abs() < 1e-12);
    }

    #[test]
    fn pinv_of_rank_deficient() {
        let i = Complex64::i();
        let o = Complex64::new(1.0, 0.0);
        let a = Matrix::from_rows(&[vec![o, i], vec![-i, o]]).unwrap();
        let p = pinv_hermitian(&a, 1e-10).unwrap();
        // Moore–Penrose identities.
        assert!((&(&(&a * &p) * &a) - &a).max_abs() < 1e-14);
        assert!((&(&(&p * &a) * &p) - &p).max_abs() < 1e-14);
        // A⁺ = A/4 for A = I + iJ (A² = 2A).
        assert!((&p - &a.scale_real(0.25)).max_abs() < 1e-14);
    }

    #[test]
    fn square_root() {
        let a = Matrix::from_rows(&[vec![5.0, 4.0], vec![4.0, 5.0]]).unwrap();
        let r = sqrt_psd(&a).unwrap();
        assert!((&(&r * &r) - &a).max_abs() < 1e-14);
    }
}
