use num_traits::{Float, One, Zero};

use super::{LinalgError, Matrix};
use crate::scalar::{Element, Real};

/// LU factorization with partial pivoting, `P A = L U`.
///
/// Factorization never fails; a zero pivot marks the matrix singular and
/// makes the solve routines return [`LinalgError::Singular`].
#[derive(Clone, Debug)]
pub struct Lu<E: Element> {
    lu: Matrix<E>,
    perm: Vec<usize>,
    swaps: usize,
    singular: bool,
    norm_one: E::Real,
}

// Triangular solves read clearest as index loops.
#[allow(clippy::needless_range_loop)]
impl<E: Element> Lu<E> {
    pub fn factor(a: &Matrix<E>) -> Self {
        assert!(a.is_square(), "LU of a non-square matrix");
        let n = a.rows();
        let norm_one = a.norm_one();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut swaps = 0;
        let mut singular = false;

        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[(i, k)].modulus()))
                .fold(
                    (k, E::Real::zero()),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
            if pmax == E::Real::zero() || !pmax.is_finite() {
                singular = true;
                continue;
            }
            if p != k {
                for j in 0..n {
                    let t = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = t;
                }
                perm.swap(k, p);
                swaps += 1;
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f == E::zero() {
                    continue;
                }
                for j in k + 1..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= f * u;
                }
            }
        }
        Self {
            lu,
            perm,
            swaps,
            singular,
            norm_one,
        }
    }

    pub fn dim(&self) -> usize {
        self.lu.rows()
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    /// Determinant; exactly zero when a pivot vanished.
    pub fn det(&self) -> E {
        if self.singular {
            return E::zero();
        }
        let mut d = (0..self.dim()).fold(E::one(), |acc, i| acc * self.lu[(i, i)]);
        if self.swaps % 2 == 1 {
            d = -d;
        }
        d
    }

    /// Solves `A x = b`.
    pub fn solve_vec(&self, b: &[E]) -> Result<Vec<E>, LinalgError> {
        let n = self.dim();
        if b.len() != n {
            return Err(LinalgError::Shape("right-hand side length"));
        }
        if self.singular {
            return Err(LinalgError::Singular);
        }
        let mut x: Vec<E> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        Ok(x)
    }

    /// Solves `Aᴴ x = b`.
    pub fn solve_adjoint_vec(&self, b: &[E]) -> Result<Vec<E>, LinalgError> {
        let n = self.dim();
        if b.len() != n {
            return Err(LinalgError::Shape("right-hand side length"));
        }
        if self.singular {
            return Err(LinalgError::Singular);
        }
        // Aᴴ = Uᴴ Lᴴ P, so solve Uᴴ w = b, Lᴴ v = w, x = Pᵀ v.
        let mut w = b.to_vec();
        for i in 0..n {
            let mut s = w[i];
            for j in 0..i {
                s -= self.lu[(j, i)].conj() * w[j];
            }
            w[i] = s / self.lu[(i, i)].conj();
        }
        for i in (0..n).rev() {
            let mut s = w[i];
            for j in i + 1..n {
                s -= self.lu[(j, i)].conj() * w[j];
            }
            w[i] = s;
        }
        let mut x = vec![E::zero(); n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = w[i];
        }
        Ok(x)
    }

    /// Solves `A X = B` column by column.
    pub fn solve(&self, b: &Matrix<E>) -> Result<Matrix<E>, LinalgError> {
        if b.rows() != self.dim() {
            return Err(LinalgError::Shape("right-hand side rows"));
        }
        let mut out = Matrix::zeros(b.rows(), b.cols());
        for j in 0..b.cols() {
            let col: Vec<E> = (0..b.rows()).map(|i| b[(i, j)]).collect();
            let x = self.solve_vec(&col)?;
            for (i, v) in x.into_iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        Ok(out)
    }

    pub fn inverse(&self) -> Result<Matrix<E>, LinalgError> {
        self.solve(&Matrix::identity(self.dim()))
    }

    /// Estimate of the reciprocal 1-norm condition number, `1 / (‖A‖₁ ‖A⁻¹‖₁)`.
    ///
    /// Uses Hager's iteration for `‖A⁻¹‖₁`, which needs only a handful of
    /// solves with `A` and `Aᴴ`. Returns zero for singular matrices.
    pub fn rcond(&self) -> E::Real {
        let n = self.dim();
        if self.singular || n == 0 {
            return E::Real::zero();
        }
        let inv_norm = match self.inverse_norm_one_estimate(n) {
            Some(v) => v,
            None => return E::Real::zero(),
        };
        if inv_norm == E::Real::zero() || self.norm_one == E::Real::zero() {
            return E::Real::zero();
        }
        E::Real::one() / (self.norm_one * inv_norm)
    }

    fn inverse_norm_one_estimate(&self, n: usize) -> Option<E::Real> {
        let inv_n = E::Real::one() / E::Real::from_usize_lossy(n);
        let mut x = vec![E::from_real(inv_n); n];
        let mut est = E::Real::zero();
        let mut last_j = usize::MAX;
        for _ in 0..5 {
            let y = self.solve_vec(&x).ok()?;
            let y_norm: E::Real = y.iter().map(|v| v.modulus()).sum();
            if !y_norm.is_finite() {
                return None;
            }
            est = est.max(y_norm);
            let sign: Vec<E> = y
                .iter()
                .map(|&v| {
                    let m = v.modulus();
                    if m == E::Real::zero() {
                        E::one()
                    } else {
                        v.scale(E::Real::one() / m)
                    }
                })
                .collect();
            let z = self.solve_adjoint_vec(&sign).ok()?;
            let (j, zmax) = z
                .iter()
                .enumerate()
                .map(|(i, v)| (i, v.modulus()))
                .fold((0, E::Real::zero()), |b, c| if c.1 > b.1 { c } else { b });
            let ztx: E::Real = z.iter().zip(&x).map(|(&a, &b)| (a.conj() * b).re()).sum();
            if zmax <= ztx || j == last_j {
                break;
            }
            last_j = j;
            x = vec![E::zero(); n];
            x[j] = E::one();
        }
        // Higham's alternative lower bound guards against pathological cases.
        let alt: Vec<E> = (0..n)
            .map(|i| {
                let s = if i % 2 == 0 { E::Real::one() } else { -E::Real::one() };
                let t = E::Real::one() + E::Real::from_usize_lossy(i) / E::Real::from_usize_lossy((n - 1).max(1));
                E::from_real(s * t)
            })
            .collect();
        let y = self.solve_vec(&alt).ok()?;
        let alt_norm: E::Real = y.iter().map(|v| v.modulus()).sum::<E::Real>() * E::Real::lit(2.0)
            / (E::Real::lit(3.0) * E::Real::from_usize_lossy(n));
        Some(est.max(alt_norm))
    }
}

/// Determinant by LU.
pub fn det<E: Element>(a: &Matrix<E>) -> E {
    Lu::factor(a).det()
}

/// Solves `X A = C` for `X` without forming `A⁻¹`.
pub fn solve_right<E: Element>(a: &Matrix<E>, c: &Matrix<E>) -> Result<Matrix<E>, LinalgError> {
    // X A = C  ⇔  Aᵀ Xᵀ = Cᵀ
    let xt = Lu::factor(&a.transpose()).solve(&c.transpose())?;
    Ok(xt.transpose())
}
