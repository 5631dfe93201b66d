use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex;
use num_traits::{Float, Zero};

use crate::scalar::{Element, Real};

/// Dense row-major matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix<E> {
    rows: usize,
    cols: usize,
    data: Vec<E>,
}

pub type CMatrix<T> = Matrix<Complex<T>>;

impl<E: Element> Matrix<E> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![E::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = E::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> E) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds from row-major data. Panics if the length disagrees with the shape.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<E>) -> Self {
        assert_eq!(data.len(), rows * cols, "row-major data length");
        Self { rows, cols, data }
    }

    /// Builds from a slice of rows; `None` when the rows are ragged.
    pub fn from_rows(rows: &[Vec<E>]) -> Option<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return None;
        }
        Some(Self {
            rows: r,
            cols: c,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn diagonal(diag: &[E]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[E] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[E] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<E>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn map<F: Element>(&self, f: impl Fn(E) -> F) -> Matrix<F> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn conj(&self) -> Self {
        self.map(Element::conj)
    }

    pub fn scale(&self, s: E) -> Self {
        self.map(|x| x * s)
    }

    pub fn scale_real(&self, s: E::Real) -> Self {
        self.map(|x| x.scale(s))
    }

    pub fn trace(&self) -> E {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Induced ∞-norm (maximum absolute row sum).
    pub fn norm_inf(&self) -> E::Real {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|x| x.modulus()).sum::<E::Real>())
            .fold(E::Real::zero(), |a, b| a.max(b))
    }

    /// Induced 1-norm (maximum absolute column sum).
    pub fn norm_one(&self) -> E::Real {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].modulus()).sum::<E::Real>())
            .fold(E::Real::zero(), |a, b| a.max(b))
    }

    pub fn norm_fro(&self) -> E::Real {
        self.data.iter().map(|x| x.modulus_sqr()).sum::<E::Real>().sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> E::Real {
        self.data
            .iter()
            .map(|x| x.modulus())
            .fold(E::Real::zero(), |a, b| a.max(b))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.finite())
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (p, q) = other.shape();
        Self::from_fn(self.rows * p, self.cols * q, |i, j| {
            self[(i / p, j / q)] * other[(i % p, j % q)]
        })
    }

    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        assert!(
            r0 + rows <= self.rows && c0 + cols <= self.cols,
            "submatrix out of range"
        );
        Self::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, block: &Self) {
        assert!(
            r0 + block.rows <= self.rows && c0 + block.cols <= self.cols,
            "block out of range"
        );
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(r0 + i, c0 + j)] = block[(i, j)];
            }
        }
    }

    /// Column-wise vectorization.
    pub fn vec(&self) -> Vec<E> {
        let mut v = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                v.push(self[(i, j)]);
            }
        }
        v
    }

    /// Inverse of [`Matrix::vec`].
    pub fn unvec(v: &[E], rows: usize, cols: usize) -> Self {
        assert_eq!(v.len(), rows * cols, "unvec length");
        Self::from_fn(rows, cols, |i, j| v[j * rows + i])
    }

    pub fn mul_vec(&self, x: &[E]) -> Vec<E> {
        assert_eq!(x.len(), self.cols, "matrix-vector shape");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    /// `(self + selfᴴ) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let half = E::Real::lit(0.5);
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()).scale(half)
        })
    }

    /// `‖self − selfᴴ‖_∞`; zero for exactly Hermitian (symmetric) matrices.
    pub fn hermitian_defect(&self) -> E::Real {
        (self - &self.adjoint()).norm_inf()
    }

    /// `‖self + selfᵀ‖_∞`; zero for exactly antisymmetric matrices.
    pub fn antisymmetry_defect(&self) -> E::Real {
        (self + &self.transpose()).norm_inf()
    }

    /// Integer power by repeated squaring.
    pub fn powi(&self, mut k: u32) -> Self {
        assert!(self.is_square(), "power of a non-square matrix");
        let mut base = self.clone();
        let mut acc = Self::identity(self.rows);
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            k >>= 1;
        }
        acc
    }
}

impl<T: Real> Matrix<T> {
    pub fn to_complex(&self) -> CMatrix<T> {
        self.map(|x| Complex::new(x, T::zero()))
    }
}

impl<T: Real> CMatrix<T> {
    pub fn real_part(&self) -> Matrix<T> {
        self.map(|x| x.re)
    }

    pub fn imag_part(&self) -> Matrix<T> {
        self.map(|x| x.im)
    }

    /// Combines real and imaginary parts of equal shape.
    pub fn from_parts(re: &Matrix<T>, im: &Matrix<T>) -> Self {
        assert_eq!(re.shape(), im.shape(), "real/imaginary shape");
        Self::from_fn(re.rows, re.cols, |i, j| Complex::new(re[(i, j)], im[(i, j)]))
    }
}

impl<E> Index<(usize, usize)> for Matrix<E> {
    type Output = E;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &E {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<E> IndexMut<(usize, usize)> for Matrix<E> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut E {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<E: Element> Mul for &Matrix<E> {
    type Output = Matrix<E>;

    fn mul(self, rhs: &Matrix<E>) -> Matrix<E> {
        assert_eq!(self.cols, rhs.rows, "matrix product shape");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == E::zero() {
                    continue;
                }
                let rrow = rhs.row(k);
                let orow = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, &b) in orow.iter_mut().zip(rrow) {
                    *o += a * b;
                }
            }
        }
        out
    }
}

impl<E: Element> Add for &Matrix<E> {
    type Output = Matrix<E>;

    fn add(self, rhs: &Matrix<E>) -> Matrix<E> {
        assert_eq!(self.shape(), rhs.shape(), "matrix sum shape");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect(),
        }
    }
}

impl<E: Element> Sub for &Matrix<E> {
    type Output = Matrix<E>;

    fn sub(self, rhs: &Matrix<E>) -> Matrix<E> {
        assert_eq!(self.shape(), rhs.shape(), "matrix difference shape");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect(),
        }
    }
}

impl<E: Element> Neg for &Matrix<E> {
    type Output = Matrix<E>;

    fn neg(self) -> Matrix<E> {
        self.map(|x| -x)
    }
}

macro_rules! forward_owned_binop {
    ($tr:ident, $method:ident) => {
        impl<E: Element> $tr for Matrix<E> {
            type Output = Matrix<E>;
            fn $method(self, rhs: Matrix<E>) -> Matrix<E> {
                (&self).$method(&rhs)
            }
        }
        impl<E: Element> $tr<&Matrix<E>> for Matrix<E> {
            type Output = Matrix<E>;
            fn $method(self, rhs: &Matrix<E>) -> Matrix<E> {
                (&self).$method(rhs)
            }
        }
    };
}

forward_owned_binop!(Mul, mul);
forward_owned_binop!(Add, add);
forward_owned_binop!(Sub, sub);

impl<E: Element> fmt::Debug for Matrix<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}
