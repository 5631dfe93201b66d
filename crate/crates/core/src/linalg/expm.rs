//! Matrix exponential by scaling and squaring with diagonal Padé approximants
//! of degree 3, 5, 7, 9 or 13, selected from the 1-norm of the argument.

use num_traits::{Float, One};

use super::{LinalgError, Lu, Matrix};
use crate::scalar::{Element, Real};

const THETA_3: f64 = 1.495585217958292e-2;
const THETA_5: f64 = 2.53939833006323e-1;
const THETA_7: f64 = 9.504178996162932e-1;
const THETA_9: f64 = 2.097847961257068e0;
const THETA_13: f64 = 5.371920351148152e0;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

pub fn expm<E: Element>(a: &Matrix<E>) -> Result<Matrix<E>, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::Shape("exponential of a non-square matrix"));
    }
    if !a.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let n = a.rows();
    let norm = a.norm_one().to_f64_lossy();
    let id = Matrix::<E>::identity(n);

    for (theta, coeffs) in [
        (THETA_3, &B3[..]),
        (THETA_5, &B5[..]),
        (THETA_7, &B7[..]),
        (THETA_9, &B9[..]),
    ] {
        if norm <= theta {
            return pade_low(a, coeffs, &id);
        }
    }

    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let scaled = a.scale_real(E::Real::lit(2f64.powi(-s)));
    let mut r = pade13(&scaled, &id)?;
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}

fn coeff<E: Element>(c: f64) -> E {
    E::from_real(E::Real::lit(c))
}

fn pade_low<E: Element>(a: &Matrix<E>, b: &[f64], id: &Matrix<E>) -> Result<Matrix<E>, LinalgError> {
    let a2 = a * a;
    // Powers A^0, A^2, A^4, ...
    let mut even_powers = vec![id.clone()];
    for k in 1..b.len().div_ceil(2) {
        let next = &even_powers[k - 1] * &a2;
        even_powers.push(next);
    }
    let mut u_inner = Matrix::zeros(a.rows(), a.cols());
    let mut v = Matrix::zeros(a.rows(), a.cols());
    for (k, &bk) in b.iter().enumerate() {
        let term = even_powers[k / 2].scale(coeff(bk));
        if k % 2 == 1 {
            u_inner = &u_inner + &term;
        } else {
            v = &v + &term;
        }
    }
    let u = a * &u_inner;
    solve_pade(&u, &v)
}

fn pade13<E: Element>(a: &Matrix<E>, id: &Matrix<E>) -> Result<Matrix<E>, LinalgError> {
    let b = |k: usize| coeff::<E>(B13[k]);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_hi = &(&a6.scale(b(13)) + &a4.scale(b(11))) + &a2.scale(b(9));
    let u_lo = &(&(&a6.scale(b(7)) + &a4.scale(b(5))) + &a2.scale(b(3))) + &id.scale(b(1));
    let u = a * &(&(&a6 * &u_hi) + &u_lo);
    let v_hi = &(&a6.scale(b(12)) + &a4.scale(b(10))) + &a2.scale(b(8));
    let v_lo = &(&(&a6.scale(b(6)) + &a4.scale(b(4))) + &a2.scale(b(2))) + &id.scale(b(0));
    let v = &(&a6 * &v_hi) + &v_lo;
    solve_pade(&u, &v)
}

fn solve_pade<E: Element>(u: &Matrix<E>, v: &Matrix<E>) -> Result<Matrix<E>, LinalgError> {
    let p = v + u;
    let q = v - u;
    Lu::factor(&q).solve(&p)
}

/// `Σ_k Aᵏ/k!` truncated once terms fall below roundoff; used as a test oracle
/// for small-norm arguments.
pub fn expm_taylor<E: Element>(a: &Matrix<E>, max_terms: usize) -> Matrix<E> {
    let mut term = Matrix::<E>::identity(a.rows());
    let mut sum = term.clone();
    for k in 1..max_terms {
        term = (&term * a).scale_real(E::Real::one() / E::Real::from_usize_lossy(k));
        sum = &sum + &term;
        if term.max_abs() <= E::Real::epsilon() * sum.max_abs() * E::Real::lit(1e-3) {
            break;
        }
    }
    sum
}
