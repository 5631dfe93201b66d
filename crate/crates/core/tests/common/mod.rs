//! Shared fixtures and brute-force oracles for the integration tests.
#![allow(dead_code)]

use num_complex::Complex64;
use qnet_core::ensemble::{random_network, EnsembleConfig};
use qnet_core::linalg::{solve_lyapunov, CMatrix, Matrix};
use qnet_core::model::{build_blocks, NetworkSpec, NodeBlocks};
use qnet_core::{Blocks, ValidNetwork};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn theta() -> Matrix<f64> {
    NetworkSpec::<f64>::canonical_theta(1)
}

/// `I + iΘ`, the vacuum covariance.
pub fn gauge() -> CMatrix<f64> {
    CMatrix::from_parts(&Matrix::identity(2), &theta())
}

/// `A₀ = −2I`, `A±1 = 2rΘ`, `B = 2Θ`.
pub fn rotation_chain(r: f64) -> Blocks {
    let th = theta();
    let a1 = th.scale(2.0 * r);
    NodeBlocks::from_raw(vec![a1.clone(), Matrix::identity(2).scale(-2.0), a1], th.scale(2.0), th).unwrap()
}

pub fn decoupled() -> Blocks {
    rotation_chain(0.0)
}

/// Network file for the rotation-coupled chain: `R₀ = 0`, `R₁ = rI`, `M = I`.
pub fn rotation_spec(r: f64, ring: usize) -> NetworkSpec<f64> {
    NetworkSpec {
        n: 1,
        m: 1,
        ring,
        d: 1,
        theta: theta(),
        r: vec![Matrix::zeros(2, 2), Matrix::identity(2).scale(r)],
        coupling: Matrix::identity(2),
    }
}

/// Seeded stable one-mode network drawn by the ensemble generator.
pub fn random_stable(seed: u64, d: usize, ring: usize) -> (ValidNetwork, Blocks) {
    let cfg = EnsembleConfig {
        count: 1,
        ring,
        d,
        seed,
        ..EnsembleConfig::default()
    };
    let spec = random_network(&cfg, 0).unwrap();
    let blocks = build_blocks(&spec).unwrap();
    (spec, blocks)
}

/// Dynamics matrix of the whole ring: `dX_j = Σ_ℓ A_ℓ X_{j−ℓ mod N} dt + …`.
pub fn ring_dynamics(blocks: &Blocks, ring: usize) -> Matrix<f64> {
    let dim = blocks.dim();
    let mut a = Matrix::zeros(dim * ring, dim * ring);
    for j in 0..ring {
        for (lag, al) in blocks.lags() {
            let k = (j as i64 - lag).rem_euclid(ring as i64) as usize;
            let mut block = a.submatrix(j * dim, k * dim, dim, dim);
            block = &block + al;
            a.set_block(j * dim, k * dim, &block);
        }
    }
    a
}

/// Steady covariance `E(X Xᵀ)` of the full ring from one large Lyapunov
/// equation, bypassing the spatial Fourier transform.
pub fn ring_covariance(blocks: &Blocks, ring: usize) -> CMatrix<f64> {
    let dim = blocks.dim();
    let a = ring_dynamics(blocks, ring).to_complex();
    let mut f = CMatrix::zeros(dim * ring, dim * ring);
    for j in 0..ring {
        f.set_block(j * dim, j * dim, blocks.forcing());
    }
    solve_lyapunov(&a, &f).unwrap().x
}

pub fn block(m: &CMatrix<f64>, j: usize, k: usize, dim: usize) -> CMatrix<f64> {
    m.submatrix(j * dim, k * dim, dim, dim)
}

/// `N⁻¹ Σ_{j,k} E(X_jᵀ σ_{j−k} X_k)` by direct summation over node pairs.
pub fn toeplitz_cost(p: &CMatrix<f64>, sigma: &[Matrix<f64>], ring: usize, dim: usize) -> Complex64 {
    let mut total = Complex64::new(0.0, 0.0);
    for j in 0..ring {
        for k in 0..ring {
            let lag = j as i64 - k as i64;
            let s = match lag.unsigned_abs() as usize {
                l if l >= sigma.len() => continue,
                l if lag >= 0 => sigma[l].clone(),
                l => sigma[l].transpose(),
            };
            // E(X_jᵀ σ X_k) = Tr(σᵀ E(X_j X_kᵀ)).
            total += (&s.transpose().to_complex() * &block(p, j, k, dim)).trace();
        }
    }
    total / ring as f64
}

/// Classical RK4 integration of `Ṡ = A_z S + S A_v* + δ N F`.
pub fn rk4_transient(
    az: &CMatrix<f64>,
    av: &CMatrix<f64>,
    forcing: Option<&CMatrix<f64>>,
    s0: &CMatrix<f64>,
    t: f64,
    steps: usize,
) -> CMatrix<f64> {
    let avh = av.adjoint();
    let rhs = |s: &CMatrix<f64>| {
        let mut out = &(az * s) + &(s * &avh);
        if let Some(f) = forcing {
            out = &out + f;
        }
        out
    };
    let h = t / steps as f64;
    let mut s = s0.clone();
    for _ in 0..steps {
        let k1 = rhs(&s);
        let k2 = rhs(&(&s + &k1.scale_real(h / 2.0)));
        let k3 = rhs(&(&s + &k2.scale_real(h / 2.0)));
        let k4 = rhs(&(&s + &k3.scale_real(h)));
        let incr = &(&(&k1 + &k2.scale_real(2.0)) + &k3.scale_real(2.0)) + &k4;
        s = &s + &incr.scale_real(h / 6.0);
    }
    s
}

pub fn max_abs_diff(a: &CMatrix<f64>, b: &CMatrix<f64>) -> f64 {
    (a - b).max_abs()
}

/// Random blocks with a strongly damped `A₀` and small off-diagonal lags.
pub fn random_blocks(seed: u64) -> Blocks {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = rng.random_range(1..=3usize);
    let mut draw = |amp: f64| Matrix::from_fn(2, 2, |_, _| rng.random_range(-amp..amp));
    let th = theta();
    let mut lags: Vec<Matrix<f64>> = (0..2 * d + 1).map(|_| draw(0.6)).collect();
    lags[d] = &draw(1.0) - &Matrix::identity(2).scale(2.5);
    NodeBlocks::from_raw(lags, th.scale(2.0), th).unwrap()
}
