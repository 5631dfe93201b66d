//! Seeded random networks and per-lag entanglement statistics over a batch.
//!
//! Every network draws from its own ChaCha8 stream, selected by
//! `(seed, index)`, so results do not depend on how work is scheduled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::entanglement::{entanglement_profile, EntanglementReport};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::model::{build_blocks, validate_spec, NetworkSpec, ValidatedNetworkSpec};
use crate::spectral::{ring_stability, stability_sweep};

/// Base grid of the rejection test; draws must also be stable on twice
/// this grid and on the ring's own grid `𝕌_N`.
pub const ACCEPT_GRID: usize = 256;
/// How far the lag window extends past the interaction range.
pub const LAG_MARGIN: usize = 4;

#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleConfig {
    pub count: usize,
    pub ring: usize,
    pub n: usize,
    pub m: usize,
    pub d: usize,
    pub seed: u64,
    /// Entries are uniform on `[−amplitude, amplitude]`.
    pub amplitude: f64,
    pub max_rejects: usize,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            count: 100,
            ring: 400,
            n: 1,
            m: 1,
            d: 8,
            seed: 0,
            amplitude: 4.0,
            max_rejects: 10_000,
        }
    }
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.count == 0 {
            return bad("count must be at least 1".into());
        }
        if self.n == 0 || self.m == 0 || self.d == 0 {
            return bad("n, m and d must be positive".into());
        }
        if self.ring <= 2 * self.d {
            return bad(format!("N = {} must exceed 2d = {}", self.ring, 2 * self.d));
        }
        if !(self.amplitude.is_finite() && self.amplitude >= 0.0) {
            return bad(format!("amplitude {} must be finite and nonnegative", self.amplitude));
        }
        Ok(())
    }

    /// Lags `−(d+4) … d+4`.
    pub fn lag_window(&self) -> std::ops::RangeInclusive<i64> {
        let w = (self.d + LAG_MARGIN) as i64;
        -w..=w
    }
}

fn uniform_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, amp: f64) -> Matrix<f64> {
    let mut out = Matrix::zeros(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            out[(r, c)] = if amp > 0.0 { rng.random_range(-amp..=amp) } else { 0.0 };
        }
    }
    out
}

fn draw(rng: &mut ChaCha8Rng, cfg: &EnsembleConfig) -> NetworkSpec<f64> {
    let dim = 2 * cfg.n;
    let amp = cfg.amplitude;
    let x = uniform_matrix(rng, dim, dim, amp);
    let mut r = vec![(&x + &x.transpose()).scale(0.5)];
    for _ in 0..cfg.d {
        r.push(uniform_matrix(rng, dim, dim, amp));
    }
    let coupling = uniform_matrix(rng, 2 * cfg.m, dim, amp);
    NetworkSpec {
        n: cfg.n,
        m: cfg.m,
        ring: cfg.ring,
        d: cfg.d,
        theta: NetworkSpec::canonical_theta(cfg.n),
        r,
        coupling,
    }
}

/// Network `index` of the ensemble: redrawn from the same stream until the
/// symbol is Hurwitz on `𝕌_256`, `𝕌_512` and `𝕌_N`.
pub fn random_network(cfg: &EnsembleConfig, index: usize) -> Result<ValidatedNetworkSpec<f64>> {
    cfg.validate()?;
    if index >= cfg.count {
        return Err(Error::InvalidConfig(format!(
            "index {index} out of range for count {}",
            cfg.count
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index as u64);
    for _ in 0..=cfg.max_rejects {
        let spec = validate_spec(draw(&mut rng, cfg))?;
        let blocks = build_blocks(&spec)?;
        let stable = stability_sweep(&blocks, ACCEPT_GRID)?.stable
            && stability_sweep(&blocks, 2 * ACCEPT_GRID)?.stable
            && ring_stability(&blocks, cfg.ring)?.stable;
        if stable {
            return Ok(spec);
        }
    }
    Err(Error::RejectionLimitExceeded {
        index,
        rejects: cfg.max_rejects,
    })
}

/// Per-lag aggregate over the ensemble.
#[derive(Clone, Debug, PartialEq)]
pub struct LagStats {
    pub lag: i64,
    pub det_mean: f64,
    pub det_min: f64,
    pub det_max: f64,
    pub logneg_mean: f64,
    pub logneg_min: f64,
    pub logneg_max: f64,
    pub frac_entangled: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleStats {
    pub lags: Vec<LagStats>,
    pub count: usize,
}

/// One network's profile, ordered by lag.
#[derive(Clone, Debug)]
pub struct NetworkProfile {
    pub index: usize,
    pub reports: Vec<EntanglementReport<f64>>,
}

fn profile_network(cfg: &EnsembleConfig, index: usize) -> Result<NetworkProfile> {
    let wrap = |e: Error| Error::Network {
        index,
        source: Box::new(e),
    };
    let spec = random_network(cfg, index).map_err(wrap)?;
    let blocks = build_blocks(&spec).map_err(wrap)?;
    let reports = entanglement_profile(&blocks, cfg.ring, cfg.lag_window(), None).map_err(wrap)?;
    Ok(NetworkProfile { index, reports })
}

/// Profiles of every network in index order. The first failing index
/// aborts the run.
pub fn run_ensemble_detailed(cfg: &EnsembleConfig) -> Result<Vec<NetworkProfile>> {
    cfg.validate()?;
    if cfg.n != 1 {
        return Err(Error::NotOneMode(cfg.n));
    }
    let results: Vec<Result<NetworkProfile>> = (0..cfg.count)
        .into_par_iter()
        .map(|i| profile_network(cfg, i))
        .collect();
    results.into_iter().collect()
}

/// Reduces profiles in the order given.
pub fn aggregate(profiles: &[NetworkProfile]) -> EnsembleStats {
    let Some(first) = profiles.first() else {
        return EnsembleStats {
            lags: Vec::new(),
            count: 0,
        };
    };
    let count = profiles.len() as f64;
    let lags = first
        .reports
        .iter()
        .enumerate()
        .map(|(slot, head)| {
            let mut s = LagStats {
                lag: head.lag,
                det_mean: 0.0,
                det_min: f64::INFINITY,
                det_max: f64::NEG_INFINITY,
                logneg_mean: 0.0,
                logneg_min: f64::INFINITY,
                logneg_max: f64::NEG_INFINITY,
                frac_entangled: 0.0,
            };
            let mut entangled = 0usize;
            for p in profiles {
                let r = &p.reports[slot];
                debug_assert_eq!(r.lag, head.lag);
                s.det_mean += r.det_lambda;
                s.det_min = s.det_min.min(r.det_lambda);
                s.det_max = s.det_max.max(r.det_lambda);
                s.logneg_mean += r.log_negativity;
                s.logneg_min = s.logneg_min.min(r.log_negativity);
                s.logneg_max = s.logneg_max.max(r.log_negativity);
                entangled += usize::from(!r.separable);
            }
            s.det_mean /= count;
            s.logneg_mean /= count;
            // Rounding in the division can push a mean just outside its range.
            s.det_mean = s.det_mean.clamp(s.det_min, s.det_max);
            s.logneg_mean = s.logneg_mean.clamp(s.logneg_min, s.logneg_max);
            s.frac_entangled = entangled as f64 / count;
            s
        })
        .collect();
    EnsembleStats {
        lags,
        count: profiles.len(),
    }
}

pub fn run_ensemble(cfg: &EnsembleConfig) -> Result<EnsembleStats> {
    Ok(aggregate(&run_ensemble_detailed(cfg)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> EnsembleConfig {
        EnsembleConfig {
            count: 3,
            ring: 40,
            d: 2,
            seed: 1,
            ..EnsembleConfig::default()
        }
    }

    #[test]
    fn deterministic_draw() {
        let cfg = small();
        let a = random_network(&cfg, 0).unwrap();
        let b = random_network(&cfg, 0).unwrap();
        assert_eq!(*a, *b);
        assert_ne!(*a, *random_network(&cfg, 1).unwrap());
        assert!((&a.r[0] - &a.r[0].transpose()).max_abs() == 0.0);
    }

    #[test]
    fn zero_amplitude_exhausts_rejections() {
        let cfg = EnsembleConfig {
            amplitude: 0.0,
            max_rejects: 5,
            ..small()
        };
        assert_eq!(random_network(&cfg, 0).unwrap_err().code(), "RejectionLimitExceeded");
    }

    #[test]
    fn config_checks() {
        let cfg = EnsembleConfig { ring: 4, ..small() };
        assert_eq!(cfg.validate().unwrap_err().code(), "InvalidConfig");
        assert_eq!(random_network(&small(), 3).unwrap_err().code(), "InvalidConfig");
        assert_eq!(small().lag_window().count(), 13);
    }

    #[test]
    fn single_network_stats_equal_profile() {
        let cfg = EnsembleConfig { count: 1, ..small() };
        let profiles = run_ensemble_detailed(&cfg).unwrap();
        let stats = aggregate(&profiles);
        assert_eq!(stats.lags.len(), 12);
        for (s, r) in stats.lags.iter().zip(&profiles[0].reports) {
            assert_eq!(s.lag, r.lag);
            assert_eq!(
                (s.det_mean, s.det_min, s.det_max),
                (r.det_lambda, r.det_lambda, r.det_lambda)
            );
            assert_eq!(s.logneg_mean, r.log_negativity);
            assert_eq!(s.frac_entangled, if r.separable { 0.0 } else { 1.0 });
        }
    }
}
