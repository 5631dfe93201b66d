//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

#[path = "../common/mod.rs"]
mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use num_complex::Complex64;
use qnet_core::ensemble::{aggregate, run_ensemble, run_ensemble_detailed, EnsembleConfig, NetworkProfile};
use qnet_core::entanglement::{
    bipartite_lambda, entanglement_profile, infinite_chain_lambda, principal_minors, separability_verdict,
    BipartiteLambda, Consistency, Source,
};
use qnet_core::io::stats_to_csv;
use qnet_core::linalg::{det, solve_lyapunov, CMatrix, Matrix};
use qnet_core::lmi::find_certificate;
use qnet_core::performance::{finite_cost, thermodynamic_cost, WeightingSequence};
use qnet_core::spectral::{
    is_hurwitz, one_mode_closed_form, spectral_abscissa, stability_sweep, steady_spectrum, symbol_on_grid,
    transient_spectrum,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn full_scale_config() -> EnsembleConfig {
    EnsembleConfig {
        count: 100,
        ring: 400,
        n: 1,
        m: 1,
        d: 8,
        seed: 2024,
        ..EnsembleConfig::default()
    }
}

fn lyapunov_residuals() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for seed in 0..100u64 {
        let d = 1 + seed as usize % 8;
        let (_, blocks) = random_stable(1000 + seed, d, 256);
        let sp = steady_spectrum(&blocks, 256).map_err(|e| format!("seed {seed}: {e}"))?;
        for (k, s) in sp.s.iter().enumerate() {
            let a = symbol_on_grid(&blocks, 256, k);
            let r = &(&(&a * s) + &(s * &a.adjoint())) + blocks.forcing();
            worst = worst.max(r.norm_inf());
        }
    }
    let took = start.elapsed();
    ensure(worst <= 1e-10, || format!("max residual {worst:.3e}"))?;
    ensure(took < Duration::from_secs(30), || format!("took {took:?}"))?;
    Ok(format!("max residual {worst:.2e} in {:.1}s", took.as_secs_f64()))
}

fn closed_form_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut cases, mut worst) = (0, 0.0f64);
    while cases < 1000 {
        let mut c = || Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let a = CMatrix::from_fn(2, 2, |_, _| c());
        let g = CMatrix::from_fn(2, 2, |_, _| c());
        let f = &g * &g.adjoint();
        if !is_hurwitz(&a).hurwitz {
            continue;
        }
        let Ok(closed) = one_mode_closed_form(&a, &f) else {
            continue;
        };
        let kron = solve_lyapunov(&a, &f).map_err(|e| e.to_string())?.x;
        worst = worst.max(max_abs_diff(&closed, &kron) / kron.max_abs());
        cases += 1;
    }
    ensure(worst <= 1e-9, || format!("max relative gap {worst:.3e}"))?;
    Ok(format!("{cases} cases, max relative gap {worst:.2e}"))
}

fn analytic_family() -> Outcome {
    let w = WeightingSequence::identity(2);
    let mut worst_s = 0.0f64;
    let mut worst_det = 0.0f64;
    let mut worst_ln = 0.0f64;
    for (name, blocks) in [("decoupled", decoupled()), ("rotation", rotation_chain(0.3))] {
        for ring in [4, 64, 400] {
            let sp = steady_spectrum(&blocks, ring).map_err(|e| e.to_string())?;
            for s in &sp.s {
                worst_s = worst_s.max(max_abs_diff(s, &gauge()));
            }
            let e = finite_cost(&sp, &w, ring).map_err(|e| e.to_string())?;
            ensure((e - 2.0).abs() <= 1e-10, || format!("{name}: E_N = {e} at N = {ring}"))?;
            if ring <= 64 {
                for j in 0..ring {
                    for k in (0..ring).filter(|&k| k != j) {
                        let l = bipartite_lambda(&sp, j, k, ring).map_err(|e| e.to_string())?;
                        let r = separability_verdict(&l).map_err(|e| e.to_string())?;
                        worst_det = worst_det.max(r.det_lambda.abs());
                        worst_ln = worst_ln.max(r.log_negativity);
                    }
                }
            }
        }
        for r in entanglement_profile(&blocks, 400, -20..=20, Some(512)).map_err(|e| e.to_string())? {
            worst_det = worst_det.max(r.det_lambda.abs());
            worst_ln = worst_ln.max(r.log_negativity);
        }
        let t = thermodynamic_cost(&blocks, &w, 512).map_err(|e| e.to_string())?;
        ensure((t.value - 2.0).abs() <= 1e-12, || format!("{name}: limit {}", t.value))?;
    }
    ensure(worst_s <= 1e-11, || format!("S_z deviation {worst_s:.3e}"))?;
    ensure(worst_det <= 1e-9 && worst_ln <= 1e-9, || {
        format!("|det| {worst_det:.3e}, LN {worst_ln:.3e}")
    })?;
    Ok(format!(
        "S_z dev {worst_s:.1e}, |det| {worst_det:.1e}, LN {worst_ln:.1e}"
    ))
}

fn lmi_soundness() -> Outcome {
    let (mut found, mut seed) = (0, 0u64);
    while found < 200 {
        let blocks = random_blocks(seed);
        if find_certificate(&blocks, 1e-6).is_ok() {
            found += 1;
            let rep = stability_sweep(&blocks, 512).map_err(|e| e.to_string())?;
            ensure(rep.stable, || format!("seed {seed} certified but unstable"))?;
        }
        seed += 1;
        ensure(seed < 10_000, || format!("only {found} certificates"))?;
    }
    let witness = rotation_chain(0.6);
    ensure(
        stability_sweep(&witness, 512).map_err(|e| e.to_string())?.stable,
        || "r = 0.6 chain not stable".into(),
    )?;
    match find_certificate(&witness, 1e-6) {
        Err(e) if e.code() == "NoCertificateFound" => {}
        other => return Err(format!("r = 0.6 chain: {other:?}")),
    }
    Ok(format!(
        "{found} certificates from {seed} draws, all stable; r = 0.6 witness ok"
    ))
}

fn riccati_cross_check() -> Outcome {
    let mut worst = 0.0f64;
    for r in [0.1, 0.25, 0.4] {
        let cert = find_certificate(&rotation_chain(r), 0.1).map_err(|e| format!("r = {r}: {e}"))?;
        let s = 2.0 - (4.0 - 16.0 * r * r - 0.1f64).sqrt();
        worst = worst.max((&cert.s - &Matrix::identity(2).scale(s)).max_abs());
    }
    ensure(worst <= 1e-8, || format!("max gap {worst:.3e}"))?;
    for r in [0.55, 0.6] {
        ensure(find_certificate(&rotation_chain(r), 0.1).is_err(), || {
            format!("r = {r} certified")
        })?;
    }
    Ok(format!("max gap {worst:.2e}; r = 0.55, 0.6 rejected"))
}

fn sign_consistency(profiles: &[NetworkProfile]) -> Outcome {
    let reports: Vec<_> = profiles.iter().flat_map(|p| &p.reports).collect();
    let total = reports.len();
    let count = |c: Consistency| reports.iter().filter(|r| r.consistency == c).count();
    let (ok, amb, bad) = (
        count(Consistency::Consistent),
        count(Consistency::Ambiguous),
        count(Consistency::Contradiction),
    );
    ensure(total >= 1000, || format!("only {total} samples"))?;
    ensure(bad == 0, || format!("{bad} contradictions"))?;
    ensure(ok as f64 >= 0.99 * total as f64, || format!("{ok}/{total} consistent"))?;
    Ok(format!(
        "{total} samples: {ok} consistent, {amb} ambiguous, 0 contradictions"
    ))
}

fn distant_nodes_separable(profiles: &[NetworkProfile], took: Duration, d: i64) -> Outcome {
    let stats = aggregate(profiles);
    ensure(took < Duration::from_secs(600), || format!("took {took:?}"))?;
    for l in &stats.lags {
        if l.lag.abs() > d {
            ensure(l.frac_entangled == 0.0, || {
                format!("lag {} entangled in {}", l.lag, l.frac_entangled)
            })?;
        }
    }
    let near = stats
        .lags
        .iter()
        .filter(|l| l.lag.abs() <= d)
        .map(|l| l.frac_entangled)
        .fold(0.0, f64::max);
    ensure(near > 0.0, || "no entanglement within range".into())?;
    Ok(format!(
        "{:.1}s; max fraction within range {near:.2}, zero beyond",
        took.as_secs_f64()
    ))
}

fn thermodynamic_convergence() -> Outcome {
    let mut sigma0 = Matrix::identity(2);
    sigma0[(0, 1)] = 0.3;
    sigma0[(1, 0)] = 0.3;
    let w = WeightingSequence::new(vec![sigma0]).map_err(|e| e.to_string())?;
    let (mut shrinking, mut tight) = (0, 0);
    let mut worst = 0.0f64;
    for seed in 0..20u64 {
        // Short-range draws reach roundoff by N = 64, so use the full range d = 8.
        let (_, blocks) = random_stable(3000 + seed, 8, 512);
        let limit = thermodynamic_cost(&blocks, &w, 8192).map_err(|e| e.to_string())?.value;
        let gap = |n: usize| -> Result<f64, String> {
            let sp = steady_spectrum(&blocks, n).map_err(|e| e.to_string())?;
            Ok((finite_cost(&sp, &w, n).map_err(|e| e.to_string())? - limit).abs())
        };
        let (g64, g512) = (gap(64)?, gap(512)?);
        let rel = g512 / limit.abs();
        worst = worst.max(rel);
        shrinking += usize::from(g512 < g64);
        tight += usize::from(rel <= 1e-6);
    }
    ensure(shrinking == 20, || format!("gap shrank in {shrinking}/20"))?;
    ensure(tight >= 18, || format!("{tight}/20 within 1e-6"))?;
    Ok(format!("gap shrank 20/20, {tight}/20 within 1e-6 (worst {worst:.1e})"))
}

fn finite_matches_infinite() -> Outcome {
    let (ring, grid) = (1024, 2048);
    let (mut worst, mut compared) = (0.0f64, 0);
    for seed in 0..20u64 {
        let d = 1 + seed as usize % 8;
        let (_, blocks) = random_stable(4000 + seed, d, ring);
        let sp = steady_spectrum(&blocks, ring).map_err(|e| e.to_string())?;
        let span = d as i64 + 4;
        for lag in (-span..=span).filter(|&a| a != 0) {
            let k = lag.rem_euclid(ring as i64) as usize;
            let fin = bipartite_lambda(&sp, k, 0, ring).map_err(|e| e.to_string())?;
            let inf = infinite_chain_lambda(&blocks, lag, grid).map_err(|e| e.to_string())?;
            worst = worst.max(max_abs_diff(&fin.lambda, &inf.lambda));
            let (a, b) = (
                separability_verdict(&fin).map_err(|e| e.to_string())?,
                separability_verdict(&inf).map_err(|e| e.to_string())?,
            );
            if a.consistency != Consistency::Ambiguous && b.consistency != Consistency::Ambiguous {
                compared += 1;
                ensure(a.separable == b.separable, || {
                    format!("seed {seed} lag {lag}: verdicts differ")
                })?;
            }
        }
    }
    ensure(worst <= 1e-6, || format!("max |ΔΛ| {worst:.3e}"))?;
    Ok(format!("max |ΔΛ| {worst:.2e}; {compared} verdicts agree"))
}

fn minors_and_determinants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut j2 = Matrix::zeros(4, 4);
    j2.set_block(0, 0, &theta());
    j2.set_block(2, 2, &theta());
    let (mut min_minor, mut worst) = (f64::INFINITY, 0.0f64);
    for _ in 0..1000 {
        let g = Matrix::from_fn(4, 4, |_, _| rng.random_range(-1.0..1.0));
        let v = &Matrix::identity(4) + &(&g * &g.transpose());
        let p = CMatrix::from_parts(&v, &j2);
        let mut lambda = p.clone();
        lambda.set_block(2, 0, &p.submatrix(2, 0, 2, 2).conj());
        lambda.set_block(2, 2, &p.submatrix(2, 2, 2, 2).conj());
        for (idx, m) in principal_minors(&lambda) {
            if idx.len() <= 3 {
                min_minor = min_minor.min(m);
            }
        }
        let l = BipartiteLambda {
            lambda,
            pair: None,
            lag: 1,
            source: Source::Finite,
        };
        let r = separability_verdict(&l).map_err(|e| e.to_string())?;
        let lu = det(&l.lambda).re;
        for f in r.det_factored {
            worst = worst.max((f - lu).abs() / lu.abs().max(1.0));
        }
    }
    ensure(min_minor >= -1e-9, || format!("minor {min_minor:.3e}"))?;
    ensure(worst <= 1e-8, || format!("factored gap {worst:.3e}"))?;
    Ok(format!("min minor {min_minor:.2e}, factored gap {worst:.1e}"))
}

fn transient_correctness() -> Outcome {
    let blocks = decoupled();
    let ring = 16;
    let s0 = CMatrix::from_parts(&Matrix::diagonal(&[3.0, 0.5]), &theta());
    let mut worst = 0.0f64;
    for t in [0.0, 0.5, 2.0] {
        let decay = (-4.0f64 * t).exp();
        for z in [0, 5] {
            let got = transient_spectrum(&blocks, ring, &s0, z, z, t).map_err(|e| e.to_string())?;
            // A_z = −2I and BΩBᵀ = 4(I + iΘ).
            let want = &s0.scale_real(decay) + &gauge().scale_real(ring as f64 * (1.0 - decay));
            worst = worst.max(max_abs_diff(&got, &want));
        }
    }
    ensure(worst <= 1e-10, || format!("closed form gap {worst:.3e}"))?;
    let mut conv = 0.0f64;
    for seed in 0..20u64 {
        let ring = 24;
        let (_, blocks) = random_stable(5000 + seed, 1 + seed as usize % 4, ring);
        let sp = steady_spectrum(&blocks, ring).map_err(|e| e.to_string())?;
        for z in [0, 7, 13] {
            let t = 40.0 / spectral_abscissa(&symbol_on_grid(&blocks, ring, z)).abs();
            let got = transient_spectrum(&blocks, ring, &CMatrix::zeros(2, 2), z, z, t).map_err(|e| e.to_string())?;
            let want = sp.s[z].scale_real(ring as f64);
            conv = conv.max(max_abs_diff(&got, &want) / want.max_abs().max(1.0));
        }
    }
    ensure(conv <= 1e-8, || format!("convergence gap {conv:.3e}"))?;
    Ok(format!("closed form gap {worst:.1e}, convergence gap {conv:.1e}"))
}

fn worker_determinism(reference: &str) -> Outcome {
    let cfg = full_scale_config();
    for threads in [1, 2, 8] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| e.to_string())?;
        let csv = pool
            .install(|| run_ensemble(&cfg).map(|s| stats_to_csv(&s)))
            .map_err(|e| e.to_string())?;
        ensure(csv == reference, || format!("{threads} workers differ"))?;
    }
    Ok(format!("{} bytes identical across 1, 2, 8 workers", reference.len()))
}

fn main() -> ExitCode {
    let cfg = full_scale_config();
    let start = Instant::now();
    let ensemble = run_ensemble_detailed(&cfg);
    let took = start.elapsed();
    let ensemble = ensemble.map_err(|e| e.to_string());
    let from_ensemble = |f: &dyn Fn(&[NetworkProfile]) -> Outcome| match &ensemble {
        Ok(p) => f(p),
        Err(e) => Err(format!("ensemble failed: {e}")),
    };

    let criteria: Vec<(&str, Check)> = vec![
        ("Lyapunov residuals on 100 networks", Box::new(lyapunov_residuals)),
        ("closed form vs Kronecker solve", Box::new(closed_form_equivalence)),
        ("analytic family", Box::new(analytic_family)),
        ("LMI soundness and conservatism", Box::new(lmi_soundness)),
        ("scalar Riccati root", Box::new(riccati_cross_check)),
        (
            "determinant and log-negativity agree",
            Box::new(|| from_ensemble(&sign_consistency)),
        ),
        (
            "distant nodes separable at full scale",
            Box::new(|| from_ensemble(&|p: &[NetworkProfile]| distant_nodes_separable(p, took, cfg.d as i64))),
        ),
        ("thermodynamic convergence", Box::new(thermodynamic_convergence)),
        ("finite ring vs infinite chain", Box::new(finite_matches_infinite)),
        (
            "principal minors and factored determinants",
            Box::new(minors_and_determinants),
        ),
        ("transient spectrum", Box::new(transient_correctness)),
        (
            "worker-count determinism",
            Box::new(|| from_ensemble(&|p: &[NetworkProfile]| worker_determinism(&stats_to_csv(&aggregate(p))))),
        ),
    ];

    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
