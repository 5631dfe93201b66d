//! `qnet`: command-line front end for qnet-core.

mod manifest;
mod svg;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde_json::{json, Value};

use qnet_core::ensemble::{aggregate, run_ensemble_detailed, EnsembleConfig};
use qnet_core::entanglement::{
    bipartite_lambda, entanglement_profile, infinite_chain_lambda_from, separability_verdict, EntanglementReport,
};
use qnet_core::io::{fmt_num, reports_to_csv, spectrum_to_csv, stats_to_csv};
use qnet_core::lmi::{find_certificate, DEFAULT_EPSILON};
use qnet_core::model::{build_blocks, validate_spec, NetworkSpec};
use qnet_core::performance::{finite_cost, thermodynamic_cost};
use qnet_core::spectral::{default_grid, stability_sweep, steady_spectrum};
use qnet_core::{Error, RealMatrix, ValidNetwork, Weights};

use manifest::{manifest_path, RunManifest};

#[derive(Parser, Debug)]
#[command(
    name = "qnet",
    version,
    about = "Translation-invariant networks of linear quantum stochastic systems"
)]
struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a network file against the structural constraints.
    Validate { network: PathBuf },
    /// Hurwitz sweep of the symbol over the K-th roots of unity.
    Stability {
        network: PathBuf,
        #[arg(long = "K")]
        k: Option<usize>,
    },
    /// Search for a block-LMI stability certificate.
    LmiCheck {
        network: PathBuf,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
    },
    /// Steady-state spatial spectrum on the ring grid, as CSV.
    Spectrum {
        network: PathBuf,
        /// Ring length; defaults to the network's N.
        #[arg(long = "N")]
        ring: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Weighted quadratic cost on a finite ring or in the thermodynamic limit.
    Performance {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        weights: PathBuf,
        #[arg(long = "N")]
        ring: Option<usize>,
        /// Also evaluate the infinite-chain limit.
        #[arg(long)]
        limit: bool,
        /// Quadrature size for the limit (even; default 512).
        #[arg(long = "K")]
        k: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Two-node entanglement tests.
    Entangle(EntangleArgs),
    /// Seeded random ensemble and per-lag entanglement statistics.
    Ensemble {
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long = "N", default_value_t = 400)]
        ring: usize,
        #[arg(long, default_value_t = 8)]
        d: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = EnsembleConfig::default().amplitude)]
        amplitude: f64,
        #[arg(long, default_value_t = EnsembleConfig::default().max_rejects)]
        max_rejects: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct EntangleArgs {
    #[arg(long)]
    network: PathBuf,
    /// Node pairs `j,k[;j,k…]`.
    #[arg(long, conflicts_with = "profile", required_unless_present = "profile")]
    pairs: Option<String>,
    /// Lag range `a_min..a_max`.
    #[arg(long, allow_hyphen_values = true)]
    profile: Option<String>,
    /// Add infinite-chain rows.
    #[arg(long)]
    infinite: bool,
    /// Quadrature size for the infinite chain.
    #[arg(long = "K")]
    k: Option<usize>,
    #[arg(long = "N")]
    ring: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Domain(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_parse() {
            Failure::Usage(e.to_string())
        } else {
            Failure::Domain(e)
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn read(path: &Path, manifest: &mut RunManifest) -> CliResult<String> {
    let bytes = fs::read(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    manifest.input(path, &bytes);
    String::from_utf8(bytes).map_err(|_| Failure::Usage(format!("{} is not UTF-8", path.display())))
}

fn load_network(path: &Path, manifest: &mut RunManifest) -> CliResult<ValidNetwork> {
    let text = read(path, manifest)?;
    Ok(validate_spec(NetworkSpec::from_json(&text)?)?)
}

fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(fmt_num(x).parse().expect("formatted float is valid JSON"))
    } else {
        Value::Null
    }
}

fn complex(z: Complex64) -> Value {
    json!([num(z.re), num(z.im)])
}

fn matrix(m: &RealMatrix) -> Value {
    Value::Array(
        m.to_rows()
            .into_iter()
            .map(|r| Value::Array(r.into_iter().map(num).collect()))
            .collect(),
    )
}

/// Writes `text` to `out` (with a manifest) or to stdout.
fn emit(text: &str, out: Option<&Path>, manifest: &mut RunManifest) -> CliResult<()> {
    match out {
        Some(path) => write_file(path, text, manifest),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_file(path: &Path, text: &str, manifest: &mut RunManifest) -> CliResult<()> {
    fs::write(path, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
    manifest.output(path, text.as_bytes());
    Ok(())
}

fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON value serializes");
    s.push('\n');
    s
}

fn parse_pairs(text: &str) -> CliResult<Vec<(usize, usize)>> {
    text.split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let bad = || Failure::Usage(format!("bad pair {p:?}; expected j,k"));
            let (j, k) = p.split_once(',').ok_or_else(bad)?;
            Ok((
                j.trim().parse().map_err(|_| bad())?,
                k.trim().parse().map_err(|_| bad())?,
            ))
        })
        .collect()
}

fn parse_range(text: &str) -> CliResult<(i64, i64)> {
    let bad = || Failure::Usage(format!("bad lag range {text:?}; expected a_min..a_max"));
    let (lo, hi) = text.split_once("..").ok_or_else(bad)?;
    let lo: i64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: i64 = hi.trim().parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

/// Default quadrature size for the infinite chain.
const QUADRATURE: usize = 512;

fn infinite_grid(k: Option<usize>, d: usize) -> usize {
    k.unwrap_or_else(|| QUADRATURE.max(default_grid(d)))
}

fn entangle(args: &EntangleArgs, manifest: &mut RunManifest) -> CliResult<()> {
    let mut spec = load_network(&args.network, manifest)?;
    if let Some(ring) = args.ring {
        spec = spec.with_ring(ring)?;
    }
    let blocks = build_blocks(&spec)?;
    let ring = spec.ring;
    let grid = infinite_grid(args.k, spec.d);
    manifest.set("N", ring);
    manifest.set("infinite", args.infinite);
    if args.infinite {
        manifest.set("K", grid);
    }
    let reports: Vec<EntanglementReport<f64>> = if let Some(pairs) = &args.pairs {
        let pairs = parse_pairs(pairs)?;
        manifest.set("pairs", pairs.iter().map(|&(j, k)| json!([j, k])).collect::<Vec<_>>());
        let spectrum = steady_spectrum(&blocks, ring)?;
        let inf_spectrum = if args.infinite {
            Some(steady_spectrum(&blocks, grid)?)
        } else {
            None
        };
        let mut out = Vec::new();
        for (j, k) in pairs {
            out.push(separability_verdict(&bipartite_lambda(&spectrum, j, k, ring)?)?);
            if let Some(sp) = &inf_spectrum {
                out.push(separability_verdict(&infinite_chain_lambda_from(
                    sp,
                    j as i64 - k as i64,
                )?)?);
            }
        }
        out
    } else {
        let text = args.profile.as_deref().expect("clap requires pairs or profile");
        let (lo, hi) = parse_range(text)?;
        manifest.set("profile", format!("{lo}..{hi}"));
        entanglement_profile(&blocks, ring, lo..=hi, args.infinite.then_some(grid))?
    };
    emit(&reports_to_csv(&reports), args.out.as_deref(), manifest)
}

fn run(cli: Cli, manifest: &mut RunManifest) -> CliResult<Option<PathBuf>> {
    match cli.command {
        Command::Validate { network } => {
            let spec = load_network(&network, manifest)?;
            let v = json!({"valid": true, "n": spec.n, "m": spec.m, "N": spec.ring, "d": spec.d});
            print!("{}", json_text(&v));
            Ok(None)
        }
        Command::Stability { network, k } => {
            let spec = load_network(&network, manifest)?;
            let blocks = build_blocks(&spec)?;
            let grid = k.unwrap_or_else(|| default_grid(spec.d));
            let r = stability_sweep(&blocks, grid)?;
            let v = json!({
                "stable": r.stable,
                "worst_abscissa": num(r.worst_abscissa),
                "argmax_index": r.argmax_index,
                "argmax_z": complex(r.argmax_z),
                "K": r.grid_size,
            });
            print!("{}", json_text(&v));
            Ok(None)
        }
        Command::LmiCheck { network, epsilon } => {
            let spec = load_network(&network, manifest)?;
            let blocks = build_blocks(&spec)?;
            let v = match find_certificate(&blocks, epsilon) {
                Ok(c) => json!({
                    "feasible": true,
                    "S": matrix(&c.s),
                    "Q": matrix(&c.q),
                    "slack": num(c.slack),
                    "iterations": c.iterations,
                }),
                Err(e @ (Error::NoCertificateFound { .. } | Error::A0NotHurwitz(_))) => json!({
                    "feasible": false,
                    "S": null,
                    "Q": null,
                    "slack": null,
                    "iterations": match e { Error::NoCertificateFound { iterations, .. } => iterations, _ => 0 },
                    "reason": e.to_string(),
                }),
                Err(e) => return Err(e.into()),
            };
            print!("{}", json_text(&v));
            Ok(None)
        }
        Command::Spectrum { network, ring, out } => {
            let mut spec = load_network(&network, manifest)?;
            if let Some(ring) = ring {
                spec = spec.with_ring(ring)?;
            }
            manifest.set("N", spec.ring);
            let spectrum = steady_spectrum(&build_blocks(&spec)?, spec.ring)?;
            emit(&spectrum_to_csv(&spectrum), out.as_deref(), manifest)?;
            Ok(out)
        }
        Command::Performance {
            network,
            weights,
            ring,
            limit,
            k,
            out,
        } => {
            let mut spec = load_network(&network, manifest)?;
            if let Some(ring) = ring {
                spec = spec.with_ring(ring)?;
            }
            let w = Weights::from_json(&read(&weights, manifest)?)?;
            let blocks = build_blocks(&spec)?;
            manifest.set("N", spec.ring);
            let e_n = finite_cost(&steady_spectrum(&blocks, spec.ring)?, &w, spec.ring)?;
            let (e_inf, err) = if limit {
                let mut grid = infinite_grid(k, spec.d);
                grid += grid % 2;
                manifest.set("K", grid);
                let c = thermodynamic_cost(&blocks, &w, grid)?;
                (num(c.value), num(c.error))
            } else {
                (Value::Null, Value::Null)
            };
            let v = json!({"E_N": num(e_n), "E_inf": e_inf, "err": err});
            emit(&json_text(&v), out.as_deref(), manifest)?;
            Ok(out)
        }
        Command::Entangle(args) => {
            entangle(&args, manifest)?;
            Ok(args.out)
        }
        Command::Ensemble {
            count,
            ring,
            d,
            seed,
            amplitude,
            max_rejects,
            out,
            svg,
        } => {
            let cfg = EnsembleConfig {
                count,
                ring,
                d,
                seed,
                amplitude,
                max_rejects,
                ..EnsembleConfig::default()
            };
            manifest.seed = Some(seed);
            manifest.set("count", count);
            manifest.set("N", ring);
            manifest.set("n", cfg.n);
            manifest.set("m", cfg.m);
            manifest.set("d", d);
            manifest.set("amplitude", num(amplitude));
            manifest.set("max_rejects", max_rejects);
            let stats = aggregate(&run_ensemble_detailed(&cfg)?);
            emit(&stats_to_csv(&stats), out.as_deref(), manifest)?;
            if let Some(path) = &svg {
                write_file(path, &svg::ensemble_svg(&stats), manifest)?;
            }
            Ok(out.or(svg))
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Validate { .. } => "validate",
        Command::Stability { .. } => "stability",
        Command::LmiCheck { .. } => "lmi-check",
        Command::Spectrum { .. } => "spectrum",
        Command::Performance { .. } => "performance",
        Command::Entangle(_) => "entangle",
        Command::Ensemble { .. } => "ensemble",
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(2);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .expect("global thread pool is configured once");
    }
    let mut manifest = RunManifest::new(command_name(&cli.command));
    if let Some(jobs) = cli.jobs {
        manifest.set("jobs", jobs);
    }
    let start = Instant::now();
    match run(cli, &mut manifest) {
        Ok(out) => {
            if let Some(out) = out {
                let text = json_text(&manifest.to_json(start.elapsed()));
                if let Err(e) = fs::write(manifest_path(&out), text) {
                    eprintln!("error: cannot write manifest: {e}");
                    return ExitCode::from(2);
                }
            }
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Domain(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
