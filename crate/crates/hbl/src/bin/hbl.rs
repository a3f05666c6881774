use clap::{Args, Parser, Subcommand};
use hbl::bundle::{random_hermitian_field, Metric};
use hbl::config::RunConfig;
use hbl::error::HblError;
use hbl::functional::{donaldson_m, PathSpec};
use hbl::hessian::{cone_report, ConeKind};
use hbl::report::{
    write_functional_csv, write_manifest, write_positivity_csv, write_trace_csv,
};
use hbl::snapshot::{read_metric, write_metric};
use hbl::solver::solve;
use hbl::verify;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "hbl", about = "Hermitian metrics on twisted bundles over flat tori", version)]
struct Cli {
    /// JSON configuration file; omitted fields take defaults
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    cmd: Cmd,
}

/// Scalar overrides applied on top of the configuration file.
#[derive(Args)]
struct Overrides {
    #[arg(long, global = true)]
    grid: Option<usize>,
    #[arg(long, global = true)]
    rank: Option<usize>,
    #[arg(long, global = true)]
    level: Option<i64>,
    #[arg(long, global = true)]
    k: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    amplitude: Option<f64>,
    #[arg(long, global = true)]
    max_iters: Option<usize>,
    #[arg(long, global = true)]
    tol_residual_sup: Option<f64>,
    #[arg(long, global = true)]
    quad_order: Option<usize>,
    #[arg(long, global = true)]
    tol_scale: Option<f64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the certification suites and emit a JSON verdict
    Verify {
        /// run only the named suite
        #[arg(long)]
        suite: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Flow a metric to a solution of the k-th power curvature equation
    Solve {
        /// starting metric snapshot; a seeded random deformation of the
        /// background when omitted
        #[arg(long)]
        start: Option<PathBuf>,
        #[arg(long, default_value = "solution.hbl1")]
        out_metric: PathBuf,
        #[arg(long, default_value = "trace.csv")]
        trace: PathBuf,
    },
    /// Evaluate the energy functional between two metrics over several paths
    Functional {
        #[arg(long)]
        a: Option<PathBuf>,
        #[arg(long)]
        b: Option<PathBuf>,
        #[arg(long, default_value = "functional.csv")]
        out: PathBuf,
    },
    /// Pointwise cone positivity of the curvature of a metric
    Positivity {
        #[arg(long)]
        metric: Option<PathBuf>,
        /// sigma_k | sigma2_left | sigma2_right
        #[arg(long, default_value = "sigma_k")]
        cone: String,
        #[arg(long, default_value = "positivity.csv")]
        out: PathBuf,
    },
    /// Write a reproducibility manifest covering previously produced files
    Report {
        #[arg(long, default_value = "manifest.json")]
        out: PathBuf,
        files: Vec<PathBuf>,
    },
}

fn load_config(cli: &Cli) -> hbl::Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    let o = &cli.overrides;
    if let Some(v) = o.grid {
        cfg.grid = v;
    }
    if let Some(v) = o.rank {
        cfg.rank = v;
    }
    if let Some(v) = o.level {
        cfg.level = v;
    }
    if let Some(v) = o.k {
        cfg.k = v;
    }
    if let Some(v) = o.seed {
        cfg.seed = v;
    }
    if let Some(v) = o.amplitude {
        cfg.amplitude = v;
    }
    if let Some(v) = o.max_iters {
        cfg.max_iters = v;
    }
    if let Some(v) = o.tol_residual_sup {
        cfg.tol_residual_sup = v;
    }
    if let Some(v) = o.quad_order {
        cfg.quad_order = v;
    }
    if let Some(v) = o.tol_scale {
        cfg.tol_scale = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn init_threads() -> hbl::Result<()> {
    if let Ok(v) = std::env::var("HBL_THREADS") {
        let t: usize = v
            .parse()
            .map_err(|_| HblError::Config(format!("HBL_THREADS={v} is not a thread count")))?;
        if t == 0 {
            return Err(HblError::Config("HBL_THREADS must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| HblError::Config(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: &Cli) -> hbl::Result<()> {
    init_threads()?;
    let cfg = load_config(cli)?;
    let bg = cfg.background()?;
    match &cli.cmd {
        Cmd::Verify { suite, out } => {
            let opts = cfg.verify_options();
            let verdict = match suite.as_deref() {
                None => verify::run_all(&opts)?,
                Some(name) => {
                    let s = match name {
                        "geometry" => verify::geometry_suite(&opts)?,
                        "chern_weil" => verify::chern_weil_suite(&opts)?,
                        "functional" => verify::functional_suite(&opts)?,
                        "z2" => verify::z2_suite(&opts)?,
                        "claim1" => verify::claim1_suite(&opts)?,
                        "u1" => verify::u1_suite(&opts)?,
                        "thm2" => verify::thm2_suite(&opts)?,
                        "nakano" => verify::nakano_suite(&opts)?,
                        "local_min" => verify::local_min_suite(&opts)?,
                        other => {
                            return Err(HblError::Config(format!("unknown suite {other:?}")))
                        }
                    };
                    let pass = s.pass;
                    verify::Verdict { suites: vec![s], pass }
                }
            };
            for s in &verdict.suites {
                for c in &s.checks {
                    println!(
                        "[{}] {} / {}: value {:.3e}, tol {:.3e}",
                        if c.pass { "PASS" } else { "FAIL" },
                        s.name,
                        c.description,
                        c.value,
                        c.tol
                    );
                }
            }
            if let Some(path) = out {
                let text = serde_json::to_string_pretty(&verdict)
                    .map_err(|e| HblError::Consistency(e.to_string()))?;
                std::fs::write(path, text)?;
            }
            if !verdict.pass {
                return Err(HblError::SuiteFailure("one or more checks failed".into()));
            }
            println!("all suites passed");
            Ok(())
        }
        Cmd::Solve { start, out_metric, trace } => {
            let h0 = Metric::background(&bg);
            let start_metric = match start {
                Some(p) => read_metric(p, &bg)?,
                None => {
                    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                    let s0 = random_hermitian_field(&bg, bg.rank, &mut rng, cfg.band, cfg.amplitude);
                    h0.deformed(&s0, 1.0)?
                }
            };
            let (solution, report) = solve(&bg, &h0, &start_metric, &cfg.solve_config())?;
            write_trace_csv(trace, &report.trace)?;
            write_metric(out_metric, &bg, &solution)?;
            write_manifest(
                &out_metric.with_extension("manifest.json"),
                &cfg,
                &[out_metric, trace],
            )?;
            println!(
                "{} after {} iterations, residual sup {:.3e}, M {:.6e}",
                if report.converged { "converged" } else { "budget exhausted" },
                report.iters,
                report.final_residual_sup,
                report.final_m,
            );
            if !report.converged {
                return Err(HblError::Stall(format!(
                    "residual sup {:.3e} above tolerance {:.3e} after {} iterations",
                    report.final_residual_sup, cfg.tol_residual_sup, report.iters
                )));
            }
            Ok(())
        }
        Cmd::Functional { a, b, out } => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let ma = match a {
                Some(p) => read_metric(p, &bg)?,
                None => Metric::random(&bg, &mut rng, cfg.band, cfg.amplitude)?,
            };
            let mb = match b {
                Some(p) => read_metric(p, &bg)?,
                None => Metric::random(&bg, &mut rng, cfg.band, cfg.amplitude)?,
            };
            let mut rows = Vec::new();
            for path in [PathSpec::geodesic(cfg.quad_order), PathSpec::linear(cfg.quad_order)] {
                rows.push(donaldson_m(&bg, &ma, &mb, cfg.k, &path)?);
            }
            write_functional_csv(out, &rows)?;
            for r in &rows {
                println!("k={} path={} M={:.12e}", r.k, r.path_kind, r.m);
            }
            Ok(())
        }
        Cmd::Positivity { metric, cone, out } => {
            let m = match metric {
                Some(p) => read_metric(p, &bg)?,
                None => Metric::background(&bg),
            };
            let kind = match cone.as_str() {
                "sigma_k" => ConeKind::SigmaK(cfg.k),
                "sigma2_left" => ConeKind::Sigma2Left,
                "sigma2_right" => ConeKind::Sigma2Right,
                other => return Err(HblError::Config(format!("unknown cone {other:?}"))),
            };
            let rep = cone_report(&bg, &m, kind, None)?;
            write_positivity_csv(out, std::slice::from_ref(&rep))?;
            println!(
                "cone {}: min eigenvalue {:.6e} at point {} over {} points -> {}",
                rep.cone,
                rep.min_eig,
                rep.argmin_point,
                rep.sampled_points,
                if rep.positive { "positive" } else { "NOT positive" }
            );
            if !rep.positive {
                return Err(HblError::SuiteFailure(format!(
                    "cone {} fails at point {}",
                    rep.cone, rep.argmin_point
                )));
            }
            Ok(())
        }
        Cmd::Report { out, files } => {
            for f in files {
                if !f.exists() {
                    return Err(HblError::Io(std::io::Error::new(
                        std::io::ErrorKind::NotFound,
                        format!("{} does not exist", f.display()),
                    )));
                }
            }
            let refs: Vec<&std::path::Path> = files.iter().map(|p| p.as_path()).collect();
            write_manifest(out, &cfg, &refs)?;
            println!("manifest written to {}", out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                HblError::Config(_) => ExitCode::from(1),
                HblError::Io(_) | HblError::Snapshot(_) => ExitCode::from(2),
                _ => ExitCode::from(3),
            }
        }
    }
}
