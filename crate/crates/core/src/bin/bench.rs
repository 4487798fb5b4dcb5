//! Command-line front end: run the benchmark matrix, solve one instance, or
//! generate a synthetic instance.
//!
//! Exit status: 0 when every run converged, 1 when some run did not, 2 on
//! usage, configuration or I/O errors.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use defbal::fenchel::GammaRule;
use defbal::harness::config::{InstanceSpec, ResetThreshold};
use defbal::harness::io::{instance_exists, write_csv_instance};
use defbal::harness::matrix::{materialize, write_report, write_trace, write_trace_to, Execution, MatrixReport};
use defbal::harness::{generate_instance, run_matrix, suite_entry, BenchConfig, Category, GeneratorSpec, InstanceSource};
use defbal::outer::{run, Algorithm, TerminationPoint};
use defbal::Result;

#[derive(Parser)]
#[command(name = "bench", version, about = "Relaxed augmented Lagrangian LASSO benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured (instance, algorithm) pair and write CSV reports.
    Run {
        /// TOML configuration file.
        #[arg(long)]
        config: PathBuf,
        /// Override the configured output directory.
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Run the matrix on one thread.
        #[arg(long)]
        sequential: bool,
    },
    /// Solve one instance with one algorithm.
    Solve {
        /// Built-in suite name (e.g. `pixel-like-1`) or CSV prefix
        /// (`<prefix>.A.csv`, `<prefix>.b.csv`).
        #[arg(long)]
        instance: String,
        /// admm, alm_fista_cd, alm_ar_fista_cd, alm_adss or alm_ar_adss.
        #[arg(long)]
        algorithm: Algorithm,
        /// Category whose tuned defaults apply (suite instances know theirs).
        #[arg(long)]
        category: Option<Category>,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        a: Option<f64>,
        #[arg(long)]
        j1: Option<usize>,
        /// Positive integer, or `inf` to disable resets.
        #[arg(long)]
        jr: Option<ResetThreshold>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        max_outer: Option<usize>,
        #[arg(long)]
        max_inner: Option<usize>,
        /// `max`, `mid` or `fixed:<g>`.
        #[arg(long)]
        gamma: Option<GammaRule>,
        /// Iterate used for the stopping test: z (default) or x.
        #[arg(long)]
        termination: Option<TerminationPoint>,
        /// Seed for generating suite instances.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Print the per-iteration trace as CSV.
        #[arg(long)]
        trace: bool,
        /// Write the trace to this file instead of standard output.
        #[arg(long, requires = "trace")]
        trace_out: Option<PathBuf>,
    },
    /// Generate a synthetic instance as a pair of CSV files.
    Gen {
        #[arg(long)]
        obs: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        sparsity: f64,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output prefix; writes `<out>.A.csv` and `<out>.b.csv`.
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run { config, output_dir, sequential } => {
            let mut cfg = BenchConfig::load(&config)?;
            if let Some(dir) = output_dir {
                cfg.output_dir = dir;
            }
            let execution = if sequential || !cfg.parallel { Execution::Sequential } else { Execution::Parallel };
            let report = run_matrix(&cfg, execution)?;
            let files = write_report(&report, &cfg.output_dir, cfg.emit_traces)?;
            print_report(&report);
            println!("results: {}", files.results.display());
            println!("summary: {}", files.summary.display());
            if !files.traces.is_empty() {
                println!("traces:  {} files", files.traces.len());
            }
            Ok(report.all_succeeded())
        }
        Command::Solve {
            instance,
            algorithm,
            category,
            c,
            epsilon,
            a,
            j1,
            jr,
            delta,
            max_outer,
            max_inner,
            gamma,
            termination,
            seed,
            trace,
            trace_out,
        } => {
            let spec = resolve_instance(&instance, category)?;
            let inst = materialize(&spec, seed)?;
            let mut cfg = spec.category.default_config(algorithm);
            if let Some(v) = c {
                cfg.c = v;
            }
            if let Some(v) = epsilon {
                cfg.epsilon = v;
            }
            if let Some(v) = a {
                cfg.a = v;
            }
            if let Some(v) = j1 {
                cfg.j1 = v;
            }
            if let Some(v) = jr {
                cfg.jr = v.0;
            }
            if let Some(v) = delta {
                cfg.delta = v;
            }
            if let Some(v) = max_outer {
                cfg.max_outer = v;
            }
            if let Some(v) = max_inner {
                cfg.max_inner = v;
            }
            if let Some(v) = gamma {
                cfg.gamma_rule = v;
            }
            if let Some(v) = termination {
                cfg.termination = v;
            }
            let rec = run(&inst, &cfg)?;
            if trace {
                match trace_out {
                    Some(path) => write_trace(&path, &rec)?,
                    None => write_trace_to(std::io::stdout().lock(), &rec)
                        .map_err(|e| defbal::Error::InvalidInput(format!("writing trace: {e}")))?,
                }
            }
            let jr_text = cfg.jr.map_or("inf".to_owned(), |v| v.to_string());
            eprintln!(
                "{} on {} (category {}, c={}, epsilon={}, a={}, j1={}, jr={}, delta={})",
                algorithm, spec.name, spec.category, cfg.c, cfg.epsilon, cfg.a, cfg.j1, jr_text, cfg.delta
            );
            eprintln!(
                "status={} outer_iters={} inner_iters={} residual={:e} objective={}",
                rec.status, rec.outer_iterations, rec.inner_iterations_cumulative, rec.final_residual, rec.final_objective
            );
            Ok(rec.status.is_success())
        }
        Command::Gen { obs, n, sparsity, noise, seed, out } => {
            let spec = GeneratorSpec { obs, n, sparsity, noise_sigma: noise, seed_offset: 0 };
            let g = generate_instance(&spec, seed)?;
            write_csv_instance(&out, &g.raw)?;
            println!("wrote {obs}x{n} instance to {}.A.csv / {}.b.csv", out.display(), out.display());
            Ok(true)
        }
    }
}

fn resolve_instance(name: &str, category: Option<Category>) -> Result<InstanceSpec> {
    if let Some(entry) = suite_entry(name) {
        return Ok(InstanceSpec {
            name: entry.name,
            category: category.unwrap_or(entry.category),
            source: InstanceSource::Generator(entry.spec),
        });
    }
    let prefix = PathBuf::from(name);
    if instance_exists(&prefix) {
        return Ok(InstanceSpec {
            name: name.to_owned(),
            category: category.unwrap_or(Category::Pixel),
            source: InstanceSource::Csv(prefix),
        });
    }
    Err(defbal::Error::InvalidInput(format!(
        "`{name}` is neither a suite instance nor a CSV prefix with {name}.A.csv and {name}.b.csv"
    )))
}

fn print_report(report: &MatrixReport) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{:<16} {:<16} {:>8} {:>8} {:>10} {:<13}", "instance", "algorithm", "outer", "inner", "residual", "status");
    for r in &report.rows {
        let residual = r.residual.map_or("-".to_owned(), |v| format!("{v:.2e}"));
        let _ = writeln!(
            out,
            "{:<16} {:<16} {:>8} {:>8} {:>10} {:<13}",
            r.instance,
            r.algorithm.id(),
            r.outer_iters,
            r.inner_iters,
            residual,
            r.status
        );
        if let Some(e) = &r.error {
            let _ = writeln!(out, "    {e}");
        }
    }
    let _ = writeln!(out, "\ngeometric means over successful runs:");
    for s in &report.summary {
        let f = |v: Option<f64>| v.map_or("-".to_owned(), |v| format!("{v:.2}"));
        let _ = writeln!(
            out,
            "  {:<16} outer {:>10} inner {:>10} ({}/{} succeeded)",
            s.algorithm.id(),
            f(s.geomean_outer),
            f(s.geomean_inner),
            s.succeeded,
            s.runs
        );
    }
}
