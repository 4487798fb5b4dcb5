//! The algorithm × instance run matrix and its CSV outputs.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use super::config::{BenchConfig, InstanceSource, InstanceSpec};
use super::generate::generate_instance;
use super::io::load_csv_instance;
use super::stats::geometric_mean;
use crate::lasso::ProblemInstance;
use crate::outer::{run, Algorithm, RunRecord};
use crate::{Error, Result};

/// Results file columns, in order.
pub const RESULT_COLUMNS: [&str; 8] =
    ["instance", "algorithm", "outer_iters", "inner_iters", "residual", "objective", "status", "wall_time_ms"];
/// Trace file columns, in order.
pub const TRACE_COLUMNS: [&str; 8] = ["k", "j", "U", "S", "A", "Delta", "rho", "residual"];
/// `instance` value of the summary row in the results file.
pub const SUMMARY_INSTANCE: &str = "geometric_mean";
/// Status recorded when a run could not be carried out at all.
pub const STATUS_ERROR: &str = "error";

/// How runs are scheduled. Results never depend on the choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Fan runs out over the global thread pool (falls back to sequential
    /// when built without the `parallel` feature).
    Parallel,
}

/// One (instance, algorithm) outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub instance: String,
    pub algorithm: Algorithm,
    pub outer_iters: usize,
    pub inner_iters: usize,
    pub residual: Option<f64>,
    pub objective: Option<f64>,
    /// A [`crate::outer::RunStatus`] string, or `error`.
    pub status: String,
    pub wall_time_ms: f64,
    /// Why the run failed, when `status == "error"`.
    pub error: Option<String>,
    pub record: Option<RunRecord>,
}

impl ResultRow {
    pub fn succeeded(&self) -> bool {
        self.record.as_ref().is_some_and(|r| r.status.is_success())
    }
}

/// Geometric means of the successful runs of one algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmSummary {
    pub algorithm: Algorithm,
    pub runs: usize,
    pub succeeded: usize,
    pub geomean_outer: Option<f64>,
    pub geomean_inner: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixReport {
    /// Sorted by (instance, algorithm id).
    pub rows: Vec<ResultRow>,
    pub summary: Vec<AlgorithmSummary>,
    /// Geometric means over every successful row.
    pub overall_outer: Option<f64>,
    pub overall_inner: Option<f64>,
}

impl MatrixReport {
    pub fn all_succeeded(&self) -> bool {
        self.rows.iter().all(ResultRow::succeeded)
    }
}

/// Build the scaled problem for an instance source.
pub fn materialize(spec: &InstanceSpec, seed: u64) -> Result<ProblemInstance> {
    let raw = match &spec.source {
        InstanceSource::Csv(prefix) => load_csv_instance(prefix)?,
        InstanceSource::Generator(g) => generate_instance(g, seed)?.raw,
    };
    ProblemInstance::from_raw(&raw)
}

/// Run every (instance, algorithm) pair. Failures become rows, never errors.
pub fn run_matrix(cfg: &BenchConfig, execution: Execution) -> Result<MatrixReport> {
    cfg.validate()?;
    let instances: Vec<(&InstanceSpec, std::result::Result<ProblemInstance, String>)> = cfg
        .instances
        .iter()
        .map(|spec| (spec, materialize(spec, cfg.seed).map_err(|e| e.to_string())))
        .collect();
    let jobs: Vec<(usize, Algorithm)> = (0..instances.len())
        .flat_map(|i| cfg.algorithms.iter().map(move |&a| (i, a)))
        .collect();

    let run_one = |&(i, alg): &(usize, Algorithm)| -> ResultRow {
        let (spec, inst) = &instances[i];
        let start = Instant::now();
        let outcome = inst
            .as_ref()
            .map_err(|e| e.clone())
            .and_then(|inst| cfg.resolve(spec.category, alg).and_then(|c| run(inst, &c)).map_err(|e| e.to_string()));
        let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
        match outcome {
            Ok(rec) => ResultRow {
                instance: spec.name.clone(),
                algorithm: alg,
                outer_iters: rec.outer_iterations,
                inner_iters: rec.inner_iterations_cumulative,
                residual: Some(rec.final_residual),
                objective: Some(rec.final_objective),
                status: rec.status.as_str().to_owned(),
                wall_time_ms,
                error: None,
                record: Some(rec),
            },
            Err(msg) => ResultRow {
                instance: spec.name.clone(),
                algorithm: alg,
                outer_iters: 0,
                inner_iters: 0,
                residual: None,
                objective: None,
                status: STATUS_ERROR.to_owned(),
                wall_time_ms,
                error: Some(msg),
                record: None,
            },
        }
    };

    let mut rows: Vec<ResultRow> = match execution {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            jobs.par_iter().map(run_one).collect()
        }
        _ => jobs.iter().map(run_one).collect(),
    };
    rows.sort_by(|a, b| (&a.instance, a.algorithm.id()).cmp(&(&b.instance, b.algorithm.id())));
    let (summary, overall_outer, overall_inner) = summarize(&rows, &cfg.algorithms);
    Ok(MatrixReport { rows, summary, overall_outer, overall_inner })
}

fn summarize(rows: &[ResultRow], algorithms: &[Algorithm]) -> (Vec<AlgorithmSummary>, Option<f64>, Option<f64>) {
    let geo = |rows: &[&ResultRow], f: fn(&ResultRow) -> usize| -> Option<f64> {
        let v: Vec<f64> = rows.iter().filter(|r| r.succeeded()).map(|r| f(r) as f64).collect();
        geometric_mean(&v).ok()
    };
    let mut algs = algorithms.to_vec();
    algs.sort_by_key(|a| a.id());
    let summary = algs
        .into_iter()
        .map(|alg| {
            let mine: Vec<&ResultRow> = rows.iter().filter(|r| r.algorithm == alg).collect();
            AlgorithmSummary {
                algorithm: alg,
                runs: mine.len(),
                succeeded: mine.iter().filter(|r| r.succeeded()).count(),
                geomean_outer: geo(&mine, |r| r.outer_iters),
                geomean_inner: geo(&mine, |r| r.inner_iters),
            }
        })
        .collect();
    let all: Vec<&ResultRow> = rows.iter().collect();
    (summary, geo(&all, |r| r.outer_iters), geo(&all, |r| r.inner_iters))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::Io { path: path.to_path_buf(), source: std::io::Error::other(e) }
}

fn create_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|e| csv_err(path, e))
}

/// Paths written by [`write_report`].
#[derive(Debug, Clone, PartialEq)]
pub struct ReportFiles {
    pub results: PathBuf,
    pub summary: PathBuf,
    pub traces: Vec<PathBuf>,
}

/// Write `results.csv`, `summary.csv` and, if requested, one trace file per
/// successful run under `traces/`.
pub fn write_report(report: &MatrixReport, dir: &Path, emit_traces: bool) -> Result<ReportFiles> {
    fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.to_path_buf(), source })?;
    let results = dir.join("results.csv");
    let mut w = create_writer(&results)?;
    let werr = |e| csv_err(&results, e);
    w.write_record(RESULT_COLUMNS).map_err(werr)?;
    for r in &report.rows {
        w.write_record([
            r.instance.clone(),
            r.algorithm.id().to_owned(),
            r.outer_iters.to_string(),
            r.inner_iters.to_string(),
            fmt_opt(r.residual),
            fmt_opt(r.objective),
            r.status.clone(),
            format!("{:.3}", r.wall_time_ms),
        ])
        .map_err(werr)?;
    }
    w.write_record([
        SUMMARY_INSTANCE.to_owned(),
        "all".to_owned(),
        fmt_opt(report.overall_outer),
        fmt_opt(report.overall_inner),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
    ])
    .map_err(werr)?;
    w.flush().map_err(|source| Error::Io { path: results.clone(), source })?;

    let summary = dir.join("summary.csv");
    let mut w = create_writer(&summary)?;
    let werr = |e| csv_err(&summary, e);
    w.write_record(["algorithm", "runs", "succeeded", "geomean_outer_iters", "geomean_inner_iters"]).map_err(werr)?;
    for s in &report.summary {
        w.write_record([
            s.algorithm.id().to_owned(),
            s.runs.to_string(),
            s.succeeded.to_string(),
            fmt_opt(s.geomean_outer),
            fmt_opt(s.geomean_inner),
        ])
        .map_err(werr)?;
    }
    w.flush().map_err(|source| Error::Io { path: summary.clone(), source })?;

    let mut traces = Vec::new();
    if emit_traces {
        let tdir = dir.join("traces");
        fs::create_dir_all(&tdir).map_err(|source| Error::Io { path: tdir.clone(), source })?;
        for r in &report.rows {
            if let Some(rec) = &r.record {
                let path = tdir.join(format!("{}__{}.csv", r.instance, r.algorithm.id()));
                write_trace(&path, rec)?;
                traces.push(path);
            }
        }
    }
    Ok(ReportFiles { results, summary, traces })
}

/// Per-outer-iteration trace of one run, written to a file.
pub fn write_trace(path: &Path, rec: &RunRecord) -> Result<()> {
    let file = fs::File::create(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    write_trace_to(file, rec).map_err(|e| csv_err(path, e))
}

/// Per-outer-iteration trace of one run, written to any sink.
pub fn write_trace_to<W: std::io::Write>(sink: W, rec: &RunRecord) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(TRACE_COLUMNS)?;
    for t in &rec.trace {
        w.write_record([
            t.k.to_string(),
            t.j.to_string(),
            t.residual_sq.to_string(),
            t.subgrad_sq.to_string(),
            fmt_opt(t.cross_term),
            fmt_opt(t.discriminant),
            t.rho.to_string(),
            t.residual.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
