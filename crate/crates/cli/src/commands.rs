use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use zovr_core::oracles::{run_lemma_suite, SuiteOptions};
use zovr_core::{Algorithm, Error, Trace, TRACE_HEADER};

use crate::error::{CliError, CliResult};
use crate::experiment::{resolve, run_all, thread_count};
use crate::selector::{ProblemSpec, SharedProblem};
use crate::settings::{parse_seeds, Settings};

pub const SUMMARY_HEADER: &str = "algo,seed,evals_to_threshold,final_f,final_grad_sq";

fn problem(settings: &Settings) -> CliResult<SharedProblem> {
    settings.require::<ProblemSpec>("problem")?.build()
}

fn seeds(settings: &Settings) -> CliResult<Vec<u64>> {
    parse_seeds(settings.get("seeds").unwrap_or("1"))
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn emit(out: Option<&Path>, contents: &str) -> CliResult<()> {
    match out {
        Some(path) => write_file(path, contents),
        None => std::io::stdout()
            .write_all(contents.as_bytes())
            .map_err(|e| CliError::io("<stdout>", e)),
    }
}

/// `dir/stem.seed<k>.ext` next to the merged output `path`.
pub fn seed_path(path: &Path, seed: u64) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}.seed{seed}.{}", ext.to_string_lossy()),
        None => format!("{stem}.seed{seed}"),
    };
    path.with_file_name(name)
}

/// Per-seed traces concatenated in seed order with a leading `seed` column.
pub fn merge_traces(traces: &[(u64, String)]) -> String {
    let mut merged = format!("seed,{TRACE_HEADER}\n");
    for (seed, csv) in traces {
        for line in csv.lines().skip(1) {
            let _ = writeln!(merged, "{seed},{line}");
        }
    }
    merged
}

/// Split run results into traces, keeping the partial trace of an aborted run.
fn unpack(result: zovr_core::Result<Trace>) -> (Option<Trace>, Option<Error>) {
    match result {
        Ok(t) => (Some(t), None),
        Err(Error::Aborted { source, trace }) => {
            let partial = (*trace).clone();
            (Some(partial), Some(Error::Aborted { source, trace }))
        }
        Err(e) => (None, Some(e)),
    }
}

pub fn cmd_run(settings: &Settings) -> CliResult<()> {
    let algo = settings.require::<Algorithm>("algo")?;
    let problem = problem(settings)?;
    let seeds = seeds(settings)?;
    let configs = seeds
        .iter()
        .map(|&s| resolve(settings, algo, problem.as_ref(), s))
        .collect::<CliResult<Vec<_>>>()?;
    let results = run_all(&problem, &configs, thread_count()?);

    let out = settings.get("out").map(PathBuf::from);
    let mut first_error = None;
    let mut csvs = Vec::with_capacity(seeds.len());
    for (&seed, result) in seeds.iter().zip(results) {
        let (trace, err) = unpack(result);
        if let Some(e) = err {
            log::error!("seed {seed}: {e}");
            first_error.get_or_insert(e);
        }
        if let Some(t) = trace {
            if t.truncated {
                log::info!("seed {seed}: stopped at the evaluation budget");
            }
            csvs.push((seed, t.to_csv_string()));
        }
    }
    match (&out, seeds.len()) {
        (_, 1) => {
            if let Some((_, csv)) = csvs.first() {
                emit(out.as_deref(), csv)?;
            }
        }
        (Some(path), _) => {
            for (seed, csv) in &csvs {
                write_file(&seed_path(path, *seed), csv)?;
            }
            write_file(path, &merge_traces(&csvs))?;
        }
        (None, _) => emit(None, &merge_traces(&csvs))?,
    }
    match first_error {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

/// One `(algo, seed)` row of a comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub algo: Algorithm,
    pub seed: u64,
    /// `None` when the threshold was never reached within the budget.
    pub evals_to_threshold: Option<u64>,
    pub final_f: f64,
    pub final_grad_sq: Option<f64>,
}

impl SummaryRow {
    pub fn from_trace(algo: Algorithm, seed: u64, trace: &Trace, threshold: f64) -> Self {
        let last = trace.last();
        SummaryRow {
            algo,
            seed,
            evals_to_threshold: trace.first_below(threshold).map(|r| r.szo_count),
            final_f: last.map_or(f64::NAN, |r| r.f_value),
            final_grad_sq: last.and_then(|r| r.grad_norm_sq),
        }
    }
}

/// Median with unreached entries ordered last; `None` if the median itself is unreached.
pub fn median_evals(values: &[Option<u64>]) -> Option<f64> {
    let mut v: Vec<u64> = values.iter().map(|x| x.unwrap_or(u64::MAX)).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_unstable();
    let m = v.len() / 2;
    let (lo, hi) = if v.len() % 2 == 1 {
        (v[m], v[m])
    } else {
        (v[m - 1], v[m])
    };
    if hi == u64::MAX {
        None
    } else {
        Some((lo as f64 + hi as f64) / 2.0)
    }
}

fn median_f64(values: impl Iterator<Item = f64>) -> Option<f64> {
    let mut v: Vec<f64> = values.collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    })
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}

/// Summary CSV: per-seed rows, then one `median` row per algorithm in first-seen order.
pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = format!("{SUMMARY_HEADER}\n");
    for r in rows {
        let evals = r.evals_to_threshold.map_or(">budget".to_string(), |e| e.to_string());
        let _ = writeln!(
            out,
            "{},{},{evals},{:?},{}",
            r.algo,
            r.seed,
            r.final_f,
            cell(r.final_grad_sq)
        );
    }
    let mut algos: Vec<Algorithm> = Vec::new();
    for r in rows {
        if !algos.contains(&r.algo) {
            algos.push(r.algo);
        }
    }
    for algo in algos {
        let mine: Vec<&SummaryRow> = rows.iter().filter(|r| r.algo == algo).collect();
        let evals: Vec<Option<u64>> = mine.iter().map(|r| r.evals_to_threshold).collect();
        let med = median_evals(&evals).map_or(">budget".to_string(), |m| format!("{m:?}"));
        let f = median_f64(mine.iter().map(|r| r.final_f));
        let g = median_f64(mine.iter().filter_map(|r| r.final_grad_sq));
        let _ = writeln!(out, "{algo},median,{med},{},{}", cell(f), cell(g));
    }
    out
}

pub fn compare(settings: &Settings) -> CliResult<Vec<SummaryRow>> {
    let algos = settings
        .require::<String>("algos")?
        .split(',')
        .map(|a| a.trim().parse::<Algorithm>())
        .collect::<zovr_core::Result<Vec<_>>>()
        .map_err(|e| CliError::usage(e.to_string()))?;
    if algos.len() < 2 {
        return Err(CliError::usage("compare needs at least two algorithms"));
    }
    let budget: u64 = settings.require("budget")?;
    let threshold = settings.parse::<f64>("threshold")?.unwrap_or(1e-3);
    let problem = problem(settings)?;
    let seeds = seeds(settings)?;

    let mut resolved = settings.clone();
    if settings.get("stride").is_none() && settings.get("resolution").is_none() {
        resolved.set("resolution", Some((budget / 500).max(1).to_string()));
    }
    let mut jobs = Vec::new();
    let mut configs = Vec::new();
    for &algo in &algos {
        for &seed in &seeds {
            configs.push(resolve(&resolved, algo, problem.as_ref(), seed)?);
            jobs.push((algo, seed));
        }
    }
    let results = run_all(&problem, &configs, thread_count()?);
    let trace_dir = settings.get("trace-dir").map(PathBuf::from);
    let mut rows = Vec::with_capacity(jobs.len());
    for ((algo, seed), result) in jobs.into_iter().zip(results) {
        let (trace, err) = unpack(result);
        if let (Some(dir), Some(t)) = (&trace_dir, &trace) {
            write_file(&dir.join(format!("{algo}.seed{seed}.csv")), &t.to_csv_string())?;
        }
        if let Some(e) = err {
            return Err(e.into());
        }
        let trace = trace.expect("successful runs carry a trace");
        rows.push(SummaryRow::from_trace(algo, seed, &trace, threshold));
    }
    Ok(rows)
}

pub fn cmd_compare(settings: &Settings) -> CliResult<()> {
    let rows = compare(settings)?;
    let csv = summary_csv(&rows);
    match settings.get("out") {
        Some(path) => {
            write_file(Path::new(path), &csv)?;
            for line in csv.lines().filter(|l| l.contains(",median,")) {
                println!("{line}");
            }
            Ok(())
        }
        None => emit(None, &csv),
    }
}

pub fn cmd_verify(seed: u64, sample_scale: f64) -> CliResult<()> {
    if !(sample_scale > 0.0 && sample_scale.is_finite()) {
        return Err(CliError::usage("sample scale must be positive"));
    }
    let rows = run_lemma_suite(&SuiteOptions { seed, sample_scale })?;
    let mut out = String::new();
    for r in &rows {
        let _ = writeln!(out, "{r}");
    }
    let failed = rows.iter().filter(|r| !r.passed).count();
    let _ = writeln!(out, "{} checks, {failed} failed", rows.len());
    emit(None, &out)?;
    if failed > 0 {
        return Err(CliError::Verification {
            failed,
            total: rows.len(),
        });
    }
    Ok(())
}
