//! End-to-end acceptance checks, one line per criterion.
//!
//! Runs as a plain binary so the PASS/FAIL lines are always shown; exits
//! nonzero if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::Rng;
use zovr_cli::commands::{compare, median_evals};
use zovr_cli::experiment::{resolve, run_all};
use zovr_cli::selector::SharedProblem;
use zovr_cli::settings::Settings;
use zovr_core::estimators::draw_pick;
use zovr_core::optimizers::{smooth_schedule, EpochSizing};
use zovr_core::oracles::{
    oracle_rng, run_lemma_suite, smoothed_gradient_mc, subset_mean_sq_bruteforce, subset_mean_sq_formula, ScalarStats,
    SuiteOptions,
};
use zovr_core::problems::{builtin, make_logistic, make_quadratic, make_universal_attack};
use zovr_core::rng::{stream_rng, Stream};
use zovr_core::{
    anchor_gradient, auto_config_nonsmooth, auto_config_smooth, run_rgf, run_rsg, run_szvr_g, run_szvr_g_minibatch,
    vr_estimate, Algorithm, BaselineConfig, BlackBoxProblem, DirectionSet, FnProblem, OptimizerConfig, QueryLedger,
    RunConfig, SampleBatch, Smoothness, StepSchedule, TheoryConstants,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Option<Duration>);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn random_point(rng: &mut impl Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn a1() -> Outcome {
    let q = make_quadratic(10, None).map_err(err)?;
    let mut rng = oracle_rng(101);
    let mut worst = 0.0f64;
    for p in 0..5u64 {
        let x = random_point(&mut rng, 10);
        let est = smoothed_gradient_mc(&q, &x, 0.01, 1_000_000, 1000 + p).map_err(err)?;
        for ((m, s), v) in est.mean.iter().zip(&est.stderr).zip(&x) {
            worst = worst.max((m - v).abs() / s);
        }
    }
    check(worst <= 4.0, format!("max deviation {worst:.2} stderr over 5 points"))
}

fn a2() -> Outcome {
    let mut rng = oracle_rng(202);
    let mut worst = 0.0f64;
    let mut cases = 0;
    for n in 2..=8usize {
        for b in 1..=n {
            for _ in 0..20 {
                let d = rng.random_range(1..=4);
                let mut v: Vec<Vec<f64>> = (0..n).map(|_| random_point(&mut rng, d)).collect();
                for l in 0..d {
                    let mean = v.iter().map(|r| r[l]).sum::<f64>() / n as f64;
                    v.iter_mut().for_each(|r| r[l] -= mean);
                }
                let brute = subset_mean_sq_bruteforce(&v, b).map_err(err)?;
                worst = worst.max((brute - subset_mean_sq_formula(&v, b)).abs());
                cases += 1;
            }
        }
    }
    check(
        worst <= 1e-12,
        format!("{cases} families, max |brute - formula| = {worst:.1e}"),
    )
}

fn a3() -> Outcome {
    let rows = run_lemma_suite(&SuiteOptions::default()).map_err(err)?;
    let failed: Vec<String> = rows.iter().filter(|r| !r.passed).map(|r| r.to_string()).collect();
    check(
        failed.is_empty(),
        format!("{} checks, {} failed {}", rows.len(), failed.len(), failed.join("; ")),
    )
}

fn a4() -> Outcome {
    let d = 10;
    let mu = 0.01;
    let draws = 10_000u64;
    let q = make_quadratic(d, None).map_err(err)?;
    let mut rng = oracle_rng(404);
    let anchor = random_point(&mut rng, d);

    // At the anchor every pick reproduces the anchor estimate exactly.
    let set = DirectionSet::new(9, 16, d).map_err(err)?;
    let cache = anchor_gradient(&q, &anchor, &set, &SampleBatch::full(1), mu, &mut QueryLedger::new()).map_err(err)?;
    let mut sampler = stream_rng(4, Stream::Sampler);
    let mut at_anchor = ScalarStats::default();
    for _ in 0..draws {
        let (i, j) = draw_pick(&mut sampler, 1, 16);
        let v = vr_estimate(&q, &anchor, &cache, j, i, &mut QueryLedger::new()).map_err(err)?;
        at_anchor.push(v.iter().zip(cache.gradient()).map(|(a, b)| (a - b).powi(2)).sum());
    }
    if at_anchor.mean() != 0.0 {
        return Err(format!("variance at the anchor is {:e}", at_anchor.mean()));
    }

    // At distance 0.5, with a fresh direction set per draw.
    let mut offset = random_point(&mut rng, d);
    let norm = offset.iter().map(|v| v * v).sum::<f64>().sqrt();
    offset.iter_mut().for_each(|v| *v *= 0.5 / norm);
    let x: Vec<f64> = anchor.iter().zip(&offset).map(|(a, o)| a + o).collect();
    let mut diffs = Vec::with_capacity(draws as usize);
    for k in 0..draws {
        let set = DirectionSet::new(10_000 + k, 1, d).map_err(err)?;
        let cache =
            anchor_gradient(&q, &anchor, &set, &SampleBatch::full(1), mu, &mut QueryLedger::new()).map_err(err)?;
        let v = vr_estimate(&q, &x, &cache, 0, 0, &mut QueryLedger::new()).map_err(err)?;
        diffs.push(v.iter().zip(cache.gradient()).map(|(a, b)| a - b).collect::<Vec<f64>>());
    }
    let mut mean = vec![0.0; d];
    for c in &diffs {
        mean.iter_mut().zip(c).for_each(|(m, v)| *m += v / draws as f64);
    }
    let mut spread = ScalarStats::default();
    for c in &diffs {
        spread.push(c.iter().zip(&mean).map(|(a, b)| (a - b).powi(2)).sum());
    }
    let est = spread.estimate();
    let df = d as f64;
    let bound = 1.5 * mu * mu * (df + 6.0).powi(3) + 3.0 * (df + 4.0) * 0.25;
    check(
        est.mean > 0.0 && est.mean <= bound + 3.0 * est.stderr,
        format!(
            "0 at anchor; {:.4} ± {:.4} at 0.5 (bound {bound:.4})",
            est.mean, est.stderr
        ),
    )
}

fn a5() -> Outcome {
    let quad = |n: usize| {
        FnProblem::new(3, n, Smoothness::C11 { l1: 1.0 }, |x, i| {
            0.5 * x.iter().map(|v| (v - i as f64).powi(2)).sum::<f64>()
        })
    };
    let p4 = quad(4).map_err(err)?;
    let mut ledger = QueryLedger::new();
    run_szvr_g(&p4, &OptimizerConfig::manual(0.05, 0.01, 5, 2, 3, 4), &mut ledger).map_err(err)?;
    let szvr = ledger.optimizer_evals();

    let p1 = quad(1).map_err(err)?;
    let t = 37;
    let bc = BaselineConfig::new(StepSchedule::Constant(0.01), 0.01, t);
    let mut ledger = QueryLedger::new();
    run_rgf(&p1, &bc, &mut ledger).map_err(err)?;
    let rgf = ledger.optimizer_evals();
    let mut ledger = QueryLedger::new();
    run_rsg(&p4, &bc, &mut ledger).map_err(err)?;
    let rsg = ledger.optimizer_evals();
    check(
        szvr == 52 && rgf == 2 * t as u64 && rsg == 2 * t as u64,
        format!("szvr-g {szvr} (52), rgf {rgf} ({}), rsg {rsg} ({})", 2 * t, 2 * t),
    )
}

const THRESHOLD: f64 = 1e-3;
const BUDGET: u64 = 500_000;

fn logistic_settings(algos: &str) -> Settings {
    let mut s = Settings::default();
    for (k, v) in [
        ("problem", "logistic".to_string()),
        ("algos", algos.to_string()),
        ("auto-eps", THRESHOLD.sqrt().to_string()),
        ("preset", "benchmark".to_string()),
        ("budget", BUDGET.to_string()),
        ("seeds", "1..5".to_string()),
        ("threshold", THRESHOLD.to_string()),
        ("resolution", (BUDGET / 500).to_string()),
    ] {
        s.set(k, Some(v));
    }
    s
}

fn show(m: Option<f64>) -> String {
    m.map_or(">budget".into(), |v| format!("{v}"))
}

fn a6() -> Outcome {
    let rows = compare(&logistic_settings("szvr-g,rsg,rgf")).map_err(err)?;
    let med = |a: Algorithm| {
        let evals: Vec<Option<u64>> = rows
            .iter()
            .filter(|r| r.algo == a)
            .map(|r| r.evals_to_threshold)
            .collect();
        median_evals(&evals)
    };
    let (s, rsg, rgf) = (med(Algorithm::SzvrG), med(Algorithm::Rsg), med(Algorithm::Rgf));
    let le = |a: Option<f64>, b: Option<f64>| match (a, b) {
        (Some(a), Some(b)) => a <= b,
        (Some(_), None) => true,
        (None, _) => false,
    };
    check(
        le(s, rsg) && le(s, rgf),
        format!("median evals: szvr-g {}, rsg {}, rgf {}", show(s), show(rsg), show(rgf)),
    )
}

fn a7() -> Outcome {
    let p = make_logistic(builtin::digits()).map_err(err)?;
    let c = TheoryConstants::benchmark_preset();
    let eps = THRESHOLD.sqrt();
    let total =
        |b0| auto_config_smooth(&p, eps, b0, &c, 1, EpochSizing::InitialValue).map(|cfg| cfg.total_iterations());
    let (t1, t4) = (total(1).map_err(err)?, total(4).map_err(err)?);

    let problem: SharedProblem = Arc::new(p);
    let settings = logistic_settings("");
    let iterations_to_threshold = |algo: Algorithm, b0: usize| -> Result<Vec<Option<u64>>, String> {
        let mut s = settings.clone();
        s.set("b0", Some(b0.to_string()));
        let configs = (1..=5u64)
            .map(|seed| resolve(&s, algo, problem.as_ref(), seed))
            .collect::<Result<Vec<RunConfig>, _>>()
            .map_err(err)?;
        run_all(&problem, &configs, 0)
            .into_iter()
            .map(|r| {
                r.map(|t| t.first_below(THRESHOLD).map(|rec| rec.iterations))
                    .map_err(err)
            })
            .collect()
    };
    let i1 = median_evals(&iterations_to_threshold(Algorithm::SzvrG, 1)?);
    let i4 = median_evals(&iterations_to_threshold(Algorithm::SzvrGMb, 4)?);
    let fewer = match (i4, i1) {
        (Some(a), Some(b)) => a <= b,
        (Some(_), None) => true,
        (None, _) => false,
    };
    check(
        t4 < t1 && fewer,
        format!(
            "T: b0=4 {t4} vs b0=1 {t1}; median inner iterations: b0=4 {} vs b0=1 {}",
            show(i4),
            show(i1)
        ),
    )
}

fn zovr(dir: &Path, threads: &str, out: &str) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_zovr"))
        .current_dir(dir)
        .env("ZOVR_THREADS", threads)
        .args([
            "run",
            "--problem",
            "logistic",
            "--algo",
            "szvr-g",
            "--auto-eps",
            "0.1",
            "--seeds",
            "1..4",
            "--budget",
            "30000",
            "--stride",
            "7",
            "--out",
            out,
        ])
        .status()
        .map_err(err)?;
    if status.success() {
        Ok(())
    } else {
        Err(format!("zovr exited with {status}"))
    }
}

fn a8() -> Outcome {
    let dir = tempfile::tempdir().map_err(err)?;
    zovr(dir.path(), "0", "a.csv")?;
    zovr(dir.path(), "0", "b.csv")?;
    zovr(dir.path(), "4", "c.csv")?;
    let read = |name: &str| std::fs::read(dir.path().join(name)).map_err(err);
    let mut files = 0;
    for suffix in [".csv", ".seed1.csv", ".seed2.csv", ".seed3.csv", ".seed4.csv"] {
        let a = read(&format!("a{suffix}"))?;
        if a != read(&format!("b{suffix}"))? || a != read(&format!("c{suffix}"))? {
            return Err(format!("`{suffix}` outputs differ"));
        }
        files += 1;
    }
    let seeds_differ = read("a.seed1.csv")? != read("a.seed2.csv")?;
    check(
        seeds_differ,
        format!("{files} files identical across repeats and ZOVR_THREADS 0/4"),
    )
}

fn a9() -> Outcome {
    let p = make_universal_attack(builtin::attack_model(), builtin::attack_images(), 1.0, 0.0).map_err(err)?;
    if p.dim() != 27 || p.model().num_classes() != 3 {
        return Err(format!("unexpected attack shape d={}", p.dim()));
    }
    let budget = 100_000;
    let mut start = 0.0;
    let mut finals = Vec::new();
    for seed in 1..=5u64 {
        let cfg = auto_config_nonsmooth(
            &p,
            0.3,
            1,
            &TheoryConstants::default(),
            seed,
            EpochSizing::Budget(budget),
        )
        .map_err(err)?
        .with_stride(500);
        let mut ledger = QueryLedger::new();
        let trace = run_szvr_g_minibatch(&p, &cfg, &mut ledger).map_err(err)?;
        if ledger.optimizer_evals() > budget {
            return Err(format!("seed {seed} spent {} evaluations", ledger.optimizer_evals()));
        }
        start = trace.records[0].f_value;
        finals.push(trace.last().map_or(f64::NAN, |r| r.f_value));
    }
    finals.sort_by(f64::total_cmp);
    let drop = 1.0 - finals[2] / start;
    check(
        drop >= 0.2,
        format!(
            "median objective {:.4} from {start:.4} ({:.1}% decrease)",
            finals[2],
            100.0 * drop
        ),
    )
}

fn a10() -> Outcome {
    let (d, n, eps) = (100usize, 1_000_000usize, 0.1);
    let p = FnProblem::new(d, n, Smoothness::C11 { l1: 1.0 }, |x, _| x[0]).map_err(err)?;
    let c = TheoryConstants::default();
    let cfg = auto_config_smooth(&p, eps, 1, &c, 1, EpochSizing::GapEstimate(1.0)).map_err(err)?;
    let s = smooth_schedule(d, n, 1.0, eps, 1, &c).map_err(err)?;
    let q = 6.0 * (104.0 * cfg.step_size).sqrt();
    let coupling = cfg.coupling.unwrap_or(f64::NAN);
    let ok = cfg.batch_size == 100
        && (s.step_unclamped - 1e-2).abs() <= 1e-12
        && cfg.directions == 1
        && (coupling - q).abs() <= 1e-12;
    check(
        ok,
        format!(
            "B={} eta_pre={:e} D={} q={coupling:.12} (expected {q:.12})",
            cfg.batch_size, s.step_unclamped, cfg.directions
        ),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("A1", a1, Some(Duration::from_secs(10))),
        ("A2", a2, Some(Duration::from_secs(1))),
        ("A3", a3, Some(Duration::from_secs(60))),
        ("A4", a4, None),
        ("A5", a5, None),
        ("A6", a6, Some(Duration::from_secs(120))),
        ("A7", a7, None),
        ("A8", a8, None),
        ("A9", a9, None),
        ("A10", a10, None),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failures = 0;
    for (name, run, limit) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| f == name) {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let outcome = match (outcome, limit) {
            (Ok(msg), Some(l)) if took > l => Err(format!("{msg}; took {took:.1?}, limit {l:?}")),
            (o, _) => o,
        };
        match outcome {
            Ok(msg) => println!("{name:<4} PASS  {msg} [{took:.1?}]"),
            Err(msg) => {
                failures += 1;
                println!("{name:<4} FAIL  {msg} [{took:.1?}]");
            }
        }
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
