//! The `simulate`, `sweep` and `bench` subcommands.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use pedflow_core::{
    aggregate, run_with, Engine, ExecutorKind, Model, RunReport, ScenarioConfig, SweepReport,
};
use serde::Serialize;

pub const STEPS_CSV: &str = "steps.csv";
pub const SUMMARY_CSV: &str = "summary.csv";
pub const SWEEP_CSV: &str = "sweep.csv";
pub const BENCH_CSV: &str = "bench.csv";

#[derive(Debug, Serialize)]
struct StepRow {
    run_id: usize,
    seed: u64,
    model: Model,
    executor: ExecutorKind,
    step: u64,
    crossed_top: usize,
    crossed_bottom: usize,
    crossed_total: usize,
    moved: usize,
}

#[derive(Debug, Serialize)]
struct SummaryRow {
    run_id: usize,
    seed: u64,
    model: Model,
    executor: ExecutorKind,
    agents_total: usize,
    steps: u64,
    throughput: usize,
    runtime_seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub agents_total: usize,
    pub model: Model,
    pub executor: ExecutorKind,
    pub threads: usize,
    pub steps: u64,
    pub seconds: f64,
    pub speedup_vs_seq: f64,
}

/// Paths written by a command.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CsvArtifacts {
    pub steps: Option<PathBuf>,
    pub summary: Option<PathBuf>,
    pub sweep: Option<PathBuf>,
    pub bench: Option<PathBuf>,
}

fn prepare_out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))
}

pub const STEPS_HEADER: [&str; 9] = [
    "run_id",
    "seed",
    "model",
    "executor",
    "step",
    "crossed_top",
    "crossed_bottom",
    "crossed_total",
    "moved",
];
pub const SUMMARY_HEADER: [&str; 8] = [
    "run_id",
    "seed",
    "model",
    "executor",
    "agents_total",
    "steps",
    "throughput",
    "runtime_seconds",
];
pub const SWEEP_HEADER: [&str; 6] = [
    "agents_total",
    "model",
    "repeats",
    "throughput_mean",
    "throughput_sd",
    "runtime_mean_seconds",
];
pub const BENCH_HEADER: [&str; 7] = [
    "agents_total",
    "model",
    "executor",
    "threads",
    "steps",
    "seconds",
    "speedup_vs_seq",
];

/// Opens `path` and writes `header`, so files without rows still carry it.
fn csv_writer(path: &Path, header: &[&str]) -> Result<csv::Writer<fs::File>> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    w.write_record(header)?;
    Ok(w)
}

fn engine_for(config: &ScenarioConfig, kind: ExecutorKind) -> Result<Engine> {
    Ok(Engine::new(kind, config.threads)?.with_checks(false))
}

fn summary_row(run_id: usize, r: &RunReport) -> SummaryRow {
    SummaryRow {
        run_id,
        seed: r.seed,
        model: r.model,
        executor: r.executor,
        agents_total: r.agents_total,
        steps: r.config.steps,
        throughput: r.throughput,
        runtime_seconds: r.runtime_seconds,
    }
}

/// Runs `config.repeats` seeds starting at `config.seed`, one after another.
pub fn run_repeats(config: &ScenarioConfig, engine: &Engine) -> Result<Vec<RunReport>> {
    (0..config.repeats)
        .map(|i| {
            let cfg = ScenarioConfig {
                seed: config.seed.wrapping_add(i as u64),
                ..config.clone()
            };
            let mut report = run_with(&cfg, engine)?;
            if !config.timing {
                report.runtime_seconds = 0.0;
            }
            Ok(report)
        })
        .collect()
}

/// Writes `steps.csv`, `summary.csv` and a one-row `sweep.csv` aggregate.
pub fn cmd_simulate(config: &ScenarioConfig) -> Result<CsvArtifacts> {
    prepare_out_dir(&config.out_dir)?;
    let engine = engine_for(config, config.executor)?;
    let reports = run_repeats(config, &engine)?;

    let steps_path = config.out_dir.join(STEPS_CSV);
    let mut steps = csv_writer(&steps_path, &STEPS_HEADER)?;
    let summary_path = config.out_dir.join(SUMMARY_CSV);
    let mut summary = csv_writer(&summary_path, &SUMMARY_HEADER)?;
    for (run_id, r) in reports.iter().enumerate() {
        for s in &r.series {
            steps.serialize(StepRow {
                run_id,
                seed: r.seed,
                model: r.model,
                executor: r.executor,
                step: s.step,
                crossed_top: s.crossed_top,
                crossed_bottom: s.crossed_bottom,
                crossed_total: s.crossed_total,
                moved: s.moved,
            })?;
        }
        summary.serialize(summary_row(run_id, r))?;
    }
    steps.flush()?;
    summary.flush()?;

    let sweep_path = config.out_dir.join(SWEEP_CSV);
    let mut sweep = csv_writer(&sweep_path, &SWEEP_HEADER)?;
    sweep.serialize(aggregate(&reports)?)?;
    sweep.flush()?;

    Ok(CsvArtifacts {
        steps: Some(steps_path),
        summary: Some(summary_path),
        sweep: Some(sweep_path),
        bench: None,
    })
}

/// Default sweep densities (agents per side): 1280 to 51 200 in steps of 1280.
pub fn default_densities() -> Vec<usize> {
    (1..=40).map(|i| i * 1280).collect()
}

fn check_densities(config: &ScenarioConfig, densities: &[usize]) -> Result<()> {
    if densities.is_empty() {
        bail!("no densities given");
    }
    for &n in densities {
        let cfg = ScenarioConfig {
            agents_per_side: n,
            ..config.clone()
        };
        cfg.validate().with_context(|| {
            format!("density of {n} agents per side is not valid for this grid")
        })?;
    }
    Ok(())
}

/// Runs `models` across `densities` x `repeats` and writes `summary.csv` and
/// `sweep.csv` (one row per density and model).
pub fn cmd_sweep(
    config: &ScenarioConfig,
    densities: &[usize],
    models: &[Model],
) -> Result<CsvArtifacts> {
    check_densities(config, densities)?;
    prepare_out_dir(&config.out_dir)?;
    let engine = engine_for(config, config.executor)?;

    let summary_path = config.out_dir.join(SUMMARY_CSV);
    let mut summary = csv_writer(&summary_path, &SUMMARY_HEADER)?;
    let sweep_path = config.out_dir.join(SWEEP_CSV);
    let mut sweep = csv_writer(&sweep_path, &SWEEP_HEADER)?;
    let mut run_id = 0;
    for &model in models {
        for &n in densities {
            let cfg = ScenarioConfig {
                agents_per_side: n,
                model,
                ..config.clone()
            };
            let reports = run_repeats(&cfg, &engine)?;
            for r in &reports {
                summary.serialize(summary_row(run_id, r))?;
                run_id += 1;
            }
            let row: SweepReport = aggregate(&reports)?;
            sweep.serialize(row)?;
        }
    }
    summary.flush()?;
    sweep.flush()?;
    Ok(CsvArtifacts {
        summary: Some(summary_path),
        sweep: Some(sweep_path),
        ..Default::default()
    })
}

fn time_run(config: &ScenarioConfig, engine: &Engine) -> Result<f64> {
    let report = run_with(config, engine)?;
    Ok(report.runtime_seconds)
}

/// Times the sequential and parallel executors for every model and density.
pub fn bench_rows(
    config: &ScenarioConfig,
    densities: &[usize],
    models: &[Model],
) -> Result<Vec<BenchRow>> {
    check_densities(config, densities)?;
    let seq = engine_for(config, ExecutorKind::Sequential)?;
    let par = engine_for(config, ExecutorKind::Parallel)?;
    let mut rows = Vec::new();
    for &n in densities {
        for &model in models {
            let cfg = ScenarioConfig {
                agents_per_side: n,
                model,
                ..config.clone()
            };
            let seq_seconds = time_run(&cfg, &seq)?;
            let par_seconds = time_run(&cfg, &par)?;
            for (engine, seconds) in [(&seq, seq_seconds), (&par, par_seconds)] {
                rows.push(BenchRow {
                    agents_total: cfg.agents_total(),
                    model,
                    executor: engine.kind(),
                    threads: engine.threads(),
                    steps: cfg.steps,
                    seconds,
                    speedup_vs_seq: if seconds > 0.0 {
                        seq_seconds / seconds
                    } else {
                        1.0
                    },
                });
            }
        }
    }
    Ok(rows)
}

/// Writes `bench.csv`.
pub fn cmd_bench(
    config: &ScenarioConfig,
    densities: &[usize],
    models: &[Model],
) -> Result<(CsvArtifacts, Vec<BenchRow>)> {
    prepare_out_dir(&config.out_dir)?;
    let rows = bench_rows(config, densities, models)?;
    let path = config.out_dir.join(BENCH_CSV);
    let mut w = csv_writer(&path, &BENCH_HEADER)?;
    for row in &rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok((
        CsvArtifacts {
            bench: Some(path),
            ..Default::default()
        },
        rows,
    ))
}
