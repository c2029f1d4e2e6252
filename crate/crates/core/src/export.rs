//! Plot-ready output files: per-run CSV, per-cell JSON summary, and a manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::emotion::HeuristicKind;
use crate::error::{Error, Result};
use crate::harness::{ExperimentResult, ExperimentPlan};
use crate::metrics::{AggregateStats, Efficiency};
use crate::model::{SimConfig, SpawnCase};

pub const RUNS_FILE: &str = "runs.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const TRACE_FILE: &str = "trace.jsonl";

/// One row of the runs file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRow {
    pub heuristic: &'static str,
    pub case: &'static str,
    pub run_index: u32,
    pub seed: u64,
    pub content_removed: u64,
    pub percent_removed: f64,
    pub invite_ticks: u64,
    pub cost: f64,
    pub nu: Efficiency,
    pub final_tick: u32,
}

/// Rows in (heuristic, case, run index) order.
pub fn run_rows(result: &ExperimentResult) -> Vec<RunRow> {
    let mut rows: Vec<(u64, u64, RunRow)> = result
        .cells
        .iter()
        .flat_map(|cell| {
            cell.runs.iter().map(move |run| {
                let r = &run.record;
                (
                    cell.heuristic.index(),
                    cell.spawn_case.index(),
                    RunRow {
                        heuristic: cell.heuristic.label(),
                        case: cell.spawn_case.label(),
                        run_index: run.run_index,
                        seed: r.seed,
                        content_removed: r.content_removed,
                        percent_removed: r.percent_removed,
                        invite_ticks: r.invite_ticks,
                        cost: r.invite_cost,
                        nu: r.nu,
                        final_tick: r.final_tick,
                    },
                )
            })
        })
        .collect();
    rows.sort_by_key(|(h, c, row)| (*h, *c, row.run_index));
    rows.into_iter().map(|(_, _, row)| row).collect()
}

pub fn write_runs_csv<W: Write>(out: W, result: &ExperimentResult) -> Result<()> {
    let rows = run_rows(result);
    if rows.is_empty() {
        return Err(Error::Contract("no runs to export".into()));
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    for row in &rows {
        w.serialize(row).map_err(|e| Error::Io(format!("writing runs file: {e}")))?;
    }
    w.flush().map_err(|e| Error::Io(format!("writing runs file: {e}")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub heuristic: HeuristicKind,
    pub case: SpawnCase,
    pub config_digest: String,
    pub stats: AggregateStats,
}

pub fn summary(result: &ExperimentResult) -> Vec<CellSummary> {
    result
        .cells
        .iter()
        .map(|c| CellSummary {
            heuristic: c.heuristic,
            case: c.spawn_case,
            config_digest: c.runs.first().map(|r| r.record.config_digest.clone()).unwrap_or_default(),
            stats: c.stats.clone(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestCell {
    pub heuristic: HeuristicKind,
    pub case: SpawnCase,
    pub seeds: Vec<u64>,
    pub layout_seeds: Vec<u64>,
}

/// Everything needed to regenerate the runs file on the same build.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub base_seed: u64,
    pub runs_per_cell: u32,
    pub heuristics: Vec<HeuristicKind>,
    pub cases: Vec<SpawnCase>,
    pub config: SimConfig,
    pub cells: Vec<ManifestCell>,
}

impl Manifest {
    pub fn for_experiment(plan: &ExperimentPlan) -> Self {
        let cells = plan
            .cells()
            .into_iter()
            .map(|(h, c)| {
                let seeds: Vec<_> = (0..plan.runs_per_cell).map(|r| plan.seeds_for(h, c, r)).collect();
                ManifestCell {
                    heuristic: h,
                    case: c,
                    seeds: seeds.iter().map(|s| s.behavior).collect(),
                    layout_seeds: seeds.iter().map(|s| s.layout).collect(),
                }
            })
            .collect::<Vec<_>>();
        Manifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: "experiment".into(),
            base_seed: plan.base_seed,
            runs_per_cell: plan.runs_per_cell,
            heuristics: cells.iter().map(|c| c.heuristic).fold(Vec::new(), push_unique),
            cases: cells.iter().map(|c| c.case).fold(Vec::new(), push_unique),
            config: plan.base_config.clone(),
            cells,
        }
    }

    /// Manifest for a single stand-alone run.
    pub fn for_simulation(cfg: &SimConfig, seed: u64) -> Self {
        let seeds = crate::seed::RunSeeds::from_seed(seed, cfg.heuristic);
        Manifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: "simulate".into(),
            base_seed: seed,
            runs_per_cell: 1,
            heuristics: vec![cfg.heuristic],
            cases: vec![cfg.spawn_case],
            config: cfg.clone(),
            cells: vec![ManifestCell {
                heuristic: cfg.heuristic,
                case: cfg.spawn_case,
                seeds: vec![seed],
                layout_seeds: vec![seeds.layout],
            }],
        }
    }
}

fn push_unique<T: PartialEq>(mut v: Vec<T>, x: T) -> Vec<T> {
    if !v.contains(&x) {
        v.push(x);
    }
    v
}

/// Paths of the files written by [`write_bundle`].
#[derive(Debug, Clone, PartialEq)]
pub struct OutputBundle {
    pub runs: PathBuf,
    pub summary: PathBuf,
    pub manifest: PathBuf,
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |e| Error::Io(format!("cannot write {}: {e}", path.display()))
}

fn to_json_file<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("output types always serialize");
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

/// Write runs, summary and manifest into `dir`, creating it if needed.
pub fn write_bundle(dir: &Path, result: &ExperimentResult, manifest: &Manifest) -> Result<OutputBundle> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let bundle = OutputBundle {
        runs: dir.join(RUNS_FILE),
        summary: dir.join(SUMMARY_FILE),
        manifest: dir.join(MANIFEST_FILE),
    };
    let file = fs::File::create(&bundle.runs).map_err(io_err(&bundle.runs))?;
    write_runs_csv(std::io::BufWriter::new(file), result)?;
    to_json_file(&bundle.summary, &summary(result))?;
    to_json_file(&bundle.manifest, manifest)?;
    Ok(bundle)
}
