//! Monte Carlo batches over (heuristic, spawn case) cells.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::emotion::HeuristicKind;
use crate::error::{Error, Result};
use crate::metrics::{aggregate_runs, AggregateStats};
use crate::model::{SimConfig, SpawnCase};
use crate::seed::{derive_layout_seed, derive_run_seed, RunSeeds};
use crate::world::{run_with_seeds, RunRecord};

pub const PAPER_RUNS_PER_CELL: u32 = 500;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub base_config: SimConfig,
    pub heuristics: Vec<HeuristicKind>,
    pub spawn_cases: Vec<SpawnCase>,
    pub runs_per_cell: u32,
    pub base_seed: u64,
    /// Worker threads; 0 lets the pool pick. Never affects results.
    pub parallelism: usize,
}

impl ExperimentPlan {
    /// Every heuristic on both spawn cases, 500 runs per cell.
    pub fn full_grid(base_config: SimConfig, base_seed: u64) -> Self {
        ExperimentPlan {
            base_config,
            heuristics: HeuristicKind::ALL.to_vec(),
            spawn_cases: SpawnCase::ALL.to_vec(),
            runs_per_cell: PAPER_RUNS_PER_CELL,
            base_seed,
            parallelism: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs_per_cell == 0 {
            return Err(Error::config("runs", "at least one run per cell is required"));
        }
        if self.heuristics.is_empty() {
            return Err(Error::config("heuristic", "no heuristic selected"));
        }
        if self.spawn_cases.is_empty() {
            return Err(Error::config("case", "no spawn case selected"));
        }
        for (h, c) in self.cells() {
            self.cell_config(h, c).validate()?;
        }
        Ok(())
    }

    /// Cells in output order: by heuristic index, then case index.
    pub fn cells(&self) -> Vec<(HeuristicKind, SpawnCase)> {
        let mut hs = self.heuristics.clone();
        hs.sort_by_key(|h| h.index());
        hs.dedup();
        let mut cs = self.spawn_cases.clone();
        cs.sort_by_key(|c| c.index());
        cs.dedup();
        hs.iter()
            .flat_map(|&h| cs.iter().map(move |&c| (h, c)))
            .collect()
    }

    pub fn cell_config(&self, heuristic: HeuristicKind, case: SpawnCase) -> SimConfig {
        SimConfig {
            heuristic,
            spawn_case: case,
            ..self.base_config.clone()
        }
    }

    pub fn seeds_for(&self, heuristic: HeuristicKind, case: SpawnCase, run: u32) -> RunSeeds {
        RunSeeds {
            layout: derive_layout_seed(self.base_seed, case.index(), run.into()),
            behavior: derive_run_seed(self.base_seed, heuristic.index(), case.index(), run.into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRun {
    pub run_index: u32,
    pub record: RunRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub heuristic: HeuristicKind,
    pub spawn_case: SpawnCase,
    pub runs: Vec<CellRun>,
    pub stats: AggregateStats,
}

impl CellResult {
    pub fn from_runs(heuristic: HeuristicKind, spawn_case: SpawnCase, runs: Vec<CellRun>) -> Result<Self> {
        let records: Vec<RunRecord> = runs.iter().map(|r| r.record.clone()).collect();
        let stats = aggregate_runs(&records)?;
        Ok(CellResult {
            heuristic,
            spawn_case,
            runs,
            stats,
        })
    }

    pub fn records(&self) -> impl Iterator<Item = &RunRecord> {
        self.runs.iter().map(|r| &r.record)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub cells: Vec<CellResult>,
}

impl ExperimentResult {
    pub fn cell(&self, heuristic: HeuristicKind, case: SpawnCase) -> Option<&CellResult> {
        self.cells
            .iter()
            .find(|c| c.heuristic == heuristic && c.spawn_case == case)
    }

    pub fn run_count(&self) -> usize {
        self.cells.iter().map(|c| c.runs.len()).sum()
    }
}

/// Run every cell of the plan. Output order is fixed by (heuristic, case,
/// run index), whatever the worker count.
pub fn monte_carlo(plan: &ExperimentPlan) -> Result<ExperimentResult> {
    plan.validate()?;
    let cells = plan.cells();
    let jobs: Vec<(usize, u32)> = (0..cells.len())
        .flat_map(|c| (0..plan.runs_per_cell).map(move |r| (c, r)))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.parallelism)
        .build()
        .map_err(|e| Error::Setup(format!("cannot start worker pool: {e}")))?;

    let outcomes: Vec<Result<RunRecord>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(cell, run)| {
                let (h, c) = cells[cell];
                let seeds = plan.seeds_for(h, c, run);
                run_with_seeds(&plan.cell_config(h, c), seeds, seeds.behavior).map_err(|e| {
                    Error::Setup(format!(
                        "cell {h}/{} run {run} (seed {}, layout seed {}): {e}",
                        c.label(),
                        seeds.behavior,
                        seeds.layout
                    ))
                })
            })
            .collect()
    });

    let mut per_cell: Vec<Vec<CellRun>> = vec![Vec::new(); cells.len()];
    for (&(cell, run_index), outcome) in jobs.iter().zip(outcomes) {
        per_cell[cell].push(CellRun {
            run_index,
            record: outcome?,
        });
    }
    let cells = cells
        .into_iter()
        .zip(per_cell)
        .map(|((h, c), runs)| CellResult::from_runs(h, c, runs))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentResult { cells })
}
