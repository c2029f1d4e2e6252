//! Deterministic 2D swarm-foraging simulator.
//!
//! A swarm of particle robots random-walks a square field looking for
//! circular prey patches. A robot standing on a patch grazes it into a
//! fixed-size container and may broadcast an invitation that pulls nearby
//! searchers toward it. Whether it invites is decided by one of three
//! policies: never, always while grazing, or only while its hunger drive is
//! satiated and its loneliness drive is high.
//!
//! ```
//! use forage_core::{run_simulation, SimConfig};
//!
//! let cfg = SimConfig { total_ticks: 100, ..SimConfig::default() };
//! let record = run_simulation(&cfg, 7).unwrap();
//! assert!(record.percent_removed <= 100.0);
//! ```

pub mod emotion;
pub mod error;
pub mod export;
pub mod harness;
pub mod metrics;
pub mod model;
pub mod seed;
pub mod world;

pub use emotion::{
    classify_emotion, invite_decision, update_hunger, update_loneliness, HeuristicKind, LocalView,
};
pub use error::{Error, Result};
pub use harness::{monte_carlo, CellResult, CellRun, ExperimentPlan, ExperimentResult};
pub use metrics::{aggregate_runs, compute_nu, percent_removed, AggregateStats, Efficiency};
pub use model::{
    clamp_emotion, distance, BehaviorMode, EmotionState, EmotionValue, HungerLevel,
    LonelinessLevel, ModeKind, Prey, PreyId, RobotId, RobotState, Signal, SimConfig, SpawnCase,
    Vec2,
};
pub use seed::{derive_layout_seed, derive_run_seed, RunSeeds};
pub use world::{
    run_simulation, run_simulation_traced, run_with_seeds, RunRecord, TickReport, TraceRecord,
    Transition, World,
};
