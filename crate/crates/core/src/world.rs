//! The simulation world and its per-tick update.
//!
//! A tick runs six phases. Sensing reads the state as it was at the start of
//! the tick, so the order in which robots are visited never changes what
//! they see:
//!
//! 1. sense: prey underfoot, nearest in-range signal, grazing companions
//! 2. transition: behavior state machine, prey before signals
//! 3. act: random or directed steps; grazing robots stay put
//! 4. resolve: each patch feeds its grazers, ascending id under scarcity
//! 5. emotion: hunger and loneliness updates
//! 6. policy: invite flags, signal rebuild, invite accounting

use std::f64::consts::TAU;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::emotion::{
    classify_emotion, invite_decision, update_hunger, update_loneliness, HeuristicKind, LocalView,
};
use crate::error::{Error, Result};
use crate::metrics::{compute_nu, invite_cost, percent_removed, Efficiency};
use crate::model::{
    distance, BehaviorMode, EmotionValue, ModeKind, Prey, PreyId, RobotId, RobotState, Signal,
    SimConfig, SpawnCase, Vec2,
};
use crate::seed::RunSeeds;

/// Rejections allowed while placing prey before giving up.
pub const MAX_PREY_REJECTIONS: u32 = 10_000;

/// Place the swarm at the field corners for the configured spawn case.
pub fn spawn_robots(cfg: &SimConfig) -> Result<Vec<RobotState>> {
    let edge = cfg.field_edge;
    let corners: &[Vec2] = match cfg.spawn_case {
        SpawnCase::TwoCorners => &[Vec2::new(0.0, 0.0), Vec2::new(edge, edge)],
        SpawnCase::FourCorners => &[
            Vec2::new(0.0, 0.0),
            Vec2::new(edge, 0.0),
            Vec2::new(0.0, edge),
            Vec2::new(edge, edge),
        ],
    };
    let count = cfg.robot_count;
    let groups = corners.len() as u32;
    if !count.is_multiple_of(groups) {
        return Err(Error::config(
            "robot_count",
            format!("{count} robots cannot be split evenly over {groups} corners"),
        ));
    }
    let per_corner = count / groups;
    let hunger = EmotionValue::new(cfg.initial_hunger);
    let loneliness = EmotionValue::new(cfg.initial_loneliness);
    Ok((0..count)
        .map(|i| RobotState {
            id: RobotId(i),
            position: corners[(i / per_corner) as usize],
            hunger,
            loneliness,
            mode: BehaviorMode::RandomSearch,
            container_load: 0,
            inviting: false,
        })
        .collect())
}

/// Scatter prey patches uniformly over the field by rejection sampling.
pub fn spawn_prey<R: Rng + ?Sized>(cfg: &SimConfig, rng: &mut R) -> Result<Vec<Prey>> {
    let lo = cfg.prey_radius;
    let hi = cfg.field_edge - cfg.prey_radius;
    if cfg.prey_patch_count() > 0 && lo >= hi {
        return Err(Error::Setup("prey patches do not fit inside the field".into()));
    }
    let mut prey: Vec<Prey> = Vec::with_capacity(cfg.prey_patch_count());
    let mut rejections = 0u32;
    for &(content, count) in &cfg.prey_composition {
        for _ in 0..count {
            let center = loop {
                let c = Vec2::new(rng.random_range(lo..=hi), rng.random_range(lo..=hi));
                if prey
                    .iter()
                    .all(|p| distance(p.center, c) >= cfg.min_prey_separation)
                {
                    break c;
                }
                rejections += 1;
                if rejections >= MAX_PREY_REJECTIONS {
                    return Err(Error::Setup(format!(
                        "could not place prey patch {} after {rejections} rejections",
                        prey.len()
                    )));
                }
            };
            prey.push(Prey {
                id: PreyId(prey.len() as u32),
                center,
                radius: cfg.prey_radius,
                content,
            });
        }
    }
    Ok(prey)
}

/// Move `step` along the direction `theta` (radians).
pub fn step_at_angle(pos: Vec2, step: f64, theta: f64) -> Vec2 {
    pos + Vec2::new(theta.cos(), theta.sin()) * step
}

/// One random-walk step: fixed length, uniform heading, no boundary clipping.
pub fn random_walk_step<R: Rng + ?Sized>(pos: Vec2, step: f64, rng: &mut R) -> Vec2 {
    step_at_angle(pos, step, rng.random_range(0.0..TAU))
}

/// Move up to `step` toward `target`, stopping on it when it is closer than `step`.
pub fn directed_step(pos: Vec2, target: Vec2, step: f64) -> Vec2 {
    let d = distance(pos, target);
    if d <= step {
        target
    } else {
        pos + (target - pos) * (step / d)
    }
}

/// The live patch under `pos`, if any. Lowest id wins on (boundary) overlap.
pub fn detect_prey(pos: Vec2, prey: &[Prey]) -> Option<PreyId> {
    prey.iter()
        .filter(|p| !p.is_exhausted() && distance(pos, p.center) <= p.radius)
        .map(|p| p.id)
        .min()
}

/// The nearest signal whose broadcast radius covers `pos`; ties go to the lower source id.
pub fn select_signal<'a, I>(pos: Vec2, signals: I) -> Option<Signal>
where
    I: IntoIterator<Item = &'a Signal>,
{
    signals
        .into_iter()
        .map(|s| (distance(pos, s.position), s))
        .filter(|(d, s)| *d <= s.radius)
        .min_by(|(da, a), (db, b)| da.total_cmp(db).then(a.source.cmp(&b.source)))
        .map(|(_, s)| *s)
}

/// Split a patch's content among its grazers.
///
/// `grazers` holds `(robot id, remaining container capacity)`. Each robot asks
/// for `min(rate, remaining)`; when the patch cannot cover every request it is
/// handed out in ascending robot id order. Returns the patch's new content and
/// each grazer's intake, aligned with `grazers`.
pub fn resolve_grazing(content: u64, grazers: &[(RobotId, u64)], rate: u64) -> (u64, Vec<u64>) {
    let mut order: Vec<usize> = (0..grazers.len()).collect();
    order.sort_by_key(|&i| grazers[i].0);
    let mut left = content;
    let mut intake = vec![0; grazers.len()];
    for i in order {
        let take = rate.min(grazers[i].1).min(left);
        intake[i] = take;
        left -= take;
    }
    (left, intake)
}

/// A change of behavior mode observed during a tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub robot: RobotId,
    pub from: ModeKind,
    pub to: ModeKind,
}

/// What happened during one tick, for observers and tests.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TickReport {
    /// Tick counter after the step.
    pub tick: u32,
    pub transitions: Vec<Transition>,
    /// Content each robot took this tick, indexed by robot id.
    pub intake: Vec<u64>,
    /// Grazing companions each robot counted while sensing, indexed by robot id.
    pub companions: Vec<u32>,
}

/// One robot's state at a tick boundary, as written to trace files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub tick: u32,
    pub robot: u32,
    pub x: f64,
    pub y: f64,
    pub mode: ModeKind,
    pub hunger: f64,
    pub loneliness: f64,
    pub container_load: u64,
    pub inviting: bool,
}

#[derive(Debug, Clone, Copy, Default)]
struct Sensed {
    prey: Option<PreyId>,
    signal: Option<Signal>,
    companions: u32,
}

/// Complete mutable state of one run.
#[derive(Debug, Clone)]
pub struct World {
    cfg: SimConfig,
    tick: u32,
    robots: Vec<RobotState>,
    prey: Vec<Prey>,
    signals: Vec<Signal>,
    rng: ChaCha8Rng,
    initial_total: u64,
    invite_ticks: u64,
}

impl World {
    /// Validate `cfg`, place prey from the layout stream and release the swarm.
    pub fn new(cfg: &SimConfig, seeds: RunSeeds) -> Result<Self> {
        cfg.validate()?;
        let mut layout = ChaCha8Rng::seed_from_u64(seeds.layout);
        let prey = spawn_prey(cfg, &mut layout)?;
        let robots = spawn_robots(cfg)?;
        Ok(Self::from_parts(cfg.clone(), robots, prey, seeds.behavior))
    }

    /// Build a world from explicit robots and prey. Robot ids must equal their
    /// index in `robots`, prey ids their index in `prey`.
    pub fn from_parts(cfg: SimConfig, robots: Vec<RobotState>, prey: Vec<Prey>, seed: u64) -> Self {
        debug_assert!(robots.iter().enumerate().all(|(i, r)| r.id.0 as usize == i));
        debug_assert!(prey.iter().enumerate().all(|(i, p)| p.id.0 as usize == i));
        let initial_total = prey.iter().map(|p| p.content).sum::<u64>()
            + robots.iter().map(|r| r.container_load).sum::<u64>();
        let signals = robots
            .iter()
            .filter(|r| r.inviting)
            .map(|r| Signal {
                source: r.id,
                position: r.position,
                radius: cfg.invite_range,
            })
            .collect();
        World {
            cfg,
            tick: 0,
            robots,
            prey,
            signals,
            rng: ChaCha8Rng::seed_from_u64(seed),
            initial_total,
            invite_ticks: 0,
        }
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn tick(&self) -> u32 {
        self.tick
    }

    pub fn robots(&self) -> &[RobotState] {
        &self.robots
    }

    pub fn prey(&self) -> &[Prey] {
        &self.prey
    }

    pub fn signals(&self) -> &[Signal] {
        &self.signals
    }

    pub fn invite_ticks(&self) -> u64 {
        self.invite_ticks
    }

    /// Prey content plus container loads at construction.
    pub fn initial_total(&self) -> u64 {
        self.initial_total
    }

    pub fn remaining_prey(&self) -> u64 {
        self.prey.iter().map(|p| p.content).sum()
    }

    pub fn collected(&self) -> u64 {
        self.robots.iter().map(|r| r.container_load).sum()
    }

    pub fn is_finished(&self) -> bool {
        self.tick >= self.cfg.total_ticks
            || self.prey.iter().all(Prey::is_exhausted)
            || self.robots.iter().all(|r| r.mode.is_shutdown())
    }

    fn sense(&self, robot: &RobotState) -> Sensed {
        if robot.mode.is_shutdown() {
            return Sensed::default();
        }
        let companions = self
            .robots
            .iter()
            .filter(|o| {
                o.id != robot.id
                    && o.mode.is_grazing()
                    && distance(o.position, robot.position) <= self.cfg.companionship_radius
            })
            .count() as u32;
        let searching = !robot.mode.is_grazing();
        Sensed {
            prey: detect_prey(robot.position, &self.prey),
            signal: searching
                .then(|| {
                    select_signal(
                        robot.position,
                        self.signals.iter().filter(|s| s.source != robot.id),
                    )
                })
                .flatten(),
            companions,
        }
    }

    fn next_mode(&self, robot: &RobotState, sensed: &Sensed) -> BehaviorMode {
        match robot.mode {
            BehaviorMode::Shutdown => BehaviorMode::Shutdown,
            BehaviorMode::Grazing { prey } => {
                if robot.container_load >= self.cfg.container_capacity {
                    BehaviorMode::Shutdown
                } else if self.prey[prey.0 as usize].is_exhausted() {
                    BehaviorMode::RandomSearch
                } else {
                    robot.mode
                }
            }
            BehaviorMode::RandomSearch | BehaviorMode::DirectedSearch { .. } => {
                if let Some(prey) = sensed.prey {
                    BehaviorMode::Grazing { prey }
                } else if let Some(s) = sensed.signal {
                    BehaviorMode::DirectedSearch {
                        target: s.position,
                        source: s.source,
                    }
                } else {
                    BehaviorMode::RandomSearch
                }
            }
        }
    }

    /// Advance one time step.
    pub fn step(&mut self) -> Result<TickReport> {
        if self.tick >= self.cfg.total_ticks {
            return Err(Error::Contract(format!(
                "tick {} is at or beyond the run length {}",
                self.tick, self.cfg.total_ticks
            )));
        }
        let n = self.robots.len();
        let mut transitions = Vec::new();

        // sense
        let sensed: Vec<Sensed> = self.robots.iter().map(|r| self.sense(r)).collect();

        // transition
        for (i, sense) in sensed.iter().enumerate() {
            let next = self.next_mode(&self.robots[i], sense);
            let robot = &mut self.robots[i];
            if next.kind() != robot.mode.kind() {
                transitions.push(Transition {
                    robot: robot.id,
                    from: robot.mode.kind(),
                    to: next.kind(),
                });
            }
            robot.mode = next;
        }

        // act
        let step = self.cfg.step_length;
        for robot in &mut self.robots {
            match robot.mode {
                BehaviorMode::RandomSearch => {
                    robot.position = random_walk_step(robot.position, step, &mut self.rng);
                }
                BehaviorMode::DirectedSearch { target, .. } => {
                    robot.position = directed_step(robot.position, target, step);
                }
                BehaviorMode::Grazing { .. } | BehaviorMode::Shutdown => {}
            }
        }

        // resolve
        let mut intake = vec![0u64; n];
        let mut grazers: Vec<Vec<(RobotId, u64)>> = vec![Vec::new(); self.prey.len()];
        for r in &self.robots {
            if let BehaviorMode::Grazing { prey } = r.mode {
                grazers[prey.0 as usize]
                    .push((r.id, self.cfg.container_capacity - r.container_load));
            }
        }
        for (patch, eaters) in self.prey.iter_mut().zip(&grazers) {
            if eaters.is_empty() {
                continue;
            }
            let (left, took) = resolve_grazing(patch.content, eaters, self.cfg.grazing_rate);
            patch.content = left;
            for (&(id, _), t) in eaters.iter().zip(took) {
                intake[id.0 as usize] = t;
            }
        }
        for (robot, &got) in self.robots.iter_mut().zip(&intake) {
            robot.container_load += got;
            if robot.mode.is_grazing() && robot.container_load >= self.cfg.container_capacity {
                transitions.push(Transition {
                    robot: robot.id,
                    from: ModeKind::Grazing,
                    to: ModeKind::Shutdown,
                });
                robot.mode = BehaviorMode::Shutdown;
                robot.inviting = false;
            }
        }

        // emotion
        let views: Vec<LocalView> = self
            .robots
            .iter()
            .zip(&sensed)
            .zip(&intake)
            .map(|((r, s), &got)| LocalView {
                is_grazing: r.mode.is_grazing(),
                grazed_this_tick: got > 0,
                grazing_companions: s.companions,
            })
            .collect();
        for (robot, view) in self.robots.iter_mut().zip(&views) {
            if robot.mode.is_shutdown() {
                continue;
            }
            robot.hunger = update_hunger(robot.hunger, view.grazed_this_tick, &self.cfg);
            robot.loneliness = update_loneliness(robot.loneliness, *view, &self.cfg);
        }

        // policy and accounting
        self.signals.clear();
        for (robot, view) in self.robots.iter_mut().zip(&views) {
            robot.inviting = !robot.mode.is_shutdown() && {
                let state = classify_emotion(robot.hunger, robot.loneliness, &self.cfg);
                invite_decision(self.cfg.heuristic, state, *view)
            };
            if robot.inviting {
                self.signals.push(Signal {
                    source: robot.id,
                    position: robot.position,
                    radius: self.cfg.invite_range,
                });
            }
        }
        self.invite_ticks += self.signals.len() as u64;
        self.tick += 1;

        Ok(TickReport {
            tick: self.tick,
            transitions,
            intake,
            companions: sensed.iter().map(|s| s.companions).collect(),
        })
    }

    /// Step until the run length is reached or nothing is left to do,
    /// calling `observer` after every tick.
    pub fn run_with<F>(&mut self, mut observer: F) -> Result<()>
    where
        F: FnMut(&World, &TickReport) -> Result<()>,
    {
        while !self.is_finished() {
            let report = self.step()?;
            observer(self, &report)?;
        }
        Ok(())
    }

    pub fn trace_records(&self) -> impl Iterator<Item = TraceRecord> + '_ {
        self.robots.iter().map(|r| TraceRecord {
            tick: self.tick,
            robot: r.id.0,
            x: r.position.x,
            y: r.position.y,
            mode: r.mode.kind(),
            hunger: r.hunger.get(),
            loneliness: r.loneliness.get(),
            container_load: r.container_load,
            inviting: r.inviting,
        })
    }

    /// Append this tick's records as JSON lines.
    pub fn write_trace<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        for rec in self.trace_records() {
            serde_json::to_writer(&mut *out, &rec)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn record(&self, seed: u64) -> RunRecord {
        let removed = self.collected();
        let percent = if self.initial_total == 0 {
            0.0
        } else {
            percent_removed(removed, self.initial_total).expect("loads never exceed initial total")
        };
        RunRecord {
            seed,
            config_digest: self.cfg.digest(),
            heuristic: self.cfg.heuristic,
            spawn_case: self.cfg.spawn_case,
            initial_total: self.initial_total,
            content_removed: removed,
            percent_removed: percent,
            invite_ticks: self.invite_ticks,
            invite_cost: invite_cost(self.cfg.invite_power, self.invite_ticks),
            nu: compute_nu(removed as f64, self.cfg.invite_power, self.invite_ticks)
                .expect("validated config has positive invite power"),
            final_tick: self.tick,
        }
    }
}

/// Outcome of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub config_digest: String,
    pub heuristic: HeuristicKind,
    pub spawn_case: SpawnCase,
    pub initial_total: u64,
    pub content_removed: u64,
    pub percent_removed: f64,
    pub invite_ticks: u64,
    pub invite_cost: f64,
    pub nu: Efficiency,
    pub final_tick: u32,
}

/// Run one simulation from a single seed.
pub fn run_simulation(cfg: &SimConfig, seed: u64) -> Result<RunRecord> {
    run_with_seeds(cfg, RunSeeds::from_seed(seed, cfg.heuristic), seed)
}

/// Run one simulation with explicit layout and behavior streams. `record_seed`
/// is the seed reported in the resulting record.
pub fn run_with_seeds(cfg: &SimConfig, seeds: RunSeeds, record_seed: u64) -> Result<RunRecord> {
    let mut world = World::new(cfg, seeds)?;
    world.run_with(|_, _| Ok(()))?;
    Ok(world.record(record_seed))
}

/// Like [`run_simulation`], also writing a JSON-lines trace of every robot at
/// every tick boundary (tick 0 included).
pub fn run_simulation_traced<W: Write>(cfg: &SimConfig, seed: u64, out: &mut W) -> Result<RunRecord> {
    let io = |e: std::io::Error| Error::Io(format!("trace write failed: {e}"));
    let mut world = World::new(cfg, RunSeeds::from_seed(seed, cfg.heuristic))?;
    world.write_trace(out).map_err(io)?;
    world.run_with(|w, _| w.write_trace(out).map_err(io))?;
    Ok(world.record(seed))
}
