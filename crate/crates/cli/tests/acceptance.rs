//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::fs;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use forage_core::world::random_walk_step;
use forage_core::{
    classify_emotion, compute_nu, monte_carlo, Efficiency, ExperimentPlan, ExperimentResult,
    HeuristicKind, HungerLevel, LonelinessLevel, ModeKind, RunSeeds, SimConfig, SpawnCase, Vec2,
    World,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BASE_SEED: u64 = 42;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Emotion bounds, conservation, FSM legality, step length, stationary
/// grazers and signal bookkeeping on every tick of 50 full traces.
fn invariants() -> Outcome {
    const TRACES: u64 = 50;
    const STEP_TOL: f64 = 1e-12;
    let started = Instant::now();
    let mut ticks = 0u64;
    for i in 0..TRACES {
        let heuristic = HeuristicKind::ALL[(i % 3) as usize];
        let case = SpawnCase::ALL[((i / 3) % 2) as usize];
        let cfg = SimConfig {
            heuristic,
            spawn_case: case,
            ..SimConfig::default()
        };
        let seed = 1000 + i;
        let ctx = |msg: String| format!("trace {i} ({heuristic}, case {}, seed {seed}): {msg}", case.label());
        let mut world = World::new(&cfg, RunSeeds::from_seed(seed, heuristic)).map_err(|e| ctx(e.to_string()))?;
        let total = world.initial_total();
        let mut prev: Vec<(Vec2, ModeKind)> = world.robots().iter().map(|r| (r.position, r.mode.kind())).collect();
        while !world.is_finished() {
            let report = world.step().map_err(|e| ctx(e.to_string()))?;
            ticks += 1;
            let t = report.tick;
            check(world.remaining_prey() + world.collected() == total, || {
                ctx(format!("tick {t}: conservation broken"))
            })?;
            for tr in &report.transitions {
                check(tr.from != tr.to && tr.from.can_transition_to(tr.to), || {
                    ctx(format!("tick {t}: illegal transition {:?}", tr))
                })?;
            }
            let mut inviting = 0;
            for r in world.robots() {
                let id = r.id.0 as usize;
                let (before, prev_mode) = prev[id];
                let now = r.mode.kind();
                for v in [r.hunger.get(), r.loneliness.get()] {
                    check((1.0..=100.0).contains(&v), || ctx(format!("tick {t}: robot {id} emotion {v}")))?;
                }
                check(prev_mode != ModeKind::Shutdown || now == ModeKind::Shutdown, || {
                    ctx(format!("tick {t}: robot {id} left Shutdown"))
                })?;
                let chain: Vec<_> = report.transitions.iter().filter(|tr| tr.robot == r.id).collect();
                let mut mode = prev_mode;
                for tr in &chain {
                    check(tr.from == mode, || ctx(format!("tick {t}: robot {id} transition chain broken")))?;
                    mode = tr.to;
                }
                check(mode == now, || ctx(format!("tick {t}: robot {id} changed mode without a transition")))?;
                let moved = (r.position - before).norm();
                match now {
                    ModeKind::RandomSearch => check((moved - cfg.step_length).abs() <= STEP_TOL, || {
                        ctx(format!("tick {t}: robot {id} random step {moved}"))
                    })?,
                    ModeKind::DirectedSearch => check(moved <= cfg.step_length + STEP_TOL, || {
                        ctx(format!("tick {t}: robot {id} directed step {moved}"))
                    })?,
                    ModeKind::Grazing | ModeKind::Shutdown => check(moved == 0.0, || {
                        ctx(format!("tick {t}: robot {id} moved {moved} while {now}"))
                    })?,
                }
                check(r.container_load <= cfg.container_capacity, || {
                    ctx(format!("tick {t}: robot {id} over capacity"))
                })?;
                if r.inviting {
                    inviting += 1;
                    check(
                        world.signals().iter().any(|s| s.source == r.id && s.position == r.position),
                        || ctx(format!("tick {t}: robot {id} inviting without its signal")),
                    )?;
                }
            }
            check(world.signals().len() == inviting, || {
                ctx(format!("tick {t}: {} signals for {inviting} inviting robots", world.signals().len()))
            })?;
            prev = world.robots().iter().map(|r| (r.position, r.mode.kind())).collect();
        }
    }
    let elapsed = started.elapsed();
    check(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!("{TRACES} traces, {ticks} ticks checked in {:.1}s", elapsed.as_secs_f64()))
}

/// RMS displacement of fixed-length random walks against l * sqrt(N).
fn random_walk_rms() -> Outcome {
    const WALKS: usize = 10_000;
    const STEPS: usize = 1500;
    const L: f64 = 0.5;
    const EXPECTED: f64 = 19.365;
    const REL_TOL: f64 = 0.02;
    let mut rng = ChaCha8Rng::seed_from_u64(BASE_SEED);
    let mut sum_sq = 0.0;
    for _ in 0..WALKS {
        let mut p = Vec2::new(0.0, 0.0);
        for _ in 0..STEPS {
            p = random_walk_step(p, L, &mut rng);
        }
        sum_sq += p.x * p.x + p.y * p.y;
    }
    let rms = (sum_sq / WALKS as f64).sqrt();
    let rel = (rms - EXPECTED).abs() / EXPECTED;
    let detail = format!("rms {rms:.4} vs {EXPECTED} (relative error {:.2}%, limit 2%)", rel * 100.0);
    if rel <= REL_TOL {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// The `experiment` command produces byte-identical runs files across
/// repeats and worker counts.
fn determinism() -> Outcome {
    const RUNS: &str = "100";
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for (name, workers) in [("first", "1"), ("second", "1"), ("eight", "8")] {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_forage"))
            .args(["experiment", "--seed", &BASE_SEED.to_string(), "--runs", RUNS, "--workers", workers, "--out"])
            .arg(&out)
            .env_remove("FORAGE_SEED")
            .output()
            .map_err(|e| e.to_string())?;
        check(status.status.success(), || {
            format!("experiment failed: {}", String::from_utf8_lossy(&status.stderr))
        })?;
        let runs = fs::read(out.join("runs.csv")).map_err(|e| e.to_string())?;
        let summary = fs::read(out.join("summary.json")).map_err(|e| e.to_string())?;
        outputs.push((name, runs, summary));
    }
    let (_, runs, summary) = &outputs[0];
    for (name, other_runs, other_summary) in &outputs[1..] {
        check(other_runs == runs, || format!("runs file of `{name}` differs"))?;
        check(other_summary == summary, || format!("summary of `{name}` differs"))?;
    }
    let rows = runs.iter().filter(|&&b| b == b'\n').count() - 1;
    Ok(format!("{rows} rows identical across 2 repeats and 1 vs 8 workers"))
}

/// Invite decisions follow each heuristic's rule on every tick.
fn gating() -> Outcome {
    const BATCH: u64 = 50;
    let mut summary = Vec::new();
    for heuristic in HeuristicKind::ALL {
        let mut invite_ticks = 0u64;
        for i in 0..BATCH {
            let cfg = SimConfig {
                heuristic,
                spawn_case: SpawnCase::ALL[(i % 2) as usize],
                ..SimConfig::default()
            };
            let seed = 5000 + i;
            let mut world = World::new(&cfg, RunSeeds::from_seed(seed, heuristic)).map_err(|e| e.to_string())?;
            world
                .run_with(|w, report| {
                    for r in w.robots() {
                        let grazing = r.mode.kind() == ModeKind::Grazing;
                        let ok = match heuristic {
                            HeuristicKind::RandomOnly => !r.inviting,
                            HeuristicKind::ImmediateInvite => r.inviting == grazing,
                            HeuristicKind::HungerLoneliness => {
                                let s = classify_emotion(r.hunger, r.loneliness, &cfg);
                                !r.inviting
                                    || (grazing
                                        && s.hunger == HungerLevel::Satiated
                                        && s.loneliness == LonelinessLevel::High)
                            }
                        };
                        if !ok {
                            return Err(forage_core::Error::Contract(format!(
                                "{heuristic} seed {seed} tick {}: robot {} inviting={} in mode {}",
                                report.tick,
                                r.id.0,
                                r.inviting,
                                r.mode.kind()
                            )));
                        }
                    }
                    Ok(())
                })
                .map_err(|e| e.to_string())?;
            invite_ticks += world.invite_ticks();
        }
        match heuristic {
            HeuristicKind::RandomOnly => check(invite_ticks == 0, || format!("random_only sent {invite_ticks} invites"))?,
            _ => check(invite_ticks > 0, || format!("{heuristic} never invited; check is vacuous"))?,
        }
        summary.push(format!("{heuristic} {invite_ticks}"));
    }
    Ok(format!("{BATCH} runs per heuristic, invite ticks: {}", summary.join(", ")))
}

fn matched_runs(case: SpawnCase) -> Result<ExperimentResult, String> {
    let plan = ExperimentPlan {
        base_config: SimConfig::default(),
        heuristics: vec![HeuristicKind::HungerLoneliness, HeuristicKind::ImmediateInvite],
        spawn_cases: vec![case],
        runs_per_cell: 100,
        base_seed: BASE_SEED,
        parallelism: 0,
    };
    for run in 0..plan.runs_per_cell {
        let hl = plan.seeds_for(HeuristicKind::HungerLoneliness, case, run);
        let ii = plan.seeds_for(HeuristicKind::ImmediateInvite, case, run);
        check(hl.layout == ii.layout, || format!("run {run}: worlds are not matched"))?;
    }
    monte_carlo(&plan).map_err(|e| e.to_string())
}

fn percents(result: &ExperimentResult, h: HeuristicKind, case: SpawnCase) -> Vec<f64> {
    result.cell(h, case).expect("cell present").records().map(|r| r.percent_removed).collect()
}

fn median_nu(result: &ExperimentResult, h: HeuristicKind, case: SpawnCase) -> Option<f64> {
    result.cell(h, case).expect("cell present").stats.nu_median
}

fn fmt_nu(v: Option<f64>) -> String {
    v.map_or("undefined".into(), |v| format!("{v:.2}"))
}

/// Case A: HL is more efficient, and removes half the prey more often.
fn case_a() -> Outcome {
    use HeuristicKind::{HungerLoneliness as Hl, ImmediateInvite as Ii};
    const HALF: f64 = 50.0;
    const MIN_SHARE: f64 = 0.60;
    let case = SpawnCase::TwoCorners;
    let result = matched_runs(case)?;
    let (nu_hl, nu_ii) = (median_nu(&result, Hl, case), median_nu(&result, Ii, case));
    let a = matches!((nu_hl, nu_ii), (Some(h), Some(i)) if h > i);
    let hl = percents(&result, Hl, case);
    let ii = percents(&result, Ii, case);
    let hl_half = hl.iter().filter(|&&p| p >= HALF).count();
    let ii_half = ii.iter().filter(|&&p| p >= HALF).count();
    let b = hl_half as f64 >= MIN_SHARE * hl.len() as f64 && hl_half >= ii_half;
    let detail = format!(
        "(a) {} median nu hl {} vs invite {}; (b) {} runs >= 50% removed: hl {hl_half}/{} (need >= 60%), invite {ii_half}/{}",
        if a { "ok" } else { "FAILED" },
        fmt_nu(nu_hl),
        fmt_nu(nu_ii),
        if b { "ok" } else { "FAILED" },
        hl.len(),
        ii.len(),
    );
    if a && b {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn iqr(mut v: Vec<f64>) -> (f64, f64) {
    v.sort_by(f64::total_cmp);
    (quantile(&v, 0.25), quantile(&v, 0.75))
}

/// Case B: removal distributions overlap (interquartile ranges intersect),
/// HL is more efficient.
fn case_b() -> Outcome {
    use HeuristicKind::{HungerLoneliness as Hl, ImmediateInvite as Ii};
    let case = SpawnCase::FourCorners;
    let result = matched_runs(case)?;
    let (hq1, hq3) = iqr(percents(&result, Hl, case));
    let (iq1, iq3) = iqr(percents(&result, Ii, case));
    let overlap = hq1 <= iq3 && iq1 <= hq3;
    let (nu_hl, nu_ii) = (median_nu(&result, Hl, case), median_nu(&result, Ii, case));
    let efficient = matches!((nu_hl, nu_ii), (Some(h), Some(i)) if h > i);
    let detail = format!(
        "{} percent_removed IQR hl [{hq1:.1}, {hq3:.1}] vs invite [{iq1:.1}, {iq3:.1}]; {} median nu hl {} vs invite {}",
        if overlap { "ok" } else { "FAILED" },
        if efficient { "ok" } else { "FAILED" },
        fmt_nu(nu_hl),
        fmt_nu(nu_ii),
    );
    if overlap && efficient {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Unit value plus the scale and linearity laws of the efficiency metric.
fn efficiency_laws() -> Outcome {
    const INPUTS: usize = 1000;
    let unit = compute_nu(6000.0, 0.05, 2000).map_err(|e| e.to_string())?;
    check(unit == Efficiency::Defined(60.0), || format!("compute_nu(6000, 0.05, 2000) = {unit:?}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(BASE_SEED);
    let nu = |c: f64, p: f64, t: u64| match compute_nu(c, p, t) {
        Ok(Efficiency::Defined(v)) => Ok(v),
        other => Err(format!("compute_nu({c}, {p}, {t}) = {other:?}")),
    };
    for _ in 0..INPUTS {
        let c = rng.random_range(0.0..1e6);
        let p = rng.random_range(1e-3..10.0);
        let t = rng.random_range(1..1_000_000u64);
        let base = nu(c, p, t)?;
        let halved = nu(c, 2.0 * p, t)?;
        check(halved == base / 2.0, || format!("scale law: nu({c}, 2*{p}, {t}) = {halved}, expected {}", base / 2.0))?;
        let doubled = nu(2.0 * c, p, t)?;
        check(doubled == 2.0 * base, || format!("linearity: nu(2*{c}, {p}, {t}) = {doubled}, expected {}", 2.0 * base))?;
    }
    Ok(format!("nu(6000, 0.05, 2000) = 60; both laws exact over {INPUTS} random inputs"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("1 invariants", invariants),
        ("2 random-walk rms", random_walk_rms),
        ("3 determinism", determinism),
        ("4 heuristic gating", gating),
        ("5 case A ordering", case_a),
        ("6 case B ordering", case_b),
        ("7 efficiency metric", efficiency_laws),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let started = Instant::now();
        let outcome = run();
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  criterion {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  criterion {name}: {detail} [{secs:.1}s]");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
