use std::fs;

use forage_core::export::{self, Manifest};
use forage_core::harness::ExperimentPlan;
use forage_core::{
    monte_carlo, run_simulation, run_simulation_traced, run_with_seeds, Efficiency, HeuristicKind,
    SimConfig, SpawnCase, TraceRecord, World,
};

fn short_config() -> SimConfig {
    SimConfig {
        total_ticks: 400,
        ..SimConfig::default()
    }
}

fn plan(runs: u32) -> ExperimentPlan {
    ExperimentPlan {
        runs_per_cell: runs,
        ..ExperimentPlan::full_grid(short_config(), 17)
    }
}

#[test]
fn heuristics_share_worlds_for_a_run_index() {
    let plan = plan(5);
    for case in SpawnCase::ALL {
        for run in 0..plan.runs_per_cell {
            let worlds: Vec<World> = HeuristicKind::ALL
                .iter()
                .map(|&h| World::new(&plan.cell_config(h, case), plan.seeds_for(h, case, run)).unwrap())
                .collect();
            for w in &worlds[1..] {
                assert_eq!(w.prey(), worlds[0].prey());
                assert_eq!(w.robots(), worlds[0].robots());
            }
        }
    }
}

#[test]
fn manifest_seeds_reproduce_every_row() {
    let plan = plan(3);
    let result = monte_carlo(&plan).unwrap();
    let manifest = Manifest::for_experiment(&plan);
    assert_eq!(manifest.cells.len(), result.cells.len());
    for (mc, cell) in manifest.cells.iter().zip(&result.cells) {
        assert_eq!((mc.heuristic, mc.case), (cell.heuristic, cell.spawn_case));
        let cfg = SimConfig {
            heuristic: mc.heuristic,
            spawn_case: mc.case,
            ..manifest.config.clone()
        };
        for (i, run) in cell.runs.iter().enumerate() {
            let seeds = forage_core::RunSeeds {
                layout: mc.layout_seeds[i],
                behavior: mc.seeds[i],
            };
            assert_eq!(run_with_seeds(&cfg, seeds, mc.seeds[i]).unwrap(), run.record);
        }
    }
}

#[test]
fn bundle_files_are_consistent() {
    let plan = plan(4);
    let result = monte_carlo(&plan).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let bundle = export::write_bundle(dir.path(), &result, &Manifest::for_experiment(&plan)).unwrap();

    let runs = fs::read_to_string(&bundle.runs).unwrap();
    assert_eq!(runs.lines().count(), 1 + 6 * 4);
    assert_eq!(
        runs.lines().next().unwrap(),
        "heuristic,case,run_index,seed,content_removed,percent_removed,invite_ticks,cost,nu,final_tick"
    );

    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(&bundle.summary).unwrap()).unwrap();
    let cells = summary.as_array().unwrap();
    assert_eq!(cells.len(), 6);
    for (json, cell) in cells.iter().zip(&result.cells) {
        assert_eq!(json["stats"]["runs"], 4);
        let mean = json["stats"]["percent_mean"].as_f64().unwrap();
        assert!((mean - cell.stats.percent_mean).abs() < 1e-12);
    }

    let manifest: Manifest = serde_json::from_str(&fs::read_to_string(&bundle.manifest).unwrap()).unwrap();
    assert_eq!(manifest, Manifest::for_experiment(&plan));
}

#[test]
fn trace_starts_at_tick_zero_and_matches_record() {
    let cfg = SimConfig {
        robot_count: 12,
        ..short_config()
    };
    let mut buf = Vec::new();
    let rec = run_simulation_traced(&cfg, 8, &mut buf).unwrap();
    assert_eq!(rec, run_simulation(&cfg, 8).unwrap());

    let lines: Vec<TraceRecord> = String::from_utf8(buf)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 12 * (rec.final_tick as usize + 1));
    assert_eq!(lines[0].tick, 0);
    assert_eq!(lines.last().unwrap().tick, rec.final_tick);

    let last_tick: Vec<_> = lines.iter().filter(|l| l.tick == rec.final_tick).collect();
    let collected: u64 = last_tick.iter().map(|l| l.container_load).sum();
    assert_eq!(collected, rec.content_removed);

    let invites = lines.iter().filter(|l| l.tick > 0 && l.inviting).count() as u64;
    assert_eq!(invites, rec.invite_ticks);
}

#[test]
fn record_fields_agree() {
    for h in HeuristicKind::ALL {
        let cfg = SimConfig {
            heuristic: h,
            ..short_config()
        };
        let rec = run_simulation(&cfg, 3).unwrap();
        assert_eq!(rec.initial_total, 6000);
        assert_eq!(rec.percent_removed, 100.0 * rec.content_removed as f64 / 6000.0);
        assert_eq!(rec.invite_cost, cfg.invite_power * rec.invite_ticks as f64);
        match rec.nu {
            Efficiency::Undefined => assert_eq!(rec.invite_ticks, 0),
            Efficiency::Defined(v) => assert_eq!(v, rec.content_removed as f64 / rec.invite_cost),
        }
        assert_eq!(rec.config_digest, cfg.digest());
    }
}

#[test]
fn config_json_round_trip() {
    let cfg = SimConfig {
        robot_count: 24,
        heuristic: HeuristicKind::ImmediateInvite,
        spawn_case: SpawnCase::FourCorners,
        ..SimConfig::default()
    };
    let back = SimConfig::from_json(&cfg.to_json_pretty()).unwrap();
    assert_eq!(back, cfg);
    assert_eq!(back.digest(), cfg.digest());
    assert_ne!(SimConfig::default().digest(), cfg.digest());
}
