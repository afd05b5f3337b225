use mpm_sdem::harness::run::snapshot_path;
use mpm_sdem::harness::scenarios::{friction, normal_force, table1_collision};
use mpm_sdem::harness::{beverloo_fit, builtin_scenarios, run, scenario, validate, RunOptions, Simulation, Snapshot};
use mpm_sdem::mpm::total_mass;

fn short(name: &str, until: f64, dir: &std::path::Path, dump: usize) -> Vec<u8> {
    let s = scenario(name).unwrap();
    let r = validate(&s.config).unwrap();
    let opts = RunOptions { out_dir: Some(dir.to_path_buf()), until: Some(until), snapshot_every: Some(dump) };
    run(&s.config, &r, &opts).unwrap();
    std::fs::read(dir.join("series.csv")).unwrap()
}

#[test]
fn runs_are_byte_identical() {
    for name in ["table1_soft", "normal_force_0"] {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let x = short(name, 0.01, a.path(), 0);
        let y = short(name, 0.01, b.path(), 0);
        assert!(!x.is_empty());
        assert_eq!(x, y, "{name}");
    }
}

#[test]
fn snapshots_round_trip_and_match_energy_channel() {
    let dir = tempfile::tempdir().unwrap();
    let s = table1_collision(true);
    let r = validate(&s.config).unwrap();
    let every = s.config.schedule.output_every;
    let opts = RunOptions { out_dir: Some(dir.path().to_path_buf()), until: Some(0.02), snapshot_every: Some(every) };
    let (sim, series) = run(&s.config, &r, &opts).unwrap();

    let last = Snapshot::load(&snapshot_path(&dir.path().join("snapshots"), sim.world.step)).unwrap();
    assert_eq!(last, sim.snapshot());

    let ke = series.column("total_kinetic_energy").unwrap();
    let steps = series.column("step").unwrap();
    for (k, &step) in steps.iter().enumerate() {
        let snap = Snapshot::load(&snapshot_path(&dir.path().join("snapshots"), step as u64)).unwrap();
        let mut probe = Simulation::new(&s.config, &r).unwrap();
        probe.restore(&snap).unwrap();
        let recomputed = probe.world.kinetic_energy();
        assert!((recomputed - ke[k]).abs() <= 1e-12 * ke[k], "step {step}: {recomputed} vs {}", ke[k]);
    }

    // Resuming from a mid-run snapshot reproduces the uninterrupted run.
    let mid = Snapshot::load(&snapshot_path(&dir.path().join("snapshots"), steps[1] as u64)).unwrap();
    let mut resumed = Simulation::new(&s.config, &r).unwrap();
    resumed.restore(&mid).unwrap();
    while resumed.world.step < sim.world.step {
        resumed.step().unwrap();
    }
    assert_eq!(resumed.snapshot(), sim.snapshot());
}

#[test]
fn builtin_list_and_parameters() {
    let all = builtin_scenarios();
    assert!(all.len() >= 6);
    let mut names: Vec<&str> = all.iter().map(|s| s.name.as_str()).collect();
    names.sort_unstable();
    names.dedup();
    assert_eq!(names.len(), all.len());
    assert_eq!(normal_force(3).config.grid.spacing, 0.5);
    for i in 0..4 {
        assert!((normal_force(i).config.grid.spacing - (0.35 + 0.05 * i as f64)).abs() < 1e-15);
    }
    let f = friction().config;
    assert!(f.bodies.iter().all(|b| b.contact.friction == 0.3));
}

#[test]
fn block_seeding_has_2601_points_and_its_mass() {
    let s = normal_force(0);
    let r = validate(&s.config).unwrap();
    let pts = &r.seeded[0].points;
    assert_eq!(pts.len(), 2601);
    let rho = s.config.materials[0].density;
    let expected = rho * 5.0 * 5.0;
    assert!((total_mass(pts) - expected).abs() <= 5e-3 * expected);
}

#[test]
fn beverloo_fit_recovers_synthetic_law() {
    let data: Vec<(f64, f64)> = [2.0, 3.0, 4.0, 5.0].iter().map(|&d0: &f64| (d0, 2.0 * (d0 - 1.0).powf(1.5))).collect();
    let fit = beverloo_fit(&data, 1.0).unwrap();
    assert!((fit.exponent - 1.5).abs() < 1e-6);
    assert!((fit.offset(1.0) - 1.0).abs() < 1e-6);
}
