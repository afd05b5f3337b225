//! Scenario driver: builds a world from a validated config, steps it and
//! records the time-series channels.

use std::ops::Range;
use std::path::{Path, PathBuf};

use crate::coupling::{CouplingError, VelocityConstraint, World};
use crate::grid::Grid;
use crate::mpm::MaterialPoint;
use crate::Vec2;

use super::config::{Resolved, ScenarioConfig};
use super::output::{BodyState, OutputError, Snapshot, TimeSeries};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("step {step}: {source}")]
    Simulation {
        step: u64,
        #[source]
        source: CouplingError,
    },
    #[error(transparent)]
    Output(#[from] OutputError),
    #[error("snapshot does not match the scenario: {0}")]
    SnapshotMismatch(String),
}

#[derive(Debug, Clone)]
struct Group {
    name: String,
    range: Range<usize>,
}

/// A running scenario.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub world: World,
    pub dt: f64,
    pub dt_min: f64,
    pub t_end: f64,
    pub output_every: usize,
    groups: Vec<Group>,
    body_names: Vec<String>,
    initial_angles: Vec<f64>,
    discharge_level: Option<f64>,
    ground_pair: Option<(usize, usize)>,
    channels: Vec<String>,
}

impl Simulation {
    pub fn new(cfg: &ScenarioConfig, resolved: &Resolved) -> Result<Self, CouplingError> {
        let mut points: Vec<MaterialPoint> = Vec::new();
        let mut groups = Vec::new();
        let mut constraints = Vec::new();
        for s in &resolved.seeded {
            let start = points.len();
            points.extend_from_slice(&s.points);
            let range = start..points.len();
            for (axis, value) in s.prescribed.iter().enumerate() {
                if let Some(value) = value {
                    constraints.push(VelocityConstraint {
                        points: range.clone(),
                        axis,
                        value: *value,
                    });
                }
            }
            groups.push(Group { name: s.name.clone(), range });
        }
        let mut world = World::new(
            Grid::new(resolved.grid),
            points,
            resolved.materials.clone(),
            resolved.bodies.clone(),
            Vec2::new(cfg.gravity[0], cfg.gravity[1]),
            resolved.params,
        )?;
        world.constraints = constraints;
        let body_names: Vec<String> = cfg.bodies.iter().map(|b| b.name.clone()).collect();
        let find = |n: &Option<String>| n.as_ref().and_then(|n| body_names.iter().position(|b| b == n));
        let ground_pair = match (find(&cfg.output.ground_contact_body), find(&cfg.output.ground_body)) {
            (Some(a), Some(b)) => Some((a.min(b), a.max(b))),
            _ => None,
        };
        let mut sim = Self {
            initial_angles: world.bodies.iter().map(|b| b.angle).collect(),
            world,
            dt: resolved.dt,
            dt_min: resolved.dt_min,
            t_end: cfg.schedule.t_end,
            output_every: cfg.schedule.output_every,
            groups,
            body_names,
            discharge_level: cfg.output.discharge_level,
            ground_pair,
            channels: Vec::new(),
        };
        sim.channels = sim.build_channel_names();
        Ok(sim)
    }

    fn build_channel_names(&self) -> Vec<String> {
        let mut c: Vec<String> = [
            "t",
            "step",
            "kinetic_energy_points",
            "kinetic_energy_bodies",
            "total_kinetic_energy",
            "potential_energy",
            "mechanical_energy",
            "coupling_normal_force",
            "coupling_tangential_force",
            "coupling_force_x",
            "coupling_force_y",
            "imp_contacts",
            "body_contact_pairs",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        for g in &self.groups {
            for suffix in ["vx", "vy", "vx2", "vy2", "kinetic_energy", "x", "y"] {
                c.push(format!("{}_{suffix}", g.name));
            }
        }
        for (b, name) in self.world.bodies.iter().zip(&self.body_names) {
            if b.fixed {
                for suffix in ["load_x", "load_y"] {
                    c.push(format!("{name}_{suffix}"));
                }
            } else {
                for suffix in ["x", "y", "vx", "vy", "vx2", "vy2", "omega", "inclination_deg", "load_x", "load_y"] {
                    c.push(format!("{name}_{suffix}"));
                }
            }
        }
        if self.discharge_level.is_some() {
            c.push("discharged_mass".into());
        }
        if self.ground_pair.is_some() {
            c.push("ground_contact".into());
        }
        c
    }

    pub fn channel_names(&self) -> &[String] {
        &self.channels
    }

    pub fn total_steps(&self) -> u64 {
        (self.t_end / self.dt - 1e-9).ceil().max(0.0) as u64
    }

    pub fn step(&mut self) -> Result<(), RunError> {
        let step = self.world.step;
        self.world.step(self.dt).map_err(|source| RunError::Simulation { step, source })
    }

    /// Index range of the points seeded by the named group.
    pub fn group(&self, name: &str) -> Option<Range<usize>> {
        self.groups.iter().find(|g| g.name == name).map(|g| g.range.clone())
    }

    pub fn body_index(&self, name: &str) -> Option<usize> {
        self.body_names.iter().position(|b| b == name)
    }

    /// Current values of all channels.
    pub fn record(&self) -> Vec<f64> {
        let w = &self.world;
        let c = &w.last.coupling;
        let f = c.total_point_force();
        let mut r = vec![
            w.time,
            w.step as f64,
            w.points_kinetic_energy(),
            w.bodies_kinetic_energy(),
            w.kinetic_energy(),
            w.potential_energy(),
            w.kinetic_energy() + w.potential_energy(),
            c.normal_sum(),
            c.tangential_sum(),
            f.x,
            f.y,
            c.contacts.len() as f64,
            w.last.body_contacts.touching.len() as f64,
        ];
        for g in &self.groups {
            let pts = &w.points[g.range.clone()];
            let m: f64 = pts.iter().map(|p| p.mass).sum();
            let (mv, mx) = pts.iter().fold((Vec2::zeros(), Vec2::zeros()), |(a, b), p| (a + p.velocity * p.mass, b + p.position * p.mass));
            let (v, x) = if m > 0.0 { (mv / m, mx / m) } else { (Vec2::zeros(), Vec2::zeros()) };
            let ke: f64 = pts.iter().map(MaterialPoint::kinetic_energy).sum();
            r.extend_from_slice(&[v.x, v.y, v.x * v.x, v.y * v.y, ke, x.x, x.y]);
        }
        for (i, b) in w.bodies.iter().enumerate() {
            let load = c.body_loads.get(i).map_or(Vec2::zeros(), |l| l.0);
            if b.fixed {
                r.extend_from_slice(&[load.x, load.y]);
            } else {
                let incl = (b.angle - self.initial_angles[i]).abs().to_degrees();
                r.extend_from_slice(&[
                    b.center.x,
                    b.center.y,
                    b.velocity.x,
                    b.velocity.y,
                    b.velocity.x * b.velocity.x,
                    b.velocity.y * b.velocity.y,
                    b.omega,
                    incl,
                    load.x,
                    load.y,
                ]);
            }
        }
        if let Some(level) = self.discharge_level {
            r.push(w.points.iter().filter(|p| p.position.y < level).map(|p| p.mass).sum());
        }
        if let Some(pair) = self.ground_pair {
            r.push(if w.last.body_contacts.touching.contains(&pair) { 1.0 } else { 0.0 });
        }
        r
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            time: self.world.time,
            step: self.world.step,
            points: self.world.points.clone(),
            bodies: self.world.bodies.iter().map(BodyState::from).collect(),
        }
    }

    /// Replaces point and body states with those of a snapshot.
    pub fn restore(&mut self, snap: &Snapshot) -> Result<(), RunError> {
        if snap.points.len() != self.world.points.len() || snap.bodies.len() != self.world.bodies.len() {
            return Err(RunError::SnapshotMismatch(format!(
                "snapshot has {} points and {} bodies, scenario has {} and {}",
                snap.points.len(),
                snap.bodies.len(),
                self.world.points.len(),
                self.world.bodies.len()
            )));
        }
        self.world.points.clone_from(&snap.points);
        for (b, s) in self.world.bodies.iter_mut().zip(&snap.bodies) {
            s.apply(b);
        }
        self.world.time = snap.time;
        self.world.step = snap.step;
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out_dir: Option<PathBuf>,
    /// Overrides the scheduled end time.
    pub until: Option<f64>,
    /// Overrides the scenario's snapshot cadence (steps; 0 disables).
    pub snapshot_every: Option<usize>,
}

/// Runs a scenario to its end time, recording the series and, with an
/// output directory, writing `series.csv`, `scenario.toml` and snapshots.
pub fn run(cfg: &ScenarioConfig, resolved: &Resolved, opts: &RunOptions) -> Result<(Simulation, TimeSeries), RunError> {
    let mut sim = Simulation::new(cfg, resolved).map_err(|source| RunError::Simulation { step: 0, source })?;
    if let Some(t) = opts.until {
        sim.t_end = t;
    }
    let snapshot_every = opts.snapshot_every.unwrap_or(cfg.output.snapshot_every);
    let snap_dir = match &opts.out_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(OutputError::from)?;
            std::fs::write(dir.join("scenario.toml"), cfg.to_toml()).map_err(OutputError::from)?;
            let s = dir.join("snapshots");
            if snapshot_every > 0 {
                std::fs::create_dir_all(&s).map_err(OutputError::from)?;
            }
            Some(s)
        }
        None => None,
    };
    let save_snapshot = |sim: &Simulation, dir: &Option<PathBuf>| -> Result<(), RunError> {
        if let (Some(dir), true) = (dir, snapshot_every > 0) {
            sim.snapshot().save(&snapshot_path(dir, sim.world.step))?;
        }
        Ok(())
    };

    let mut series = TimeSeries::new(sim.channel_names().to_vec());
    series.push(sim.record());
    save_snapshot(&sim, &snap_dir)?;
    let total = sim.total_steps();
    for k in 1..=total {
        sim.step()?;
        if k % sim.output_every as u64 == 0 || k == total {
            series.push(sim.record());
        }
        if snapshot_every > 0 && k % snapshot_every as u64 == 0 {
            save_snapshot(&sim, &snap_dir)?;
        }
    }
    if let Some(dir) = &opts.out_dir {
        series.save_csv(&dir.join("series.csv"))?;
    }
    Ok((sim, series))
}

pub fn snapshot_path(dir: &Path, step: u64) -> PathBuf {
    dir.join(format!("step_{step:09}.snap"))
}
