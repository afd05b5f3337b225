//! Built-in validation scenarios, derived from the shipped configs in `configs/`.

use super::config::{parse_scenario, InitialStress, ScenarioConfig, ShapeSpec, TimeStep};

const TABLE1: &str = include_str!("../../../../configs/table1_collision.toml");
const DROP: &str = include_str!("../../../../configs/drop_bounce.toml");
const TABLE2: &str = include_str!("../../../../configs/table2_normal_force.toml");
const TABLE3: &str = include_str!("../../../../configs/table3_silo.toml");
const BLOCKS: &str = include_str!("../../../../configs/block_impact.toml");

/// Neck diameters of the silo series.
pub const SILO_NECKS: [f64; 5] = [2.0, 2.5, 3.0, 3.5, 4.0];
/// Horizontal lattice counts of the silo point-count variants (100 rows each).
pub const SILO_LATTICES: [usize; 3] = [80, 90, 100];

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub config: ScenarioConfig,
}

fn base(text: &str) -> ScenarioConfig {
    parse_scenario(text).expect("shipped config parses")
}

fn named(mut config: ScenarioConfig, name: String, description: String) -> Scenario {
    config.name.clone_from(&name);
    config.description = description;
    Scenario { name, config }
}

fn soften(cfg: &mut ScenarioConfig) {
    for m in &mut cfg.materials {
        m.bulk_modulus /= 10.0;
        m.shear_modulus /= 10.0;
    }
}

pub fn table1_collision(hard: bool) -> Scenario {
    let mut c = base(TABLE1);
    c.coupling.dt = TimeStep::Fixed(1.0e-4);
    if !hard {
        soften(&mut c);
    }
    let kind = if hard { "hard" } else { "soft" };
    named(c, format!("table1_{kind}"), format!("Momentum exchange between an elastic MPM disc ({kind} moduli) and an SDEM disc"))
}

pub fn drop_bounce(hard: bool) -> Scenario {
    let mut c = base(DROP);
    c.coupling.dt = TimeStep::Fixed(1.0e-4);
    if hard {
        for m in &mut c.materials {
            m.bulk_modulus *= 10.0;
            m.shear_modulus *= 10.0;
        }
    }
    let kind = if hard { "hard" } else { "soft" };
    let name = if hard { "drop_bounce_hard".to_string() } else { "drop_bounce".to_string() };
    named(c, name, format!("Elastic MPM disc ({kind} moduli) dropped onto a fixed spheropolygon floor"))
}

/// Grid interval `0.35 + 0.05 i`.
pub fn normal_force(i: usize) -> Scenario {
    let mut c = base(TABLE2);
    let d = 0.35 + 0.05 * i as f64;
    c.grid.spacing = d;
    c.grid.origin = [-4.0 * d, -4.0 * d];
    c.grid.size = [24.0 * d, 24.0 * d];
    c.coupling.dt = TimeStep::Fixed(1.0e-4);
    c.seeding[0].initial_stress = InitialStress::SelfWeight;
    named(c, format!("normal_force_{i}"), format!("Elastic MPM square resting on a fixed floor, grid interval {d:.2}"))
}

pub fn friction() -> Scenario {
    let mut c = normal_force(3).config;
    c.bodies[0].contact.friction = 0.3;
    c.bodies[0].shape = ShapeSpec::Rectangle { min: [-1.0, -1.5], max: [16.0, -0.5] };
    c.grid.size = [36.0 * c.grid.spacing, 24.0 * c.grid.spacing];
    c.seeding[0].prescribed_vx = Some(2.0);
    c.seeding[0].velocity = [2.0, 0.0];
    named(c, "friction".into(), "Elastic MPM square dragged along a fixed floor at constant horizontal speed".into())
}

/// Silo with neck diameter `d0` and `nx × 100` points, on a grid three times
/// finer than the shipped config.
pub fn silo(d0: f64, nx: usize) -> Scenario {
    let mut c = base(TABLE3);
    let mid = 3.5;
    for b in &mut c.bodies {
        if let ShapeSpec::Rectangle { min, max } = &mut b.shape {
            match b.name.as_str() {
                "left_plate" => max[0] = mid - 0.5 * d0 - b.sphero_radius,
                "right_plate" => min[0] = mid + 0.5 * d0 + b.sphero_radius,
                _ => {}
            }
        }
    }
    for m in &mut c.materials {
        m.bulk_modulus *= 100.0;
        m.shear_modulus *= 100.0;
    }
    c.grid.spacing /= 3.0;
    c.coupling.dt = TimeStep::Fixed(1.0e-4);
    c.schedule.t_end = 1.5;
    let s = &mut c.seeding[0];
    s.lattice = Some([nx, 100]);
    s.initial_stress = InitialStress::SelfWeight;
    s.lateral_stress_ratio = Some(1.0 - c.materials[0].friction_angle.to_radians().sin());
    named(
        c,
        format!("silo_d{:02}_n{}k", (d0 * 10.0).round() as u32, nx / 10),
        format!("Sand silo discharge, neck diameter {d0}, {} points", nx * 100),
    )
}

pub fn block_impact() -> Scenario {
    let c = base(BLOCKS);
    named(c.clone(), c.name, c.description)
}

/// Every built-in scenario, by name.
pub fn builtin_scenarios() -> Vec<Scenario> {
    let mut v = vec![
        table1_collision(true),
        table1_collision(false),
        drop_bounce(false),
        drop_bounce(true),
    ];
    v.extend((0..4).map(normal_force));
    v.push(friction());
    for d0 in SILO_NECKS {
        for nx in SILO_LATTICES {
            v.push(silo(d0, nx));
        }
    }
    v.push(block_impact());
    for text in [TABLE1, TABLE2, TABLE3] {
        let c = base(text);
        v.push(named(c.clone(), c.name, c.description));
    }
    v
}

pub fn scenario(name: &str) -> Option<Scenario> {
    builtin_scenarios().into_iter().find(|s| s.name == name)
}
