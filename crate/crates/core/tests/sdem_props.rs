use mpm_sdem::sdem::{
    body_contact_forces, contact_elastic_energy, contact_force, contact_geometry, integrate_rigid, ContactLedger, ContactMaterial,
    MassSpec, Spheropolygon, VerletList,
};
use mpm_sdem::Vec2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn material(mu: f64) -> ContactMaterial {
    ContactMaterial::new(6e6, 3e5, mu).unwrap()
}

fn rounded_square(c: Vec2, half: f64, angle: f64, mu: f64) -> Spheropolygon {
    let mut b = Spheropolygon::rectangle(-half, -half, half, half, 0.2 * half, MassSpec::Density(2.0), false, material(mu)).unwrap();
    b.set_pose(c, angle);
    b
}

fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

fn total_momentum(bodies: &[Spheropolygon]) -> Vec2 {
    bodies.iter().map(Spheropolygon::momentum).sum()
}

/// Steps a free two-body system until the bodies separate again.
fn collide(mut bodies: Vec<Spheropolygon>, dt: f64) -> (Vec<Spheropolygon>, Vec<f64>, bool) {
    let pairs = [(0, 1)];
    let mut ledger = ContactLedger::new();
    let mut energies = Vec::new();
    let mut touched = false;
    for _ in 0..200_000 {
        ledger.begin_step();
        let c = body_contact_forces(&bodies, &pairs, &mut ledger, dt);
        ledger.end_step();
        let third: Vec2 = c.loads.iter().map(|l| l.0).sum();
        assert!(third.norm() <= 1e-10 * c.loads[0].0.norm().max(1e-300), "net contact force {third}");
        integrate_rigid(&mut bodies, &c.loads, Vec2::zeros(), dt);
        let e = bodies.iter().map(Spheropolygon::kinetic_energy).sum::<f64>() + contact_elastic_energy(&bodies, &pairs);
        energies.push(e);
        if c.touching.is_empty() && touched {
            return (bodies, energies, true);
        }
        touched |= !c.touching.is_empty();
    }
    (bodies, energies, false)
}

fn dem_bound(bodies: &[Spheropolygon], kappa2: f64) -> f64 {
    let m = bodies.iter().filter(|b| !b.fixed).map(|b| b.mass).fold(f64::INFINITY, f64::min);
    2.0 * std::f64::consts::PI * kappa2 * (m / bodies[0].material.normal_stiffness).sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn collision_at_the_step_bound_conserves_momentum(
        a0 in 0.0f64..1.6, a1 in 0.0f64..1.6, dy in -0.8f64..0.8, v in 0.5f64..3.0, w in -2.0f64..2.0, mu in 0.0f64..0.6,
    ) {
        let mut bodies = vec![rounded_square(Vec2::new(0.0, 0.0), 1.0, a0, mu), rounded_square(Vec2::new(3.4, dy), 1.0, a1, mu)];
        bodies[0].velocity = Vec2::new(v, 0.0);
        bodies[0].omega = w;
        bodies[1].velocity = Vec2::new(-0.5 * v, 0.1);
        let dt = dem_bound(&bodies, 0.1);
        let p0 = total_momentum(&bodies);
        let (after, _, separated) = collide(bodies, dt);
        prop_assert!(separated);
        let p1 = total_momentum(&after);
        prop_assert!((p1 - p0).norm() <= 1e-10 * p0.norm().max(1.0), "momentum {p0} -> {p1}");
    }

    #[test]
    fn frictionless_collision_energy_drift_on_a_fine_step(
        a0 in 0.0f64..1.6, a1 in 0.0f64..1.6, dy in -0.8f64..0.8, v in 0.5f64..3.0, w in -2.0f64..2.0,
    ) {
        let mut bodies = vec![rounded_square(Vec2::new(0.0, 0.0), 1.0, a0, 0.0), rounded_square(Vec2::new(3.4, dy), 1.0, a1, 0.0)];
        bodies[0].velocity = Vec2::new(v, 0.0);
        bodies[0].omega = w;
        bodies[1].velocity = Vec2::new(-0.5 * v, 0.1);
        let dt = dem_bound(&bodies, 0.01);
        let e0: f64 = bodies.iter().map(Spheropolygon::kinetic_energy).sum();
        let (_, energies, separated) = collide(bodies, dt);
        prop_assert!(separated);
        let e1 = *energies.last().unwrap();
        prop_assert!((e1 - e0).abs() <= 5e-3 * e0, "energy {e0} -> {e1}");
    }

    #[test]
    fn forces_rotate_with_the_configuration(theta in 0.0f64..std::f64::consts::TAU, a0 in 0.0f64..1.6, a1 in 0.0f64..1.6, dy in -0.8f64..0.8) {
        let scene = |rot: f64| {
            let r = nalgebra::Rotation2::new(rot);
            let mut a = rounded_square(r * Vec2::new(0.0, 0.0), 1.0, a0 + rot, 0.3);
            let mut b = rounded_square(r * Vec2::new(2.35, dy), 1.0, a1 + rot, 0.3);
            a.velocity = r * Vec2::new(0.4, 0.1);
            b.omega = 0.3;
            let mut ledger = ContactLedger::new();
            ledger.begin_step();
            body_contact_forces(&[a, b], &[(0, 1)], &mut ledger, 1e-4)
        };
        let base = scene(0.0);
        let turned = scene(theta);
        let r = nalgebra::Rotation2::new(theta);
        for (l0, l1) in base.loads.iter().zip(&turned.loads) {
            let scale = l0.0.norm().max(1.0);
            prop_assert!((r * l0.0 - l1.0).norm() <= 1e-10 * scale, "{} vs {}", r * l0.0, l1.0);
            prop_assert!((l0.1 - l1.1).abs() <= 1e-10 * scale * 4.0);
        }
        prop_assert_eq!(base.touching, turned.touching);
    }

    #[test]
    fn tangential_history_stays_within_the_coulomb_limit(
        steps in prop::collection::vec((0.0f64..0.05, -5.0f64..5.0, -5.0f64..5.0), 1..60), mu in 0.0f64..1.0,
    ) {
        let m = material(mu);
        let mut history = 0.0;
        for (overlap, vx, vy) in steps {
            let x = Vec2::new(0.0, 0.0);
            let y = Vec2::new(0.0, 0.3 - overlap);
            let Some(g) = contact_geometry(&x, 0.15, &y, 0.15, None) else { continue };
            let f = contact_force(&g, &m, &Vec2::new(vx, vy), &mut history, 1e-3);
            let limit = mu * f.normal_magnitude / m.tangential_stiffness;
            prop_assert!(history.abs() <= limit * (1.0 + 1e-12) + 1e-300, "{history} > {limit}");
            prop_assert!(f.tangential.abs() <= mu * f.normal_magnitude * (1.0 + 1e-12) + 1e-300);
        }
    }
}

#[test]
fn verlet_list_matches_all_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10 {
        let bodies: Vec<Spheropolygon> = (0..50)
            .map(|_| {
                let c = Vec2::new(rng.gen_range(0.0..12.0), rng.gen_range(0.0..12.0));
                let mut b = rounded_square(c, rng.gen_range(0.3..0.8), rng.gen_range(0.0..3.0), 0.4);
                b.velocity = Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                b.omega = rng.gen_range(-1.0..1.0);
                b
            })
            .collect();
        let list = VerletList::build(&bodies, 0.2);
        let (mut la, mut lb) = (ContactLedger::new(), ContactLedger::new());
        la.begin_step();
        lb.begin_step();
        let a = body_contact_forces(&bodies, &list.pairs, &mut la, 1e-4);
        let b = body_contact_forces(&bodies, &all_pairs(bodies.len()), &mut lb, 1e-4);
        assert!(!b.touching.is_empty());
        assert_eq!(a, b);
    }
}

#[test]
fn leapfrog_rotation_keeps_energy() {
    let mut b = vec![rounded_square(Vec2::new(1.0, 1.0), 0.5, 0.2, 0.0)];
    b[0].omega = 2.5;
    let e0 = b[0].kinetic_energy();
    for k in 1..=1000 {
        integrate_rigid(&mut b, &[(Vec2::zeros(), 0.0)], Vec2::zeros(), 1e-3);
        assert!((b[0].angle - (0.2 + 2.5e-3 * k as f64)).abs() < 1e-12);
    }
    assert!((b[0].kinetic_energy() - e0).abs() <= 1e-12 * e0);
}
