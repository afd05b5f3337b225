//! Coupling between material points and spheropolygons.
//!
//! A material point within the Verlet distance of a body surface is an
//! identified material point (IMP). It interacts with the body as a disk of
//! radius `r_p` through the body contact law; the force on the point is
//! scattered to the grid and the reaction acts on the body at the contact
//! point. IMPs do not interact with each other through contact.

use thiserror::Error;

use crate::grid::{Grid, GridConfig, Stencil};
use crate::mpm::{self, Material, MaterialPoint, MpmError};
use crate::sdem::{
    body_contact_forces, contact_force, contact_geometry, integrate_rigid, BodyContacts, ContactForce, ContactKey, ContactLedger,
    Feature, Spheropolygon, VerletList,
};
use crate::{cross, Vec2};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CouplingError {
    #[error("no material points and no mobile bodies: the time-step bound is undefined")]
    NoMobileObjects,
    #[error("time step {dt:e} exceeds the stability bound {dt_min:e}")]
    StabilityViolation { dt: f64, dt_min: f64 },
    #[error(transparent)]
    Mpm(#[from] MpmError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingParams {
    pub verlet_distance: f64,
    /// Contact radius `r_p` of an IMP.
    pub contact_radius: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    /// Nodes lighter than this fraction of the largest point mass are treated as empty.
    pub mass_threshold_ratio: f64,
}

impl Default for CouplingParams {
    fn default() -> Self {
        Self {
            verlet_distance: 0.1,
            contact_radius: 0.1,
            kappa1: 0.8,
            kappa2: 0.1,
            mass_threshold_ratio: 1e-12,
        }
    }
}

/// Admissible open interval for `r_p`: `(l_g/√n, l_g)`.
pub fn contact_radius_bounds(spacing: f64, points_per_cell: f64) -> (f64, f64) {
    (spacing * (1.0 / points_per_cell).sqrt(), spacing)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepBudget {
    pub dt: f64,
    pub dt_min: f64,
    pub kappa1: f64,
    pub kappa2: f64,
}

/// `min(κ₁ l_min / c_max, 2π κ₂ √(m_min / k_n))`. The continuum branch is
/// skipped without materials, the rigid branch without mobile bodies.
pub fn critical_dt(grid: &GridConfig, materials: &[Material], bodies: &[Spheropolygon], kappa1: f64, kappa2: f64) -> Result<f64, CouplingError> {
    let c_max = materials.iter().map(Material::wave_speed).fold(0.0, f64::max);
    let mpm_branch = (c_max > 0.0).then(|| kappa1 * grid.spacing / c_max);
    let k_n = bodies.iter().map(|b| b.material.normal_stiffness).fold(0.0, f64::max);
    let m_min = bodies.iter().filter(|b| !b.fixed).map(|b| b.mass).fold(f64::INFINITY, f64::min);
    let dem_branch = (m_min.is_finite() && k_n > 0.0).then(|| 2.0 * std::f64::consts::PI * kappa2 * (m_min / k_n).sqrt());
    match (mpm_branch, dem_branch) {
        (Some(a), Some(b)) => Ok(a.min(b)),
        (Some(a), None) | (None, Some(a)) => Ok(a),
        (None, None) => Err(CouplingError::NoMobileObjects),
    }
}

/// A material point with the bodies whose surface lies within the Verlet distance.
#[derive(Debug, Clone, PartialEq)]
pub struct Imp {
    pub point: usize,
    pub bodies: Vec<usize>,
}

/// Surface distance between a disk of radius `r_p` at `x` and a body.
pub fn surface_gap(x: &Vec2, r_p: f64, body: &Spheropolygon) -> f64 {
    body.closest_feature(x).0 - body.radius - r_p
}

pub fn identify_imps(points: &[MaterialPoint], bodies: &[Spheropolygon], verlet_distance: f64, r_p: f64) -> Vec<Imp> {
    let mut out = Vec::new();
    for (pi, p) in points.iter().enumerate() {
        let mut list = Vec::new();
        for (bi, b) in bodies.iter().enumerate() {
            if (p.position - b.center).norm() >= b.bounding_radius() + r_p + verlet_distance {
                continue;
            }
            if surface_gap(&p.position, r_p, b) < verlet_distance {
                list.push(bi);
            }
        }
        if !list.is_empty() {
            out.push(Imp { point: pi, bodies: list });
        }
    }
    out
}

/// IMP set reused across steps until points plus bodies have moved more
/// than half the Verlet distance.
#[derive(Debug, Clone, Default)]
pub struct ImpList {
    pub imps: Vec<Imp>,
    point_reference: Vec<Vec2>,
    body_reference: Vec<(Vec2, f64)>,
    pub rebuilds: usize,
}

impl ImpList {
    pub fn update(&mut self, points: &[MaterialPoint], bodies: &[Spheropolygon], params: &CouplingParams) -> bool {
        let stale = self.point_reference.len() != points.len() || self.body_reference.len() != bodies.len() || {
            let dp = points
                .iter()
                .zip(&self.point_reference)
                .map(|(p, r)| (p.position - r).norm())
                .fold(0.0, f64::max);
            let db = bodies
                .iter()
                .zip(&self.body_reference)
                .map(|(b, (c, phi))| (b.center - c).norm() + b.bounding_radius() * (b.angle - phi).abs())
                .fold(0.0, f64::max);
            dp + db > 0.5 * params.verlet_distance
        };
        if stale {
            self.imps = identify_imps(points, bodies, params.verlet_distance, params.contact_radius);
            self.point_reference = points.iter().map(|p| p.position).collect();
            self.body_reference = bodies.iter().map(|b| (b.center, b.angle)).collect();
            self.rebuilds += 1;
        }
        stale
    }
}

/// Contact of the disk `(x_p, r_p)` with the nearest feature of `body`,
/// using the body's contact material. The returned force acts on the point.
#[allow(clippy::too_many_arguments)]
pub fn imp_force(
    point_index: usize,
    point: &MaterialPoint,
    r_p: f64,
    body_index: usize,
    body: &Spheropolygon,
    ledger: &mut ContactLedger,
    dt: f64,
) -> Option<(ContactForce, Feature)> {
    let (_, y, feature) = body.closest_feature(&point.position);
    let geom = contact_geometry(&point.position, r_p, &y, body.radius, None)?;
    let v_rel = point.velocity - body.velocity_at(&geom.point);
    let key = ContactKey::Point {
        point: point_index as u32,
        body: body_index as u32,
        feature,
    };
    Some((contact_force(&geom, &body.material, &v_rel, ledger.touch(key), dt), feature))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpContact {
    pub point: usize,
    pub body: usize,
    pub feature: Feature,
    pub contact: ContactForce,
}

/// Per-point and per-body coupling loads from one step.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CouplingForces {
    pub contacts: Vec<ImpContact>,
    /// `(point index, f_p^cont)` for every point with at least one contact.
    pub point_forces: Vec<(usize, Vec2)>,
    /// Force and torque on each body from IMPs.
    pub body_loads: Vec<(Vec2, f64)>,
}

impl CouplingForces {
    pub fn total_point_force(&self) -> Vec2 {
        self.point_forces.iter().map(|(_, f)| *f).sum()
    }

    pub fn total_body_force(&self) -> Vec2 {
        self.body_loads.iter().map(|(f, _)| *f).sum()
    }

    /// `Σ k_n ξ` over all IMP contacts.
    pub fn normal_sum(&self) -> f64 {
        self.contacts.iter().map(|c| c.contact.normal_magnitude).sum()
    }

    /// `Σ |F_t|` over all IMP contacts.
    pub fn tangential_sum(&self) -> f64 {
        self.contacts.iter().map(|c| c.contact.tangential.abs()).sum()
    }
}

pub fn compute_coupling_forces(
    points: &[MaterialPoint],
    bodies: &[Spheropolygon],
    imps: &[Imp],
    r_p: f64,
    ledger: &mut ContactLedger,
    dt: f64,
) -> CouplingForces {
    let mut out = CouplingForces {
        body_loads: vec![(Vec2::zeros(), 0.0); bodies.len()],
        ..CouplingForces::default()
    };
    for imp in imps {
        let p = &points[imp.point];
        let mut total = Vec2::zeros();
        let mut any = false;
        for &bi in &imp.bodies {
            if let Some((c, feature)) = imp_force(imp.point, p, r_p, bi, &bodies[bi], ledger, dt) {
                total += c.force;
                any = true;
                out.contacts.push(ImpContact {
                    point: imp.point,
                    body: bi,
                    feature,
                    contact: c,
                });
            }
        }
        if any {
            out.point_forces.push((imp.point, total));
        }
    }
    accumulate_on_bodies(&out.contacts, bodies, &mut out.body_loads);
    out
}

/// Adds `−f` at each contact point (force and torque about the centre of mass).
pub fn accumulate_on_bodies(contacts: &[ImpContact], bodies: &[Spheropolygon], loads: &mut [(Vec2, f64)]) {
    for c in contacts {
        let f = -c.contact.force;
        let arm = c.contact.point - bodies[c.body].center;
        loads[c.body].0 += f;
        loads[c.body].1 += cross(&arm, &f);
    }
}

/// `f_I^cont += Σ_p f_p^cont S_Ip`.
pub fn scatter_coupling_to_grid(point_forces: &[(usize, Vec2)], stencils: &[Stencil], grid: &mut Grid) {
    for (p, f) in point_forces {
        for e in &stencils[*p] {
            grid.nodes[e.node].f_cont += f * e.weight;
        }
    }
}

/// Prescribed value for one velocity component of a range of points.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityConstraint {
    pub points: std::ops::Range<usize>,
    pub axis: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepDiagnostics {
    pub coupling: CouplingForces,
    pub body_contacts: BodyContacts,
}

#[derive(Debug, Clone)]
pub struct World {
    pub grid: Grid,
    pub points: Vec<MaterialPoint>,
    pub materials: Vec<Material>,
    pub bodies: Vec<Spheropolygon>,
    pub gravity: Vec2,
    pub params: CouplingParams,
    pub constraints: Vec<VelocityConstraint>,
    pub time: f64,
    pub step: u64,
    pub ledger: ContactLedger,
    pub last: StepDiagnostics,
    body_verlet: Option<VerletList>,
    imp_list: ImpList,
    stencils: Vec<Stencil>,
    mass_threshold: f64,
}

impl World {
    pub fn new(grid: Grid, points: Vec<MaterialPoint>, materials: Vec<Material>, bodies: Vec<Spheropolygon>, gravity: Vec2, params: CouplingParams) -> Result<Self, CouplingError> {
        mpm::check_schemes(&materials, &grid.config)?;
        let max_mass = points.iter().map(|p| p.mass).fold(0.0, f64::max);
        Ok(Self {
            grid,
            points,
            materials,
            bodies,
            gravity,
            params,
            constraints: Vec::new(),
            time: 0.0,
            step: 0,
            ledger: ContactLedger::new(),
            last: StepDiagnostics::default(),
            body_verlet: None,
            imp_list: ImpList::default(),
            stencils: Vec::new(),
            mass_threshold: params.mass_threshold_ratio * max_mass,
        })
    }

    pub fn critical_dt(&self) -> Result<f64, CouplingError> {
        let mats: Vec<Material> = self
            .materials
            .iter()
            .enumerate()
            .filter(|(i, _)| self.points.iter().any(|p| p.material == *i))
            .map(|(_, m)| *m)
            .collect();
        critical_dt(&self.grid.config, &mats, &self.bodies, self.params.kappa1, self.params.kappa2)
    }

    /// Verifies `dt` against the stability bound.
    pub fn budget(&self, dt: f64) -> Result<StepBudget, CouplingError> {
        let dt_min = match self.critical_dt() {
            Ok(v) => v,
            Err(CouplingError::NoMobileObjects) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        if !(dt > 0.0) || dt > dt_min {
            return Err(CouplingError::StabilityViolation { dt, dt_min });
        }
        Ok(StepBudget {
            dt,
            dt_min,
            kappa1: self.params.kappa1,
            kappa2: self.params.kappa2,
        })
    }

    /// One coupled step: (i) body contacts and IMP forces, (ii) transfers and
    /// stress update, (iii) grid forces, grid update and point update,
    /// (iv) rigid-body update.
    pub fn step(&mut self, dt: f64) -> Result<(), CouplingError> {
        // (i)
        self.ledger.begin_step();
        let verlet = self
            .body_verlet
            .get_or_insert_with(|| VerletList::build(&self.bodies, self.params.verlet_distance));
        verlet.update(&self.bodies);
        let body_contacts = body_contact_forces(&self.bodies, &verlet.pairs, &mut self.ledger, dt);
        self.imp_list.update(&self.points, &self.bodies, &self.params);
        let coupling = compute_coupling_forces(&self.points, &self.bodies, &self.imp_list.imps, self.params.contact_radius, &mut self.ledger, dt);

        // (ii)
        if !self.points.is_empty() {
            mpm::compute_stencils(&self.points, &self.grid.config, &mut self.stencils)?;
            self.grid.clear();
            mpm::p2g(&self.points, &self.materials, &self.stencils, &mut self.grid, self.mass_threshold);
            mpm::update_stress(&mut self.points, &self.materials, &self.stencils, &self.grid, dt);

            // (iii)
            mpm::nodal_forces(&self.points, &self.stencils, &mut self.grid, self.gravity);
            scatter_coupling_to_grid(&coupling.point_forces, &self.stencils, &mut self.grid);
            mpm::grid_update(&mut self.grid, dt, self.mass_threshold);
            mpm::g2p(&mut self.points, &self.materials, &self.stencils, &self.grid, dt, self.mass_threshold)?;
            for c in &self.constraints {
                for p in &mut self.points[c.points.clone()] {
                    p.position[c.axis] += (c.value - p.velocity[c.axis]) * dt;
                    p.velocity[c.axis] = c.value;
                }
            }
        }

        // (iv)
        let loads: Vec<(Vec2, f64)> = body_contacts
            .loads
            .iter()
            .zip(&coupling.body_loads)
            .map(|(a, b)| (a.0 + b.0, a.1 + b.1))
            .collect();
        integrate_rigid(&mut self.bodies, &loads, self.gravity, dt);
        self.ledger.end_step();

        self.last = StepDiagnostics { coupling, body_contacts };
        self.time += dt;
        self.step += 1;
        Ok(())
    }

    pub fn points_kinetic_energy(&self) -> f64 {
        mpm::kinetic_energy(&self.points)
    }

    pub fn bodies_kinetic_energy(&self) -> f64 {
        self.bodies.iter().map(Spheropolygon::kinetic_energy).sum()
    }

    pub fn kinetic_energy(&self) -> f64 {
        self.points_kinetic_energy() + self.bodies_kinetic_energy()
    }

    /// `−Σ m g·x` over points and mobile bodies.
    pub fn potential_energy(&self) -> f64 {
        let p: f64 = self.points.iter().map(|p| -p.mass * self.gravity.dot(&p.position)).sum();
        let b: f64 = self.bodies.iter().filter(|b| !b.fixed).map(|b| -b.mass * self.gravity.dot(&b.center)).sum();
        p + b
    }

    pub fn mass_threshold(&self) -> f64 {
        self.mass_threshold
    }
}
