//! Spheropolygon rigid bodies: mass properties, vertex–edge contact with
//! Coulomb friction and tangential history, Verlet lists and leapfrog
//! integration.
//!
//! Every vertex of one body is tested against the closest feature (edge
//! interior or vertex) of the other body. Vertex–edge contacts are evaluated
//! from both sides; a vertex–vertex contact is evaluated once, and only when
//! each vertex is the other's closest feature.

use std::collections::HashMap;
use std::f64::consts::PI;

use thiserror::Error;

use crate::{cross, perp_scaled, Vec2};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SdemError {
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    #[error("invalid contact material: {0}")]
    InvalidMaterial(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactMaterial {
    pub normal_stiffness: f64,
    pub tangential_stiffness: f64,
    pub friction: f64,
}

impl ContactMaterial {
    pub fn new(normal_stiffness: f64, tangential_stiffness: f64, friction: f64) -> Result<Self, SdemError> {
        let m = Self {
            normal_stiffness,
            tangential_stiffness,
            friction,
        };
        if !(normal_stiffness > 0.0 && tangential_stiffness > 0.0 && friction >= 0.0) {
            return Err(SdemError::InvalidMaterial(format!("{m:?}")));
        }
        Ok(m)
    }

    /// Material used between two bodies: mean stiffnesses, mean friction.
    pub fn combine(&self, other: &Self) -> Self {
        if self == other {
            return *self;
        }
        Self {
            normal_stiffness: 0.5 * (self.normal_stiffness + other.normal_stiffness),
            tangential_stiffness: 0.5 * (self.tangential_stiffness + other.tangential_stiffness),
            friction: 0.5 * (self.friction + other.friction),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MassSpec {
    /// Areal density; mass and inertia follow from the shape.
    Density(f64),
    /// Total mass; inertia scaled from a uniform distribution.
    Mass(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spheropolygon {
    /// Body-frame vertices, counter-clockwise, centred on the centre of mass.
    pub local_vertices: Vec<Vec2>,
    pub radius: f64,
    pub center: Vec2,
    pub angle: f64,
    pub velocity: Vec2,
    pub omega: f64,
    pub mass: f64,
    pub inertia: f64,
    pub fixed: bool,
    pub material: ContactMaterial,
    world_vertices: Vec<Vec2>,
    bounding_radius: f64,
}

/// Area, first moment and polar second moment about the origin.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    area: f64,
    first: Vec2,
    polar: f64,
}

impl std::ops::AddAssign for Moments {
    fn add_assign(&mut self, o: Self) {
        self.area += o.area;
        self.first += o.first;
        self.polar += o.polar;
    }
}

impl std::ops::SubAssign for Moments {
    fn sub_assign(&mut self, o: Self) {
        self.area -= o.area;
        self.first -= o.first;
        self.polar -= o.polar;
    }
}

fn polygon_moments(v: &[Vec2]) -> Moments {
    let mut m = Moments::default();
    for k in 0..v.len() {
        let (p, q) = (v[k], v[(k + 1) % v.len()]);
        let c = cross(&p, &q);
        m.area += 0.5 * c;
        m.first += (p + q) * (c / 6.0);
        m.polar += c * (p.x * p.x + p.x * q.x + q.x * q.x + p.y * p.y + p.y * q.y + q.y * q.y) / 12.0;
    }
    m
}

/// Moments of a shape with known area, centroid and centroidal polar moment.
fn shifted(area: f64, centroid: Vec2, polar_centroidal: f64) -> Moments {
    Moments {
        area,
        first: centroid * area,
        polar: polar_centroidal + area * centroid.norm_squared(),
    }
}

fn segments_intersect(a0: Vec2, a1: Vec2, b0: Vec2, b1: Vec2) -> bool {
    let d1 = cross(&(a1 - a0), &(b0 - a0));
    let d2 = cross(&(a1 - a0), &(b1 - a0));
    let d3 = cross(&(b1 - b0), &(a0 - b0));
    let d4 = cross(&(b1 - b0), &(a1 - b0));
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

/// Mass distribution of polygon ⊕ disk: the polygon, one rectangle of width
/// `a` per edge, a circular sector at each convex vertex and a kite removed at
/// each reflex vertex where neighbouring rectangles overlap.
fn sphero_moments(v: &[Vec2], a: f64) -> Moments {
    let n = v.len();
    if n == 1 {
        return shifted(PI * a * a, v[0], 0.5 * PI * a.powi(4));
    }
    let mut m = if n >= 3 { polygon_moments(v) } else { Moments::default() };
    if a == 0.0 {
        return m;
    }
    let outward = |d: Vec2| Vec2::new(d.y, -d.x) / d.norm();
    for k in 0..n {
        let (p, q) = (v[k], v[(k + 1) % n]);
        let len = (q - p).norm();
        let nrm = outward(q - p);
        let c = (p + q) * 0.5 + nrm * (0.5 * a);
        let area = len * a;
        m += shifted(area, c, area * (len * len + a * a) / 12.0);
    }
    for k in 0..n {
        let prev = v[(k + n - 1) % n];
        let cur = v[k];
        let next = v[(k + 1) % n];
        let d0 = cur - prev;
        let d1 = next - cur;
        let theta = cross(&d0, &d1).atan2(d0.dot(&d1));
        let n0 = outward(d0);
        let n1 = outward(d1);
        if theta > 0.0 {
            let area = 0.5 * theta * a * a;
            let bis = {
                let s = n0 + n1;
                if s.norm() > 1e-12 {
                    s.normalize()
                } else {
                    // Half-turn at the end of a segment.
                    d0.normalize()
                }
            };
            let rel = bis * (4.0 * a * (0.5 * theta).sin() / (3.0 * theta));
            let polar_apex = 0.25 * theta * a.powi(4);
            m += Moments {
                area,
                first: (cur + rel) * area,
                polar: polar_apex + 2.0 * cur.dot(&(rel * area)) + area * cur.norm_squared(),
            };
        } else if theta < 0.0 {
            let half = 0.5 * theta.abs();
            let bis = (n0 + n1).normalize();
            let apex = cur + bis * (a / half.cos());
            let kite = [cur, cur + n1 * a, apex, cur + n0 * a];
            let mut km = polygon_moments(&kite);
            if km.area < 0.0 {
                km.area = -km.area;
                km.first = -km.first;
                km.polar = -km.polar;
            }
            m -= km;
        }
    }
    m
}

impl Spheropolygon {
    /// Builds a body from counter-clockwise vertices (any frame) and centres
    /// it on its centre of mass, which becomes the initial pose position.
    pub fn build(vertices: &[Vec2], radius: f64, mass: MassSpec, fixed: bool, material: ContactMaterial) -> Result<Self, SdemError> {
        if vertices.is_empty() {
            return Err(SdemError::DegenerateGeometry("no vertices".into()));
        }
        if !(radius >= 0.0) || vertices.iter().any(|v| !v.x.is_finite() || !v.y.is_finite()) {
            return Err(SdemError::DegenerateGeometry("non-finite input or negative radius".into()));
        }
        let n = vertices.len();
        if n >= 3 {
            let area = polygon_moments(vertices).area;
            if !(area > 0.0) {
                return Err(SdemError::DegenerateGeometry(format!("polygon area {area} is not positive (vertices must be counter-clockwise)")));
            }
            for i in 0..n {
                for j in (i + 1)..n {
                    if j == i + 1 || (i == 0 && j == n - 1) {
                        continue;
                    }
                    if segments_intersect(vertices[i], vertices[(i + 1) % n], vertices[j], vertices[(j + 1) % n]) {
                        return Err(SdemError::DegenerateGeometry(format!("edges {i} and {j} intersect")));
                    }
                }
            }
        }
        if n >= 2 {
            for k in 0..n {
                if vertices[(k + 1) % n] == vertices[k] {
                    return Err(SdemError::DegenerateGeometry(format!("repeated vertex {k}")));
                }
            }
        }
        let m = sphero_moments(vertices, radius);
        if !(m.area > 0.0) {
            return Err(SdemError::DegenerateGeometry("zero area and zero radius".into()));
        }
        let centroid = m.first / m.area;
        let polar_c = m.polar - m.area * centroid.norm_squared();
        let (mass, inertia) = match mass {
            MassSpec::Density(rho) => (rho * m.area, rho * polar_c),
            MassSpec::Mass(total) => (total, total * polar_c / m.area),
        };
        if !(mass > 0.0 && inertia > 0.0) {
            return Err(SdemError::DegenerateGeometry(format!("mass {mass}, inertia {inertia}")));
        }
        let local: Vec<Vec2> = vertices.iter().map(|v| v - centroid).collect();
        let bounding_radius = local.iter().map(|v| v.norm()).fold(0.0, f64::max) + radius;
        let mut body = Self {
            world_vertices: local.clone(),
            local_vertices: local,
            radius,
            center: centroid,
            angle: 0.0,
            velocity: Vec2::zeros(),
            omega: 0.0,
            mass,
            inertia,
            fixed,
            material,
            bounding_radius,
        };
        body.update_world();
        Ok(body)
    }

    pub fn disk(center: Vec2, radius: f64, mass: MassSpec, fixed: bool, material: ContactMaterial) -> Result<Self, SdemError> {
        Self::build(&[center], radius, mass, fixed, material)
    }

    /// Axis-aligned rectangle core `[x0,x1]×[y0,y1]` with sphero radius `a`.
    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64, a: f64, mass: MassSpec, fixed: bool, material: ContactMaterial) -> Result<Self, SdemError> {
        let v = [Vec2::new(x0, y0), Vec2::new(x1, y0), Vec2::new(x1, y1), Vec2::new(x0, y1)];
        Self::build(&v, a, mass, fixed, material)
    }

    pub fn update_world(&mut self) {
        let (s, c) = self.angle.sin_cos();
        for (w, l) in self.world_vertices.iter_mut().zip(&self.local_vertices) {
            *w = self.center + Vec2::new(c * l.x - s * l.y, s * l.x + c * l.y);
        }
    }

    pub fn set_pose(&mut self, center: Vec2, angle: f64) {
        self.center = center;
        self.angle = angle;
        self.update_world();
    }

    pub fn world_vertices(&self) -> &[Vec2] {
        &self.world_vertices
    }

    /// Radius of the circle about the centre of mass that contains the body.
    pub fn bounding_radius(&self) -> f64 {
        self.bounding_radius
    }

    /// Rigid-body velocity of the material point of this body at `p`.
    pub fn velocity_at(&self, p: &Vec2) -> Vec2 {
        self.velocity + perp_scaled(self.omega, &(p - self.center))
    }

    pub fn kinetic_energy(&self) -> f64 {
        0.5 * self.mass * self.velocity.norm_squared() + 0.5 * self.inertia * self.omega * self.omega
    }

    pub fn momentum(&self) -> Vec2 {
        self.velocity * self.mass
    }

    /// Closest point on the core polygon to `x`, with the feature it lies on.
    pub fn closest_feature(&self, x: &Vec2) -> (f64, Vec2, Feature) {
        let w = &self.world_vertices;
        let n = w.len();
        if n == 1 {
            return ((x - w[0]).norm(), w[0], Feature::Vertex(0));
        }
        let edges = if n == 2 { 1 } else { n };
        let mut best = (f64::INFINITY, w[0], Feature::Vertex(0));
        for k in 0..edges {
            let (e0, e1) = (w[k], w[(k + 1) % n]);
            let (d, y, t) = segment_projection(x, &e0, &e1);
            if d < best.0 {
                let feature = if t <= 0.0 {
                    Feature::Vertex(k as u32)
                } else if t >= 1.0 {
                    Feature::Vertex(((k + 1) % n) as u32)
                } else {
                    Feature::Edge(k as u32)
                };
                best = (d, y, feature);
            }
        }
        best
    }

    /// Outward normal of edge `k` (used only when a vertex lies exactly on it).
    fn edge_normal(&self, k: usize) -> Vec2 {
        let w = &self.world_vertices;
        let d = w[(k + 1) % w.len()] - w[k];
        Vec2::new(d.y, -d.x).normalize()
    }
}

fn segment_projection(p: &Vec2, e0: &Vec2, e1: &Vec2) -> (f64, Vec2, f64) {
    let d = e1 - e0;
    let t = (p - e0).dot(&d) / d.norm_squared();
    let y = if t <= 0.0 {
        *e0
    } else if t >= 1.0 {
        *e1
    } else {
        e0 + d * t
    };
    ((p - y).norm(), y, t)
}

/// Distance from `p` to the closed segment `e0–e1` and the closest point.
pub fn point_edge_distance(p: &Vec2, e0: &Vec2, e1: &Vec2) -> (f64, Vec2) {
    let (d, y, _) = segment_projection(p, e0, e1);
    (d, y)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Feature {
    Edge(u32),
    Vertex(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ContactKey {
    /// Vertex `vertex` of body `owner` against `feature` of body `other`.
    Body { owner: u32, vertex: u32, other: u32, feature: Feature },
    /// Material point treated as a disk against `feature` of body `body`.
    Point { point: u32, body: u32, feature: Feature },
}

/// Tangential displacement history per feature pair. Entries not touched
/// during a step are dropped at [`ContactLedger::end_step`].
#[derive(Debug, Clone, Default)]
pub struct ContactLedger {
    entries: HashMap<ContactKey, (f64, u64)>,
    stamp: u64,
}

impl ContactLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn begin_step(&mut self) {
        self.stamp += 1;
    }

    pub fn end_step(&mut self) {
        let s = self.stamp;
        self.entries.retain(|_, e| e.1 == s);
    }

    /// History for `key`, created at zero and marked as seen this step.
    pub fn touch(&mut self, key: ContactKey) -> &mut f64 {
        let s = self.stamp;
        let e = self.entries.entry(key).or_insert((0.0, s));
        e.1 = s;
        &mut e.0
    }

    pub fn get(&self, key: &ContactKey) -> Option<f64> {
        self.entries.get(key).map(|e| e.0)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ContactKey, f64)> {
        self.entries.iter().map(|(k, v)| (k, v.0))
    }

    pub fn insert(&mut self, key: ContactKey, delta_t: f64) {
        self.entries.insert(key, (delta_t, self.stamp));
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactGeometry {
    /// Unit vector from the vertex toward the closest point on the other feature.
    pub normal: Vec2,
    pub overlap: f64,
    /// Midpoint of the overlap interval.
    pub point: Vec2,
}

/// Overlap of a disk of radius `a_i` at `x` with a disk of radius `a_j` at
/// the closest point `y`; `fallback_normal` is used when `x == y`.
pub fn contact_geometry(x: &Vec2, a_i: f64, y: &Vec2, a_j: f64, fallback_normal: Option<Vec2>) -> Option<ContactGeometry> {
    let r = y - x;
    let d = r.norm();
    let overlap = a_i + a_j - d;
    if overlap <= 0.0 {
        return None;
    }
    let normal = if d > 0.0 {
        r / d
    } else {
        fallback_normal?
    };
    Some(ContactGeometry {
        normal,
        overlap,
        point: x + normal * (a_i - 0.5 * overlap),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactForce {
    /// Force on the owner of the vertex (or material point).
    pub force: Vec2,
    pub point: Vec2,
    pub normal: Vec2,
    /// `k_n ζ`, non-negative.
    pub normal_magnitude: f64,
    /// Signed tangential component along `(−n_y, n_x)`.
    pub tangential: f64,
}

/// Normal spring plus Coulomb-clamped tangential spring. `relative_velocity`
/// is the vertex owner's surface velocity minus the other body's at the
/// contact point; `history` is advanced by its tangential part times `dt`.
pub fn contact_force(geom: &ContactGeometry, material: &ContactMaterial, relative_velocity: &Vec2, history: &mut f64, dt: f64) -> ContactForce {
    let n = geom.normal;
    let t = Vec2::new(-n.y, n.x);
    let fn_mag = material.normal_stiffness * geom.overlap;
    *history += relative_velocity.dot(&t) * dt;
    let limit = material.friction * fn_mag / material.tangential_stiffness;
    if history.abs() > limit {
        *history = limit.copysign(*history);
    }
    let ft = -material.tangential_stiffness * *history;
    ContactForce {
        force: -n * fn_mag + t * ft,
        point: geom.point,
        normal: n,
        normal_magnitude: fn_mag,
        tangential: ft,
    }
}

/// Contact between a vertex disk `(x, a_i)` and edge `e0–e1` with sphero
/// radius `a_j`. `surface_velocity` maps a contact point to the relative
/// velocity there.
#[allow(clippy::too_many_arguments)]
pub fn vertex_edge_contact(
    x: &Vec2,
    a_i: f64,
    e0: &Vec2,
    e1: &Vec2,
    a_j: f64,
    key: ContactKey,
    material: &ContactMaterial,
    surface_velocity: impl Fn(&Vec2) -> Vec2,
    ledger: &mut ContactLedger,
    dt: f64,
) -> Option<ContactForce> {
    let (_, y) = point_edge_distance(x, e0, e1);
    let d = e1 - e0;
    let geom = contact_geometry(x, a_i, &y, a_j, Some(Vec2::new(-d.y, d.x).normalize()))?;
    let v = surface_velocity(&geom.point);
    Some(contact_force(&geom, material, &v, ledger.touch(key), dt))
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PairResult {
    /// Total force on body `i`; body `j` receives the negative.
    pub force_on_i: Vec2,
    pub torque_i: f64,
    pub torque_j: f64,
    pub contacts: usize,
}

/// One directed pass: vertices of `bi` against the closest features of `bj`.
#[allow(clippy::too_many_arguments)]
fn directed_contacts(
    i: usize,
    bi: &Spheropolygon,
    j: usize,
    bj: &Spheropolygon,
    material: &ContactMaterial,
    ledger: &mut ContactLedger,
    dt: f64,
    out: &mut PairResult,
    sign: f64,
) {
    let reach = bi.radius + bj.radius;
    for (k, x) in bi.world_vertices().iter().enumerate() {
        if (x - bj.center).norm() > bj.bounding_radius + bi.radius {
            continue;
        }
        let (d, y, feature) = bj.closest_feature(x);
        if d >= reach {
            continue;
        }
        let fallback = match feature {
            Feature::Edge(e) => Some(bj.edge_normal(e as usize)),
            Feature::Vertex(_) => None,
        };
        let key = match feature {
            Feature::Vertex(l) => {
                let (_, _, back) = bi.closest_feature(&bj.world_vertices()[l as usize]);
                if back != Feature::Vertex(k as u32) || i > j {
                    continue;
                }
                ContactKey::Body { owner: i as u32, vertex: k as u32, other: j as u32, feature }
            }
            Feature::Edge(_) => ContactKey::Body { owner: i as u32, vertex: k as u32, other: j as u32, feature },
        };
        let Some(geom) = contact_geometry(x, bi.radius, &y, bj.radius, fallback) else {
            continue;
        };
        let v_rel = bi.velocity_at(&geom.point) - bj.velocity_at(&geom.point);
        let c = contact_force(&geom, material, &v_rel, ledger.touch(key), dt);
        // `sign` maps the force on `bi` back to the force on the pair's first body.
        out.force_on_i += c.force * sign;
        let (ti, tj) = (cross(&(c.point - bi.center), &c.force), cross(&(c.point - bj.center), &(-c.force)));
        if sign > 0.0 {
            out.torque_i += ti;
            out.torque_j += tj;
        } else {
            out.torque_i += tj;
            out.torque_j += ti;
        }
        out.contacts += 1;
    }
}

/// Contact force and torques between bodies `i` and `j`.
pub fn pair_force_torque(i: usize, j: usize, bodies: &[Spheropolygon], ledger: &mut ContactLedger, dt: f64) -> PairResult {
    let (bi, bj) = (&bodies[i], &bodies[j]);
    let material = bi.material.combine(&bj.material);
    let mut out = PairResult::default();
    directed_contacts(i, bi, j, bj, &material, ledger, dt, &mut out, 1.0);
    directed_contacts(j, bj, i, bi, &material, ledger, dt, &mut out, -1.0);
    out
}

/// Gap between the bounding circles of two bodies.
pub fn bounding_gap(a: &Spheropolygon, b: &Spheropolygon) -> f64 {
    (a.center - b.center).norm() - a.bounding_radius - b.bounding_radius
}

#[derive(Debug, Clone, Default)]
pub struct VerletList {
    pub pairs: Vec<(usize, usize)>,
    pub cutoff: f64,
    reference: Vec<(Vec2, f64)>,
    pub rebuilds: usize,
}

impl VerletList {
    pub fn build(bodies: &[Spheropolygon], cutoff: f64) -> Self {
        let mut list = Self {
            cutoff,
            ..Self::default()
        };
        list.rebuild(bodies);
        list
    }

    fn rebuild(&mut self, bodies: &[Spheropolygon]) {
        self.pairs.clear();
        for i in 0..bodies.len() {
            for j in (i + 1)..bodies.len() {
                if bodies[i].fixed && bodies[j].fixed {
                    continue;
                }
                if bounding_gap(&bodies[i], &bodies[j]) < self.cutoff {
                    self.pairs.push((i, j));
                }
            }
        }
        self.reference = bodies.iter().map(|b| (b.center, b.angle)).collect();
        self.rebuilds += 1;
    }

    /// Largest surface displacement of any body since the last rebuild.
    pub fn max_displacement(&self, bodies: &[Spheropolygon]) -> f64 {
        bodies
            .iter()
            .zip(&self.reference)
            .map(|(b, (c, phi))| (b.center - c).norm() + b.bounding_radius * (b.angle - phi).abs())
            .fold(0.0, f64::max)
    }

    /// Rebuilds when any body has moved more than half the cutoff.
    pub fn update(&mut self, bodies: &[Spheropolygon]) -> bool {
        if self.reference.len() != bodies.len() || self.max_displacement(bodies) > 0.5 * self.cutoff {
            self.rebuild(bodies);
            true
        } else {
            false
        }
    }
}

pub fn update_verlet(bodies: &[Spheropolygon], cutoff: f64) -> VerletList {
    VerletList::build(bodies, cutoff)
}

/// Loads from body–body contacts and the pairs that touched this step.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BodyContacts {
    /// Force and torque on every body.
    pub loads: Vec<(Vec2, f64)>,
    pub touching: Vec<(usize, usize)>,
}

/// Contact forces and torques over the listed pairs, in list order.
pub fn body_contact_forces(bodies: &[Spheropolygon], pairs: &[(usize, usize)], ledger: &mut ContactLedger, dt: f64) -> BodyContacts {
    let mut out = BodyContacts {
        loads: vec![(Vec2::zeros(), 0.0); bodies.len()],
        touching: Vec::new(),
    };
    for &(i, j) in pairs {
        let r = pair_force_torque(i, j, bodies, ledger, dt);
        if r.contacts == 0 {
            continue;
        }
        out.loads[i].0 += r.force_on_i;
        out.loads[i].1 += r.torque_i;
        out.loads[j].0 -= r.force_on_i;
        out.loads[j].1 += r.torque_j;
        out.touching.push((i, j));
    }
    out
}

/// Leapfrog update: `v ← v + (F/m + g)Δt`, `c ← c + vΔt`, likewise for
/// rotation. Fixed bodies are left at rest.
pub fn integrate_rigid(bodies: &mut [Spheropolygon], loads: &[(Vec2, f64)], gravity: Vec2, dt: f64) {
    for (b, (f, tau)) in bodies.iter_mut().zip(loads) {
        if b.fixed {
            b.velocity = Vec2::zeros();
            b.omega = 0.0;
            continue;
        }
        b.velocity += (f / b.mass + gravity) * dt;
        b.omega += tau / b.inertia * dt;
        b.center += b.velocity * dt;
        b.angle += b.omega * dt;
        b.update_world();
    }
}

/// Elastic energy `½ k_n ζ²` summed over the current contacts of the listed pairs.
pub fn contact_elastic_energy(bodies: &[Spheropolygon], pairs: &[(usize, usize)]) -> f64 {
    let mut e = 0.0;
    for &(i, j) in pairs {
        let material = bodies[i].material.combine(&bodies[j].material);
        for (a, b, ia, ib) in [(&bodies[i], &bodies[j], i, j), (&bodies[j], &bodies[i], j, i)] {
            for (k, x) in a.world_vertices().iter().enumerate() {
                let (d, _, feature) = b.closest_feature(x);
                let overlap = a.radius + b.radius - d;
                if overlap <= 0.0 {
                    continue;
                }
                if let Feature::Vertex(l) = feature {
                    let (_, _, back) = a.closest_feature(&b.world_vertices()[l as usize]);
                    if back != Feature::Vertex(k as u32) || ia > ib {
                        continue;
                    }
                }
                e += 0.5 * material.normal_stiffness * overlap * overlap;
            }
        }
    }
    e
}
