//! Deterministic lattice seeding of material points.

use thiserror::Error;

use crate::constitutive::StressState;
use crate::grid::GridConfig;
use crate::mpm::MaterialPoint;
use crate::{cross, Mat2, Vec2};

use super::config::{InitialStress, MaterialSection, RegionSpec, SeedSection};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeedError {
    #[error("region leaves the grid: point ({x}, {y}) has no full stencil")]
    RegionOutsideDomain { x: f64, y: f64 },
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("points per cell must be a positive perfect square, got {0}")]
    PointsPerCell(usize),
}

/// Points produced by one seeding section.
#[derive(Debug, Clone, PartialEq)]
pub struct Seeded {
    pub name: String,
    pub material: usize,
    pub points: Vec<MaterialPoint>,
    /// Area of the region (not of the lattice cells).
    pub area: f64,
    pub prescribed: [Option<f64>; 2],
}

impl RegionSpec {
    pub fn area(&self) -> f64 {
        match self {
            RegionSpec::Rectangle { min, max } => (max[0] - min[0]) * (max[1] - min[1]),
            RegionSpec::Disk { radius, .. } => std::f64::consts::PI * radius * radius,
            RegionSpec::Polygon { vertices } => {
                let n = vertices.len();
                0.5 * (0..n)
                    .map(|k| {
                        let (p, q) = (vertices[k], vertices[(k + 1) % n]);
                        p[0] * q[1] - p[1] * q[0]
                    })
                    .sum::<f64>()
            }
        }
    }

    pub fn bounds(&self) -> (Vec2, Vec2) {
        match self {
            RegionSpec::Rectangle { min, max } => (Vec2::new(min[0], min[1]), Vec2::new(max[0], max[1])),
            RegionSpec::Disk { center, radius } => (
                Vec2::new(center[0] - radius, center[1] - radius),
                Vec2::new(center[0] + radius, center[1] + radius),
            ),
            RegionSpec::Polygon { vertices } => {
                let lo = vertices.iter().fold(Vec2::repeat(f64::INFINITY), |m, v| m.inf(&Vec2::new(v[0], v[1])));
                let hi = vertices.iter().fold(Vec2::repeat(f64::NEG_INFINITY), |m, v| m.sup(&Vec2::new(v[0], v[1])));
                (lo, hi)
            }
        }
    }

    pub fn contains(&self, p: &Vec2) -> bool {
        match self {
            RegionSpec::Rectangle { min, max } => p.x > min[0] && p.x < max[0] && p.y > min[1] && p.y < max[1],
            RegionSpec::Disk { center, radius } => (p - Vec2::new(center[0], center[1])).norm_squared() < radius * radius,
            RegionSpec::Polygon { vertices } => {
                let n = vertices.len();
                let mut inside = false;
                for k in 0..n {
                    let a = Vec2::new(vertices[k][0], vertices[k][1]);
                    let b = Vec2::new(vertices[(k + 1) % n][0], vertices[(k + 1) % n][1]);
                    if (a.y > p.y) != (b.y > p.y) && p.x < a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y) {
                        inside = !inside;
                    }
                }
                inside
            }
        }
    }

    fn validate(&self) -> Result<(), SeedError> {
        let ok = match self {
            RegionSpec::Rectangle { min, max } => max[0] >= min[0] && max[1] >= min[1],
            RegionSpec::Disk { radius, .. } => *radius >= 0.0,
            RegionSpec::Polygon { vertices } => {
                vertices.len() >= 3 && {
                    let v: Vec<Vec2> = vertices.iter().map(|p| Vec2::new(p[0], p[1])).collect();
                    (0..v.len()).map(|k| cross(&v[k], &v[(k + 1) % v.len()])).sum::<f64>() > 0.0
                }
            }
        };
        if ok {
            Ok(())
        } else {
            Err(SeedError::InvalidRegion(format!("{self:?}")))
        }
    }
}

/// `k×k` points per grid cell on a lattice anchored at the grid origin; each
/// point carries `density × cell area / k²`.
pub fn lattice_points(region: &RegionSpec, points_per_cell: usize, density: f64, material: usize, grid: &GridConfig) -> Result<Vec<MaterialPoint>, SeedError> {
    region.validate()?;
    let k = (points_per_cell as f64).sqrt().round() as usize;
    if k == 0 || k * k != points_per_cell {
        return Err(SeedError::PointsPerCell(points_per_cell));
    }
    let h = grid.spacing / k as f64;
    let (lo, hi) = region.bounds();
    let o = grid.origin;
    let range = |a: f64, b: f64, o: f64| ((((a - o) / h).floor() as i64) - 1, (((b - o) / h).ceil() as i64) + 1);
    let (i0, i1) = range(lo.x, hi.x, o.x);
    let (j0, j1) = range(lo.y, hi.y, o.y);
    let mut out = Vec::new();
    for j in j0..=j1 {
        for i in i0..=i1 {
            let p = Vec2::new(o.x + (i as f64 + 0.5) * h, o.y + (j as f64 + 0.5) * h);
            if region.contains(&p) {
                out.push(MaterialPoint::new(p, Vec2::zeros(), density * h * h, h * h, material));
            }
        }
    }
    check_domain(&out, grid)?;
    Ok(out)
}

/// `nx × ny` points at the cell centres of a uniform subdivision of a rectangle.
pub fn rectangle_lattice(min: [f64; 2], max: [f64; 2], counts: [usize; 2], density: f64, material: usize, grid: &GridConfig) -> Result<Vec<MaterialPoint>, SeedError> {
    if !(max[0] > min[0] && max[1] > min[1]) || counts[0] == 0 || counts[1] == 0 {
        return Err(SeedError::InvalidRegion(format!("rectangle {min:?}–{max:?} with lattice {counts:?}")));
    }
    let hx = (max[0] - min[0]) / counts[0] as f64;
    let hy = (max[1] - min[1]) / counts[1] as f64;
    let mut out = Vec::with_capacity(counts[0] * counts[1]);
    for j in 0..counts[1] {
        for i in 0..counts[0] {
            let p = Vec2::new(min[0] + (i as f64 + 0.5) * hx, min[1] + (j as f64 + 0.5) * hy);
            out.push(MaterialPoint::new(p, Vec2::zeros(), density * hx * hy, hx * hy, material));
        }
    }
    check_domain(&out, grid)?;
    Ok(out)
}

fn check_domain(points: &[MaterialPoint], grid: &GridConfig) -> Result<(), SeedError> {
    match points.iter().find(|p| !grid.has_full_stencil(&p.position)) {
        Some(p) => Err(SeedError::RegionOutsideDomain {
            x: p.position.x,
            y: p.position.y,
        }),
        None => Ok(()),
    }
}

/// Seeds one section: lattice placement, initial velocity and stress.
pub fn seed_points(section: &SeedSection, material: usize, density: f64, grid: &GridConfig, gravity: Vec2, mat: &MaterialSection) -> Result<Seeded, SeedError> {
    let mut points = match (section.lattice, &section.region) {
        (Some(counts), RegionSpec::Rectangle { min, max }) => rectangle_lattice(*min, *max, counts, density, material, grid)?,
        (Some(_), _) => return Err(SeedError::InvalidRegion("explicit lattice counts need a rectangular region".into())),
        (None, region) => lattice_points(region, section.points_per_cell.unwrap_or(4), density, material, grid)?,
    };
    let v = Vec2::new(section.velocity[0], section.velocity[1]);
    let top = section.region.bounds().1.y;
    let k = mat.bulk_modulus;
    let g = mat.shear_modulus;
    let nu = (3.0 * k - 2.0 * g) / (2.0 * (3.0 * k + g));
    for p in &mut points {
        p.velocity = v;
        if section.initial_stress == InitialStress::SelfWeight {
            let syy = density * gravity.y * (top - p.position.y);
            p.stress = match section.lateral_stress_ratio {
                Some(k0) => StressState::from_stress(Mat2::new(k0 * syy, 0.0, 0.0, syy), k0 * syy),
                None => StressState::from_stress(Mat2::new(0.0, 0.0, 0.0, syy), nu * syy),
            };
        }
    }
    Ok(Seeded {
        name: section.name.clone().unwrap_or_else(|| mat.name.clone()),
        material,
        points,
        area: section.region.area(),
        prescribed: [section.prescribed_vx, section.prescribed_vy],
    })
}
