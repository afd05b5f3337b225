//! Material points and the explicit update-stress-first MPM step.
//!
//! Step order within one time step:
//! 1. [`p2g`]: nodal mass, momentum and velocity.
//! 2. [`update_stress`]: strain/spin rates from nodal velocities, stress update.
//! 3. [`nodal_forces`] (plus coupling forces), then [`grid_update`].
//! 4. [`g2p`]: point velocity, affine matrix and position.
//!
//! Stencils are evaluated once per step at the start-of-step positions and
//! shared by all four stages.

use thiserror::Error;

use crate::constitutive::{dp_return_map, elastic_stress_increment, DruckerPragerParams, ElasticParams, StressState};
use crate::grid::{stencil_weights, Grid, GridConfig, GridError, KernelKind, Stencil};
use crate::{Mat2, Vec2};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MpmError {
    #[error("material point {index}: {source}")]
    OutOfDomain {
        index: usize,
        #[source]
        source: GridError,
    },
    #[error("APIC transfer requires the B-spline kernel")]
    ApicNeedsBSpline,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransferScheme {
    Pic,
    Flip,
    /// `α = 1` is PIC, `α = 0` is FLIP.
    Hybrid { alpha: f64 },
    Apic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MaterialModel {
    Elastic(ElasticParams),
    DruckerPrager {
        elastic: ElasticParams,
        plastic: DruckerPragerParams,
    },
}

impl MaterialModel {
    pub fn elastic(&self) -> &ElasticParams {
        match self {
            MaterialModel::Elastic(e) => e,
            MaterialModel::DruckerPrager { elastic, .. } => elastic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    pub model: MaterialModel,
    pub density: f64,
    pub scheme: TransferScheme,
}

impl Material {
    pub fn wave_speed(&self) -> f64 {
        self.model.elastic().wave_speed(self.density)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialPoint {
    pub position: Vec2,
    pub velocity: Vec2,
    pub mass: f64,
    pub volume: f64,
    pub stress: StressState,
    /// APIC affine matrix `B_p`; zero for the other schemes.
    pub affine: Mat2,
    pub material: usize,
}

impl MaterialPoint {
    pub fn new(position: Vec2, velocity: Vec2, mass: f64, volume: f64, material: usize) -> Self {
        Self {
            position,
            velocity,
            mass,
            volume,
            stress: StressState::default(),
            affine: Mat2::zeros(),
            material,
        }
    }

    pub fn kinetic_energy(&self) -> f64 {
        0.5 * self.mass * self.velocity.norm_squared()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateTensors {
    pub strain_rate: Mat2,
    pub spin_rate: Mat2,
}

/// `D_p^{-1}` for APIC. The two-branch spline gives `D_p = L²/3 · I`.
pub fn apic_inertia_inverse(kernel: &KernelKind, spacing: f64) -> Option<f64> {
    match kernel {
        KernelKind::BSplineA4 => Some(3.0 / (spacing * spacing)),
        KernelKind::Gimp { .. } => None,
    }
}

pub fn check_schemes(materials: &[Material], cfg: &GridConfig) -> Result<(), MpmError> {
    let uses_apic = materials.iter().any(|m| m.scheme == TransferScheme::Apic);
    if uses_apic && apic_inertia_inverse(&cfg.kernel, cfg.spacing).is_none() {
        return Err(MpmError::ApicNeedsBSpline);
    }
    Ok(())
}

pub fn compute_stencils(points: &[MaterialPoint], cfg: &GridConfig, out: &mut Vec<Stencil>) -> Result<(), MpmError> {
    out.clear();
    out.reserve(points.len());
    for (index, p) in points.iter().enumerate() {
        let s = stencil_weights(&p.position, cfg).map_err(|source| MpmError::OutOfDomain { index, source })?;
        out.push(s);
    }
    Ok(())
}

/// Particle-to-grid transfer of mass and momentum, followed by nodal
/// velocities on nodes heavier than `mass_threshold`.
pub fn p2g(
    points: &[MaterialPoint],
    materials: &[Material],
    stencils: &[Stencil],
    grid: &mut Grid,
    mass_threshold: f64,
) {
    let cfg = grid.config;
    let d_inv = apic_inertia_inverse(&cfg.kernel, cfg.spacing);
    for (p, stencil) in points.iter().zip(stencils) {
        let apic = materials[p.material].scheme == TransferScheme::Apic;
        let c = match (apic, d_inv) {
            (true, Some(d)) => Some(p.affine * d),
            _ => None,
        };
        for e in stencil {
            let node = &mut grid.nodes[e.node];
            let mw = p.mass * e.weight;
            node.mass += mw;
            let v = match c {
                Some(c) => p.velocity + c * (cfg.node_position(e.node) - p.position),
                None => p.velocity,
            };
            node.momentum += v * mw;
        }
    }
    for node in &mut grid.nodes {
        node.velocity = if node.mass > mass_threshold {
            node.momentum / node.mass
        } else {
            Vec2::zeros()
        };
    }
}

/// Strain and spin rates at a point from the current nodal velocities.
pub fn compute_rates(stencil: &Stencil, grid: &Grid) -> RateTensors {
    // ∂v_i/∂x_j = Σ_I v_iI ∂S_Ip/∂x_j
    let mut grad = Mat2::zeros();
    for e in stencil {
        grad += grid.nodes[e.node].velocity * e.gradient.transpose();
    }
    let t = grad.transpose();
    RateTensors {
        strain_rate: (grad + t) * 0.5,
        spin_rate: (grad - t) * 0.5,
    }
}

/// Advance one point's stress: elastic predictor, then return mapping for
/// Drucker–Prager materials. Volume follows `V ← V (1 + tr ε̇ Δt)`.
pub fn update_point_stress(point: &mut MaterialPoint, rates: &RateTensors, material: &Material, dt: f64) {
    let trial = elastic_stress_increment(
        &point.stress,
        &rates.strain_rate,
        &rates.spin_rate,
        dt,
        material.model.elastic(),
    );
    point.stress = match &material.model {
        MaterialModel::Elastic(_) => trial,
        MaterialModel::DruckerPrager { elastic, plastic } => dp_return_map(&trial, plastic, elastic).0,
    };
    point.volume *= 1.0 + rates.strain_rate.trace() * dt;
}

pub fn update_stress(
    points: &mut [MaterialPoint],
    materials: &[Material],
    stencils: &[Stencil],
    grid: &Grid,
    dt: f64,
) {
    for (p, stencil) in points.iter_mut().zip(stencils) {
        let rates = compute_rates(stencil, grid);
        update_point_stress(p, &rates, &materials[p.material], dt);
    }
}

/// Internal forces `−Σ σ_p ∇S_Ip V_p` and body forces `Σ m_p b S_Ip`.
pub fn nodal_forces(points: &[MaterialPoint], stencils: &[Stencil], grid: &mut Grid, gravity: Vec2) {
    for (p, stencil) in points.iter().zip(stencils) {
        let sv = p.stress.sigma * p.volume;
        let mg = gravity * p.mass;
        for e in stencil {
            let node = &mut grid.nodes[e.node];
            node.f_int -= sv * e.gradient;
            node.f_ext += mg * e.weight;
        }
    }
}

/// `p_I ← p_I + f_I Δt` and the updated nodal velocity on nodes above the mass threshold.
pub fn grid_update(grid: &mut Grid, dt: f64, mass_threshold: f64) {
    for node in &mut grid.nodes {
        if node.mass > mass_threshold {
            node.momentum += node.total_force() * dt;
            node.velocity = node.momentum / node.mass;
        }
    }
}

/// Grid-to-particle transfer and advection with the updated point velocity.
pub fn g2p(
    points: &mut [MaterialPoint],
    materials: &[Material],
    stencils: &[Stencil],
    grid: &Grid,
    dt: f64,
    mass_threshold: f64,
) -> Result<(), MpmError> {
    let cfg = &grid.config;
    for (index, (p, stencil)) in points.iter_mut().zip(stencils).enumerate() {
        let mut v_pic = Vec2::zeros();
        let mut accel = Vec2::zeros();
        let mut affine = Mat2::zeros();
        let apic = materials[p.material].scheme == TransferScheme::Apic;
        for e in stencil {
            let node = &grid.nodes[e.node];
            if node.mass <= mass_threshold {
                continue;
            }
            v_pic += node.velocity * e.weight;
            accel += node.total_force() * (e.weight / node.mass);
            if apic {
                affine += node.velocity * (cfg.node_position(e.node) - p.position).transpose() * e.weight;
            }
        }
        let v_flip = p.velocity + accel * dt;
        p.velocity = match materials[p.material].scheme {
            TransferScheme::Pic => v_pic,
            TransferScheme::Flip => v_flip,
            TransferScheme::Hybrid { alpha } => v_pic * alpha + v_flip * (1.0 - alpha),
            TransferScheme::Apic => {
                p.affine = affine;
                v_pic
            }
        };
        p.position += p.velocity * dt;
        if !cfg.has_full_stencil(&p.position) {
            return Err(MpmError::OutOfDomain {
                index,
                source: GridError::PointOutOfDomain {
                    x: p.position.x,
                    y: p.position.y,
                },
            });
        }
    }
    Ok(())
}

pub fn total_mass(points: &[MaterialPoint]) -> f64 {
    points.iter().map(|p| p.mass).sum()
}

pub fn total_momentum(points: &[MaterialPoint]) -> Vec2 {
    points.iter().map(|p| p.velocity * p.mass).sum()
}

pub fn kinetic_energy(points: &[MaterialPoint]) -> f64 {
    points.iter().map(MaterialPoint::kinetic_energy).sum()
}

/// APIC angular momentum `Σ m_p (x_p × v_p + B_yx − B_xy)`; equals the grid
/// angular momentum after p2g for the B-spline kernel.
pub fn apic_angular_momentum(points: &[MaterialPoint]) -> f64 {
    points
        .iter()
        .map(|p| p.mass * (crate::cross(&p.position, &p.velocity) + p.affine[(1, 0)] - p.affine[(0, 1)]))
        .sum()
}

pub fn grid_angular_momentum(grid: &Grid) -> f64 {
    grid.nodes
        .iter()
        .enumerate()
        .map(|(i, n)| crate::cross(&grid.config.node_position(i), &n.momentum))
        .sum()
}
