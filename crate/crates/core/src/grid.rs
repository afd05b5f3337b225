//! Background Eulerian grid and particle–grid weighting functions.
//!
//! Two kernels are supported, both as tensor products of 1D factors:
//! the GIMP weight for a constant characteristic function of half-width
//! `l_p` convolved with the linear hat function, and the two-branch
//! B-spline with support `2L`.

use arrayvec::ArrayVec;
use thiserror::Error;

use crate::Vec2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("invalid grid configuration: {0}")]
    InvalidConfig(String),
    #[error("point ({x}, {y}) is outside the grid stencil region")]
    PointOutOfDomain { x: f64, y: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelKind {
    /// GIMP with a box characteristic function of half-width `half_width`.
    Gimp { half_width: f64 },
    /// The two-branch spline `½t³ − t² + ⅔`, `⅙(2 − t)³`.
    BSplineA4,
}

impl KernelKind {
    /// Default GIMP kernel: half-width equal to half the grid spacing.
    pub fn gimp_default(spacing: f64) -> Self {
        KernelKind::Gimp {
            half_width: 0.5 * spacing,
        }
    }

    /// Support radius measured in grid cells.
    pub fn support_cells(&self, spacing: f64) -> f64 {
        match *self {
            KernelKind::Gimp { half_width } => 1.0 + half_width / spacing,
            KernelKind::BSplineA4 => 2.0,
        }
    }

    #[inline]
    fn weight_and_gradient(&self, dx: f64, spacing: f64) -> (f64, f64) {
        match *self {
            KernelKind::Gimp { half_width } => (
                gimp_weight(dx, spacing, half_width),
                gimp_weight_gradient(dx, spacing, half_width),
            ),
            KernelKind::BSplineA4 => (
                bspline_weight(dx, spacing),
                bspline_weight_gradient(dx, spacing),
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    pub origin: Vec2,
    pub spacing: f64,
    pub node_counts: [usize; 2],
    pub kernel: KernelKind,
}

impl GridConfig {
    pub fn new(
        origin: Vec2,
        spacing: f64,
        node_counts: [usize; 2],
        kernel: KernelKind,
    ) -> Result<Self, GridError> {
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(GridError::InvalidConfig(format!(
                "spacing must be positive, got {spacing}"
            )));
        }
        if node_counts[0] < 4 || node_counts[1] < 4 {
            return Err(GridError::InvalidConfig(format!(
                "node counts must be at least 4 per axis, got {node_counts:?}"
            )));
        }
        if let KernelKind::Gimp { half_width } = kernel {
            if !(half_width > 0.0 && half_width <= 0.5 * spacing) {
                return Err(GridError::InvalidConfig(format!(
                    "GIMP half-width must lie in (0, L/2], got {half_width} with L = {spacing}"
                )));
            }
        }
        Ok(Self {
            origin,
            spacing,
            node_counts,
            kernel,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_counts[0] * self.node_counts[1]
    }

    #[inline]
    pub fn node_index(&self, i: usize, j: usize) -> usize {
        i + j * self.node_counts[0]
    }

    #[inline]
    pub fn node_position(&self, index: usize) -> Vec2 {
        let i = index % self.node_counts[0];
        let j = index / self.node_counts[0];
        self.origin + Vec2::new(i as f64, j as f64) * self.spacing
    }

    /// Upper corner of the node lattice.
    pub fn extent(&self) -> Vec2 {
        self.origin
            + Vec2::new(
                (self.node_counts[0] - 1) as f64,
                (self.node_counts[1] - 1) as f64,
            ) * self.spacing
    }

    /// Whether a point's full kernel stencil lies on existing nodes.
    pub fn has_full_stencil(&self, pos: &Vec2) -> bool {
        let r = self.kernel.support_cells(self.spacing);
        (0..2).all(|a| axis_window(self.node_coord(pos, a), r, self.node_counts[a]).is_some())
    }

    #[inline]
    fn node_coord(&self, pos: &Vec2, axis: usize) -> f64 {
        (pos[axis] - self.origin[axis]) / self.spacing
    }
}

/// 1D GIMP weight for offset `dx = x_p − x_I`, grid spacing `l` and
/// characteristic half-width `lp`.
///
/// Branch bounds are closed on the upper end of each interval.
pub fn gimp_weight(dx: f64, l: f64, lp: f64) -> f64 {
    if dx <= -(l + lp) {
        0.0
    } else if dx <= -l + lp {
        let s = l + lp + dx;
        s * s / (4.0 * l * lp)
    } else if dx <= -lp {
        1.0 + dx / l
    } else if dx <= lp {
        1.0 - (dx * dx + lp * lp) / (2.0 * l * lp)
    } else if dx <= l - lp {
        1.0 - dx / l
    } else if dx <= l + lp {
        let s = l + lp - dx;
        s * s / (4.0 * l * lp)
    } else {
        0.0
    }
}

/// Derivative of [`gimp_weight`] with respect to the particle position.
pub fn gimp_weight_gradient(dx: f64, l: f64, lp: f64) -> f64 {
    if dx <= -(l + lp) {
        0.0
    } else if dx <= -l + lp {
        (l + lp + dx) / (2.0 * l * lp)
    } else if dx <= -lp {
        1.0 / l
    } else if dx <= lp {
        -dx / (l * lp)
    } else if dx <= l - lp {
        -1.0 / l
    } else if dx <= l + lp {
        -(l + lp - dx) / (2.0 * l * lp)
    } else {
        0.0
    }
}

/// 1D two-branch spline weight with support `|dx| < 2L`.
pub fn bspline_weight(dx: f64, l: f64) -> f64 {
    let t = dx.abs() / l;
    if t < 1.0 {
        0.5 * t * t * t - t * t + 2.0 / 3.0
    } else if t < 2.0 {
        let s = 2.0 - t;
        s * s * s / 6.0
    } else {
        0.0
    }
}

pub fn bspline_weight_gradient(dx: f64, l: f64) -> f64 {
    let t = dx.abs() / l;
    let sign = if dx < 0.0 { -1.0 } else { 1.0 };
    if t < 1.0 {
        sign * (1.5 * t * t - 2.0 * t) / l
    } else if t < 2.0 {
        let s = 2.0 - t;
        -sign * 0.5 * s * s / l
    } else {
        0.0
    }
}

/// One node of a particle's stencil.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StencilEntry {
    pub node: usize,
    pub weight: f64,
    pub gradient: Vec2,
}

/// Up to 4×4 nodes: both kernels have support of at most two cells.
pub type Stencil = ArrayVec<StencilEntry, 16>;

/// Inclusive node range `[lo, hi]` along one axis whose distance from the
/// node coordinate `u` is strictly below `radius`.
fn axis_window(u: f64, radius: f64, n: usize) -> Option<(usize, usize)> {
    if !u.is_finite() {
        return None;
    }
    let lo = (u - radius).floor() as i64 + 1;
    let hi = (u + radius).ceil() as i64 - 1;
    if lo < 0 || hi > n as i64 - 1 || hi < lo {
        return None;
    }
    Some((lo as usize, hi as usize))
}

/// Weights `S_Ip` and gradients `∇S_Ip` of every node within the kernel's support.
pub fn stencil_weights(pos: &Vec2, cfg: &GridConfig) -> Result<Stencil, GridError> {
    let l = cfg.spacing;
    let radius = cfg.kernel.support_cells(l);
    let mut axes: [ArrayVec<(usize, f64, f64), 4>; 2] = [ArrayVec::new(), ArrayVec::new()];
    for (a, axis) in axes.iter_mut().enumerate() {
        let u = cfg.node_coord(pos, a);
        let (lo, hi) = axis_window(u, radius, cfg.node_counts[a]).ok_or(
            GridError::PointOutOfDomain {
                x: pos.x,
                y: pos.y,
            },
        )?;
        for k in lo..=hi {
            let dx = pos[a] - (cfg.origin[a] + k as f64 * l);
            let (w, g) = cfg.kernel.weight_and_gradient(dx, l);
            axis.push((k, w, g));
        }
    }
    let mut out = Stencil::new();
    for &(j, wy, gy) in &axes[1] {
        for &(i, wx, gx) in &axes[0] {
            out.push(StencilEntry {
                node: cfg.node_index(i, j),
                weight: wx * wy,
                gradient: Vec2::new(gx * wy, wx * gy),
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GridNode {
    pub mass: f64,
    pub momentum: Vec2,
    pub f_int: Vec2,
    pub f_ext: Vec2,
    pub f_cont: Vec2,
    pub velocity: Vec2,
}

impl GridNode {
    #[inline]
    pub fn total_force(&self) -> Vec2 {
        self.f_int + self.f_ext + self.f_cont
    }
}

/// The per-step scratchpad all transfers read and write.
#[derive(Debug, Clone)]
pub struct Grid {
    pub config: GridConfig,
    pub nodes: Vec<GridNode>,
}

impl Grid {
    pub fn new(config: GridConfig) -> Self {
        Self {
            nodes: vec![GridNode::default(); config.node_count()],
            config,
        }
    }

    pub fn clear(&mut self) {
        clear_grid(&mut self.nodes);
    }

    pub fn total_mass(&self) -> f64 {
        self.nodes.iter().map(|n| n.mass).sum()
    }

    pub fn total_momentum(&self) -> Vec2 {
        self.nodes.iter().map(|n| n.momentum).sum()
    }
}

pub fn clear_grid(nodes: &mut [GridNode]) {
    nodes.fill(GridNode::default());
}
