//! Scenario files: TOML schema, parsing with line diagnostics and validation.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::constitutive::{DruckerPragerParams, ElasticParams};
use crate::coupling::{contact_radius_bounds, critical_dt, CouplingParams};
use crate::grid::{GridConfig, KernelKind};
use crate::mpm::{Material, MaterialModel, TransferScheme};
use crate::sdem::{ContactMaterial, MassSpec, Spheropolygon};
use crate::Vec2;

use super::seed::{seed_points, Seeded};

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub rule: &'static str,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationError {
    pub violations: Vec<Violation>,
}

impl ValidationError {
    pub fn has_rule(&self, rule: &str) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} validation error(s):", self.violations.len())?;
        for v in &self.violations {
            writeln!(f, "  [{}] {}", v.rule, v.message)?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationError {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Units {
    pub length: String,
    pub mass: String,
    pub time: String,
}

impl Default for Units {
    fn default() -> Self {
        Self {
            length: "cm".into(),
            mass: "g".into(),
            time: "s".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelName {
    Gimp,
    Bspline,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub origin: [f64; 2],
    /// Domain extent; node counts are `ceil(size / spacing) + 1`.
    pub size: [f64; 2],
    pub spacing: f64,
    pub kernel: KernelName,
    /// GIMP particle half-width; defaults to half the spacing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gimp_half_width: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelName {
    Elastic,
    DruckerPrager,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeName {
    Pic,
    Flip,
    Hybrid,
    Apic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSection {
    pub name: String,
    pub model: ModelName,
    pub density: f64,
    pub bulk_modulus: f64,
    pub shear_modulus: f64,
    /// Degrees.
    #[serde(default)]
    pub friction_angle: f64,
    #[serde(default)]
    pub cohesion: f64,
    #[serde(default)]
    pub tensile_strength: f64,
    /// Degrees.
    #[serde(default)]
    pub dilation_angle: f64,
    pub scheme: SchemeName,
    /// PIC fraction for the hybrid scheme.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeSpec {
    Polygon { vertices: Vec<[f64; 2]> },
    Rectangle { min: [f64; 2], max: [f64; 2] },
    Disk { center: [f64; 2] },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContactSection {
    pub normal_stiffness: f64,
    pub tangential_stiffness: f64,
    pub friction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodySection {
    pub name: String,
    pub shape: ShapeSpec,
    pub sphero_radius: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
    #[serde(default)]
    pub fixed: bool,
    #[serde(default)]
    pub velocity: [f64; 2],
    #[serde(default)]
    pub omega: f64,
    pub contact: ContactSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegionSpec {
    Rectangle { min: [f64; 2], max: [f64; 2] },
    Disk { center: [f64; 2], radius: f64 },
    Polygon { vertices: Vec<[f64; 2]> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialStress {
    Zero,
    /// Uniaxial overburden `σ_yy = ρ g_y (y_top − y)`, `σ_xx = 0`.
    SelfWeight,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub material: String,
    pub region: RegionSpec,
    /// Points per grid cell, a perfect square `k²` placed as a `k×k` lattice.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points_per_cell: Option<usize>,
    /// Explicit lattice counts over a rectangular region.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<[usize; 2]>,
    #[serde(default)]
    pub velocity: [f64; 2],
    #[serde(default = "default_initial_stress")]
    pub initial_stress: InitialStress,
    /// `σ_xx = σ_zz = k0 σ_yy` for the self-weight state; without it
    /// `σ_xx = 0` and `σ_zz = ν σ_yy`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lateral_stress_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prescribed_vx: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prescribed_vy: Option<f64>,
}

fn default_initial_stress() -> InitialStress {
    InitialStress::Zero
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimeStep {
    Fixed(f64),
    /// The literal string `"auto"`.
    Auto(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSection {
    pub verlet_distance: f64,
    /// Defaults to a third of the grid spacing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contact_radius: Option<f64>,
    #[serde(default = "default_kappa1")]
    pub kappa1: f64,
    #[serde(default = "default_kappa2")]
    pub kappa2: f64,
    pub dt: TimeStep,
    #[serde(default = "default_mass_threshold")]
    pub mass_threshold_ratio: f64,
}

fn default_kappa1() -> f64 {
    0.8
}

fn default_kappa2() -> f64 {
    0.1
}

fn default_mass_threshold() -> f64 {
    1e-12
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    pub t_end: f64,
    /// Steps between time-series records.
    #[serde(default = "default_one")]
    pub output_every: usize,
}

fn default_one() -> usize {
    1
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Steps between snapshots; 0 disables them.
    #[serde(default)]
    pub snapshot_every: usize,
    /// Points below this height count as discharged.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discharge_level: Option<f64>,
    /// Body whose contact with `ground_body` is reported as `ground_contact`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_contact_body: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_body: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub units: Units,
    pub gravity: [f64; 2],
    pub grid: GridSection,
    #[serde(default)]
    pub materials: Vec<MaterialSection>,
    #[serde(default)]
    pub bodies: Vec<BodySection>,
    #[serde(default)]
    pub seeding: Vec<SeedSection>,
    pub coupling: CouplingSection,
    pub schedule: ScheduleSection,
    #[serde(default)]
    pub output: OutputSection,
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

/// Parses TOML text without semantic validation.
pub fn parse_scenario(text: &str) -> Result<ScenarioConfig, ParseError> {
    toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| line_col(text, s.start));
        ParseError {
            line,
            column,
            message: e.message().to_string(),
        }
    })
}

impl ScenarioConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("scenario config serializes")
    }

    pub fn grid_config(&self) -> Result<GridConfig, String> {
        let g = &self.grid;
        if !(g.spacing > 0.0 && g.size[0] > 0.0 && g.size[1] > 0.0) {
            return Err(format!("spacing {} and size {:?} must be positive", g.spacing, g.size));
        }
        let counts = [
            (g.size[0] / g.spacing - 1e-9).ceil() as usize + 1,
            (g.size[1] / g.spacing - 1e-9).ceil() as usize + 1,
        ];
        let kernel = match g.kernel {
            KernelName::Gimp => KernelKind::Gimp {
                half_width: g.gimp_half_width.unwrap_or(0.5 * g.spacing),
            },
            KernelName::Bspline => KernelKind::BSplineA4,
        };
        GridConfig::new(Vec2::new(g.origin[0], g.origin[1]), g.spacing, counts, kernel).map_err(|e| e.to_string())
    }

    pub fn material_index(&self, name: &str) -> Option<usize> {
        self.materials.iter().position(|m| m.name == name)
    }

    pub fn contact_radius(&self) -> f64 {
        self.coupling.contact_radius.unwrap_or(self.grid.spacing / 3.0)
    }
}

impl MaterialSection {
    pub fn build(&self) -> Result<Material, String> {
        let elastic = ElasticParams::new(self.bulk_modulus, self.shear_modulus);
        if !elastic.is_valid() {
            return Err(format!("bulk modulus {} and shear modulus {} must be positive", self.bulk_modulus, self.shear_modulus));
        }
        if !(self.density > 0.0) {
            return Err(format!("density {} must be positive", self.density));
        }
        let model = match self.model {
            ModelName::Elastic => MaterialModel::Elastic(elastic),
            ModelName::DruckerPrager => {
                let plastic = DruckerPragerParams {
                    friction_angle: self.friction_angle.to_radians(),
                    cohesion: self.cohesion,
                    tensile_strength: self.tensile_strength,
                    dilation_angle: self.dilation_angle.to_radians(),
                };
                if !plastic.is_valid() {
                    return Err(format!("invalid Drucker–Prager parameters {plastic:?}"));
                }
                MaterialModel::DruckerPrager { elastic, plastic }
            }
        };
        let scheme = match (self.scheme, self.alpha) {
            (SchemeName::Pic, _) => TransferScheme::Pic,
            (SchemeName::Flip, _) => TransferScheme::Flip,
            (SchemeName::Apic, _) => TransferScheme::Apic,
            (SchemeName::Hybrid, Some(alpha)) if (0.0..=1.0).contains(&alpha) => TransferScheme::Hybrid { alpha },
            (SchemeName::Hybrid, a) => return Err(format!("hybrid scheme needs alpha in [0, 1], got {a:?}")),
        };
        Ok(Material {
            model,
            density: self.density,
            scheme,
        })
    }
}

impl BodySection {
    pub fn build(&self) -> Result<Spheropolygon, String> {
        let c = &self.contact;
        let material = ContactMaterial::new(c.normal_stiffness, c.tangential_stiffness, c.friction).map_err(|e| e.to_string())?;
        let mass = match (self.density, self.mass) {
            (Some(d), None) => MassSpec::Density(d),
            (None, Some(m)) => MassSpec::Mass(m),
            _ => return Err("exactly one of density and mass must be given".into()),
        };
        let v = |p: &[f64; 2]| Vec2::new(p[0], p[1]);
        let mut body = match &self.shape {
            ShapeSpec::Polygon { vertices } => {
                let vs: Vec<Vec2> = vertices.iter().map(v).collect();
                Spheropolygon::build(&vs, self.sphero_radius, mass, self.fixed, material)
            }
            ShapeSpec::Rectangle { min, max } => Spheropolygon::rectangle(min[0], min[1], max[0], max[1], self.sphero_radius, mass, self.fixed, material),
            ShapeSpec::Disk { center } => Spheropolygon::disk(v(center), self.sphero_radius, mass, self.fixed, material),
        }
        .map_err(|e| e.to_string())?;
        if !self.fixed {
            body.velocity = v(&self.velocity);
            body.omega = self.omega;
        }
        Ok(body)
    }
}

/// A validated scenario with its built grid, materials, bodies and points.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub grid: GridConfig,
    pub materials: Vec<Material>,
    pub bodies: Vec<Spheropolygon>,
    pub seeded: Vec<Seeded>,
    pub params: CouplingParams,
    pub dt: f64,
    pub dt_min: f64,
    pub points_per_cell: f64,
}

/// Builds every component and checks all rules; reports every violation.
pub fn validate(cfg: &ScenarioConfig) -> Result<Resolved, ValidationError> {
    let mut errs = Vec::new();
    let mut push = |rule: &'static str, message: String| errs.push(Violation { rule, message });

    if !cfg.gravity.iter().all(|g| g.is_finite()) {
        push("gravity", format!("gravity {:?} must be finite", cfg.gravity));
    }
    let grid = match cfg.grid_config() {
        Ok(g) => Some(g),
        Err(e) => {
            push("grid", e);
            None
        }
    };

    let mut materials = Vec::new();
    for (i, m) in cfg.materials.iter().enumerate() {
        if cfg.materials[..i].iter().any(|o| o.name == m.name) {
            push("material.name", format!("duplicate material name '{}'", m.name));
        }
        match m.build() {
            Ok(mat) => {
                if mat.scheme == TransferScheme::Apic && cfg.grid.kernel != KernelName::Bspline {
                    push("material.apic-kernel", format!("material '{}': APIC requires the bspline kernel", m.name));
                }
                materials.push(mat);
            }
            Err(e) => push("material.params", format!("material '{}': {e}", m.name)),
        }
    }

    let mut bodies = Vec::new();
    for b in &cfg.bodies {
        match b.build() {
            Ok(body) => bodies.push(body),
            Err(e) => push("body.geometry", format!("body '{}': {e}", b.name)),
        }
    }
    for name in [&cfg.output.ground_contact_body, &cfg.output.ground_body].into_iter().flatten() {
        if !cfg.bodies.iter().any(|b| &b.name == name) {
            push("output.ground-contact-body", format!("unknown body '{name}'"));
        }
    }

    let mut seeded = Vec::new();
    if let Some(grid) = &grid {
        for (k, s) in cfg.seeding.iter().enumerate() {
            let Some(mi) = cfg.material_index(&s.material) else {
                push("seeding.material", format!("seeding {k}: unknown material '{}'", s.material));
                continue;
            };
            let density = cfg.materials[mi].density;
            match seed_points(s, mi, density, grid, Vec2::new(cfg.gravity[0], cfg.gravity[1]), &cfg.materials[mi]) {
                Ok(p) => seeded.push(p),
                Err(e) => push("seeding.region", format!("seeding {k}: {e}")),
            }
        }
    }

    let n_points: usize = seeded.iter().map(|s| s.points.len()).sum();
    let covered_cells: f64 = seeded.iter().map(|s| s.area).sum::<f64>() / (cfg.grid.spacing * cfg.grid.spacing);
    let points_per_cell = if covered_cells > 0.0 { n_points as f64 / covered_cells } else { 0.0 };
    let r_p = cfg.contact_radius();
    if n_points > 0 && cfg.grid.spacing > 0.0 {
        let (lo, hi) = contact_radius_bounds(cfg.grid.spacing, points_per_cell);
        if !(r_p > lo && r_p < hi) {
            push(
                "coupling.contact-radius",
                format!("contact radius {r_p} must lie strictly between l_g/sqrt(n) = {lo:.6} and l_g = {hi} (n = {points_per_cell:.3} points per cell)"),
            );
        }
    }
    if !(cfg.coupling.verlet_distance > 0.0) {
        push("coupling.verlet-distance", format!("Verlet distance {} must be positive", cfg.coupling.verlet_distance));
    }
    if !(cfg.coupling.kappa1 > 0.0 && cfg.coupling.kappa2 > 0.0) {
        push("coupling.safety-factors", format!("kappa1 = {} and kappa2 = {} must be positive", cfg.coupling.kappa1, cfg.coupling.kappa2));
    }
    if !(cfg.schedule.t_end > 0.0) || cfg.schedule.output_every == 0 {
        push("schedule", format!("t_end {} must be positive and output_every at least 1", cfg.schedule.t_end));
    }

    let used: Vec<Material> = materials
        .iter()
        .enumerate()
        .filter(|(i, _)| seeded.iter().any(|s| s.material == *i && !s.points.is_empty()))
        .map(|(_, m)| *m)
        .collect();
    let mut dt = f64::NAN;
    let mut dt_min = f64::INFINITY;
    if let Some(grid) = &grid {
        match critical_dt(grid, &used, &bodies, cfg.coupling.kappa1, cfg.coupling.kappa2) {
            Ok(v) => dt_min = v,
            Err(_) => push("coupling.time-step", "no material points and no mobile bodies: nothing to integrate".into()),
        }
    }
    match &cfg.coupling.dt {
        TimeStep::Fixed(v) => {
            dt = *v;
            if !(dt > 0.0) {
                push("coupling.time-step", format!("time step {dt} must be positive"));
            } else if dt > dt_min {
                push("coupling.time-step", format!("time step {dt:e} exceeds the stability bound {dt_min:e}"));
            }
        }
        TimeStep::Auto(s) if s == "auto" => dt = dt_min,
        TimeStep::Auto(s) => push("coupling.time-step", format!("dt must be a number or \"auto\", got \"{s}\"")),
    }

    if !errs.is_empty() {
        return Err(ValidationError { violations: errs });
    }
    Ok(Resolved {
        grid: grid.expect("grid validated"),
        materials,
        bodies,
        seeded,
        params: CouplingParams {
            verlet_distance: cfg.coupling.verlet_distance,
            contact_radius: r_p,
            kappa1: cfg.coupling.kappa1,
            kappa2: cfg.coupling.kappa2,
            mass_threshold_ratio: cfg.coupling.mass_threshold_ratio,
        },
        dt,
        dt_min,
        points_per_cell,
    })
}

#[derive(Debug)]
pub enum LoadError {
    Io(std::io::Error),
    Parse(ParseError),
    Validation(ValidationError),
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoadError::Io(e) => write!(f, "{e}"),
            LoadError::Parse(e) => write!(f, "parse error at {e}"),
            LoadError::Validation(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for LoadError {}

/// Reads, parses and validates a scenario file.
pub fn load_scenario(path: &Path) -> Result<(ScenarioConfig, Resolved), LoadError> {
    let text = std::fs::read_to_string(path).map_err(LoadError::Io)?;
    let cfg = parse_scenario(&text).map_err(LoadError::Parse)?;
    let resolved = validate(&cfg).map_err(LoadError::Validation)?;
    Ok((cfg, resolved))
}
