//! Hypoelastic stress update with the Jaumann rate, and Drucker–Prager
//! plasticity with shear and tensile return mapping.
//!
//! Stresses are tension-positive. The 2D state is embedded in 3D plane
//! strain: `σ_zz` is tracked so that `I_1` and `J_2` are 3D invariants.

use crate::Mat2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElasticParams {
    pub bulk_modulus: f64,
    pub shear_modulus: f64,
}

impl ElasticParams {
    pub fn new(bulk_modulus: f64, shear_modulus: f64) -> Self {
        Self {
            bulk_modulus,
            shear_modulus,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.bulk_modulus > 0.0 && self.shear_modulus > 0.0
    }

    /// Lamé's first parameter `K − 2G/3`.
    pub fn lame_lambda(&self) -> f64 {
        self.bulk_modulus - 2.0 * self.shear_modulus / 3.0
    }

    /// P-wave modulus `K + 4G/3`.
    pub fn p_wave_modulus(&self) -> f64 {
        self.bulk_modulus + 4.0 * self.shear_modulus / 3.0
    }

    /// Plane-strain P-wave speed for density `rho`.
    pub fn wave_speed(&self, rho: f64) -> f64 {
        (self.p_wave_modulus() / rho).sqrt()
    }

    /// `C_ijkl` of isotropic linear elasticity.
    pub fn stiffness(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        self.bulk_modulus * d(i, j) * d(k, l)
            + self.shear_modulus * (d(i, k) * d(j, l) + d(i, l) * d(j, k) - 2.0 / 3.0 * d(i, j) * d(k, l))
    }
}

/// `q_φ` and `k_φ` of the Drucker–Prager cone fitted to friction angle `phi`
/// and cohesion `c`.
pub fn dp_coefficients(phi: f64, c: f64) -> (f64, f64) {
    let t = phi.tan();
    let denom = (9.0 + 12.0 * t * t).sqrt();
    (3.0 * t / denom, 3.0 * c / denom)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DruckerPragerParams {
    /// Radians.
    pub friction_angle: f64,
    pub cohesion: f64,
    pub tensile_strength: f64,
    /// Radians.
    pub dilation_angle: f64,
}

impl DruckerPragerParams {
    pub fn is_valid(&self) -> bool {
        (0.0..std::f64::consts::FRAC_PI_2).contains(&self.friction_angle)
            && self.cohesion >= 0.0
            && self.tensile_strength >= 0.0
            && self.dilation_angle >= 0.0
            && self.dilation_angle <= self.friction_angle
    }

    pub fn q_phi(&self) -> f64 {
        dp_coefficients(self.friction_angle, self.cohesion).0
    }

    pub fn k_phi(&self) -> f64 {
        dp_coefficients(self.friction_angle, self.cohesion).1
    }

    /// Slope of the plastic potential, same form as `q_φ` with the dilation angle.
    pub fn q_psi(&self) -> f64 {
        dp_coefficients(self.dilation_angle, 0.0).0
    }

    /// Tensile cut-off, limited to the cone apex `k_φ / q_φ`.
    pub fn effective_tensile_strength(&self) -> f64 {
        let (q, k) = dp_coefficients(self.friction_angle, self.cohesion);
        if q > 0.0 {
            self.tensile_strength.min(k / q)
        } else {
            self.tensile_strength
        }
    }
}

/// Stress and accumulated strain of one material point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StressState {
    /// In-plane Cauchy stress (symmetric).
    pub sigma: Mat2,
    /// Out-of-plane normal stress.
    pub sigma_zz: f64,
    pub strain: Mat2,
}

impl Default for StressState {
    fn default() -> Self {
        Self {
            sigma: Mat2::zeros(),
            sigma_zz: 0.0,
            strain: Mat2::zeros(),
        }
    }
}

impl StressState {
    pub fn from_stress(sigma: Mat2, sigma_zz: f64) -> Self {
        Self {
            sigma,
            sigma_zz,
            strain: Mat2::zeros(),
        }
    }

    /// `I_1 = σ_kk` of the 3D embedding.
    pub fn i1(&self) -> f64 {
        self.sigma.trace() + self.sigma_zz
    }

    pub fn mean_stress(&self) -> f64 {
        self.i1() / 3.0
    }

    /// `J_2 = s_ij s_ij / 2`.
    pub fn j2(&self) -> f64 {
        let m = self.mean_stress();
        let sxx = self.sigma[(0, 0)] - m;
        let syy = self.sigma[(1, 1)] - m;
        let szz = self.sigma_zz - m;
        let sxy = self.sigma[(0, 1)];
        0.5 * (sxx * sxx + syy * syy + szz * szz) + sxy * sxy
    }

    /// Equivalent shear stress `τ = √J_2`.
    pub fn tau(&self) -> f64 {
        self.j2().sqrt()
    }

    /// Frobenius norm of the 3×3 stress tensor.
    pub fn norm(&self) -> f64 {
        (self.sigma.norm_squared() + self.sigma_zz * self.sigma_zz).sqrt()
    }

    /// Rebuild the stress from a mean stress and a deviator scaled by `scale`.
    fn with_mean_and_scaled_deviator(&self, mean: f64, scale: f64) -> Self {
        let m = self.mean_stress();
        let mut sigma = self.sigma;
        sigma[(0, 0)] = mean + scale * (self.sigma[(0, 0)] - m);
        sigma[(1, 1)] = mean + scale * (self.sigma[(1, 1)] - m);
        sigma[(0, 1)] = scale * self.sigma[(0, 1)];
        sigma[(1, 0)] = sigma[(0, 1)];
        Self {
            sigma,
            sigma_zz: mean + scale * (self.sigma_zz - m),
            strain: self.strain,
        }
    }
}

/// One explicit step of `σ̇ = C:ε̇ + σ_ik ψ_jk + σ_jk ψ_ik` under plane strain.
pub fn elastic_stress_increment(
    state: &StressState,
    strain_rate: &Mat2,
    spin_rate: &Mat2,
    dt: f64,
    params: &ElasticParams,
) -> StressState {
    let lambda = params.lame_lambda();
    let g2 = 2.0 * params.shear_modulus;
    let tr = strain_rate.trace();
    let objective = strain_rate * g2 + Mat2::identity() * (lambda * tr);
    let s = &state.sigma;
    // σ_ik ψ_jk + σ_jk ψ_ik = ψσ − σψ for symmetric σ and skew ψ.
    let spin = spin_rate * s - s * spin_rate;
    let mut sigma = s + (objective + spin) * dt;
    let sym = 0.5 * (sigma[(0, 1)] + sigma[(1, 0)]);
    sigma[(0, 1)] = sym;
    sigma[(1, 0)] = sym;
    StressState {
        sigma,
        sigma_zz: state.sigma_zz + dt * lambda * tr,
        strain: state.strain + strain_rate * dt,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Yield {
    None,
    Shear,
    Tensile,
}

/// Shear yield function `τ + q_φ σ_m − k_φ`.
pub fn shear_yield(state: &StressState, p: &DruckerPragerParams) -> f64 {
    let (q, k) = dp_coefficients(p.friction_angle, p.cohesion);
    state.tau() + q * state.mean_stress() - k
}

/// Tensile yield function `σ_m − σ^t`.
pub fn tensile_yield(state: &StressState, p: &DruckerPragerParams) -> f64 {
    state.mean_stress() - p.effective_tensile_strength()
}

/// Project a trial stress back onto the Drucker–Prager admissible region.
///
/// Shear return is radial in the deviatoric plane with a volumetric
/// correction from the dilation angle; tensile return is hydrostatic.
pub fn dp_return_map(
    trial: &StressState,
    p: &DruckerPragerParams,
    e: &ElasticParams,
) -> (StressState, Yield) {
    let (q_phi, k_phi) = dp_coefficients(p.friction_angle, p.cohesion);
    let q_psi = p.q_psi();
    let sigma_t = p.effective_tensile_strength();

    let tau = trial.tau();
    let mean = trial.mean_stress();
    let tol = 1e-9 * k_phi.max(trial.norm());
    let fs = tau + q_phi * mean - k_phi;
    let ft = mean - sigma_t;
    if fs <= tol && ft <= tol {
        return (*trial, Yield::None);
    }

    let corner_tau = (k_phi - q_phi * sigma_t).max(0.0);
    let scale_to = |target: f64| if tau > 0.0 { target / tau } else { 0.0 };

    if ft > tol {
        // Splits the tensile corner between the two return regions.
        let alpha_p = (1.0 + q_phi * q_phi).sqrt() - q_phi;
        let h = tau - corner_tau - alpha_p * (mean - sigma_t);
        if h > 0.0 || fs <= tol {
            let tau_new = tau.min(corner_tau);
            return (
                trial.with_mean_and_scaled_deviator(sigma_t, scale_to(tau_new)),
                Yield::Tensile,
            );
        }
    }

    let dlambda = fs / (e.shear_modulus + e.bulk_modulus * q_phi * q_psi);
    let mean_new = mean - e.bulk_modulus * q_psi * dlambda;
    if mean_new > sigma_t {
        return (
            trial.with_mean_and_scaled_deviator(sigma_t, scale_to(corner_tau)),
            Yield::Shear,
        );
    }
    let tau_new = (k_phi - q_phi * mean_new).max(0.0);
    (
        trial.with_mean_and_scaled_deviator(mean_new, scale_to(tau_new)),
        Yield::Shear,
    )
}
