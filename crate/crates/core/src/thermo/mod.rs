//! Equation of state and transport coefficients.
//!
//! The pressure is the sum of a monoatomic part `θ^{5/2} P(ρ/θ^{3/2})` and a
//! radiation part `(a/3) θ⁴`; energy and entropy follow from the same closure so
//! Gibbs' relation holds exactly up to the entropy tabulation.

mod report;
mod structural;
mod table;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use report::{default_lattices, gibbs_samples, hypothesis_report, GibbsSample, HypothesisEntry, HypothesisReport, MeasuredConstants};
pub use structural::StructuralFunction;
pub use table::EntropyTable;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ThermoError {
    #[error("temperature must be positive, got {0}")]
    NonPositiveTemperature(f64),
    #[error("density must be nonnegative, got {0}")]
    NegativeDensity(f64),
    #[error("density must be positive for specific quantities, got {0}")]
    Vacuum(f64),
    #[error("invalid model parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct EosParams {
    pub radiation_constant: f64,
    pub structural: StructuralFunction,
    pub rho_min: f64,
}

impl Default for EosParams {
    fn default() -> Self {
        EosParams { radiation_constant: 1.0, structural: StructuralFunction::default(), rho_min: 1e-8 }
    }
}

/// Constitutive closure with a precomputed entropy table.
#[derive(Clone, Debug)]
pub struct EosModel {
    params: EosParams,
    table: Arc<EntropyTable>,
}

impl Default for EosModel {
    fn default() -> Self {
        EosModel::new(EosParams::default()).expect("default parameters are valid")
    }
}

fn check_theta(theta: f64) -> Result<(), ThermoError> {
    if theta > 0.0 && theta.is_finite() {
        Ok(())
    } else {
        Err(ThermoError::NonPositiveTemperature(theta))
    }
}

impl EosModel {
    pub fn new(params: EosParams) -> Result<Self, ThermoError> {
        if !(params.radiation_constant >= 0.0 && params.radiation_constant.is_finite()) {
            return Err(ThermoError::InvalidParameter(format!(
                "radiation constant must be nonnegative, got {}",
                params.radiation_constant
            )));
        }
        if !(params.rho_min > 0.0) {
            return Err(ThermoError::InvalidParameter(format!("rho_min must be positive, got {}", params.rho_min)));
        }
        params.structural.validate().map_err(ThermoError::InvalidParameter)?;
        let table = Arc::new(EntropyTable::build(&params.structural));
        Ok(EosModel { params, table })
    }

    pub fn params(&self) -> &EosParams {
        &self.params
    }

    pub fn radiation_constant(&self) -> f64 {
        self.params.radiation_constant
    }

    pub fn structural(&self) -> &StructuralFunction {
        &self.params.structural
    }

    pub fn p_inf(&self) -> f64 {
        self.params.structural.p_inf()
    }

    pub fn rho_min(&self) -> f64 {
        self.params.rho_min
    }

    pub fn table(&self) -> &EntropyTable {
        &self.table
    }

    /// Structural entropy `S(Z)`.
    pub fn structural_entropy(&self, z: f64) -> f64 {
        self.table.eval(z)
    }

    pub fn pressure(&self, rho: f64, theta: f64) -> Result<f64, ThermoError> {
        check_theta(theta)?;
        if rho < 0.0 {
            return Err(ThermoError::NegativeDensity(rho));
        }
        Ok(self.pressure_raw(rho, theta))
    }

    pub fn internal_energy(&self, rho: f64, theta: f64) -> Result<f64, ThermoError> {
        check_theta(theta)?;
        if !(rho > 0.0) {
            return Err(ThermoError::Vacuum(rho));
        }
        Ok(self.energy_density_raw(rho, theta) / rho)
    }

    pub fn entropy(&self, rho: f64, theta: f64) -> Result<f64, ThermoError> {
        check_theta(theta)?;
        if !(rho > 0.0) {
            return Err(ThermoError::Vacuum(rho));
        }
        Ok(self.entropy_density_raw(rho, theta) / rho)
    }

    /// Centered-difference residuals of Gibbs' relation at `(ρ, θ)`:
    /// `|θ ∂θ s − ∂θ e|` and `|θ ∂ρ s − (∂ρ e − p/ρ²)|`.
    pub fn gibbs_residual(&self, rho: f64, theta: f64, h: f64) -> Result<[f64; 2], ThermoError> {
        let e = |r: f64, t: f64| self.internal_energy(r, t);
        let s = |r: f64, t: f64| self.entropy(r, t);
        let ht = h * theta;
        let hr = h * rho;
        let ds_dt = (s(rho, theta + ht)? - s(rho, theta - ht)?) / (2.0 * ht);
        let de_dt = (e(rho, theta + ht)? - e(rho, theta - ht)?) / (2.0 * ht);
        let ds_dr = (s(rho + hr, theta)? - s(rho - hr, theta)?) / (2.0 * hr);
        let de_dr = (e(rho + hr, theta)? - e(rho - hr, theta)?) / (2.0 * hr);
        let p = self.pressure(rho, theta)?;
        Ok([(theta * ds_dt - de_dt).abs(), (theta * ds_dr - (de_dr - p / (rho * rho))).abs()])
    }

    // Unchecked kernels used by the solver; callers guarantee θ > 0 and ρ ≥ 0.

    pub(crate) fn pressure_raw(&self, rho: f64, theta: f64) -> f64 {
        let a = self.params.radiation_constant;
        let t4 = theta * theta * theta * theta;
        let pm = if rho > 0.0 {
            let t32 = theta * theta.sqrt();
            theta * t32 * self.params.structural.value(rho / t32)
        } else {
            0.0
        };
        pm + a / 3.0 * t4
    }

    /// `ρ e`.
    pub(crate) fn energy_density_raw(&self, rho: f64, theta: f64) -> f64 {
        let a = self.params.radiation_constant;
        let t4 = theta * theta * theta * theta;
        let pm = if rho > 0.0 {
            let t32 = theta * theta.sqrt();
            theta * t32 * self.params.structural.value(rho / t32)
        } else {
            0.0
        };
        1.5 * pm + a * t4
    }

    /// `∂(ρe)/∂θ` at fixed ρ.
    pub(crate) fn heat_capacity_raw(&self, rho: f64, theta: f64) -> f64 {
        let a = self.params.radiation_constant;
        let rad = 4.0 * a * theta * theta * theta;
        if rho > 0.0 {
            let t32 = theta * theta.sqrt();
            let z = rho / t32;
            let f = &self.params.structural;
            // d/dθ [θ^{5/2} P(Z)] = θ^{3/2}(5/2 P − 3/2 Z P')
            1.5 * t32 * (2.5 * f.value(z) - 1.5 * z * f.derivative(z)) + rad
        } else {
            rad
        }
    }

    /// `ρ s`, with the structural part floored at `ρ_min` for the argument of `S`.
    pub(crate) fn entropy_density_raw(&self, rho: f64, theta: f64) -> f64 {
        let a = self.params.radiation_constant;
        let rad = 4.0 / 3.0 * a * theta * theta * theta;
        if rho > 0.0 {
            let z = rho.max(self.params.rho_min) / (theta * theta.sqrt());
            rho * self.table.eval(z) + rad
        } else {
            rad
        }
    }

    /// Squared adiabatic sound speed `∂p/∂ρ|_s`, evaluated from the closure.
    pub(crate) fn sound_speed_sq_raw(&self, rho: f64, theta: f64) -> f64 {
        let rho = rho.max(self.params.rho_min);
        let t32 = theta * theta.sqrt();
        let z = rho / t32;
        let f = &self.params.structural;
        let a = self.params.radiation_constant;
        let dp_drho = theta * f.derivative(z);
        let dp_dtheta = t32 * (2.5 * f.value(z) - 1.5 * z * f.derivative(z)) + 4.0 / 3.0 * a * theta.powi(3);
        let cv = self.heat_capacity_raw(rho, theta);
        // c² = p_ρ + θ p_θ² / (ρ² c_v) with c_v per unit volume here.
        dp_drho + theta * dp_dtheta * dp_dtheta / (rho * cv).max(f64::MIN_POSITIVE)
    }

    /// Recover θ from `(ρ, ρe)` by safeguarded Newton iteration.
    pub(crate) fn temperature_from_energy(&self, rho: f64, energy: f64, guess: f64) -> Option<f64> {
        if !(energy.is_finite()) || energy <= 0.0 {
            return None;
        }
        let f = |t: f64| self.energy_density_raw(rho, t) - energy;
        // Bracket: ρe is strictly increasing in θ, → cold limit as θ → 0.
        let mut lo = 0.0_f64;
        let mut hi = if guess > 0.0 && guess.is_finite() { guess } else { 1.0 };
        while f(hi) < 0.0 {
            lo = hi;
            hi *= 2.0;
            if hi > 1e300 {
                return None;
            }
        }
        let mut t = hi;
        if guess > 0.0 && guess < hi {
            t = guess;
        }
        for _ in 0..200 {
            let r = f(t);
            if r == 0.0 {
                return Some(t);
            }
            if r > 0.0 {
                hi = hi.min(t);
            } else {
                lo = lo.max(t);
            }
            let d = self.heat_capacity_raw(rho, t);
            let mut next = t - r / d;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - t).abs() <= 1e-15 * t {
                return if lo == 0.0 && next < 1e-300 { None } else { Some(next) };
            }
            t = next;
        }
        if lo > 0.0 {
            Some(t)
        } else {
            None
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TransportBounds {
    pub mu_lo: f64,
    pub mu_hi: f64,
    pub eta_hi: f64,
    pub kappa_lo: f64,
    pub kappa_hi: f64,
    pub zeta_lo: f64,
    pub zeta_hi: f64,
    /// Admissible bound on |μ'| and |ζ'| over the sampled range.
    pub derivative_max: f64,
}

/// `μ = μ₀(1+θ)`, `η = η₀(1+θ)`, `κ = κ₀(1+θ^β)`, `ζ = ζ₀(1+θ)`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TransportModel {
    pub mu0: f64,
    #[serde(default)]
    pub eta0: f64,
    pub kappa0: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    pub zeta0: f64,
    #[serde(default)]
    pub bounds: Option<TransportBounds>,
}

fn default_beta() -> f64 {
    6.5
}

impl Default for TransportModel {
    fn default() -> Self {
        TransportModel::new(0.05, 0.0, 0.01, 6.5, 0.05)
    }
}

impl TransportModel {
    /// Coefficients with bounds at half and twice the nominal prefactors.
    pub fn new(mu0: f64, eta0: f64, kappa0: f64, beta: f64, zeta0: f64) -> Self {
        let bounds = TransportBounds {
            mu_lo: 0.5 * mu0,
            mu_hi: 2.0 * mu0,
            eta_hi: 2.0 * eta0 + mu0,
            kappa_lo: 0.5 * kappa0,
            kappa_hi: 2.0 * kappa0,
            zeta_lo: 0.5 * zeta0,
            zeta_hi: 2.0 * zeta0,
            derivative_max: 2.0 * mu0.max(zeta0),
        };
        TransportModel { mu0, eta0, kappa0, beta, zeta0, bounds: Some(bounds) }
    }

    pub fn bounds(&self) -> TransportBounds {
        self.bounds.clone().unwrap_or_else(|| {
            TransportModel::new(self.mu0, self.eta0, self.kappa0, self.beta, self.zeta0).bounds.unwrap()
        })
    }

    pub fn validate(&self) -> Result<(), ThermoError> {
        for (name, v) in [("mu0", self.mu0), ("eta0", self.eta0), ("kappa0", self.kappa0), ("zeta0", self.zeta0)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(ThermoError::InvalidParameter(format!("{name} must be nonnegative, got {v}")));
            }
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(ThermoError::InvalidParameter(format!("beta must be positive, got {}", self.beta)));
        }
        Ok(())
    }

    pub fn mu(&self, theta: f64) -> f64 {
        self.mu0 * (1.0 + theta)
    }
    pub fn eta(&self, theta: f64) -> f64 {
        self.eta0 * (1.0 + theta)
    }
    pub fn kappa(&self, theta: f64) -> f64 {
        self.kappa0 * (1.0 + theta.powf(self.beta))
    }
    pub fn zeta(&self, theta: f64) -> f64 {
        self.zeta0 * (1.0 + theta)
    }
}
