use serde::{Deserialize, Serialize};

/// Monoatomic structural function `P(Z)`, `Z = ρ/θ^{3/2}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StructuralFunction {
    /// `P(Z) = Z (1 + Z/z_d)^{2/3}`: ideal at low density, Fermi-degenerate at high density.
    Degenerate { z_d: f64 },
    /// `P(Z) = Z`. Violates the degenerate-limit hypothesis; kept for comparisons.
    Ideal,
}

impl Default for StructuralFunction {
    fn default() -> Self {
        StructuralFunction::Degenerate { z_d: 1.0 }
    }
}

impl StructuralFunction {
    pub fn value(&self, z: f64) -> f64 {
        match *self {
            StructuralFunction::Degenerate { z_d } => z * (1.0 + z / z_d).powf(2.0 / 3.0),
            StructuralFunction::Ideal => z,
        }
    }

    pub fn derivative(&self, z: f64) -> f64 {
        match *self {
            StructuralFunction::Degenerate { z_d } => {
                let w = 1.0 + z / z_d;
                w.powf(2.0 / 3.0) + (2.0 / 3.0) * (z / z_d) * w.powf(-1.0 / 3.0)
            }
            StructuralFunction::Ideal => 1.0,
        }
    }

    /// `(5/3 P(Z) − P'(Z) Z) / Z`, written without cancellation.
    pub fn stability_margin(&self, z: f64) -> f64 {
        match *self {
            StructuralFunction::Degenerate { z_d } => (2.0 / 3.0) * (1.0 + z / z_d).powf(-1.0 / 3.0),
            StructuralFunction::Ideal => 2.0 / 3.0,
        }
    }

    /// `−S'(Z) = (3/2)(5/3 P − P' Z)/Z²`.
    pub fn entropy_slope_neg(&self, z: f64) -> f64 {
        1.5 * self.stability_margin(z) / z
    }

    /// Limit of `P(Z)/Z^{5/3}` as `Z → ∞`.
    pub fn p_inf(&self) -> f64 {
        match *self {
            StructuralFunction::Degenerate { z_d } => z_d.powf(-2.0 / 3.0),
            StructuralFunction::Ideal => 0.0,
        }
    }

    pub(crate) fn validate(&self) -> Result<(), String> {
        match *self {
            StructuralFunction::Degenerate { z_d } if !(z_d > 0.0 && z_d.is_finite()) => {
                Err(format!("z_d must be positive and finite, got {z_d}"))
            }
            _ => Ok(()),
        }
    }
}
