//! SDE systems `dx = P(x) dt + sigma dB` with diagonal additive noise.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{rational_from_f64, Coeff, PolyVectorField};

#[derive(Clone, Debug, PartialEq)]
pub struct SdeSystem {
    pub drift: PolyVectorField,
    pub sigma: Vec<f64>,
}

/// On-disk form: `{"n": 2, "sigma": [1, 0], "drift": [[...], [...]]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SystemSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub n: usize,
    pub sigma: Vec<f64>,
    pub drift: PolyVectorField,
}

impl SdeSystem {
    pub fn new(drift: PolyVectorField, sigma: Vec<f64>) -> Result<Self> {
        let n = drift.dim();
        if sigma.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: sigma.len() });
        }
        if let Some(s) = sigma.iter().find(|s| !s.is_finite() || **s < 0.0) {
            return Err(Error::Invalid(format!("noise coefficient {s} must be finite and >= 0")));
        }
        Ok(SdeSystem { drift, sigma })
    }

    pub fn dim(&self) -> usize {
        self.drift.dim()
    }

    /// Indices with `sigma_j > 0`.
    pub fn noisy(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&j| self.sigma[j] > 0.0).collect()
    }

    pub fn from_spec(spec: SystemSpec) -> Result<Self> {
        if spec.drift.dim() != spec.n {
            return Err(Error::DimensionMismatch { expected: spec.n, got: spec.drift.dim() });
        }
        SdeSystem::new(spec.drift, spec.sigma)
    }

    pub fn to_spec(&self, name: Option<String>) -> SystemSpec {
        SystemSpec { name, n: self.dim(), sigma: self.sigma.clone(), drift: self.drift.clone() }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let spec: SystemSpec = serde_json::from_str(s)?;
        Self::from_spec(spec)
    }

    /// The system seen from `x_star`: drift `P(x + x_star)`, started at the origin.
    pub fn shift(&self, x_star: &[f64]) -> Result<Self> {
        if x_star.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x_star.len() });
        }
        let s: Vec<Coeff> = x_star.iter().map(|&v| rational_from_f64(v)).collect::<Result<_>>()?;
        SdeSystem::new(self.drift.shift(&s)?, self.sigma.clone())
    }
}
