//! Limit control problems `x' = Q(x) + sigma f'` and the tools that decide
//! when their reachable sets have interior.

mod gramian;
mod homogeneity;
mod hormander;
mod malliavin;
mod steer;

pub use gramian::{gramian, gramian_steps, GramianReport, INVERTIBLE_TOL};
pub use homogeneity::{
    component_homogeneity, direction_certificate, transfer_inference, DirectionCertificate, Homogeneity,
    TransferInference,
};
pub use hormander::{hormander_rank, hormander_rank_svd, RankReport};
pub use malliavin::{malliavin_mc, MalliavinConfig, MalliavinReport};
pub use steer::{steer, SteerConfig, SteerResult};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::{NumField, PolyVectorField};
use crate::propagation::PropagationResult;
use crate::system::SdeSystem;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ControlProblem {
    pub q: PolyVectorField,
    pub sigma: Vec<f64>,
    pub x0: Vec<f64>,
}

impl ControlProblem {
    pub fn new(q: PolyVectorField, sigma: Vec<f64>, x0: Vec<f64>) -> Result<Self> {
        let n = q.dim();
        if sigma.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: sigma.len() });
        }
        if x0.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: x0.len() });
        }
        Ok(ControlProblem { q, sigma, x0 })
    }

    /// The system's own drift, started at the origin.
    pub fn from_system(sys: &SdeSystem) -> Self {
        let n = sys.dim();
        ControlProblem { q: sys.drift.clone(), sigma: sys.sigma.clone(), x0: vec![0.0; n] }
    }

    /// Limit drift of a propagation run, started at the origin.
    pub fn from_limit(sys: &SdeSystem, res: &PropagationResult) -> Self {
        let n = sys.dim();
        ControlProblem { q: res.limit_drift.clone(), sigma: sys.sigma.clone(), x0: vec![0.0; n] }
    }

    pub fn with_start(mut self, x0: Vec<f64>) -> Self {
        self.x0 = x0;
        self
    }

    pub fn dim(&self) -> usize {
        self.q.dim()
    }

    pub fn num_field(&self) -> NumField {
        NumField::from_field(&self.q)
    }

    pub fn noisy(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.sigma[i] != 0.0).collect()
    }
}
