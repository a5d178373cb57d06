//! Gramian-Newton shooting: find a control driving `x0` to a target at time `t`.
//!
//! A perturbation `delta f' = sigma K_s^T alpha` moves the endpoint by
//! `J_t G_t alpha` to first order, so each step solves a linear system and
//! backtracks on the residual. Singular directions are dropped by a
//! truncated SVD solve.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::gramian::integrate;
use super::ControlProblem;
use crate::error::{Error, Result};
use crate::numerics::{rng_for, SampledRateControl};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteerConfig {
    pub t: f64,
    /// Rate nodes on `[0, t]`.
    pub nodes: usize,
    /// RK4 sub-steps per node interval.
    pub substeps: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
    /// Random restarts after the zero control stalls.
    pub restarts: usize,
}

impl Default for SteerConfig {
    fn default() -> Self {
        SteerConfig { t: 1.0, nodes: 40, substeps: 5, max_iter: 60, tol: 1e-8, seed: 0, restarts: 8 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteerResult {
    pub control: SampledRateControl,
    pub endpoint: Vec<f64>,
    pub residual: f64,
    pub converged: bool,
    pub iterations: usize,
}

struct Eval {
    endpoint: Vec<f64>,
    /// `K` at the rate nodes.
    k_nodes: Vec<DMatrix<f64>>,
    jg: DMatrix<f64>,
}

fn evaluate(prob: &ControlProblem, f: &SampledRateControl, cfg: &SteerConfig) -> Option<Eval> {
    let run = integrate(prob, f, cfg.t, cfg.nodes * cfg.substeps).ok()?;
    let mut k_nodes = Vec::with_capacity(f.times.len());
    let mut j = 0;
    for &s in &f.times {
        while j + 1 < run.k_path.len() && (run.k_path[j + 1].0 - s).abs() <= (run.k_path[j].0 - s).abs() {
            j += 1;
        }
        k_nodes.push(run.k_path[j].1.clone());
    }
    let g = 0.5 * (&run.g + run.g.transpose());
    Some(Eval { endpoint: run.x, k_nodes, jg: &run.j * g })
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Drive `prob.x0` to `target` at time `cfg.t`.
pub fn steer(prob: &ControlProblem, target: &[f64], cfg: &SteerConfig) -> Result<SteerResult> {
    let n = prob.dim();
    if target.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: target.len() });
    }
    if cfg.nodes < 2 || !(cfg.t > 0.0) {
        return Err(Error::Invalid("steering needs at least two nodes and t > 0".into()));
    }
    let times: Vec<f64> = (0..=cfg.nodes).map(|i| cfg.t * i as f64 / cfg.nodes as f64).collect();
    let mut best: Option<SteerResult> = None;
    for attempt in 0..=cfg.restarts {
        let mut rng = rng_for(cfg.seed, attempt as u64);
        let rates: Vec<Vec<f64>> = times
            .iter()
            .map(|_| {
                (0..n)
                    .map(|i| {
                        if attempt == 0 || prob.sigma[i] == 0.0 {
                            0.0
                        } else {
                            StandardNormal.sample(&mut rng)
                        }
                    })
                    .collect::<Vec<f64>>()
            })
            .collect();
        let mut f = SampledRateControl::new(times.clone(), rates)?;
        let Some(mut ev) = evaluate(prob, &f, cfg) else { continue };
        let mut res = dist(&ev.endpoint, target);
        let mut iters = 0;
        while res > cfg.tol && iters < cfg.max_iter {
            iters += 1;
            let err = DVector::from_iterator(n, target.iter().zip(&ev.endpoint).map(|(a, b)| a - b));
            let svd = ev.jg.clone().svd(true, true);
            let top = svd.singular_values.max();
            let Ok(alpha) = svd.solve(&err, 1e-14 * top) else { break };
            let mut step = 1.0;
            let mut moved = false;
            while step > 1e-4 {
                let rates: Vec<Vec<f64>> = f
                    .rates
                    .iter()
                    .zip(&ev.k_nodes)
                    .map(|(r, k)| {
                        let d = k.transpose() * &alpha;
                        (0..n).map(|i| r[i] + step * prob.sigma[i] * d[i]).collect()
                    })
                    .collect();
                let g = SampledRateControl::new(times.clone(), rates)?;
                if let Some(e2) = evaluate(prob, &g, cfg) {
                    let r2 = dist(&e2.endpoint, target);
                    if r2 < res {
                        f = g;
                        ev = e2;
                        res = r2;
                        moved = true;
                        break;
                    }
                }
                step *= 0.5;
            }
            if !moved {
                break;
            }
        }
        let out = SteerResult { control: f, endpoint: ev.endpoint, residual: res, converged: res <= cfg.tol, iterations: iters };
        if out.converged {
            return Ok(out);
        }
        if best.as_ref().is_none_or(|b| out.residual < b.residual) {
            best = Some(out);
        }
    }
    best.ok_or_else(|| Error::Numerical("every steering attempt exploded".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;

    #[test]
    fn steers_kolmogorov_and_lorenz_limit() {
        let prob = ControlProblem::from_system(&models::kolmogorov_pair());
        let r = steer(&prob, &[0.3, -0.7], &SteerConfig::default()).unwrap();
        assert!(r.converged, "{}", r.residual);

        let sys = models::lorenz96(5, &[1.0, 1.0]);
        let res = crate::propagation::lil_scalings(&sys);
        let prob = ControlProblem::from_limit(&sys, &res);
        let r = steer(&prob, &[0.2, -0.1, 0.3, -0.2, 0.1], &SteerConfig::default()).unwrap();
        assert!(r.converged, "{}", r.residual);
    }
}
