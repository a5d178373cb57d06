//! Monte-Carlo estimate of how often the Malliavin covariance of the lifted
//! system `dx = dW, dy = (Q(y) + lambda sigma x) dt` is invertible.

use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gramian::{gramian_steps, INVERTIBLE_TOL};
use super::ControlProblem;
use crate::error::{Error, Result};
use crate::linalg::{is_invertible_psd, min_eigenvalue};
use crate::numerics::ode::{max_abs, rk4_fixed, EXPLOSION_BOUND};
use crate::numerics::{rng_for, SampledRateControl};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MalliavinConfig {
    pub lambda: f64,
    pub t: f64,
    pub trials: usize,
    pub seed: u64,
    /// Brownian grid on `[0, 1]`.
    pub steps: usize,
    pub tol: f64,
}

impl Default for MalliavinConfig {
    fn default() -> Self {
        MalliavinConfig { lambda: 1.0, t: 1.0, trials: 200, seed: 0, steps: 400, tol: INVERTIBLE_TOL }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MalliavinReport {
    pub config: MalliavinConfig,
    pub invertible_freq: f64,
    /// `sup |W| <= sqrt 2` and `C` invertible.
    pub event_freq: f64,
    /// Invertible trials whose extracted control has an invertible Gramian.
    pub gramian_checked: usize,
    pub gramian_agree: usize,
    pub exploded: usize,
    pub min_eig_median: f64,
}

struct Trial {
    invertible: bool,
    event: bool,
    min_eig: f64,
    gramian_ok: Option<bool>,
}

fn one_trial(prob: &ControlProblem, cfg: &MalliavinConfig, k: u64) -> Option<Trial> {
    let n = prob.dim();
    let m = 2 * n;
    let q = prob.num_field();
    let sigma = &prob.sigma;
    let lam = cfg.lambda;
    let mut rng = rng_for(cfg.seed, k);
    let dt = 1.0 / cfg.steps as f64;
    let sq = dt.sqrt();
    let mut w = vec![vec![0.0; n]; cfg.steps + 1];
    for i in 1..=cfg.steps {
        for l in 0..n {
            let z: f64 = StandardNormal.sample(&mut rng);
            w[i][l] = w[i - 1][l] + sq * z;
        }
    }
    let sup_w = w.iter().map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt()).fold(0.0, f64::max);
    let w_at = |s: f64, out: &mut [f64]| {
        let x = (s / dt).clamp(0.0, cfg.steps as f64);
        let i = (x.floor() as usize).min(cfg.steps - 1);
        let a = x - i as f64;
        for l in 0..n {
            out[l] = (1.0 - a) * w[i][l] + a * w[i + 1][l];
        }
    };
    // State: y (n) | K (m x m) | C (m x m).
    let mut z = vec![0.0; n + 2 * m * m];
    z[..n].copy_from_slice(&prob.x0);
    for i in 0..m {
        z[n + i * m + i] = 1.0;
    }
    let mut wt = vec![0.0; n];
    let mut jac = vec![0.0; n * n];
    let nt = ((cfg.t / dt).round() as usize).max(1);
    let h = cfg.t / nt as f64;
    for s in 0..nt {
        let t0 = s as f64 * h;
        let rhs = |tt: f64, st: &[f64], out: &mut [f64]| {
            w_at(tt, &mut wt);
            let y = &st[..n];
            q.eval_into(y, &mut out[..n]);
            for i in 0..n {
                out[i] += lam * sigma[i] * wt[i];
            }
            q.jacobian_into(y, &mut jac);
            let kk = &st[n..n + m * m];
            let (ko, co) = out[n..].split_at_mut(m * m);
            // K' = -K A with A = [[0, 0], [lambda sigma, DQ]]; only the
            // lower block rows of A are nonzero.
            for i in 0..m {
                for c in 0..m {
                    let mut acc = 0.0;
                    for r in 0..n {
                        let a = if c < n {
                            if r == c {
                                lam * sigma[r]
                            } else {
                                0.0
                            }
                        } else {
                            jac[r * n + (c - n)]
                        };
                        acc += kk[i * m + n + r] * a;
                    }
                    ko[i * m + c] = -acc;
                }
            }
            for i in 0..m {
                for c in 0..m {
                    let mut acc = 0.0;
                    for l in 0..n {
                        acc += kk[i * m + l] * kk[c * m + l];
                    }
                    co[i * m + c] = acc;
                }
            }
        };
        rk4_fixed(rhs, t0, t0 + h, 1, &mut z);
        if max_abs(&z[..n]) > EXPLOSION_BOUND || !z.iter().all(|v| v.is_finite()) {
            return None;
        }
    }
    let c = DMatrix::from_row_slice(m, m, &z[n + m * m..]);
    let c = 0.5 * (&c + c.transpose());
    let invertible = is_invertible_psd(&c, cfg.tol);
    let event = invertible && sup_w <= 2f64.sqrt();
    let gramian_ok = if invertible {
        // f = lambda int W, so f' = lambda W on the same grid.
        let times: Vec<f64> = (0..=nt).map(|i| i as f64 * h).collect();
        let rates: Vec<Vec<f64>> = times
            .iter()
            .map(|&s| {
                let mut v = vec![0.0; n];
                w_at(s, &mut v);
                v.iter().map(|x| lam * x).collect()
            })
            .collect();
        let f = SampledRateControl::new(times, rates).ok()?;
        Some(gramian_steps(prob, &f, cfg.t, nt).map(|g| g.invertible).unwrap_or(false))
    } else {
        None
    };
    Some(Trial { invertible, event, min_eig: min_eigenvalue(&c), gramian_ok })
}

pub fn malliavin_mc(prob: &ControlProblem, cfg: &MalliavinConfig) -> Result<MalliavinReport> {
    if !(cfg.lambda > 0.0) || cfg.trials == 0 || cfg.steps == 0 {
        return Err(Error::Invalid("need lambda > 0, trials >= 1 and steps >= 1".into()));
    }
    if !(cfg.t > 0.0 && cfg.t <= 1.0) {
        return Err(Error::Invalid("time horizon must lie in (0, 1]".into()));
    }
    let trials: Vec<Option<Trial>> = (0..cfg.trials as u64).into_par_iter().map(|k| one_trial(prob, cfg, k)).collect();
    let exploded = trials.iter().filter(|t| t.is_none()).count();
    let done: Vec<Trial> = trials.into_iter().flatten().collect();
    let total = cfg.trials as f64;
    let inv = done.iter().filter(|t| t.invertible).count() as f64;
    let ev = done.iter().filter(|t| t.event).count() as f64;
    let checked: Vec<bool> = done.iter().filter_map(|t| t.gramian_ok).collect();
    let mut eigs: Vec<f64> = done.iter().map(|t| t.min_eig).collect();
    eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let min_eig_median = if eigs.is_empty() { f64::NAN } else { eigs[eigs.len() / 2] };
    Ok(MalliavinReport {
        config: cfg.clone(),
        invertible_freq: inv / total,
        event_freq: ev / total,
        gramian_checked: checked.len(),
        gramian_agree: checked.iter().filter(|b| **b).count(),
        exploded,
        min_eig_median,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;

    #[test]
    fn kolmogorov_always_invertible_npnh_never() {
        let cfg = MalliavinConfig { trials: 20, steps: 200, ..Default::default() };
        let r = malliavin_mc(&ControlProblem::from_system(&models::kolmogorov_pair()), &cfg).unwrap();
        assert_eq!(r.invertible_freq, 1.0);
        assert_eq!(r.gramian_agree, r.gramian_checked);
        let r = malliavin_mc(&ControlProblem::from_system(&models::npnh()), &cfg).unwrap();
        assert_eq!(r.invertible_freq, 0.0);
    }
}
