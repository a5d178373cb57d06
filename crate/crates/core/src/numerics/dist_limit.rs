//! Empirical check that the rescaled process approaches its power-scaling limit.
//!
//! For each `eps` the rescaled process `z_eps` (drift `P_D + R_eps`) and the
//! limit `y` (drift `P_D`) are driven by the same Brownian path, which gives
//! sup-distance quantiles and a Gronwall consistency count. Terminal values of
//! the original process, mapped through the scaling, are compared with the
//! limit marginal by an energy-distance permutation test.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::energy::energy_test;
use super::scale::scale_map;
use super::sde::{em_coupled, em_terminal, rng_for};
use crate::error::{Error, Result};
use crate::poly::NumField;
use crate::propagation::{norm, remainder, rescaled_drift, Mode, PropagationResult};
use crate::system::SdeSystem;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistLimitConfig {
    pub t: f64,
    pub trials: usize,
    pub steps: usize,
    pub seed: u64,
    pub energy_samples: usize,
    pub permutations: usize,
}

impl Default for DistLimitConfig {
    fn default() -> Self {
        DistLimitConfig { t: 1.0, trials: 200, steps: 1000, seed: 0, energy_samples: 200, permutations: 99 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistLimitRow {
    pub eps: f64,
    pub alive: usize,
    pub sup_median: f64,
    pub sup_q90: f64,
    /// Share of coupled trials obeying the Gronwall bound.
    pub gronwall_fraction: f64,
    pub energy_distance: f64,
    pub p_value: f64,
    /// `p_value > 0.05`.
    pub consistent: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistLimitReport {
    pub rows: Vec<DistLimitRow>,
    pub remainder_is_zero: bool,
    /// Sup-distance medians do not increase as `eps` decreases.
    pub median_nonincreasing: bool,
}

fn quantile(v: &mut [f64], q: f64) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let i = ((v.len() - 1) as f64 * q).round() as usize;
    v[i]
}

fn frob(m: &[f64]) -> f64 {
    norm(m)
}

pub fn dist_limit_check(
    sys: &SdeSystem,
    res: &PropagationResult,
    eps: &[f64],
    cfg: &DistLimitConfig,
) -> Result<DistLimitReport> {
    if res.mode != Mode::Dist {
        return Err(Error::Invalid("distributional check needs power scalings".into()));
    }
    let n = sys.dim();
    let rem = remainder(sys, res)?;
    let y_drift = NumField::from_field(&res.limit_drift);
    let orig = NumField::from_field(&sys.drift);
    let zero = vec![0.0; n];
    let mut order: Vec<f64> = eps.to_vec();
    order.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut rows = Vec::new();
    for &e in &order {
        let z_drift = rescaled_drift(sys, res, e)?.drift;
        let r_eps = rem.at_eps(e)?;
        let per_trial: Vec<Option<(f64, bool)>> = (0..cfg.trials)
            .into_par_iter()
            .map(|k| {
                let mut rng = rng_for(cfg.seed, k as u64);
                let (zp, yp) = em_coupled(&z_drift, &y_drift, &sys.sigma, &zero, cfg.t, cfg.steps, &mut rng);
                if zp.is_dead() || yp.is_dead() {
                    return None;
                }
                let mut sup: f64 = 0.0;
                let mut sup_r: f64 = 0.0;
                let mut lip: f64 = 0.0;
                let mut jac = vec![0.0; n * n];
                let mut mid = vec![0.0; n];
                for (z, y) in zp.states.iter().zip(&yp.states) {
                    let d: Vec<f64> = z.iter().zip(y).map(|(a, b)| a - b).collect();
                    sup = sup.max(norm(&d));
                    sup_r = sup_r.max(norm(&r_eps.eval(z)));
                    for (m, (a, b)) in mid.iter_mut().zip(z.iter().zip(y)) {
                        *m = 0.5 * (a + b);
                    }
                    for p in [z.as_slice(), y.as_slice(), mid.as_slice()] {
                        y_drift.jacobian_into(p, &mut jac);
                        lip = lip.max(frob(&jac));
                    }
                }
                let bound = cfg.t * sup_r * (lip * cfg.t).exp();
                Some((sup, sup <= bound * (1.0 + 1e-6) + 1e-12))
            })
            .collect();
        let alive: Vec<(f64, bool)> = per_trial.into_iter().flatten().collect();
        let mut sups: Vec<f64> = alive.iter().map(|a| a.0).collect();
        let gron = alive.iter().filter(|a| a.1).count() as f64 / alive.len().max(1) as f64;
        let sup_median = quantile(&mut sups, 0.5);
        let sup_q90 = quantile(&mut sups, 0.9);

        let pairs: Vec<Option<(Vec<f64>, Vec<f64>)>> = (0..cfg.energy_samples)
            .into_par_iter()
            .map(|k| {
                let stream = (1u64 << 40) + k as u64;
                let x = em_terminal(&orig, &sys.sigma, &zero, e * cfg.t, cfg.steps, &mut rng_for(cfg.seed, stream))?;
                let y = em_terminal(&y_drift, &sys.sigma, &zero, cfg.t, cfg.steps, &mut rng_for(cfg.seed, stream))?;
                Some((scale_map(&x, &res.scalings, e).ok()?, y))
            })
            .collect();
        let (xs, ys): (Vec<Vec<f64>>, Vec<Vec<f64>>) = pairs.into_iter().flatten().unzip();
        let (energy, p) = if xs.len() >= 2 {
            energy_test(&xs, &ys, cfg.permutations, cfg.seed)
        } else {
            (f64::NAN, f64::NAN)
        };
        rows.push(DistLimitRow {
            eps: e,
            alive: alive.len(),
            sup_median,
            sup_q90,
            gronwall_fraction: gron,
            energy_distance: energy,
            p_value: p,
            consistent: p > 0.05,
        });
    }
    let median_nonincreasing = rows
        .windows(2)
        .all(|w| w[1].sup_median <= w[0].sup_median * (1.0 + 1e-9) + 1e-15);
    Ok(DistLimitReport { rows, remainder_is_zero: rem.is_zero(), median_nonincreasing })
}
