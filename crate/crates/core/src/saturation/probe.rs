//! Randomised search for a control whose trajectory enters a target set.
//!
//! The zero control is tried first, then random piecewise-constant controls
//! on the noisy coordinates. If a target centre is given and the random
//! search fails, Gramian-Newton shooting toward the centre is tried last.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::control::{steer, ControlProblem, SteerConfig};
use crate::numerics::{flow, rng_for, uniform_grid, Control, PiecewiseLinearControl, SampledRateControl};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub t: f64,
    pub trials: usize,
    pub seed: u64,
    pub max_segments: usize,
    /// Path points checked against the target.
    pub checkpoints: usize,
    /// Rate magnitudes are `10^u` with `u` uniform in this range.
    pub log10_range: (f64, f64),
    /// Point inside the target used for the shooting fallback.
    pub center: Option<Vec<f64>>,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            t: 1.0,
            trials: 2000,
            seed: 0,
            max_segments: 8,
            checkpoints: 64,
            log10_range: (-2.0, 3.0),
            center: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Zero,
    Random { trial: usize, control: PiecewiseLinearControl },
    Shooting { control: SampledRateControl },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub found: bool,
    pub trials_used: usize,
    pub hit_time: Option<f64>,
    pub hit_state: Option<Vec<f64>>,
    pub witness: Option<Witness>,
}

type Target<'a> = &'a (dyn Fn(&[f64]) -> bool + Sync);

fn first_hit(prob: &ControlProblem, f: &dyn Control, target: Target, t: f64, points: usize) -> Option<(f64, Vec<f64>)> {
    let q = prob.num_field();
    let grid = uniform_grid(t, points.max(1));
    let path = flow(&q, &prob.sigma, f, &prob.x0, &grid);
    path.states.iter().zip(&path.times).skip(1).find(|(x, _)| target(x)).map(|(x, s)| (*s, x.clone()))
}

fn random_control(prob: &ControlProblem, cfg: &ProbeConfig, trial: usize) -> PiecewiseLinearControl {
    let n = prob.dim();
    let mut rng = rng_for(cfg.seed, trial as u64);
    let segs = rng.random_range(1..=cfg.max_segments.max(1));
    let mut cuts: Vec<f64> = (1..segs).map(|_| rng.random_range(0.0..cfg.t)).collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut times = vec![0.0];
    times.extend(cuts);
    times.push(cfg.t);
    times.dedup();
    let (lo, hi) = cfg.log10_range;
    let slopes = (0..times.len() - 1)
        .map(|_| {
            (0..n)
                .map(|i| {
                    if prob.sigma[i] == 0.0 {
                        return 0.0;
                    }
                    let mag = 10f64.powf(rng.random_range(lo..hi));
                    if rng.random_bool(0.5) {
                        mag
                    } else {
                        -mag
                    }
                })
                .collect()
        })
        .collect();
    PiecewiseLinearControl::new(times, slopes).expect("random control is well formed")
}

const BATCH: usize = 256;

pub fn reachability_probe(prob: &ControlProblem, target: Target, cfg: &ProbeConfig) -> ProbeResult {
    let zero = PiecewiseLinearControl::zero(prob.dim(), cfg.t);
    if let Some((s, x)) = first_hit(prob, &zero, target, cfg.t, cfg.checkpoints) {
        return ProbeResult { found: true, trials_used: 0, hit_time: Some(s), hit_state: Some(x), witness: Some(Witness::Zero) };
    }
    let mut start = 0;
    while start < cfg.trials {
        let end = (start + BATCH).min(cfg.trials);
        // Lowest hitting index in the batch, independent of scheduling.
        let hit = (start..end)
            .into_par_iter()
            .filter_map(|k| {
                let f = random_control(prob, cfg, k);
                first_hit(prob, &f, target, cfg.t, cfg.checkpoints).map(|h| (k, f, h))
            })
            .min_by_key(|(k, _, _)| *k);
        if let Some((k, f, (s, x))) = hit {
            return ProbeResult {
                found: true,
                trials_used: k + 1,
                hit_time: Some(s),
                hit_state: Some(x),
                witness: Some(Witness::Random { trial: k, control: f }),
            };
        }
        start = end;
    }
    if let Some(c) = &cfg.center {
        let sc = SteerConfig { t: cfg.t, seed: cfg.seed, ..SteerConfig::default() };
        if let Ok(r) = steer(prob, c, &sc) {
            if let Some((s, x)) = first_hit(prob, &r.control, target, cfg.t, cfg.checkpoints) {
                return ProbeResult {
                    found: true,
                    trials_used: cfg.trials,
                    hit_time: Some(s),
                    hit_state: Some(x),
                    witness: Some(Witness::Shooting { control: r.control }),
                };
            }
        }
    }
    ProbeResult { found: false, trials_used: cfg.trials, hit_time: None, hit_state: None, witness: None }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;

    #[test]
    fn elliptic_ball_and_forbidden_half_space() {
        let prob = ControlProblem::from_system(&models::brownian(3));
        let ball = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>() < 0.01;
        let r = reachability_probe(&prob, &ball, &ProbeConfig::default());
        assert!(r.found && matches!(r.witness, Some(Witness::Zero)));

        // x' = x^2 - y^2 keeps x <= 0 from the origin.
        let prob = ControlProblem::from_system(&models::quadratic_example(1, 0));
        let bad = |x: &[f64]| x[0] > 0.05;
        let cfg = ProbeConfig { trials: 500, center: Some(vec![0.5, 0.0]), ..Default::default() };
        assert!(!reachability_probe(&prob, &bad, &cfg).found);
    }
}
