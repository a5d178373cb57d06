//! Euler-Maruyama for `dx = Q(x) dt + diag(noise) dB`.
//!
//! Each trial draws from its own ChaCha stream derived from `(seed, trial)`,
//! so batch results do not depend on thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::ode::{max_abs, EXPLOSION_BOUND};
use super::path::Path;
use crate::error::{Error, Result};
use crate::poly::NumField;
use crate::system::SdeSystem;

pub fn rng_for(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(trial);
    r
}

fn alive(x: &[f64]) -> bool {
    max_abs(x) <= EXPLOSION_BOUND && x.iter().all(|v| v.is_finite())
}

/// One path on the uniform grid with `steps` steps over `[0, t]`.
pub fn em_path(drift: &NumField, noise: &[f64], x0: &[f64], t: f64, steps: usize, rng: &mut ChaCha8Rng) -> Path {
    let n = x0.len();
    let dt = t / steps as f64;
    let sq = dt.sqrt();
    let times: Vec<f64> = (0..=steps).map(|k| t * k as f64 / steps as f64).collect();
    let mut x = x0.to_vec();
    let mut b = vec![0.0; n];
    let mut states = Vec::with_capacity(steps + 1);
    states.push(x.clone());
    for k in 1..=steps {
        drift.eval_into(&x, &mut b);
        for i in 0..n {
            let z: f64 = StandardNormal.sample(rng);
            x[i] += b[i] * dt + noise[i] * sq * z;
        }
        if !alive(&x) {
            return Path { times, states, death_time: Some(k as f64 * dt) };
        }
        states.push(x.clone());
    }
    Path { times, states, death_time: None }
}

/// Terminal value only, without storing the path.
pub fn em_terminal(drift: &NumField, noise: &[f64], x0: &[f64], t: f64, steps: usize, rng: &mut ChaCha8Rng) -> Option<Vec<f64>> {
    let n = x0.len();
    let dt = t / steps as f64;
    let sq = dt.sqrt();
    let mut x = x0.to_vec();
    let mut b = vec![0.0; n];
    for _ in 0..steps {
        drift.eval_into(&x, &mut b);
        for i in 0..n {
            let z: f64 = StandardNormal.sample(rng);
            x[i] += b[i] * dt + noise[i] * sq * z;
        }
        if !alive(&x) {
            return None;
        }
    }
    Some(x)
}

/// Terminal values of `trials` independent paths, in trial order.
pub fn em_terminal_batch(
    drift: &NumField,
    noise: &[f64],
    x0: &[f64],
    t: f64,
    steps: usize,
    trials: usize,
    seed: u64,
) -> Vec<Option<Vec<f64>>> {
    (0..trials)
        .into_par_iter()
        .map(|k| em_terminal(drift, noise, x0, t, steps, &mut rng_for(seed, k as u64)))
        .collect()
}

/// Two paths driven by the same Brownian increments.
pub fn em_coupled(
    a: &NumField,
    b: &NumField,
    noise: &[f64],
    x0: &[f64],
    t: f64,
    steps: usize,
    rng: &mut ChaCha8Rng,
) -> (Path, Path) {
    let n = x0.len();
    let dt = t / steps as f64;
    let sq = dt.sqrt();
    let times: Vec<f64> = (0..=steps).map(|k| t * k as f64 / steps as f64).collect();
    let (mut x, mut y) = (x0.to_vec(), x0.to_vec());
    let (mut bx, mut by) = (vec![0.0; n], vec![0.0; n]);
    let mut sx = vec![x.clone()];
    let mut sy = vec![y.clone()];
    let (mut dx, mut dy) = (None, None);
    for k in 1..=steps {
        a.eval_into(&x, &mut bx);
        b.eval_into(&y, &mut by);
        for i in 0..n {
            let z: f64 = StandardNormal.sample(rng);
            let w = noise[i] * sq * z;
            x[i] += bx[i] * dt + w;
            y[i] += by[i] * dt + w;
        }
        if dx.is_none() {
            if alive(&x) {
                sx.push(x.clone());
            } else {
                dx = Some(k as f64 * dt);
            }
        }
        if dy.is_none() {
            if alive(&y) {
                sy.push(y.clone());
            } else {
                dy = Some(k as f64 * dt);
            }
        }
        if dx.is_some() && dy.is_some() {
            break;
        }
    }
    (
        Path { times: times.clone(), states: sx, death_time: dx },
        Path { times, states: sy, death_time: dy },
    )
}

/// Simulate `sys` from `x0` on `[0, t]` with step `dt`.
pub fn euler_maruyama(sys: &SdeSystem, x0: &[f64], t: f64, dt: f64, seed: u64) -> Result<Path> {
    if x0.len() != sys.dim() {
        return Err(Error::DimensionMismatch { expected: sys.dim(), got: x0.len() });
    }
    if !(t > 0.0 && dt > 0.0) {
        return Err(Error::Invalid("t and dt must be positive".into()));
    }
    let steps = (t / dt).round().max(1.0) as usize;
    let q = NumField::from_field(&sys.drift);
    Ok(em_path(&q, &sys.sigma, x0, t, steps, &mut rng_for(seed, 0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;

    #[test]
    fn same_seed_same_path() {
        let sys = models::lorenz96(5, &[1.0, 1.0]);
        let a = euler_maruyama(&sys, &[0.0; 5], 1.0, 1e-3, 7).unwrap();
        let b = euler_maruyama(&sys, &[0.0; 5], 1.0, 1e-3, 7).unwrap();
        assert_eq!(a, b);
        let c = euler_maruyama(&sys, &[0.0; 5], 1.0, 1e-3, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn batch_is_deterministic() {
        let sys = models::kolmogorov_pair();
        let q = NumField::from_field(&sys.drift);
        let a = em_terminal_batch(&q, &sys.sigma, &[0.0, 0.0], 1.0, 100, 50, 3);
        let b = em_terminal_batch(&q, &sys.sigma, &[0.0, 0.0], 1.0, 100, 50, 3);
        assert_eq!(a, b);
    }
}
