//! Two-sample energy distance with a permutation p-value.

use rand::seq::SliceRandom;

use super::sde::rng_for;

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn stat(d: &[f64], n: usize, idx: &[usize], m: usize) -> f64 {
    let total = idx.len();
    let (mut xy, mut xx, mut yy) = (0.0, 0.0, 0.0);
    for a in 0..total {
        for b in 0..total {
            let v = d[idx[a] * total + idx[b]];
            match (a < n, b < n) {
                (true, true) => xx += v,
                (false, false) => yy += v,
                _ => xy += v,
            }
        }
    }
    let (nf, mf) = (n as f64, m as f64);
    xy / (nf * mf) - xx / (nf * nf) - yy / (mf * mf)
}

/// V-statistic `2 E|X-Y| - E|X-X'| - E|Y-Y'|`.
pub fn energy_distance(xs: &[Vec<f64>], ys: &[Vec<f64>]) -> f64 {
    let pooled: Vec<&Vec<f64>> = xs.iter().chain(ys).collect();
    let d = pairwise(&pooled);
    let idx: Vec<usize> = (0..pooled.len()).collect();
    stat(&d, xs.len(), &idx, ys.len())
}

fn pairwise(p: &[&Vec<f64>]) -> Vec<f64> {
    let t = p.len();
    let mut d = vec![0.0; t * t];
    for i in 0..t {
        for j in (i + 1)..t {
            let v = dist(p[i], p[j]);
            d[i * t + j] = v;
            d[j * t + i] = v;
        }
    }
    d
}

/// Returns `(statistic, p_value)` from `perms` label permutations.
pub fn energy_test(xs: &[Vec<f64>], ys: &[Vec<f64>], perms: usize, seed: u64) -> (f64, f64) {
    let pooled: Vec<&Vec<f64>> = xs.iter().chain(ys).collect();
    let d = pairwise(&pooled);
    let (n, m) = (xs.len(), ys.len());
    let mut idx: Vec<usize> = (0..n + m).collect();
    let obs = stat(&d, n, &idx, m);
    let mut rng = rng_for(seed, u64::MAX);
    let mut ge = 0usize;
    for _ in 0..perms {
        idx.shuffle(&mut rng);
        if stat(&d, n, &idx, m) >= obs {
            ge += 1;
        }
    }
    (obs, (1 + ge) as f64 / (1 + perms) as f64)
}
