//! Controlled flows `x' = Q(x) + sigma f'(t)`.
//!
//! Triangular drifts driven by piecewise-constant rates are integrated
//! exactly, one coordinate at a time, as polynomials in time. Everything
//! else goes through adaptive RK4.

use super::control::Control;
use super::ode::{max_abs, rk4_adaptive, EXPLOSION_BOUND};
use super::path::Path;
use crate::poly::{NumField, NumPoly};

pub const FLOW_TOL: f64 = 1e-10;

/// `phi_t(Q, f) x0` sampled on `grid` (increasing, starting at the initial time).
pub fn flow(q: &NumField, sigma: &[f64], f: &dyn Control, x0: &[f64], grid: &[f64]) -> Path {
    if f.piecewise_constant() {
        if let Some(order) = q.layer_order() {
            return flow_layered(q, &order, sigma, f, x0, grid);
        }
    }
    flow_rk4(q, sigma, f, x0, grid, FLOW_TOL)
}

/// Final state of the flow at time `t` from `x0`, or `None` if it died.
pub fn flow_endpoint(q: &NumField, sigma: &[f64], f: &dyn Control, x0: &[f64], t: f64) -> Option<Vec<f64>> {
    flow(q, sigma, f, x0, &[0.0, t]).final_state().map(|v| v.to_vec())
}

fn knots(f: &dyn Control, grid: &[f64]) -> Vec<f64> {
    let (lo, hi) = (grid[0], *grid.last().unwrap());
    let mut k: Vec<f64> = grid.to_vec();
    k.extend(f.breakpoints().into_iter().filter(|&b| b > lo && b < hi));
    k.sort_by(|a, b| a.partial_cmp(b).unwrap());
    k.dedup();
    k
}

pub fn flow_rk4(q: &NumField, sigma: &[f64], f: &dyn Control, x0: &[f64], grid: &[f64], tol: f64) -> Path {
    let n = x0.len();
    let ks = knots(f, grid);
    let mut y = x0.to_vec();
    let mut states = vec![y.clone()];
    let mut gi = 1;
    let mut h = 0.0;
    let mut u = vec![0.0; n];
    for w in ks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let span = b - a;
        let rhs = |t: f64, x: &[f64], out: &mut [f64]| {
            let tc = t.clamp(a + 1e-12 * span, b - 1e-12 * span);
            f.rate(tc, &mut u);
            q.eval_into(x, out);
            for i in 0..n {
                out[i] += sigma[i] * u[i];
            }
        };
        if h <= 0.0 || h > span {
            h = span;
        }
        if let Err(td) = rk4_adaptive(rhs, a, b, &mut y, &mut h, tol) {
            return Path { times: grid.to_vec(), states, death_time: Some(td) };
        }
        while gi < grid.len() && grid[gi] <= b {
            states.push(y.clone());
            gi += 1;
        }
    }
    Path { times: grid.to_vec(), states, death_time: None }
}

type UPoly = Vec<f64>;

fn u_mul(a: &UPoly, b: &UPoly) -> UPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut c = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if *x == 0.0 {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            c[i + j] += x * y;
        }
    }
    c
}

fn u_eval(a: &UPoly, t: f64) -> f64 {
    a.iter().rev().fold(0.0, |acc, c| acc * t + c)
}

fn u_compose(p: &NumPoly, xs: &[UPoly]) -> UPoly {
    let mut out: UPoly = Vec::new();
    for (c, e) in p.terms() {
        let mut t: UPoly = vec![*c];
        for &(i, k) in e {
            for _ in 0..k {
                t = u_mul(&t, &xs[i]);
            }
        }
        if out.len() < t.len() {
            out.resize(t.len(), 0.0);
        }
        for (o, v) in out.iter_mut().zip(&t) {
            *o += v;
        }
    }
    out
}

fn flow_layered(q: &NumField, order: &[usize], sigma: &[f64], f: &dyn Control, x0: &[f64], grid: &[f64]) -> Path {
    let n = x0.len();
    let lo = grid[0];
    let hi = *grid.last().unwrap();
    let mut cuts: Vec<f64> = vec![lo];
    cuts.extend(f.breakpoints().into_iter().filter(|&b| b > lo && b < hi));
    cuts.push(hi);
    let mut y = x0.to_vec();
    let mut states = vec![y.clone()];
    let mut gi = 1;
    let mut u = vec![0.0; n];
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        f.rate(0.5 * (a + b), &mut u);
        let mut xs: Vec<UPoly> = vec![Vec::new(); n];
        for &j in order {
            let mut rate = u_compose(q.comp(j), &xs);
            if rate.is_empty() {
                rate.push(0.0);
            }
            rate[0] += sigma[j] * u[j];
            let mut p = Vec::with_capacity(rate.len() + 1);
            p.push(y[j]);
            p.extend(rate.iter().enumerate().map(|(k, c)| c / (k + 1) as f64));
            xs[j] = p;
        }
        while gi < grid.len() && grid[gi] <= b {
            let s: Vec<f64> = xs.iter().map(|p| u_eval(p, grid[gi] - a)).collect();
            if max_abs(&s) > EXPLOSION_BOUND || !s.iter().all(|v| v.is_finite()) {
                return Path { times: grid.to_vec(), states, death_time: Some(grid[gi]) };
            }
            states.push(s);
            gi += 1;
        }
        y = xs.iter().map(|p| u_eval(p, b - a)).collect();
        if max_abs(&y) > EXPLOSION_BOUND || !y.iter().all(|v| v.is_finite()) {
            return Path { times: grid.to_vec(), states, death_time: Some(b) };
        }
    }
    Path { times: grid.to_vec(), states, death_time: None }
}

/// `n + 1` equally spaced points on `[0, t]`.
pub fn uniform_grid(t: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|k| t * k as f64 / n as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;
    use crate::numerics::control::PiecewiseLinearControl;

    #[test]
    fn kolmogorov_pair_linear_control() {
        let sys = models::kolmogorov_pair();
        let q = NumField::from_field(&sys.drift);
        let f = PiecewiseLinearControl::constant_rate(vec![1.0, 0.0], 1.0);
        let grid = uniform_grid(1.0, 10);
        for path in [flow(&q, &sys.sigma, &f, &[0.0, 0.0], &grid), flow_rk4(&q, &sys.sigma, &f, &[0.0, 0.0], &grid, 1e-12)] {
            for (t, x) in grid.iter().zip(&path.states) {
                assert!((x[0] - t).abs() < 1e-10);
                assert!((x[1] - t * t / 2.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn blow_up_is_dead() {
        let n = 1;
        let p = crate::poly::Polynomial::from_int_terms(n, &[(1, &[2])]);
        let q = NumField::from_field(&crate::poly::PolyVectorField::new(vec![p]).unwrap());
        let f = PiecewiseLinearControl::zero(1, 1.0);
        let path = flow(&q, &[0.0], &f, &[2.0], &uniform_grid(1.0, 4));
        let td = path.death_time.expect("must explode");
        assert!(td <= 0.5 + 1e-6 && td > 0.49);
        assert_eq!(path.states.len(), 2);
        assert!(path.final_state().is_none());
    }

    #[test]
    fn layered_matches_rk4() {
        let sys = models::lorenz96(5, &[1.0, 1.0]);
        let lim = crate::propagation::lil_scalings(&sys).limit_drift;
        let q = NumField::from_field(&lim);
        assert!(q.layer_order().is_some());
        let f = PiecewiseLinearControl::new(
            vec![0.0, 0.3, 1.0],
            vec![vec![1.0, -2.0, 0.0, 0.0, 0.0], vec![-0.5, 3.0, 0.0, 0.0, 0.0]],
        )
        .unwrap();
        let grid = uniform_grid(1.0, 7);
        let a = flow(&q, &sys.sigma, &f, &[0.0; 5], &grid);
        let b = flow_rk4(&q, &sys.sigma, &f, &[0.0; 5], &grid, 1e-12);
        for (x, y) in a.states.iter().zip(&b.states) {
            for (u, v) in x.iter().zip(y) {
                assert!((u - v).abs() < 1e-8 * (1.0 + v.abs()), "{u} vs {v}");
            }
        }
    }
}
