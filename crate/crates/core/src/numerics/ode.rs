//! Runge-Kutta steppers shared by flows, Gramians and the Malliavin sampler.

/// States larger than this (max norm) are treated as having exploded.
pub const EXPLOSION_BOUND: f64 = 1e8;

const MAX_STEPS: usize = 2_000_000;

pub(crate) fn max_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn rk4_step<F>(rhs: &mut F, t: f64, h: f64, y: &[f64], out: &mut [f64], w: &mut [Vec<f64>; 5])
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y.len();
    let [k1, k2, k3, k4, tmp] = w;
    rhs(t, y, k1);
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * h * k1[i];
    }
    rhs(t + 0.5 * h, tmp, k2);
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * h * k2[i];
    }
    rhs(t + 0.5 * h, tmp, k3);
    for i in 0..n {
        tmp[i] = y[i] + h * k3[i];
    }
    rhs(t + h, tmp, k4);
    for i in 0..n {
        out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

fn work(n: usize) -> [Vec<f64>; 5] {
    [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]]
}

/// Classic RK4 with `steps` equal steps on `[t0, t1]`, in place.
pub fn rk4_fixed<F>(mut rhs: F, t0: f64, t1: f64, steps: usize, y: &mut [f64])
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y.len();
    let mut w = work(n);
    let mut next = vec![0.0; n];
    let h = (t1 - t0) / steps as f64;
    for k in 0..steps {
        rk4_step(&mut rhs, t0 + k as f64 * h, h, y, &mut next, &mut w);
        y.copy_from_slice(&next);
    }
}

/// Adaptive RK4 by step doubling on `[t0, t1]`. Returns `Err(t)` with the
/// time at which the state left the explosion bound or the step size
/// collapsed. `h` carries the step size between calls.
pub fn rk4_adaptive<F>(mut rhs: F, t0: f64, t1: f64, y: &mut [f64], h: &mut f64, tol: f64) -> Result<(), f64>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y.len();
    let mut w = work(n);
    let mut full = vec![0.0; n];
    let mut half = vec![0.0; n];
    let mut two = vec![0.0; n];
    let mut t = t0;
    let mut steps = 0;
    if !(*h > 0.0) {
        *h = (t1 - t0) / 16.0;
    }
    while t < t1 {
        let mut step = h.min(t1 - t);
        let last = step >= t1 - t;
        rk4_step(&mut rhs, t, step, y, &mut full, &mut w);
        rk4_step(&mut rhs, t, 0.5 * step, y, &mut half, &mut w);
        rk4_step(&mut rhs, t + 0.5 * step, 0.5 * step, &half, &mut two, &mut w);
        let mut err: f64 = 0.0;
        for i in 0..n {
            let e = (two[i] - full[i]).abs() / (1.0 + two[i].abs());
            err = err.max(e);
        }
        if !err.is_finite() {
            err = f64::INFINITY;
        }
        steps += 1;
        if err <= tol {
            for i in 0..n {
                y[i] = two[i] + (two[i] - full[i]) / 15.0;
            }
            t = if last { t1 } else { t + step };
            if max_abs(y) > EXPLOSION_BOUND || !y.iter().all(|v| v.is_finite()) {
                return Err(t);
            }
            let grow = if err == 0.0 { 4.0 } else { (0.9 * (tol / err).powf(0.2)).clamp(0.2, 4.0) };
            // Keep the hint from the last interior step, not the clipped final one.
            if !last || step >= *h {
                *h = step * grow;
            }
        } else {
            let shrink = (0.9 * (tol / err).powf(0.2)).clamp(0.1, 0.5);
            step *= shrink;
            *h = step;
        }
        if *h < 1e-14 * t.abs().max(1.0) || steps > MAX_STEPS {
            return Err(t);
        }
    }
    Ok(())
}
