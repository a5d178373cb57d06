//! Controllability Gramian `G_t = int_0^t K_s sigma sigma^T K_s^T ds` along a controlled path.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::ControlProblem;
use crate::error::{Error, Result};
use crate::linalg::{is_invertible_psd, min_eigenvalue};
use crate::numerics::ode::{max_abs, rk4_fixed, EXPLOSION_BOUND};
use crate::numerics::Control;

/// Relative eigenvalue threshold for calling a Gramian invertible.
pub const INVERTIBLE_TOL: f64 = 1e-8;
const KJ_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GramianReport {
    pub t: f64,
    pub gramian: Vec<Vec<f64>>,
    pub min_eig: f64,
    pub trace: f64,
    pub det: f64,
    pub invertible: bool,
    /// `max |K_t J_t - I|`.
    pub kj_error: f64,
    pub endpoint: Vec<f64>,
}

/// Everything integrated along one controlled path.
pub(crate) struct GramianRun {
    pub x: Vec<f64>,
    pub k: DMatrix<f64>,
    pub j: DMatrix<f64>,
    pub g: DMatrix<f64>,
    /// `(s, K_s)` at the integration nodes.
    pub k_path: Vec<(f64, DMatrix<f64>)>,
}

fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().cloned().collect()).collect()
}

pub(crate) fn integrate(prob: &ControlProblem, f: &dyn Control, t: f64, steps: usize) -> Result<GramianRun> {
    let n = prob.dim();
    let q = prob.num_field();
    let sigma = &prob.sigma;
    let mut cuts = vec![0.0];
    cuts.extend(f.breakpoints().into_iter().filter(|&b| b > 0.0 && b < t));
    cuts.push(t);
    // Layout: x | K (row-major) | J | G.
    let sz = n + 3 * n * n;
    let mut y = vec![0.0; sz];
    y[..n].copy_from_slice(&prob.x0);
    for i in 0..n {
        y[n + i * n + i] = 1.0;
        y[n + n * n + i * n + i] = 1.0;
    }
    let mut k_path = vec![(0.0, DMatrix::identity(n, n))];
    let mut u = vec![0.0; n];
    let mut jac = vec![0.0; n * n];
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let span = b - a;
        let m = ((steps as f64 * span / t).ceil() as usize).max(4);
        let h = span / m as f64;
        for s in 0..m {
            let t0 = a + s as f64 * h;
            let rhs = |tt: f64, z: &[f64], out: &mut [f64]| {
                let tc = tt.clamp(a + 1e-12 * span, b - 1e-12 * span);
                f.rate(tc, &mut u);
                let x = &z[..n];
                q.eval_into(x, &mut out[..n]);
                for i in 0..n {
                    out[i] += sigma[i] * u[i];
                }
                q.jacobian_into(x, &mut jac);
                let kk = &z[n..n + n * n];
                let jj = &z[n + n * n..n + 2 * n * n];
                let (ko, rest) = out[n..].split_at_mut(n * n);
                let (jo, go) = rest.split_at_mut(n * n);
                for i in 0..n {
                    for c in 0..n {
                        let mut s1 = 0.0;
                        let mut s2 = 0.0;
                        for l in 0..n {
                            s1 += kk[i * n + l] * jac[l * n + c];
                            s2 += jac[i * n + l] * jj[l * n + c];
                        }
                        ko[i * n + c] = -s1;
                        jo[i * n + c] = s2;
                    }
                }
                for i in 0..n {
                    for c in 0..n {
                        let mut s = 0.0;
                        for l in 0..n {
                            s += kk[i * n + l] * sigma[l] * sigma[l] * kk[c * n + l];
                        }
                        go[i * n + c] = s;
                    }
                }
            };
            rk4_fixed(rhs, t0, t0 + h, 1, &mut y);
            if max_abs(&y[..n]) > EXPLOSION_BOUND || !y.iter().all(|v| v.is_finite()) {
                return Err(Error::Numerical(format!("controlled path exploded near t = {}", t0 + h)));
            }
            k_path.push((t0 + h, DMatrix::from_row_slice(n, n, &y[n..n + n * n])));
        }
    }
    let k = DMatrix::from_row_slice(n, n, &y[n..n + n * n]);
    let j = DMatrix::from_row_slice(n, n, &y[n + n * n..n + 2 * n * n]);
    let g = DMatrix::from_row_slice(n, n, &y[n + 2 * n * n..]);
    Ok(GramianRun { x: y[..n].to_vec(), k, j, g, k_path })
}

/// Gramian of the control problem along control `f` on `[0, t]`.
pub fn gramian(prob: &ControlProblem, f: &dyn Control, t: f64) -> Result<GramianReport> {
    gramian_steps(prob, f, t, 2000)
}

pub fn gramian_steps(prob: &ControlProblem, f: &dyn Control, t: f64, steps: usize) -> Result<GramianReport> {
    if !(t > 0.0) {
        return Err(Error::Invalid("time horizon must be positive".into()));
    }
    let run = integrate(prob, f, t, steps)?;
    let n = prob.dim();
    let kj = &run.k * &run.j - DMatrix::<f64>::identity(n, n);
    let kj_error = kj.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if kj_error > KJ_TOL {
        return Err(Error::Numerical(format!("K J differs from I by {kj_error:e}")));
    }
    let g = 0.5 * (&run.g + run.g.transpose());
    Ok(GramianReport {
        t,
        min_eig: min_eigenvalue(&g),
        trace: g.trace(),
        det: g.determinant(),
        invertible: is_invertible_psd(&g, INVERTIBLE_TOL),
        gramian: to_rows(&g),
        kj_error,
        endpoint: run.x,
    })
}
