//! Numerical checks that rays and brackets are realised by actual flows,
//! with errors decaying like `C / lambda`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::flow::flow_rk4;
use crate::numerics::PiecewiseLinearControl;
use crate::poly::{rational_from_f64, Coeff, NumField, PolyVectorField};

const TOL: f64 = 1e-13;
/// Errors below this are treated as exact.
const EXACT: f64 = 1e-11;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Realizability {
    pub lambdas: Vec<f64>,
    pub errors: Vec<f64>,
    /// `lambda * error`.
    pub constants: Vec<f64>,
    /// Largest over smallest constant.
    pub ratio: f64,
    /// Constants agree within a factor 3, or every error is negligible.
    pub stable: bool,
}

fn summarize(lambdas: &[f64], errors: Vec<f64>) -> Realizability {
    let constants: Vec<f64> = lambdas.iter().zip(&errors).map(|(l, e)| l * e).collect();
    let hi = constants.iter().cloned().fold(0.0, f64::max);
    let lo = constants.iter().cloned().fold(f64::INFINITY, f64::min);
    let negligible = errors.iter().all(|e| *e < EXACT);
    let ratio = if lo > 0.0 { hi / lo } else if hi == 0.0 { 1.0 } else { f64::INFINITY };
    Realizability { lambdas: lambdas.to_vec(), errors, constants, stable: negligible || ratio <= 3.0, ratio }
}

fn endpoint(q: &NumField, drive: &[f64], rate: f64, x: &[f64], t: f64) -> Result<Vec<f64>> {
    let n = x.len();
    let f = PiecewiseLinearControl::constant_rate(vec![rate; n], t);
    let path = flow_rk4(q, drive, &f, x, &[0.0, t], TOL);
    path.final_state().map(|v| v.to_vec()).ok_or_else(|| Error::Numerical("flow exploded".into()))
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `phi_{s/lambda}(V0 + lambda V) x` against `x + s v`.
pub fn ray_realizability(v0: &PolyVectorField, v: &[f64], x: &[f64], s: f64, lambdas: &[f64]) -> Result<Realizability> {
    let q = NumField::from_field(v0);
    let target: Vec<f64> = x.iter().zip(v).map(|(a, b)| a + s * b).collect();
    let errors = lambdas
        .iter()
        .map(|&l| endpoint(&q, v, l, x, s / l).map(|y| dist(&y, &target)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(summarize(lambdas, errors))
}

/// Conjugated flow `x + lambda alpha v -> phi_{s/lambda^d}(R) -> - lambda alpha v`
/// against `phi_s(alpha^d Br(V, R)) x`.
pub fn bracket_realizability(
    r: &PolyVectorField,
    v: &[f64],
    alpha: f64,
    x: &[f64],
    s: f64,
    lambdas: &[f64],
) -> Result<Realizability> {
    let vq: Vec<Coeff> = v.iter().map(|&c| rational_from_f64(c)).collect::<Result<_>>()?;
    let rd = r.relative_degree(&vq);
    if rd.zero_field || rd.degree == 0 {
        return Err(Error::Invalid("field does not depend on the bracket direction".into()));
    }
    let d = rd.degree as i32;
    let br = r.br(&vq).scale(&rational_from_f64(alpha.powi(d))?);
    let n = x.len();
    let zero = vec![0.0; n];
    let limit = endpoint(&NumField::from_field(&br), &zero, 0.0, x, s)?;
    let rq = NumField::from_field(r);
    let errors = lambdas
        .iter()
        .map(|&l| {
            let start: Vec<f64> = x.iter().zip(v).map(|(a, b)| a + l * alpha * b).collect();
            let y = endpoint(&rq, &zero, 0.0, &start, s / l.powi(d))?;
            let back: Vec<f64> = y.iter().zip(v).map(|(a, b)| a - l * alpha * b).collect();
            Ok(dist(&back, &limit))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(summarize(lambdas, errors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;

    #[test]
    fn chain_ray_and_bracket_decay() {
        let ik = models::iterated_kolmogorov(3);
        let x = [0.3, -0.2, 0.5];
        let r = ray_realizability(&ik.drift, &[1.0, 0.0, 0.0], &x, 0.5, &[10.0, 100.0, 1000.0]).unwrap();
        assert!(r.stable, "{r:?}");
        let q = models::quadratic_example(1, 0);
        let b = bracket_realizability(&q.drift, &[0.0, 1.0], 0.7, &[0.2, -0.3], 0.4, &[10.0, 100.0, 1000.0]).unwrap();
        assert!(b.stable, "{b:?}");
        assert!(b.errors[2] < b.errors[0]);
    }
}
