use crate::error::{Error, Result};
use crate::scaling::Scaling;

fn factors(scalings: &[Scaling], eps: f64) -> Result<Vec<f64>> {
    scalings
        .iter()
        .enumerate()
        .map(|(j, s)| match s {
            Scaling::Infinity => Err(Error::InfiniteScaling(j)),
            _ => s.eval(eps),
        })
        .collect()
}

/// `x_j / eps^{s_j}`.
pub fn scale_map(x: &[f64], scalings: &[Scaling], eps: f64) -> Result<Vec<f64>> {
    if x.len() != scalings.len() {
        return Err(Error::DimensionMismatch { expected: scalings.len(), got: x.len() });
    }
    Ok(x.iter().zip(factors(scalings, eps)?).map(|(v, f)| v / f).collect())
}

/// `y_j * eps^{s_j}`.
pub fn inverse_scale_map(y: &[f64], scalings: &[Scaling], eps: f64) -> Result<Vec<f64>> {
    if y.len() != scalings.len() {
        return Err(Error::DimensionMismatch { expected: scalings.len(), got: y.len() });
    }
    Ok(y.iter().zip(factors(scalings, eps)?).map(|(v, f)| v * f).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_errors() {
        let s = [Scaling::half(1, 1), Scaling::half(5, 1)];
        let x = [0.3, -2.0];
        let y = scale_map(&x, &s, 1e-3).unwrap();
        let z = inverse_scale_map(&y, &s, 1e-3).unwrap();
        for (a, b) in x.iter().zip(&z) {
            assert!((a - b).abs() < 1e-12 * a.abs().max(1.0));
        }
        assert!(scale_map(&x, &[Scaling::half(1, 0), Scaling::Infinity], 1e-3).is_err());
        assert!(scale_map(&x, &s, 0.9).is_err());
    }
}
