//! Deterministic controls `f` with `f(0) = 0`, described by their rates `f'`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub trait Control: Sync {
    fn dim(&self) -> usize;
    /// `f'(t)` written into `out`.
    fn rate(&self, t: f64, out: &mut [f64]);
    /// Interior times where the rate may jump or kink.
    fn breakpoints(&self) -> Vec<f64>;
    /// True when the rate is constant between breakpoints.
    fn piecewise_constant(&self) -> bool {
        false
    }
}

/// Piecewise-linear control: rate `slopes[k]` on `[times[k], times[k+1])`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinearControl {
    pub times: Vec<f64>,
    pub slopes: Vec<Vec<f64>>,
}

impl PiecewiseLinearControl {
    pub fn new(times: Vec<f64>, slopes: Vec<Vec<f64>>) -> Result<Self> {
        if times.len() < 2 || times[0] != 0.0 || slopes.len() + 1 != times.len() {
            return Err(Error::Invalid("control needs times 0 = t0 < ... < tk and k slopes".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Invalid("control breakpoints must increase".into()));
        }
        let d = slopes[0].len();
        if slopes.iter().any(|s| s.len() != d || s.iter().any(|v| !v.is_finite())) {
            return Err(Error::Invalid("control slopes must be finite and of equal length".into()));
        }
        Ok(PiecewiseLinearControl { times, slopes })
    }

    pub fn zero(n: usize, t: f64) -> Self {
        PiecewiseLinearControl { times: vec![0.0, t], slopes: vec![vec![0.0; n]] }
    }

    /// `f(t) = t * rate` on `[0, horizon]`.
    pub fn constant_rate(rate: Vec<f64>, horizon: f64) -> Self {
        PiecewiseLinearControl { times: vec![0.0, horizon], slopes: vec![rate] }
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap()
    }

    fn segment(&self, t: f64) -> usize {
        let k = self.slopes.len();
        match self.times[1..].iter().position(|&b| t < b) {
            Some(i) => i,
            None => k - 1,
        }
    }

    pub fn value(&self, t: f64) -> Vec<f64> {
        let d = self.slopes[0].len();
        let mut v = vec![0.0; d];
        for (k, s) in self.slopes.iter().enumerate() {
            let a = self.times[k];
            let b = if k + 1 == self.slopes.len() { f64::INFINITY } else { self.times[k + 1] };
            let dt = (t.min(b) - a).max(0.0);
            for i in 0..d {
                v[i] += s[i] * dt;
            }
        }
        v
    }

    /// `(1/2) int |f'|^2` over the horizon.
    pub fn energy(&self) -> f64 {
        self.slopes
            .iter()
            .zip(self.times.windows(2))
            .map(|(s, w)| 0.5 * s.iter().map(|x| x * x).sum::<f64>() * (w[1] - w[0]))
            .sum()
    }

    pub fn scaled(&self, c: f64) -> Self {
        PiecewiseLinearControl {
            times: self.times.clone(),
            slopes: self.slopes.iter().map(|s| s.iter().map(|x| x * c).collect()).collect(),
        }
    }

    /// True if the energy is at most `alpha^2`.
    pub fn in_ball(&self, alpha: f64) -> bool {
        self.energy() <= alpha * alpha
    }
}

impl Control for PiecewiseLinearControl {
    fn dim(&self) -> usize {
        self.slopes[0].len()
    }

    fn rate(&self, t: f64, out: &mut [f64]) {
        out.copy_from_slice(&self.slopes[self.segment(t)]);
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.times[1..self.times.len() - 1].to_vec()
    }

    fn piecewise_constant(&self) -> bool {
        true
    }
}

/// Control whose rate is given at nodes and linearly interpolated between them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledRateControl {
    pub times: Vec<f64>,
    pub rates: Vec<Vec<f64>>,
}

impl SampledRateControl {
    pub fn new(times: Vec<f64>, rates: Vec<Vec<f64>>) -> Result<Self> {
        if times.len() < 2 || times.len() != rates.len() {
            return Err(Error::Invalid("sampled control needs matching times and rates".into()));
        }
        Ok(SampledRateControl { times, rates })
    }

    pub fn energy(&self) -> f64 {
        // Trapezoid rule on |f'|^2, exact enough for a diagnostic.
        let sq: Vec<f64> = self.rates.iter().map(|r| r.iter().map(|x| x * x).sum()).collect();
        0.5 * self
            .times
            .windows(2)
            .zip(sq.windows(2))
            .map(|(t, s)| 0.5 * (s[0] + s[1]) * (t[1] - t[0]))
            .sum::<f64>()
    }
}

impl Control for SampledRateControl {
    fn dim(&self) -> usize {
        self.rates[0].len()
    }

    fn rate(&self, t: f64, out: &mut [f64]) {
        let n = self.times.len();
        if t <= self.times[0] {
            out.copy_from_slice(&self.rates[0]);
            return;
        }
        if t >= self.times[n - 1] {
            out.copy_from_slice(&self.rates[n - 1]);
            return;
        }
        let k = self.times.partition_point(|&s| s <= t) - 1;
        let (a, b) = (self.times[k], self.times[k + 1]);
        let w = (t - a) / (b - a);
        for (i, o) in out.iter_mut().enumerate() {
            *o = (1.0 - w) * self.rates[k][i] + w * self.rates[k + 1][i];
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.times[1..self.times.len() - 1].to_vec()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_and_energy() {
        let f = PiecewiseLinearControl::new(vec![0.0, 0.5, 1.0], vec![vec![2.0], vec![-2.0]]).unwrap();
        assert_eq!(f.value(0.0), vec![0.0]);
        assert!((f.value(0.5)[0] - 1.0).abs() < 1e-15);
        assert!(f.value(1.0)[0].abs() < 1e-15);
        assert!((f.energy() - 2.0).abs() < 1e-15);
        assert!((f.scaled(0.5).energy() - 0.5).abs() < 1e-15);
        assert!(PiecewiseLinearControl::new(vec![0.0, 0.0], vec![vec![1.0]]).is_err());
    }
}
