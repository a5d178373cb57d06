//! Component homogeneity `phi^j_t(Q, eps f) 0 = eps^{alpha_j} phi^j_t(Q, f) 0`,
//! its use for turning reachable directions into small-energy controls, and
//! the ball-in-reachable-set inference built on it.

use serde::{Deserialize, Serialize};

use super::hormander::RankReport;
use super::steer::{steer, SteerConfig};
use super::ControlProblem;
use crate::error::{Error, Result};
use crate::numerics::{flow_endpoint, rng_for, Control, PiecewiseLinearControl, SampledRateControl};
use rand_distr::{Distribution, StandardNormal};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Homogeneity {
    /// Every component is a monomial; exponents from the layer recursion.
    /// `None` marks components that stay at zero.
    Certified { alphas: Vec<Option<u64>> },
    /// The monomial test does not apply and the probe found no violation.
    Consistent { fitted: Vec<Option<f64>> },
    Falsified { component: usize, detail: String },
}

impl Homogeneity {
    pub fn is_certified(&self) -> bool {
        matches!(self, Homogeneity::Certified { .. })
    }

    pub fn is_falsified(&self) -> bool {
        matches!(self, Homogeneity::Falsified { .. })
    }

    /// Exponents when known (certified or fitted).
    pub fn exponents(&self) -> Option<Vec<Option<f64>>> {
        match self {
            Homogeneity::Certified { alphas } => Some(alphas.iter().map(|a| a.map(|v| v as f64)).collect()),
            Homogeneity::Consistent { fitted } => Some(fitted.clone()),
            Homogeneity::Falsified { .. } => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Alpha {
    Unknown,
    Zero,
    Deg(u64),
}

fn certify(prob: &ControlProblem) -> Option<Vec<Option<u64>>> {
    let n = prob.dim();
    let q = &prob.q;
    let mut a = vec![Alpha::Unknown; n];
    for (j, aj) in a.iter_mut().enumerate() {
        if prob.sigma[j] != 0.0 {
            *aj = Alpha::Deg(1);
        }
    }
    let mono = |j: usize| -> Option<Vec<(usize, u32)>> {
        let p = q.comp(j);
        if p.is_zero() {
            return Some(Vec::new());
        }
        if !p.is_monomial() {
            return None;
        }
        let (e, _) = p.terms().next()?;
        Some(e.0.iter().enumerate().filter(|(_, k)| **k > 0).map(|(i, k)| (i, *k)).collect())
    };
    let monos: Vec<Option<Vec<(usize, u32)>>> = (0..n).map(mono).collect();
    if monos.iter().any(|m| m.is_none()) {
        return None;
    }
    let monos: Vec<Vec<(usize, u32)>> = monos.into_iter().map(|m| m.unwrap()).collect();
    let value = |m: &[(usize, u32)], a: &[Alpha]| -> Option<Alpha> {
        let mut s = 0u64;
        for &(i, k) in m {
            match a[i] {
                Alpha::Unknown => return None,
                Alpha::Zero => return Some(Alpha::Zero),
                Alpha::Deg(d) => s += k as u64 * d,
            }
        }
        Some(Alpha::Deg(s))
    };
    loop {
        let mut changed = false;
        for j in 0..n {
            if a[j] != Alpha::Unknown {
                continue;
            }
            if q.comp(j).is_zero() {
                a[j] = Alpha::Zero;
                changed = true;
                continue;
            }
            if monos[j].iter().any(|&(i, _)| i == j) {
                continue;
            }
            if let Some(v) = value(&monos[j], &a) {
                a[j] = v;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    if a.contains(&Alpha::Unknown) {
        return None;
    }
    // A noisy component is linear in f, so its drift must scale the same way.
    for j in 0..n {
        if prob.sigma[j] != 0.0 && !q.comp(j).is_zero() {
            match value(&monos[j], &a) {
                Some(Alpha::Deg(1)) | Some(Alpha::Zero) => {}
                _ => return None,
            }
        }
    }
    Some(
        a.into_iter()
            .map(|v| match v {
                Alpha::Deg(d) => Some(d),
                _ => None,
            })
            .collect(),
    )
}

const PROBE_CONTROLS: usize = 6;
const PROBE_TOL: f64 = 1e-6;

fn probe(prob: &ControlProblem, seed: u64) -> Homogeneity {
    let n = prob.dim();
    let q = prob.num_field();
    let mut fitted: Vec<Option<f64>> = vec![None; n];
    for k in 0..PROBE_CONTROLS {
        let mut rng = rng_for(seed, k as u64);
        let times = vec![0.0, 0.25, 0.5, 0.75, 1.0];
        let slopes: Vec<Vec<f64>> = (0..4)
            .map(|_| {
                (0..n)
                    .map(|i| if prob.sigma[i] != 0.0 { StandardNormal.sample(&mut rng) } else { 0.0 })
                    .collect()
            })
            .collect();
        let f = PiecewiseLinearControl::new(times, slopes).expect("valid probe control");
        let ends: Vec<Option<Vec<f64>>> =
            [1.0, 0.5, 0.25].iter().map(|&e| flow_endpoint(&q, &prob.sigma, &f.scaled(e), &prob.x0, 1.0)).collect();
        let (Some(v1), Some(v2), Some(v4)) = (&ends[0], &ends[1], &ends[2]) else {
            continue;
        };
        for j in 0..n {
            let (a, b, c) = (v1[j], v2[j], v4[j]);
            let scale = a.abs().max(b.abs()).max(c.abs());
            if scale < 1e-12 {
                continue;
            }
            let bad = |detail: String| Homogeneity::Falsified { component: j, detail };
            if a == 0.0 || b == 0.0 || a.signum() != b.signum() {
                return bad(format!("sign or support changes under scaling: {a:e} -> {b:e}"));
            }
            let al = (b / a).ln() / 0.5f64.ln();
            let pred = a * 0.25f64.powf(al);
            if (pred - c).abs() > PROBE_TOL * c.abs().max(1e-12) {
                return bad(format!("fitted exponent {al:.6} predicts {pred:e} at eps = 1/4, flow gives {c:e}"));
            }
            match fitted[j] {
                Some(prev) if (prev - al).abs() > 1e-5 * prev.abs().max(1.0) => {
                    return bad(format!("fitted exponent varies across controls: {prev:.6} vs {al:.6}"));
                }
                None => fitted[j] = Some(al),
                _ => {}
            }
        }
    }
    Homogeneity::Consistent { fitted }
}

/// Monomial certificate when it applies, otherwise a seeded falsification probe.
pub fn component_homogeneity(prob: &ControlProblem, seed: u64) -> Homogeneity {
    match certify(prob) {
        Some(alphas) => Homogeneity::Certified { alphas },
        None => probe(prob, seed),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionCertificate {
    pub direction: Vec<f64>,
    /// Control in the unit energy ball.
    pub control: SampledRateControl,
    pub energy: f64,
    pub eps: f64,
    pub endpoint: Vec<f64>,
    /// `v^j phi^j > 0` wherever `v^j != 0`.
    pub valid: bool,
}

fn signs_ok(v: &[f64], x: &[f64]) -> bool {
    v.iter().zip(x).all(|(a, b)| *a == 0.0 || a * b > 0.0)
}

/// Find a control whose endpoint lies in the open orthant of `v`, then shrink
/// it into the unit energy ball. Homogeneity keeps the signs under shrinking.
pub fn direction_certificate(prob: &ControlProblem, v: &[f64], cfg: &SteerConfig) -> Result<DirectionCertificate> {
    let n = prob.dim();
    if v.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: v.len() });
    }
    let q = prob.num_field();
    let mut last = None;
    for c in [1.0, 0.1, 10.0] {
        let target: Vec<f64> = v.iter().map(|x| c * x).collect();
        let r = steer(prob, &target, cfg)?;
        if !signs_ok(v, &r.endpoint) {
            last = Some(r);
            continue;
        }
        let energy = r.control.energy();
        let eps = if energy > 1.0 { 0.999 / energy.sqrt() } else { 1.0 };
        let rates = r.control.rates.iter().map(|x| x.iter().map(|y| eps * y).collect()).collect();
        let control = SampledRateControl::new(r.control.times.clone(), rates)?;
        let endpoint = flow_endpoint(&q, &prob.sigma, &control as &dyn Control, &prob.x0, cfg.t)
            .ok_or_else(|| Error::Numerical("scaled control exploded".into()))?;
        return Ok(DirectionCertificate {
            direction: v.to_vec(),
            energy: control.energy(),
            valid: signs_ok(v, &endpoint) && control.energy() <= 1.0,
            control,
            eps,
            endpoint,
        });
    }
    let r = last.ok_or_else(|| Error::Numerical("steering failed".into()))?;
    Ok(DirectionCertificate {
        direction: v.to_vec(),
        energy: r.control.energy(),
        control: r.control,
        eps: 1.0,
        endpoint: r.endpoint,
        valid: false,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferInference {
    pub noise_propagating: bool,
    pub component_homogeneous: bool,
    pub brackets_span_at_origin: bool,
    /// Origin reachable from every nearby start, supplied by exact controllability.
    pub origin_reachable_nearby: bool,
    /// A ball around the origin lies in the unit-energy reachable set at `t + s`.
    pub ball_reachable: bool,
    pub rule: String,
}

pub fn transfer_inference(
    noise_propagating: bool,
    homogeneity: &Homogeneity,
    rank_at_origin: &RankReport,
    exactly_controllable: bool,
) -> TransferInference {
    let ch = homogeneity.is_certified();
    let ok = noise_propagating && ch && rank_at_origin.spanning && exactly_controllable;
    TransferInference {
        noise_propagating,
        component_homogeneous: ch,
        brackets_span_at_origin: rank_at_origin.spanning,
        origin_reachable_nearby: exactly_controllable,
        ball_reachable: ok,
        rule: "noise propagating + component homogeneous + bracket list spans at 0 + 0 reachable from a \
               neighbourhood => ball around 0 reachable with unit energy"
            .into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;
    use crate::propagation::{dist_scalings, lil_scalings};

    #[test]
    fn lorenz_certified_rdr_not() {
        let sys = models::lorenz96(6, &[1.0, 1.0]);
        let res = lil_scalings(&sys);
        let h = component_homogeneity(&ControlProblem::from_limit(&sys, &res), 0);
        assert!(h.is_certified(), "{h:?}");

        let sys = models::rdr();
        let res = dist_scalings(&sys);
        let h = component_homogeneity(&ControlProblem::from_limit(&sys, &res), 0);
        assert!(!h.is_certified(), "{h:?}");
    }

    #[test]
    fn langevin_positions_inherit_momentum_exponent() {
        let sys = models::langevin(&models::quartic_potential(1));
        let res = lil_scalings(&sys);
        let prob = ControlProblem::from_limit(&sys, &res);
        let Homogeneity::Certified { alphas } = component_homogeneity(&prob, 0) else { panic!() };
        assert_eq!(alphas, vec![Some(1), Some(1)]);
        // The flow agrees: both coordinates scale linearly.
        let Homogeneity::Consistent { fitted } = probe(&prob, 3) else { panic!() };
        for a in fitted.into_iter().flatten() {
            assert!((a - 1.0).abs() < 1e-6);
        }
    }
}
