//! Layer-by-layer propagation of noise scalings through the drift.
//!
//! Starting from the directly forced coordinates, each step finds the
//! uncovered coordinates whose drift has the smallest first scaling
//! component, assigns them a scaling and records the part of their drift
//! that survives in the small-time limit.
//!
//! ```
//! use smalltime::{models, propagation::{lil_scalings, Verdict}, scaling::Scaling};
//! let res = lil_scalings(&models::iterated_kolmogorov(3));
//! assert_eq!(res.verdict, Verdict::NoisePropagating { dim: 2 });
//! assert_eq!(res.scalings[2], Scaling::half(5, 1));
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{
    monomial_scaling, poly_scaling, rational_to_f64, Coeff, NumField, NumPoly, PolyVectorField,
};
use crate::scaling::{Scaling, ScalingPair};
use crate::system::SdeSystem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Iterated-logarithm scalings `(a1, a2)`.
    Lil,
    /// Power scalings `(b1, 0)`.
    Dist,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Verdict {
    NoisePropagating { dim: usize },
    NoiseDefective { stuck_layer: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagationResult {
    pub mode: Mode,
    pub verdict: Verdict,
    pub scalings: Vec<Scaling>,
    pub limit_drift: PolyVectorField,
    pub layers: Vec<Vec<usize>>,
    /// Coordinates whose first-component minimum is attained by monomials
    /// with different second components (only possible in `Lil` mode).
    pub ties: Vec<usize>,
}

impl PropagationResult {
    pub fn is_propagating(&self) -> bool {
        matches!(self.verdict, Verdict::NoisePropagating { .. })
    }

    /// Layer index of each coordinate, `None` if never reached.
    pub fn layer_of(&self) -> Vec<Option<usize>> {
        let mut out = vec![None; self.scalings.len()];
        for (l, layer) in self.layers.iter().enumerate() {
            for &j in layer {
                out[j] = Some(l);
            }
        }
        out
    }
}

pub fn lil_scalings(sys: &SdeSystem) -> PropagationResult {
    propagate(sys, Mode::Lil)
}

pub fn dist_scalings(sys: &SdeSystem) -> PropagationResult {
    propagate(sys, Mode::Dist)
}

pub fn scalings(sys: &SdeSystem, mode: Mode) -> PropagationResult {
    propagate(sys, mode)
}

fn base_scaling(mode: Mode) -> Scaling {
    match mode {
        Mode::Lil => Scaling::NOISE_LIL,
        Mode::Dist => Scaling::NOISE_DIST,
    }
}

fn propagate(sys: &SdeSystem, mode: Mode) -> PropagationResult {
    let n = sys.dim();
    let p = &sys.drift;
    let noise = sys.noisy();
    let mut a = vec![Scaling::Infinity; n];
    let mut covered = vec![false; n];
    for &j in &noise {
        a[j] = base_scaling(mode);
        covered[j] = true;
    }
    let mut limit = PolyVectorField::zero(n);
    let mut layers = vec![noise];
    let mut ties = Vec::new();
    let finish = |verdict, a, limit, layers, ties| PropagationResult {
        mode,
        verdict,
        scalings: a,
        limit_drift: limit,
        layers,
        ties,
    };
    if layers[0].is_empty() {
        return finish(Verdict::NoiseDefective { stuck_layer: 0 }, a, limit, layers, ties);
    }
    loop {
        let uncovered: Vec<usize> = (0..n).filter(|&j| !covered[j]).collect();
        if uncovered.is_empty() {
            let dim = layers.len() - 1;
            return finish(Verdict::NoisePropagating { dim }, a, limit, layers, ties);
        }
        let vals: Vec<(usize, Scaling)> =
            uncovered.iter().map(|&j| (j, poly_scaling(p.comp(j), &a))).collect();
        let m = match vals.iter().filter_map(|(_, s)| s.proj1_num()).min() {
            Some(m) => m,
            None => {
                let stuck = layers.len() - 1;
                return finish(Verdict::NoiseDefective { stuck_layer: stuck }, a, limit, layers, ties);
            }
        };
        let next: Vec<(usize, Scaling)> =
            vals.into_iter().filter(|(_, s)| s.proj1_num() == Some(m)).collect();
        let mut updates = Vec::with_capacity(next.len());
        for &(j, s) in &next {
            let pj = p.comp(j);
            let (lead, new_a) = match mode {
                Mode::Lil => {
                    let lead = pj.filter(|e, _| monomial_scaling(e, &a) == s);
                    let tie = pj.terms().any(|(e, _)| {
                        let ms = monomial_scaling(e, &a);
                        ms.proj1_num() == Some(m) && ms != s
                    });
                    if tie {
                        ties.push(j);
                    }
                    (lead, s + Scaling::ONE_ZERO)
                }
                Mode::Dist => {
                    let lead = pj.filter(|e, _| monomial_scaling(e, &a).proj1_num() == Some(m));
                    (lead, Scaling::half(m + 2, 0))
                }
            };
            updates.push((j, lead, new_a));
        }
        let mut layer = Vec::with_capacity(updates.len());
        for (j, lead, new_a) in updates {
            limit.set_comp(j, lead);
            a[j] = new_a;
            covered[j] = true;
            layer.push(j);
        }
        layers.push(layer);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemainderTerm {
    #[serde(with = "coeff_str")]
    pub coeff: Coeff,
    pub exps: Vec<u32>,
    /// The term carries the factor `eps^eps_exponent`.
    pub eps_exponent: ScalingPair,
}

/// The vanishing part of the rescaled drift, stored term by term.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Remainder {
    pub mode: Mode,
    pub comps: Vec<Vec<RemainderTerm>>,
}

mod coeff_str {
    use super::Coeff;
    use crate::poly::{fmt_rational, parse_rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(c: &Coeff, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_rational(c))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Coeff, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

fn require_propagating(res: &PropagationResult) -> Result<()> {
    match res.verdict {
        Verdict::NoisePropagating { .. } => Ok(()),
        Verdict::NoiseDefective { stuck_layer } => Err(Error::NoiseDefective(stuck_layer)),
    }
}

/// Build the remainder field `R_eps` for a propagating system.
///
/// Every term's exponent is checked to be strictly above `(0, 0)` in the
/// scaling order, which is what makes it vanish as `eps -> 0`.
pub fn remainder(sys: &SdeSystem, res: &PropagationResult) -> Result<Remainder> {
    require_propagating(res)?;
    let n = sys.dim();
    let a = &res.scalings;
    let one = ScalingPair::new(2, 0);
    let mut comps = Vec::with_capacity(n);
    for j in 0..n {
        let aj = a[j].finite().ok_or(Error::InfiniteScaling(j))?;
        let rest = sys.drift.comp(j).sub(res.limit_drift.comp(j));
        let mut terms = Vec::new();
        for (e, c) in rest.terms() {
            let ms = monomial_scaling(e, a).finite().ok_or(Error::InfiniteScaling(j))?;
            let ex = one - aj + ms;
            if Scaling::from(ex) <= Scaling::ZERO {
                return Err(Error::Invalid(format!(
                    "remainder term in component {} has non-vanishing exponent {}",
                    j + 1,
                    ex
                )));
            }
            terms.push(RemainderTerm { coeff: c.clone(), exps: e.0.clone(), eps_exponent: ex });
        }
        comps.push(terms);
    }
    Ok(Remainder { mode: res.mode, comps })
}

impl Remainder {
    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.is_empty())
    }

    fn num_terms(&self, eps: f64) -> Result<Vec<Vec<(f64, Vec<u32>)>>> {
        self.comps
            .iter()
            .map(|c| {
                c.iter()
                    .map(|t| Ok((rational_to_f64(&t.coeff) * t.eps_exponent.eval(eps)?, t.exps.clone())))
                    .collect()
            })
            .collect()
    }

    pub fn at_eps(&self, eps: f64) -> Result<NumField> {
        Ok(NumField::new(self.num_terms(eps)?.into_iter().map(NumPoly::from_terms).collect()))
    }

    pub fn eval(&self, eps: f64, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.at_eps(eps)?.eval(x))
    }

    /// Estimate of `sup_{|x| <= radius} |R_eps(x)|`. Uses a 33-point grid per
    /// axis for `n <= 4` and 10^4 seeded uniform samples in the ball otherwise.
    pub fn sup_norm(&self, eps: f64, radius: f64) -> Result<f64> {
        let f = self.at_eps(eps)?;
        Ok(sup_over_ball(self.dim(), radius, |x| norm(&f.eval(x))))
    }

    pub fn sup_table(&self, eps: &[f64], radius: f64) -> Result<Vec<(f64, f64)>> {
        eps.iter().map(|&e| Ok((e, self.sup_norm(e, radius)?))).collect()
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn sup_over_ball<F: Fn(&[f64]) -> f64>(n: usize, radius: f64, f: F) -> f64 {
    let mut best: f64 = 0.0;
    if n == 0 {
        return 0.0;
    }
    if n <= 4 {
        let k = 33usize;
        let total = k.pow(n as u32);
        let mut x = vec![0.0; n];
        for idx in 0..total {
            let mut r = idx;
            for xi in x.iter_mut() {
                *xi = -radius + 2.0 * radius * (r % k) as f64 / (k - 1) as f64;
                r /= k;
            }
            if norm(&x) <= radius * (1.0 + 1e-12) {
                best = best.max(f(&x));
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut x = vec![0.0; n];
        for _ in 0..10_000 {
            loop {
                for xi in x.iter_mut() {
                    *xi = rng.random_range(-radius..=radius);
                }
                if norm(&x) <= radius {
                    break;
                }
            }
            best = best.max(f(&x));
        }
    }
    best
}

/// The rescaled equation at a given `eps`.
#[derive(Clone, Debug)]
pub struct RescaledSystem {
    pub drift: NumField,
    pub noise: Vec<f64>,
}

/// Drift `P_lim + R_eps` and the matching noise coefficients.
pub fn rescaled_drift(sys: &SdeSystem, res: &PropagationResult, eps: f64) -> Result<RescaledSystem> {
    let rem = remainder(sys, res)?;
    let rterms = rem.num_terms(eps)?;
    let comps = res
        .limit_drift
        .comps()
        .iter()
        .zip(rterms)
        .map(|(p, mut r)| {
            let mut t: Vec<(f64, Vec<u32>)> =
                p.terms().map(|(e, c)| (rational_to_f64(c), e.0.clone())).collect();
            t.append(&mut r);
            NumPoly::from_terms(t)
        })
        .collect();
    let factor = match res.mode {
        Mode::Lil => ScalingPair::new(0, -1).eval(eps)?,
        Mode::Dist => 1.0,
    };
    Ok(RescaledSystem {
        drift: NumField::new(comps),
        noise: sys.sigma.iter().map(|s| s * factor).collect(),
    })
}
