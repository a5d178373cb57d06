//! Regular boundary points via the power-scaling limit.
//!
//! The system is shifted so the boundary point sits at the origin, power
//! scalings `b` are computed, and the domain is pushed through
//! `y = x / eps^b`. If a fixed open set `O*` sits inside every rescaled
//! domain for small `eps` and the limit control problem reaches `O*`, the
//! origin is regular. The criterion is one-sided, so the only verdicts are
//! `Regular` and `Inconclusive`.

use num_rational::Rational64;
use num_traits::{Signed, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::control::ControlProblem;
use crate::error::{Error, Result};
use crate::numerics::{euler_maruyama, rng_for};
use crate::poly::{homogeneous_split, rational_from_f64, rational_to_f64, Coeff, Polynomial};
use crate::propagation::{dist_scalings, PropagationResult};
use crate::saturation::{noise_controls, reachability_probe, saturate, ProbeConfig, ProbeResult};
use crate::scaling::Scaling;
use crate::system::SdeSystem;

/// Margin defining `O*` in box coordinates.
pub const DEFAULT_MARGIN: f64 = 0.1;
const MAX_DENOMINATOR: i64 = 64;

/// Nonnegative rational exponent, written `"p/q"` or as an integer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Exp(pub Rational64);

impl Serialize for Exp {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

impl<'de> Deserialize<'de> for Exp {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Int(i64),
            Str(String),
        }
        let r = match Repr::deserialize(d)? {
            Repr::Int(i) => Rational64::from_integer(i),
            Repr::Str(s) => {
                let s = s.trim();
                match s.split_once('/') {
                    Some((a, b)) => {
                        let a: i64 = a.trim().parse().map_err(D::Error::custom)?;
                        let b: i64 = b.trim().parse().map_err(D::Error::custom)?;
                        if b == 0 {
                            return Err(D::Error::custom("zero denominator"));
                        }
                        Rational64::new(a, b)
                    }
                    None => Rational64::from_integer(s.parse().map_err(D::Error::custom)?),
                }
            }
        };
        Ok(Exp(r))
    }
}

/// One term of a graph boundary `b`, variables numbered from 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BoundaryTerm {
    /// `coeff * |(x_i)_{i in norm}|^power`.
    Norm { coeff: f64, norm: Vec<usize>, power: Exp },
    /// `coeff * prod |x_i|^{r_i}`.
    Monomial { coeff: f64, powers: Vec<(usize, Exp)> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum DomainForm {
    /// `x_index > b(other coordinates)` near the origin, in shifted coordinates.
    Graph { index: usize, terms: Vec<BoundaryTerm> },
    /// `g(x) > level` in original coordinates; `level` defaults to `g(point)`.
    SuperLevel {
        g: Polynomial,
        #[serde(default)]
        level: Option<String>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    #[serde(flatten)]
    pub form: DomainForm,
    /// Boundary point `x*`; the origin when absent.
    #[serde(default)]
    pub point: Option<Vec<f64>>,
    #[serde(default = "default_radius")]
    pub radius: f64,
}

fn default_radius() -> f64 {
    1.0
}

impl DomainSpec {
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Validated boundary term with 0-based indices.
#[derive(Clone, Debug, PartialEq)]
pub enum Term {
    Mono { coeff: f64, powers: Vec<(usize, Rational64)> },
    Norm { coeff: f64, indices: Vec<usize>, power: Rational64 },
}

impl Serialize for Term {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.describe())
    }
}

impl Term {
    fn coeff(&self) -> f64 {
        match self {
            Term::Mono { coeff, .. } | Term::Norm { coeff, .. } => *coeff,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Term::Mono { coeff, powers } => {
                coeff * powers.iter().map(|(i, r)| x[*i].abs().powf(r64(*r))).product::<f64>()
            }
            Term::Norm { coeff, indices, power } => {
                let s: f64 = indices.iter().map(|i| x[*i] * x[*i]).sum();
                coeff * s.sqrt().powf(r64(*power))
            }
        }
    }

    /// Exponent of `eps` picked up under `x_i = eps^{b_i} y_i`.
    fn eps_exponent(&self, b: &[Rational64]) -> Result<Rational64> {
        match self {
            Term::Mono { powers, .. } => Ok(powers.iter().map(|(i, r)| r * b[*i]).sum()),
            Term::Norm { indices, power, .. } => {
                let b0 = b[indices[0]];
                if indices.iter().any(|i| b[*i] != b0) {
                    return Err(Error::Invalid("norm term mixes coordinates with different scalings".into()));
                }
                Ok(power * b0)
            }
        }
    }

    /// Value after substituting `x_i = eps^{b_i} y_i`.
    fn eval_scaled(&self, y: &[f64], b: &[Rational64], eps: f64) -> f64 {
        let x: Vec<f64> = y.iter().zip(b).map(|(v, bi)| v * eps.powf(r64(*bi))).collect();
        self.eval(&x)
    }

    fn describe(&self) -> String {
        match self {
            Term::Mono { coeff, powers } => {
                let p: Vec<String> = powers.iter().map(|(i, r)| format!("|x{}|^({})", i + 1, r)).collect();
                format!("{coeff}*{}", p.join("*"))
            }
            Term::Norm { coeff, indices, power } => {
                let p: Vec<String> = indices.iter().map(|i| format!("x{}", i + 1)).collect();
                format!("{coeff}*|({})|^({})", p.join(", "), power)
            }
        }
    }
}

fn r64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn check_exp(r: Rational64) -> Result<Rational64> {
    if r.is_negative() || *r.denom() > MAX_DENOMINATOR {
        return Err(Error::Invalid(format!("boundary exponent {r} must be >= 0 with denominator <= {MAX_DENOMINATOR}")));
    }
    Ok(r)
}

/// Domain in shifted coordinates, ready for scaling.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum ShiftedDomain {
    Graph { index: usize, terms: Vec<Term> },
    /// `g(x) > 0` with `g(0) = 0`.
    SuperLevel { g: Polynomial },
}

impl ShiftedDomain {
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            ShiftedDomain::Graph { index, terms } => x[*index] > terms.iter().map(|t| t.eval(x)).sum::<f64>(),
            ShiftedDomain::SuperLevel { g } => g.eval(x) > 0.0,
        }
    }
}

/// Validate the spec and move it to coordinates centred at the boundary point.
pub fn shift_domain(spec: &DomainSpec, n: usize) -> Result<ShiftedDomain> {
    let point = spec.point.clone().unwrap_or_else(|| vec![0.0; n]);
    if point.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: point.len() });
    }
    match &spec.form {
        DomainForm::Graph { index, terms } => {
            if *index == 0 || *index > n {
                return Err(Error::Invalid(format!("graph index {index} outside 1..={n}")));
            }
            let j = index - 1;
            let var = |i: usize| -> Result<usize> {
                if i == 0 || i > n || i - 1 == j {
                    return Err(Error::Invalid(format!("boundary variable {i} invalid for graph index {index}")));
                }
                Ok(i - 1)
            };
            let mut out = Vec::new();
            for t in terms {
                let term = match t {
                    BoundaryTerm::Monomial { coeff, powers } => {
                        let powers = powers
                            .iter()
                            .map(|(i, e)| Ok((var(*i)?, check_exp(e.0)?)))
                            .collect::<Result<Vec<_>>>()?;
                        if powers.iter().all(|(_, r)| r.is_zero()) {
                            return Err(Error::Invalid("boundary must vanish at the origin".into()));
                        }
                        Term::Mono { coeff: *coeff, powers }
                    }
                    BoundaryTerm::Norm { coeff, norm, power } => {
                        if norm.is_empty() || power.0.is_zero() {
                            return Err(Error::Invalid("norm term needs indices and a positive power".into()));
                        }
                        let indices = norm.iter().map(|i| var(*i)).collect::<Result<Vec<_>>>()?;
                        Term::Norm { coeff: *coeff, indices, power: check_exp(power.0)? }
                    }
                };
                out.push(term);
            }
            Ok(ShiftedDomain::Graph { index: j, terms: out })
        }
        DomainForm::SuperLevel { g, level } => {
            if g.nvars() != n {
                return Err(Error::DimensionMismatch { expected: n, got: g.nvars() });
            }
            let s: Vec<Coeff> = point.iter().map(|&v| rational_from_f64(v)).collect::<Result<_>>()?;
            let at = g.eval_exact(&s);
            let lvl = match level {
                Some(l) => crate::poly::parse_rational(l)?,
                None => at.clone(),
            };
            if at != lvl {
                return Err(Error::Invalid(format!(
                    "point is not on the level set: g(point) = {} but level = {}",
                    rational_to_f64(&at),
                    rational_to_f64(&lvl)
                )));
            }
            let shifted = g.shift(&s)?.sub(&Polynomial::constant(n, lvl));
            Ok(ShiftedDomain::SuperLevel { g: shifted })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitVerdict {
    HalfSpaceLike,
    PersistingBoundary,
    DegeneratePositive,
    DegenerateEmpty,
}

/// The fixed open set inside every rescaled domain.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OStar {
    /// `{y in (-1,1)^n : y_index > sum of critical terms + margin}`.
    GraphCut { index: usize, critical: Vec<Term>, margin: f64 },
    /// `{y in (-1,1)^n : g_d(y) > margin}`.
    Level { g_d: Polynomial, margin: f64 },
    Empty,
}

impl OStar {
    pub fn contains(&self, y: &[f64]) -> bool {
        if y.iter().any(|v| v.abs() >= 1.0) {
            return false;
        }
        match self {
            OStar::GraphCut { index, critical, margin } => {
                y[*index] > critical.iter().map(|t| t.eval(y)).sum::<f64>() + margin
            }
            OStar::Level { g_d, margin } => g_d.eval(y) > *margin,
            OStar::Empty => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitDomain {
    pub verdict: LimitVerdict,
    /// Terms (or the leading part of `g`) that survive the scaling.
    pub persisting: Vec<String>,
    pub dropped: Vec<String>,
    pub o_star: OStar,
    /// A point of `O*`, when one is known.
    pub center: Option<Vec<f64>>,
}

impl LimitDomain {
    pub fn is_feasible(&self) -> bool {
        self.center.is_some() && self.verdict != LimitVerdict::DegenerateEmpty
    }
}

fn proj1(b: &[Scaling]) -> Result<Vec<Rational64>> {
    b.iter()
        .enumerate()
        .map(|(i, s)| s.proj1_num().map(|n| Rational64::new(n, 2)).ok_or(Error::InfiniteScaling(i)))
        .collect()
}

/// Push the domain through `x = eps^b y` and read off `O*`.
pub fn scaled_domain_limit(domain: &ShiftedDomain, b: &[Scaling], margin: f64, seed: u64) -> Result<LimitDomain> {
    let n = b.len();
    match domain {
        ShiftedDomain::Graph { index, terms } => {
            let bq = proj1(b)?;
            let bj = bq[*index];
            let (mut crit, mut persisting, mut dropped) = (Vec::new(), Vec::new(), Vec::new());
            let (mut pos_super, mut neg_super) = (false, false);
            for t in terms {
                let e = t.eps_exponent(&bq)?;
                if t.coeff() == 0.0 || e > bj {
                    dropped.push(t.describe());
                } else if e == bj {
                    persisting.push(t.describe());
                    crit.push(t.clone());
                } else if t.coeff() > 0.0 {
                    pos_super = true;
                    persisting.push(format!("{} (dominant, positive)", t.describe()));
                } else {
                    neg_super = true;
                    dropped.push(format!("{} (dominant, negative)", t.describe()));
                }
            }
            if pos_super {
                return Ok(LimitDomain {
                    verdict: LimitVerdict::DegenerateEmpty,
                    persisting,
                    dropped,
                    o_star: OStar::Empty,
                    center: None,
                });
            }
            let verdict = if neg_super {
                LimitVerdict::DegeneratePositive
            } else if crit.is_empty() {
                LimitVerdict::HalfSpaceLike
            } else {
                LimitVerdict::PersistingBoundary
            };
            let o_star = OStar::GraphCut { index: *index, critical: crit, margin };
            let mut c = vec![0.0; n];
            c[*index] = 0.5 * (1.0 + margin);
            let center = o_star.contains(&c).then_some(c);
            Ok(LimitDomain { verdict, persisting, dropped, o_star, center })
        }
        ShiftedDomain::SuperLevel { g } => {
            if g.is_zero() {
                return Ok(LimitDomain {
                    verdict: LimitVerdict::DegenerateEmpty,
                    persisting: Vec::new(),
                    dropped: Vec::new(),
                    o_star: OStar::Empty,
                    center: None,
                });
            }
            let dist_only: Vec<Scaling> = b.iter().map(|s| s.proj1()).collect();
            let (g_d, rest) = homogeneous_split(g, &dist_only)?;
            let verdict = if g_d.degree() == 1 { LimitVerdict::HalfSpaceLike } else { LimitVerdict::PersistingBoundary };
            let o_star = OStar::Level { g_d: g_d.clone(), margin };
            let center = search_center(&o_star, &g_d, n, seed);
            let verdict = if center.is_some() { verdict } else { LimitVerdict::DegenerateEmpty };
            Ok(LimitDomain {
                verdict,
                persisting: vec![g_d.to_string()],
                dropped: if rest.is_zero() { Vec::new() } else { vec![rest.to_string()] },
                o_star,
                center,
            })
        }
    }
}

/// Best of a seeded sample of the box, kept only if it lies in `O*`.
fn search_center(o: &OStar, g_d: &Polynomial, n: usize, seed: u64) -> Option<Vec<f64>> {
    let mut rng = rng_for(seed, 0xce11);
    let mut best: Option<(f64, Vec<f64>)> = None;
    for _ in 0..10_000 {
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-0.9..0.9)).collect();
        let v = g_d.eval(&y);
        if best.as_ref().is_none_or(|(bv, _)| v > *bv) {
            best = Some((v, y));
        }
    }
    best.map(|(_, y)| y).filter(|y| o.contains(y))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Propagation,
    Domain,
    Reachability,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum RegularVerdict {
    Regular,
    Inconclusive { stage: Stage },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularConfig {
    pub seed: u64,
    pub margin: f64,
    pub t: f64,
    pub probe_trials: usize,
    /// Saturation rounds; `2n` when absent.
    pub max_steps: Option<usize>,
}

impl Default for RegularConfig {
    fn default() -> Self {
        RegularConfig { seed: 0, margin: DEFAULT_MARGIN, t: 1.0, probe_trials: 2000, max_steps: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Reachability {
    pub method: String,
    pub exact_controllable: bool,
    pub basis_det: Option<String>,
    pub probe: Option<ProbeResult>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegularReport {
    #[serde(flatten)]
    pub verdict: RegularVerdict,
    pub point: Vec<f64>,
    pub shifted_drift: String,
    pub propagation: PropagationResult,
    pub domain_limit: Option<LimitDomain>,
    pub reachability: Option<Reachability>,
    pub config: RegularConfig,
    pub rules: Vec<String>,
}

impl RegularReport {
    pub fn is_regular(&self) -> bool {
        self.verdict == RegularVerdict::Regular
    }
}

/// Shift, scale, find `O*`, and establish reachability of `O*`.
pub fn check_regular(sys: &SdeSystem, spec: &DomainSpec, cfg: &RegularConfig) -> Result<RegularReport> {
    let n = sys.dim();
    let point = spec.point.clone().unwrap_or_else(|| vec![0.0; n]);
    let domain = shift_domain(spec, n)?;
    let shifted = sys.shift(&point)?;
    let res = dist_scalings(&shifted);
    let mut report = RegularReport {
        verdict: RegularVerdict::Inconclusive { stage: Stage::Propagation },
        point,
        shifted_drift: shifted.drift.to_string(),
        propagation: res.clone(),
        domain_limit: None,
        reachability: None,
        config: cfg.clone(),
        rules: Vec::new(),
    };
    if !res.is_propagating() {
        report.rules.push("noise defective: the criterion does not apply".into());
        return Ok(report);
    }
    let lim = scaled_domain_limit(&domain, &res.scalings, cfg.margin, cfg.seed)?;
    let feasible = lim.is_feasible();
    let o_star = lim.o_star.clone();
    let center = lim.center.clone();
    report.domain_limit = Some(lim);
    if !feasible {
        report.verdict = RegularVerdict::Inconclusive { stage: Stage::Domain };
        report.rules.push("no nonempty O* inside the rescaled domains".into());
        return Ok(report);
    }
    report.rules.push(format!("O* sits inside every rescaled domain for small eps (margin {})", cfg.margin));

    let steps = cfg.max_steps.unwrap_or(2 * n);
    let sat = saturate(&res.limit_drift, &noise_controls(&shifted.sigma)?, steps)?;
    if sat.exact_controllable {
        report.reachability = Some(Reachability {
            method: "saturation".into(),
            exact_controllable: true,
            basis_det: sat.basis_det,
            probe: None,
        });
        report.rules.push("limit family exactly controllable => limit reachable set is R^n and meets O*".into());
        report.verdict = RegularVerdict::Regular;
        return Ok(report);
    }
    let prob = ControlProblem::from_limit(&shifted, &res);
    let pcfg = ProbeConfig { t: cfg.t, trials: cfg.probe_trials, seed: cfg.seed, center, ..ProbeConfig::default() };
    let target = |y: &[f64]| o_star.contains(y);
    let probe = reachability_probe(&prob, &target, &pcfg);
    let found = probe.found;
    report.reachability =
        Some(Reachability { method: "probe".into(), exact_controllable: false, basis_det: None, probe: Some(probe) });
    if found {
        report.rules.push("a limit trajectory from 0 enters O*".into());
        report.verdict = RegularVerdict::Regular;
    } else {
        report.verdict = RegularVerdict::Inconclusive { stage: Stage::Reachability };
        report.rules.push("no limit trajectory into O* found; absence is not a proof".into());
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScaleWitness {
    pub eps: f64,
    pub samples: usize,
    pub agreement: f64,
}

/// For graph domains with only critical terms, the rescaled domain equals the
/// limit set `{y_j > sum of terms}` exactly; compare membership on a sample.
pub fn scale_invariance_witness(domain: &ShiftedDomain, b: &[Scaling], eps: f64, samples: usize, seed: u64) -> Result<ScaleWitness> {
    let ShiftedDomain::Graph { index, terms } = domain else {
        return Err(Error::Invalid("scale-invariance witness needs a graph domain".into()));
    };
    let bq = proj1(b)?;
    for t in terms {
        if t.eps_exponent(&bq)? != bq[*index] {
            return Err(Error::Invalid(format!("term {} is not critical", t.describe())));
        }
    }
    let n = b.len();
    let mut rng = rng_for(seed, 0x5ca1e);
    let bj = eps.powf(r64(bq[*index]));
    let mut agree = 0;
    for _ in 0..samples {
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let scaled = bj * y[*index] > terms.iter().map(|t| t.eval_scaled(&y, &bq, eps)).sum::<f64>();
        let limit = y[*index] > terms.iter().map(|t| t.eval(&y)).sum::<f64>();
        if scaled == limit {
            agree += 1;
        }
    }
    Ok(ScaleWitness { eps, samples, agreement: agree as f64 / samples.max(1) as f64 })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HitRow {
    pub eps: f64,
    pub paths: usize,
    pub hit_fraction: f64,
}

/// Fraction of paths of the shifted process entering the domain before
/// `eps * t`; a consistency probe, not part of the verdict.
pub fn mc_corroboration(
    sys: &SdeSystem,
    spec: &DomainSpec,
    eps: &[f64],
    t: f64,
    paths: usize,
    steps: usize,
    seed: u64,
) -> Result<Vec<HitRow>> {
    let n = sys.dim();
    let point = spec.point.clone().unwrap_or_else(|| vec![0.0; n]);
    let domain = shift_domain(spec, n)?;
    let shifted = sys.shift(&point)?;
    let zero = vec![0.0; n];
    eps.iter()
        .map(|&e| {
            let horizon = e * t;
            let dt = horizon / steps as f64;
            let hits: usize = (0..paths)
                .into_par_iter()
                .map(|k| {
                    let s = seed.wrapping_mul(0x9e37_79b9).wrapping_add(k as u64);
                    match euler_maruyama(&shifted, &zero, horizon, dt, s) {
                        Ok(p) => p.states.iter().skip(1).any(|x| domain.contains(x)) as usize,
                        Err(_) => 0,
                    }
                })
                .sum();
            Ok(HitRow { eps: e, paths, hit_fraction: hits as f64 / paths.max(1) as f64 })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;

    fn graph(json: &str) -> DomainSpec {
        DomainSpec::from_json(json).unwrap()
    }

    #[test]
    fn brownian_cone_is_regular() {
        let sys = models::brownian(3);
        let d = graph(r#"{"form":"graph","index":3,"terms":[{"coeff":2.0,"norm":[1,2],"power":1}]}"#);
        let r = check_regular(&sys, &d, &RegularConfig::default()).unwrap();
        assert!(r.is_regular(), "{r:?}");
        let lim = r.domain_limit.unwrap();
        assert_eq!(lim.verdict, LimitVerdict::PersistingBoundary);
        let b = dist_scalings(&sys).scalings;
        let w = scale_invariance_witness(&shift_domain(&d, 3).unwrap(), &b, 1e-3, 1000, 0).unwrap();
        assert_eq!(w.agreement, 1.0);
    }

    #[test]
    fn chain_graph_every_term_critical() {
        let sys = models::iterated_kolmogorov(4);
        let d = graph(
            r#"{"form":"graph","index":1,"terms":[
                {"coeff":1.0,"powers":[[2,"1/3"]]},
                {"coeff":1.0,"powers":[[3,"1/5"]]},
                {"coeff":1.0,"powers":[[4,"1/7"]]}]}"#,
        );
        let r = check_regular(&sys, &d, &RegularConfig::default()).unwrap();
        assert!(r.is_regular());
        assert_eq!(r.domain_limit.unwrap().persisting.len(), 3);
    }

    #[test]
    fn dominant_positive_term_empties_the_limit() {
        let sys = models::brownian(2);
        let d = graph(r#"{"form":"graph","index":2,"terms":[{"coeff":1.0,"powers":[[1,"1/2"]]}]}"#);
        let r = check_regular(&sys, &d, &RegularConfig::default()).unwrap();
        assert_eq!(r.verdict, RegularVerdict::Inconclusive { stage: Stage::Domain });
    }

    #[test]
    fn langevin_level_set_both_cases() {
        let u = models::quartic_potential(1);
        let sys = models::langevin(&u);
        let h = models::hamiltonian(&u);
        for point in [[0.5, 1.0], [1.0, 0.0]] {
            let spec = DomainSpec { form: DomainForm::SuperLevel { g: h.clone(), level: None }, point: Some(point.to_vec()), radius: 1.0 };
            let r = check_regular(&sys, &spec, &RegularConfig::default()).unwrap();
            assert!(r.is_regular(), "{point:?}: {r:?}");
        }
    }

    #[test]
    fn defective_lorenz_is_inconclusive() {
        let sys = models::lorenz96(5, &[1.0]);
        let d = graph(r#"{"form":"graph","index":1,"terms":[]}"#);
        let r = check_regular(&sys, &d, &RegularConfig::default()).unwrap();
        assert_eq!(r.verdict, RegularVerdict::Inconclusive { stage: Stage::Propagation });
    }
}
