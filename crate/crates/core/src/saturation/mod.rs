//! Constructive saturation of the family generated by a drift `V0` and
//! constant control fields `V1..Vk`.
//!
//! The family holds flows of polynomial fields and rays `x -> x + t v`.
//! Symmetric rays (`span(v)`) act on flows by the scaled bracket `Br(V, Q)`:
//! constant brackets become new rays, the rest new flows. A symmetric ray
//! needs both signs of `alpha^d`, so a bracket is symmetric when its parent
//! flow is, or when the relative degree `d` is odd.

mod probe;
mod realize;

pub use probe::{reachability_probe, ProbeConfig, ProbeResult};
pub use realize::{bracket_realizability, ray_realizability, Realizability};

use std::collections::HashSet;

use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{rational_det, RationalBasis};
use crate::poly::{fmt_rational, Coeff, PolyVectorField};

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Origin {
    Base,
    Control { index: usize },
    Bracket { ray: usize, flow: usize, degree: u32 },
    ConstantFlow { flow: usize },
    /// Opposite one-sided ray merged into ray `ray`.
    ConeMerge { ray: usize, with: Box<Origin> },
}

/// Flow of `Q` (or of `c Q` for all real `c` when symmetric, `c >= 0` otherwise).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Flow {
    pub field: PolyVectorField,
    pub symmetric: bool,
    pub origin: Origin,
}

/// `x -> x + t v`: span of `v` when symmetric, nonnegative multiples otherwise.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Ray {
    #[serde(serialize_with = "ser_vec")]
    pub generator: Vec<Coeff>,
    pub symmetric: bool,
    pub origin: Origin,
}

fn ser_vec<S: serde::Serializer>(v: &[Coeff], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(fmt_rational))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyElement {
    Flow(Flow),
    Ray(Ray),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceEntry {
    pub step: usize,
    pub rule: String,
    pub element: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Family {
    pub flows: Vec<Flow>,
    pub rays: Vec<Ray>,
    pub trace: Vec<TraceEntry>,
    #[serde(skip)]
    done: HashSet<(usize, usize)>,
    pub steps: usize,
}

/// Span part and cone part of the generated directions.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DirectionSet {
    pub span: Vec<Vec<String>>,
    pub cone: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SaturationReport {
    pub n: usize,
    pub steps: usize,
    pub fixed_point: bool,
    pub directions: DirectionSet,
    pub exact_controllable: bool,
    /// Indices of `n` symmetric rays with nonzero determinant.
    pub basis: Option<Vec<usize>>,
    pub basis_det: Option<String>,
    pub inferences: Vec<String>,
    pub family: Family,
}

fn fmt_dir(v: &[Coeff]) -> String {
    let parts: Vec<String> = v.iter().map(fmt_rational).collect();
    format!("({})", parts.join(", "))
}

/// `Some(c)` with `a = c b`, both nonzero.
fn ratio(a: &[Coeff], b: &[Coeff]) -> Option<Coeff> {
    let mut r: Option<Coeff> = None;
    for (x, y) in a.iter().zip(b) {
        match (x.is_zero(), y.is_zero()) {
            (true, true) => continue,
            (false, false) => {
                let q = x / y;
                match &r {
                    None => r = Some(q),
                    Some(r0) if *r0 == q => {}
                    _ => return None,
                }
            }
            _ => return None,
        }
    }
    r
}

impl Family {
    fn log(&mut self, rule: &str, element: String) {
        self.trace.push(TraceEntry { step: self.steps, rule: rule.into(), element });
    }

    fn add_ray(&mut self, v: Vec<Coeff>, symmetric: bool, origin: Origin) -> bool {
        if v.iter().all(|c| c.is_zero()) {
            return false;
        }
        for i in 0..self.rays.len() {
            let Some(c) = ratio(&v, &self.rays[i].generator) else { continue };
            let r = &mut self.rays[i];
            if r.symmetric {
                return false;
            }
            if symmetric {
                r.symmetric = true;
                r.origin = origin;
                let e = format!("span{}", fmt_dir(&r.generator));
                self.log("upgrade-to-span", e);
                return true;
            }
            if c > Coeff::zero() {
                return false;
            }
            // Opposite cones merge into a span.
            r.symmetric = true;
            r.origin = Origin::ConeMerge { ray: i, with: Box::new(origin) };
            let e = format!("span{}", fmt_dir(&r.generator));
            self.log("cone-merge", e);
            return true;
        }
        let e = format!("{}{}", if symmetric { "span" } else { "cone" }, fmt_dir(&v));
        self.rays.push(Ray { generator: v, symmetric, origin });
        self.log("ray", e);
        true
    }

    fn add_flow(&mut self, field: PolyVectorField, symmetric: bool, origin: Origin) -> bool {
        if field.is_zero() {
            return false;
        }
        if let Some(c) = field.as_constant() {
            return self.add_ray(c, symmetric, origin);
        }
        for f in &mut self.flows {
            if let Some(c) = field.proportional_to(&f.field) {
                if f.symmetric || (!symmetric && c > Coeff::zero()) {
                    return false;
                }
                if symmetric || c < Coeff::zero() {
                    f.symmetric = true;
                    let e = f.field.to_string();
                    self.log("flow-upgrade", e);
                    return true;
                }
            }
        }
        let e = format!("{}{}", if symmetric { "flow(alpha in R) " } else { "flow(alpha >= 0) " }, field);
        self.flows.push(Flow { field, symmetric, origin });
        self.log("derived-flow", e);
        true
    }

    pub fn symmetric_rays(&self) -> impl Iterator<Item = (usize, &Ray)> {
        self.rays.iter().enumerate().filter(|(_, r)| r.symmetric)
    }
}

/// `F_1`: the drift flow plus a symmetric ray per control direction.
pub fn seed(v0: &PolyVectorField, controls: &[Vec<Coeff>]) -> Result<Family> {
    let n = v0.dim();
    let mut fam = Family::default();
    fam.flows.push(Flow { field: v0.clone(), symmetric: false, origin: Origin::Base });
    fam.log("base", v0.to_string());
    if let Some(c) = v0.as_constant() {
        fam.add_ray(c, false, Origin::ConstantFlow { flow: 0 });
    }
    for (i, c) in controls.iter().enumerate() {
        if c.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: c.len() });
        }
        if c.iter().all(|x| x.is_zero()) {
            return Err(Error::ZeroControl(i));
        }
        fam.add_ray(c.clone(), true, Origin::Control { index: i });
    }
    fam.steps = 1;
    Ok(fam)
}

/// Control directions `sigma_j e_j` for the noisy coordinates.
pub fn noise_controls(sigma: &[f64]) -> Result<Vec<Vec<Coeff>>> {
    let n = sigma.len();
    let mut out = Vec::new();
    for (j, &s) in sigma.iter().enumerate() {
        if s != 0.0 {
            let mut v = vec![Coeff::zero(); n];
            v[j] = crate::poly::rational_from_f64(s)?;
            out.push(v);
        }
    }
    Ok(out)
}

/// One enrichment round; returns whether anything new appeared.
pub fn saturate_step(fam: &mut Family) -> bool {
    fam.steps += 1;
    let rays: Vec<(usize, Vec<Coeff>)> = fam.symmetric_rays().map(|(i, r)| (i, r.generator.clone())).collect();
    let nflows = fam.flows.len();
    let mut changed = false;
    for (ri, v) in &rays {
        for fi in 0..nflows {
            if !fam.done.insert((*ri, fi)) {
                continue;
            }
            let q = fam.flows[fi].field.clone();
            let rd = q.relative_degree(v);
            if rd.zero_field || rd.degree == 0 {
                continue;
            }
            let b = q.br(v);
            if b.is_zero() {
                continue;
            }
            let sym = fam.flows[fi].symmetric || rd.degree % 2 == 1;
            let origin = Origin::Bracket { ray: *ri, flow: fi, degree: rd.degree };
            let added = match b.as_constant() {
                Some(c) => fam.add_ray(c, sym, origin),
                None => fam.add_flow(b, sym, origin),
            };
            changed |= added;
        }
    }
    changed
}

fn basis_certificate(fam: &Family, n: usize) -> Option<(Vec<usize>, Coeff)> {
    let mut basis = RationalBasis::new();
    let mut idx = Vec::new();
    for (i, r) in fam.symmetric_rays() {
        if basis.insert(&r.generator) {
            idx.push(i);
            if idx.len() == n {
                let m: Vec<Vec<Coeff>> = idx.iter().map(|&k| fam.rays[k].generator.clone()).collect();
                return Some((idx, rational_det(&m)));
            }
        }
    }
    None
}

/// Iterate to a fixed point or `max_steps` rounds (counting the seed).
pub fn saturate(v0: &PolyVectorField, controls: &[Vec<Coeff>], max_steps: usize) -> Result<SaturationReport> {
    if max_steps == 0 {
        return Err(Error::Invalid("max_steps must be at least 1".into()));
    }
    let n = v0.dim();
    let mut fam = seed(v0, controls)?;
    let mut fixed_point = false;
    while fam.steps < max_steps {
        if !saturate_step(&mut fam) {
            fixed_point = true;
            break;
        }
        if basis_certificate(&fam, n).is_some() {
            break;
        }
    }
    let cert = basis_certificate(&fam, n);
    let exact = cert.is_some();
    let mut inferences = Vec::new();
    if exact {
        inferences.push(
            "symmetric rays contain a basis => reachable set from any x at any t > 0 is all of R^n".to_string(),
        );
    } else if !fam.rays.is_empty() {
        inferences.push(
            "closure of the reachable set from x contains x + span(symmetric rays) + cone(one-sided rays)".to_string(),
        );
    }
    let directions = DirectionSet {
        span: fam.symmetric_rays().map(|(_, r)| r.generator.iter().map(fmt_rational).collect()).collect(),
        cone: fam.rays.iter().filter(|r| !r.symmetric).map(|r| r.generator.iter().map(fmt_rational).collect()).collect(),
    };
    Ok(SaturationReport {
        n,
        steps: fam.steps,
        fixed_point,
        directions,
        exact_controllable: exact,
        basis_det: cert.as_ref().map(|c| fmt_rational(&c.1)),
        basis: cert.map(|c| c.0),
        inferences,
        family: fam,
    })
}

impl SaturationReport {
    pub fn has_span(&self, v: &[Coeff]) -> bool {
        self.family.rays.iter().any(|r| r.symmetric && ratio(v, &r.generator).is_some())
    }

    /// Cone of `v` present as a one-sided ray (positive multiple).
    pub fn has_cone(&self, v: &[Coeff]) -> bool {
        self.family
            .rays
            .iter()
            .any(|r| !r.symmetric && ratio(v, &r.generator).is_some_and(|c| c > Coeff::zero()))
    }

    /// Basis certificate recomputed from scratch.
    pub fn certificate_valid(&self) -> bool {
        let Some(idx) = &self.basis else { return false };
        if idx.len() != self.n || idx.iter().any(|&i| !self.family.rays[i].symmetric) {
            return false;
        }
        let m: Vec<Vec<Coeff>> = idx.iter().map(|&i| self.family.rays[i].generator.clone()).collect();
        !rational_det(&m).is_zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;

    fn q(i: i64) -> Coeff {
        Coeff::from_integer(i.into())
    }

    fn e(n: usize, j: usize, c: i64) -> Vec<Coeff> {
        let mut v = vec![q(0); n];
        v[j] = q(c);
        v
    }

    #[test]
    fn quadratic_example_cone_and_span() {
        let sys = models::quadratic_example(1, 0);
        let r = saturate(&sys.drift, &noise_controls(&sys.sigma).unwrap(), 4).unwrap();
        assert!(!r.exact_controllable);
        assert!(r.has_cone(&e(2, 0, -1)));
        assert!(!r.has_span(&e(2, 0, 1)));
        assert!(r.has_span(&e(2, 1, 1)));

        let sys = models::quadratic_example(0, 3);
        let r = saturate(&sys.drift, &noise_controls(&sys.sigma).unwrap(), 4).unwrap();
        assert!(r.exact_controllable && r.certificate_valid());
    }

    #[test]
    fn chain_and_no_controls() {
        let ik = models::iterated_kolmogorov(5);
        let r = saturate(&ik.drift, &noise_controls(&ik.sigma).unwrap(), 10).unwrap();
        assert!(r.exact_controllable && r.certificate_valid());
        let fam = seed(&ik.drift, &[]).unwrap();
        assert!(fam.rays.is_empty() && fam.flows.len() == 1);
        assert!(seed(&ik.drift, &[vec![q(0); 5]]).is_err());
    }
}

#[cfg(test)]
mod scale_tests {
    use super::*;
    use crate::models;
    use crate::propagation::lil_scalings;

    #[test]
    fn lorenz_and_long_chains() {
        for n in 4..=6 {
            let sys = models::lorenz96(n, &[1.0, 1.0]);
            let lim = lil_scalings(&sys).limit_drift;
            let r = saturate(&lim, &noise_controls(&sys.sigma).unwrap(), 2 * n).unwrap();
            assert!(r.exact_controllable && r.certificate_valid(), "n = {n}: {:?}", r.directions);
        }
        let ik = models::iterated_kolmogorov(8);
        let r = saturate(&ik.drift, &noise_controls(&ik.sigma).unwrap(), 16).unwrap();
        assert!(r.exact_controllable && r.certificate_valid());
    }
}
