//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! Terms are kept in a map keyed by exponent vectors, so a polynomial is
//! always in standard form: distinct exponents, no zero coefficients, and a
//! graded-lexicographic iteration order.

mod field;
mod numeric;

pub use field::{PolyVectorField, RelativeDegree};
pub use numeric::{NumField, NumPoly};

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scaling::Scaling;

pub type Coeff = BigRational;

/// Exponent vector, ordered by total degree and then lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Exponent(pub Vec<u32>);

impl Exponent {
    pub fn zero(n: usize) -> Self {
        Exponent(vec![0; n])
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        Exponent(e)
    }
}

impl Ord for Exponent {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Parse `"p/q"`, `"p"` or a plain decimal such as `"-1.25"` exactly.
pub fn parse_rational(s: &str) -> Result<Coeff> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad rational literal {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((ip, fp)) = s.split_once('.') {
        let neg = ip.starts_with('-');
        let digits = format!("{}{}", ip.trim_start_matches(['-', '+']), fp);
        if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let n: BigInt = digits.parse().map_err(|_| bad())?;
        let d = num_traits::pow(BigInt::from(10), fp.len());
        let r = BigRational::new(n, d);
        return Ok(if neg { -r } else { r });
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(n))
}

pub fn rational_from_f64(x: f64) -> Result<Coeff> {
    BigRational::from_float(x).ok_or_else(|| Error::Invalid(format!("non-finite value {x}")))
}

pub fn rational_to_f64(r: &Coeff) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub(crate) fn fmt_rational(r: &Coeff) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Exponent, Coeff>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Coeff) -> Self {
        Self::monomial(c, Exponent::zero(nvars))
    }

    pub fn monomial(c: Coeff, e: Exponent) -> Self {
        let nvars = e.0.len();
        let mut p = Polynomial::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(e, c);
        }
        p
    }

    /// The coordinate `x_i` (0-based).
    pub fn var(nvars: usize, i: usize) -> Self {
        Self::monomial(Coeff::one(), Exponent::unit(nvars, i))
    }

    /// Build from a raw term list, merging equal exponents and dropping zeros.
    pub fn from_terms<I>(nvars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Coeff, Vec<u32>)>,
    {
        let mut p = Polynomial::zero(nvars);
        for (c, e) in terms {
            if e.len() != nvars {
                return Err(Error::DimensionMismatch { expected: nvars, got: e.len() });
            }
            p.add_term(Exponent(e), c);
        }
        Ok(p)
    }

    /// Integer-coefficient shorthand used by model builders and tests.
    pub fn from_int_terms(nvars: usize, terms: &[(i64, &[u32])]) -> Self {
        Self::from_terms(
            nvars,
            terms.iter().map(|(c, e)| (Coeff::from_integer((*c).into()), e.to_vec())),
        )
        .expect("exponent length")
    }

    fn add_term(&mut self, e: Exponent, c: Coeff) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(e.clone()).or_insert_with(Coeff::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &Coeff)> {
        self.terms.iter()
    }

    pub fn coeff(&self, e: &Exponent) -> Coeff {
        self.terms.get(e).cloned().unwrap_or_else(Coeff::zero)
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.degree()).max().unwrap_or(0)
    }

    /// The constant value, if the polynomial has no non-constant term.
    pub fn as_constant(&self) -> Option<Coeff> {
        match self.terms.len() {
            0 => Some(Coeff::zero()),
            1 => {
                let (e, c) = self.terms.iter().next().unwrap();
                (e.degree() == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    /// Variables with a positive exponent in some term.
    pub fn support(&self) -> Vec<usize> {
        (0..self.nvars)
            .filter(|&i| self.terms.keys().any(|e| e.0[i] > 0))
            .collect()
    }

    pub fn scale(&self, c: &Coeff) -> Self {
        let mut p = Polynomial::zero(self.nvars);
        if c.is_zero() {
            return p;
        }
        for (e, a) in &self.terms {
            p.terms.insert(e.clone(), a * c);
        }
        p
    }

    pub fn add(&self, o: &Self) -> Self {
        debug_assert_eq!(self.nvars, o.nvars);
        let mut p = self.clone();
        for (e, c) in &o.terms {
            p.add_term(e.clone(), c.clone());
        }
        p
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Coeff::one())
    }

    pub fn mul(&self, o: &Self) -> Self {
        debug_assert_eq!(self.nvars, o.nvars);
        let mut p = Polynomial::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e: Vec<u32> = e1.0.iter().zip(&e2.0).map(|(a, b)| a + b).collect();
                p.add_term(Exponent(e), c1 * c2);
            }
        }
        p
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut r = Polynomial::constant(self.nvars, Coeff::one());
        for _ in 0..k {
            r = r.mul(self);
        }
        r
    }

    pub fn partial(&self, i: usize) -> Self {
        let mut p = Polynomial::zero(self.nvars);
        for (e, c) in &self.terms {
            let k = e.0[i];
            if k == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2.0[i] -= 1;
            p.add_term(e2, c * Coeff::from_integer(k.into()));
        }
        p
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                rational_to_f64(c)
                    * e.0.iter().zip(x).map(|(&k, &xi)| xi.powi(k as i32)).product::<f64>()
            })
            .sum()
    }

    pub fn eval_exact(&self, x: &[Coeff]) -> Coeff {
        let mut s = Coeff::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (&k, xi) in e.0.iter().zip(x) {
                if k > 0 {
                    t *= num_traits::pow(xi.clone(), k as usize);
                }
            }
            s += t;
        }
        s
    }

    /// Substitute `x_i -> subs[i]`; all substitutes share one variable count.
    pub fn compose(&self, subs: &[Polynomial]) -> Result<Self> {
        if subs.len() != self.nvars {
            return Err(Error::DimensionMismatch { expected: self.nvars, got: subs.len() });
        }
        let m = subs.first().map(|s| s.nvars).unwrap_or(0);
        let mut out = Polynomial::zero(m);
        for (e, c) in &self.terms {
            let mut t = Polynomial::constant(m, c.clone());
            for (i, &k) in e.0.iter().enumerate() {
                if k > 0 {
                    t = t.mul(&subs[i].pow(k));
                }
            }
            out = out.add(&t);
        }
        Ok(out)
    }

    /// `p(x + s)` for a constant shift.
    pub fn shift(&self, s: &[Coeff]) -> Result<Self> {
        let n = self.nvars;
        let subs: Vec<Polynomial> = (0..n)
            .map(|i| Polynomial::var(n, i).add(&Polynomial::constant(n, s[i].clone())))
            .collect();
        self.compose(&subs)
    }

    pub(crate) fn with_nvars(mut self, n: usize) -> Result<Self> {
        if self.terms.is_empty() {
            self.nvars = n;
            Ok(self)
        } else if self.nvars == n {
            Ok(self)
        } else {
            Err(Error::DimensionMismatch { expected: n, got: self.nvars })
        }
    }

    /// Keep only the terms accepted by `keep`.
    pub fn filter<F: Fn(&Exponent, &Coeff) -> bool>(&self, keep: F) -> Self {
        let mut p = Polynomial::zero(self.nvars);
        for (e, c) in &self.terms {
            if keep(e, c) {
                p.terms.insert(e.clone(), c.clone());
            }
        }
        p
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| rational_to_f64(&c.abs())).fold(0.0, f64::max)
    }
}

/// Scaling of a single monomial `x^e` under the coordinate scalings `assign`.
pub fn monomial_scaling(e: &Exponent, assign: &[Scaling]) -> Scaling {
    e.0.iter()
        .zip(assign)
        .fold(Scaling::ZERO, |acc, (&k, a)| acc + a.scale(k))
}

/// The smallest monomial scaling of `p`; the zero polynomial gets infinity.
pub fn poly_scaling(p: &Polynomial, assign: &[Scaling]) -> Scaling {
    p.terms()
        .map(|(e, _)| monomial_scaling(e, assign))
        .min()
        .unwrap_or(Scaling::Infinity)
}

/// The smallest first component over the monomials of `p`.
pub fn poly_scaling_proj1(p: &Polynomial, assign: &[Scaling]) -> Scaling {
    poly_scaling(p, assign).proj1()
}

/// Split `p` into the monomials attaining `poly_scaling` and the rest.
pub fn homogeneous_split(p: &Polynomial, assign: &[Scaling]) -> Result<(Polynomial, Polynomial)> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let m = poly_scaling(p, assign);
    let lead = p.filter(|e, _| monomial_scaling(e, assign) == m);
    let rest = p.filter(|e, _| monomial_scaling(e, assign) != m);
    Ok((lead, rest))
}

fn var_name(i: usize) -> String {
    format!("x{}", i + 1)
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (e, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            let mut factors: Vec<String> = Vec::new();
            if !a.is_one() || e.degree() == 0 {
                factors.push(fmt_rational(&a));
            }
            for (i, &p) in e.0.iter().enumerate() {
                match p {
                    0 => {}
                    1 => factors.push(var_name(i)),
                    _ => factors.push(format!("{}^{}", var_name(i), p)),
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    c: CoeffRepr,
    e: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum CoeffRepr {
    Str(String),
    Int(i64),
    Float(f64),
}

impl Serialize for Polynomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<TermRepr> = self
            .terms
            .iter()
            .map(|(e, c)| TermRepr { c: CoeffRepr::Str(fmt_rational(c)), e: e.0.clone() })
            .collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let v = Vec::<TermRepr>::deserialize(d)?;
        let nvars = v.first().map(|t| t.e.len()).unwrap_or(0);
        let mut terms = Vec::with_capacity(v.len());
        for t in v {
            let c = match t.c {
                CoeffRepr::Str(s) => parse_rational(&s).map_err(D::Error::custom)?,
                CoeffRepr::Int(i) => Coeff::from_integer(i.into()),
                CoeffRepr::Float(x) => rational_from_f64(x).map_err(D::Error::custom)?,
            };
            terms.push((c, t.e));
        }
        Polynomial::from_terms(nvars, terms).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Coeff {
        parse_rational(s).unwrap()
    }

    #[test]
    fn parse_literals() {
        assert_eq!(q("3/2"), Coeff::new(3.into(), 2.into()));
        assert_eq!(q("-1.25"), Coeff::new((-5).into(), 4.into()));
        assert_eq!(q("7"), Coeff::from_integer(7.into()));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn standard_form() {
        let p = Polynomial::from_int_terms(2, &[(1, &[1, 0]), (2, &[1, 0]), (-3, &[1, 0])]);
        assert!(p.is_zero());
        let p = Polynomial::from_int_terms(2, &[(1, &[0, 2]), (1, &[2, 0]), (1, &[0, 0])]);
        let order: Vec<Vec<u32>> = p.terms().map(|(e, _)| e.0.clone()).collect();
        assert_eq!(order, vec![vec![0, 0], vec![2, 0], vec![0, 2]]);
    }

    #[test]
    fn compose_and_shift() {
        let n = 2;
        let p = Polynomial::from_int_terms(n, &[(1, &[2, 0]), (-1, &[1, 1])]);
        let s = p.shift(&[q("1"), q("2")]).unwrap();
        for x in [[0.3, -0.7], [1.5, 2.0]] {
            assert!((s.eval(&x) - p.eval(&[x[0] + 1.0, x[1] + 2.0])).abs() < 1e-12);
        }
    }

    #[test]
    fn split_and_scaling() {
        let a = [Scaling::half(1, 1), Scaling::half(3, 1), Scaling::Infinity];
        let p = Polynomial::from_int_terms(3, &[(1, &[1, 0, 0]), (1, &[0, 1, 0]), (1, &[0, 0, 1])]);
        assert_eq!(poly_scaling(&p, &a), Scaling::half(1, 1));
        let (l, r) = homogeneous_split(&p, &a).unwrap();
        assert_eq!(l.len(), 1);
        assert_eq!(r.len(), 2);
        assert!(homogeneous_split(&Polynomial::zero(3), &a).is_err());
        assert_eq!(poly_scaling(&Polynomial::zero(3), &a), Scaling::Infinity);
    }

    #[test]
    fn json_roundtrip() {
        let p = Polynomial::from_terms(2, vec![(q("-3/2"), vec![1, 2]), (q("1"), vec![0, 0])]).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        let back: Polynomial = serde_json::from_str(&s).unwrap();
        assert_eq!(p, back);
        assert_eq!(p.to_string(), "-3/2*x1*x2^2 + 1");
    }
}
