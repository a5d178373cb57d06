use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::{poly_scaling, Coeff, Exponent, Polynomial};
use crate::error::{Error, Result};
use crate::scaling::Scaling;

/// Polynomial vector field on `R^n`; component `j` is the coefficient of `d/dx_j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PolyVectorField {
    comps: Vec<Polynomial>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelativeDegree {
    pub degree: u32,
    /// Set when the field itself is identically zero.
    pub zero_field: bool,
}

impl PolyVectorField {
    pub fn new(comps: Vec<Polynomial>) -> Result<Self> {
        let n = comps.len();
        let comps = comps
            .into_iter()
            .map(|p| p.with_nvars(n))
            .collect::<Result<Vec<_>>>()?;
        Ok(PolyVectorField { comps })
    }

    pub fn zero(n: usize) -> Self {
        PolyVectorField { comps: vec![Polynomial::zero(n); n] }
    }

    pub fn constant(v: &[Coeff]) -> Self {
        let n = v.len();
        PolyVectorField {
            comps: v.iter().map(|c| Polynomial::constant(n, c.clone())).collect(),
        }
    }

    /// The coordinate field `e_i`.
    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = vec![Coeff::zero(); n];
        v[i] = Coeff::one();
        Self::constant(&v)
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn comps(&self) -> &[Polynomial] {
        &self.comps
    }

    pub fn comp(&self, j: usize) -> &Polynomial {
        &self.comps[j]
    }

    pub fn set_comp(&mut self, j: usize, p: Polynomial) {
        assert_eq!(p.nvars(), self.dim());
        self.comps[j] = p;
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|p| p.is_zero())
    }

    pub fn as_constant(&self) -> Option<Vec<Coeff>> {
        self.comps.iter().map(|p| p.as_constant()).collect()
    }

    pub fn degree(&self) -> u32 {
        self.comps.iter().map(|p| p.degree()).max().unwrap_or(0)
    }

    pub fn add(&self, o: &Self) -> Self {
        PolyVectorField { comps: self.comps.iter().zip(&o.comps).map(|(a, b)| a.add(b)).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        PolyVectorField { comps: self.comps.iter().zip(&o.comps).map(|(a, b)| a.sub(b)).collect() }
    }

    pub fn scale(&self, c: &Coeff) -> Self {
        PolyVectorField { comps: self.comps.iter().map(|a| a.scale(c)).collect() }
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.comps.iter().map(|p| p.eval(x)).collect()
    }

    pub fn eval_exact(&self, x: &[Coeff]) -> Vec<Coeff> {
        self.comps.iter().map(|p| p.eval_exact(x)).collect()
    }

    /// `jac[i][k] = d comp_i / d x_k`.
    pub fn jacobian(&self) -> Vec<Vec<Polynomial>> {
        let n = self.dim();
        self.comps
            .iter()
            .map(|p| (0..n).map(|k| p.partial(k)).collect())
            .collect()
    }

    /// `(D self) * x`, the derivative of `self` along `x`.
    pub fn derivative_along(&self, x: &PolyVectorField) -> PolyVectorField {
        let n = self.dim();
        let comps = self
            .comps
            .iter()
            .map(|p| {
                let mut acc = Polynomial::zero(n);
                for k in 0..n {
                    if x.comps[k].is_zero() {
                        continue;
                    }
                    let d = p.partial(k);
                    if !d.is_zero() {
                        acc = acc.add(&d.mul(&x.comps[k]));
                    }
                }
                acc
            })
            .collect();
        PolyVectorField { comps }
    }

    /// `[self, y] = (Dy) self - (D self) y`.
    pub fn lie_bracket(&self, y: &PolyVectorField) -> Result<PolyVectorField> {
        if self.dim() != y.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: y.dim() });
        }
        Ok(y.derivative_along(self).sub(&self.derivative_along(y)))
    }

    /// Largest power of `lambda` in `self(x + lambda v)`.
    pub fn relative_degree(&self, v: &[Coeff]) -> RelativeDegree {
        if self.is_zero() {
            return RelativeDegree { degree: 0, zero_field: true };
        }
        let vf = PolyVectorField::constant(v);
        let mut cur = self.clone();
        let mut d = 0;
        loop {
            let next = cur.derivative_along(&vf);
            if next.is_zero() {
                return RelativeDegree { degree: d, zero_field: false };
            }
            cur = next;
            d += 1;
        }
    }

    /// `ad^d V (self) / d!` with `V = v` constant and `d` the relative degree.
    pub fn br(&self, v: &[Coeff]) -> PolyVectorField {
        let rd = self.relative_degree(v);
        if rd.zero_field {
            return self.clone();
        }
        let vf = PolyVectorField::constant(v);
        let mut cur = self.clone();
        let mut fact = Coeff::one();
        for k in 1..=rd.degree {
            cur = vf.lie_bracket(&cur).expect("same dimension");
            fact *= Coeff::from_integer(k.into());
        }
        cur.scale(&(Coeff::one() / fact))
    }

    /// Coefficients `c_k` with `self(x + lambda v) = sum_k lambda^k c_k(x)`,
    /// computed by binomial expansion.
    pub fn lambda_expansion(&self, v: &[Coeff]) -> Vec<PolyVectorField> {
        let n = self.dim();
        // Work in n+1 variables, the last one is lambda.
        let subs: Vec<Polynomial> = (0..n)
            .map(|i| {
                let xi = Polynomial::var(n + 1, i);
                let mut e = Exponent::zero(n + 1);
                e.0[n] = 1;
                xi.add(&Polynomial::monomial(v[i].clone(), e))
            })
            .collect();
        let lifted: Vec<Polynomial> = self
            .comps
            .iter()
            .map(|p| p.compose(&subs).expect("dimension"))
            .collect();
        let maxd = lifted
            .iter()
            .flat_map(|p| p.terms().map(|(e, _)| e.0[n]))
            .max()
            .unwrap_or(0);
        (0..=maxd)
            .map(|k| {
                let comps = lifted
                    .iter()
                    .map(|p| {
                        let t = p.terms().filter(|(e, _)| e.0[n] == k).map(|(e, c)| {
                            (c.clone(), e.0[..n].to_vec())
                        });
                        Polynomial::from_terms(n, t).expect("dimension")
                    })
                    .collect();
                PolyVectorField { comps }
            })
            .collect()
    }

    /// Per-component `poly_scaling`.
    pub fn scalings(&self, assign: &[Scaling]) -> Vec<Scaling> {
        self.comps.iter().map(|p| poly_scaling(p, assign)).collect()
    }

    /// `Some(c)` with `self = c * other` exactly, `c != 0`.
    pub fn proportional_to(&self, other: &PolyVectorField) -> Option<Coeff> {
        if self.dim() != other.dim() || self.is_zero() || other.is_zero() {
            return None;
        }
        let mut ratio: Option<Coeff> = None;
        for (a, b) in self.comps.iter().zip(&other.comps) {
            if a.len() != b.len() {
                return None;
            }
            for ((ea, ca), (eb, cb)) in a.terms().zip(b.terms()) {
                if ea != eb {
                    return None;
                }
                let r = ca / cb;
                match &ratio {
                    None => ratio = Some(r),
                    Some(r0) if *r0 == r => {}
                    _ => return None,
                }
            }
        }
        ratio
    }

    /// `self(x + s)`.
    pub fn shift(&self, s: &[Coeff]) -> Result<Self> {
        Ok(PolyVectorField {
            comps: self.comps.iter().map(|p| p.shift(s)).collect::<Result<_>>()?,
        })
    }

    pub fn is_triangular(&self) -> bool {
        self.layer_order().is_some()
    }

    /// A topological order of the coordinates in which each component only
    /// depends on coordinates placed before it; `None` if there is a cycle.
    pub fn layer_order(&self) -> Option<Vec<usize>> {
        super::NumField::from_field(self).layer_order()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.comps.iter().map(|p| p.max_abs_coeff()).fold(0.0, f64::max)
    }
}

impl fmt::Display for PolyVectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.comps.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

impl Serialize for PolyVectorField {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.comps.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PolyVectorField {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let comps = Vec::<Polynomial>::deserialize(d)?;
        PolyVectorField::new(comps).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_rational;

    fn q(i: i64) -> Coeff {
        Coeff::from_integer(i.into())
    }

    fn lorenz(n: usize) -> PolyVectorField {
        let comps = (0..n)
            .map(|j| {
                let mut t: Vec<(i64, Vec<u32>)> = Vec::new();
                let mut e = vec![0; n];
                e[(j + 1) % n] += 1;
                e[(j + n - 1) % n] += 1;
                t.push((1, e));
                let mut e = vec![0; n];
                e[(j + n - 2) % n] += 1;
                e[(j + n - 1) % n] += 1;
                t.push((-1, e));
                let mut e = vec![0; n];
                e[j] = 1;
                t.push((-1, e));
                Polynomial::from_terms(n, t.into_iter().map(|(c, e)| (q(c), e))).unwrap()
            })
            .collect();
        PolyVectorField::new(comps).unwrap()
    }

    /// Lorenz '96 limit drift: `-x_{j-2} x_{j-1}` for middle coordinates, `x_1 x_{n-1}` last.
    fn lorenz_limit(n: usize) -> PolyVectorField {
        let mut f = PolyVectorField::zero(n);
        for j in 2..n - 1 {
            f.set_comp(j, Polynomial::var(n, j - 2).mul(&Polynomial::var(n, j - 1)).neg());
        }
        f.set_comp(n - 1, Polynomial::var(n, 0).mul(&Polynomial::var(n, n - 2)));
        f
    }

    #[test]
    fn bracket_with_unit_field() {
        let n = 5;
        let v0 = lorenz_limit(n);
        let b = PolyVectorField::unit(n, 0).lie_bracket(&v0).unwrap();
        let mut want = PolyVectorField::zero(n);
        want.set_comp(2, Polynomial::var(n, 1).neg());
        want.set_comp(4, Polynomial::var(n, 3));
        assert_eq!(b, want);
        let b2 = PolyVectorField::unit(n, 1).lie_bracket(&b).unwrap();
        let mut want = PolyVectorField::zero(n);
        want.set_comp(2, Polynomial::constant(n, q(-1)));
        assert_eq!(b2, want);
        // Full drift: the bracket also picks up the linear damping.
        let full = lorenz(n);
        let b = PolyVectorField::unit(n, 0).lie_bracket(&full).unwrap();
        assert_eq!(b.comp(0).as_constant(), Some(q(-1)));
    }

    #[test]
    fn relative_degree_and_br_agree_with_expansion() {
        let x = PolyVectorField::new(vec![
            Polynomial::from_int_terms(2, &[(1, &[2, 0]), (-1, &[1, 1]), (3, &[0, 1])]),
            Polynomial::from_int_terms(2, &[(2, &[1, 0])]),
        ])
        .unwrap();
        // Along (1, 1) the lambda^2 coefficient of x1^2 - x1 x2 cancels.
        let v = vec![q(1), q(1)];
        let ex = x.lambda_expansion(&v);
        let rd = x.relative_degree(&v);
        assert_eq!(rd.degree as usize, ex.iter().rposition(|c| !c.is_zero()).unwrap());
        assert_eq!(rd.degree, 1);
        assert_eq!(x.br(&v), ex[rd.degree as usize]);
        let v = vec![q(0), parse_rational("1").unwrap()];
        assert_eq!(x.relative_degree(&v).degree, 1);
    }

    #[test]
    fn zero_field_conventions() {
        let z = PolyVectorField::zero(3);
        let v = vec![q(1), q(0), q(0)];
        assert_eq!(z.relative_degree(&v), RelativeDegree { degree: 0, zero_field: true });
        assert!(z.br(&v).is_zero());
    }

    #[test]
    fn triangular_detection() {
        assert!(lorenz(5).layer_order().is_none());
        let k = PolyVectorField::new(vec![Polynomial::zero(2), Polynomial::var(2, 0)]).unwrap();
        assert_eq!(k.layer_order(), Some(vec![0, 1]));
    }

    #[test]
    fn proportionality() {
        let a = lorenz(4);
        let b = a.scale(&q(-3));
        assert_eq!(b.proportional_to(&a), Some(q(-3)));
        assert_eq!(a.proportional_to(&PolyVectorField::unit(4, 0)), None);
    }
}
