use super::{rational_to_f64, PolyVectorField, Polynomial};

/// Polynomial with `f64` coefficients and sparse exponents, for fast evaluation.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NumPoly {
    terms: Vec<(f64, Vec<(usize, u32)>)>,
}

impl NumPoly {
    pub fn from_terms(terms: Vec<(f64, Vec<u32>)>) -> Self {
        let terms = terms
            .into_iter()
            .filter(|(c, _)| *c != 0.0)
            .map(|(c, e)| {
                let sparse = e.iter().enumerate().filter(|(_, &k)| k > 0).map(|(i, &k)| (i, k)).collect();
                (c, sparse)
            })
            .collect();
        NumPoly { terms }
    }

    pub fn from_poly(p: &Polynomial) -> Self {
        Self::from_terms(p.terms().map(|(e, c)| (rational_to_f64(c), e.0.clone())).collect())
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut s = 0.0;
        for (c, e) in &self.terms {
            let mut t = *c;
            for &(i, k) in e {
                t *= if k == 1 { x[i] } else { x[i].powi(k as i32) };
            }
            s += t;
        }
        s
    }

    pub fn partial(&self, i: usize) -> NumPoly {
        let mut terms = Vec::new();
        for (c, e) in &self.terms {
            if let Some(pos) = e.iter().position(|&(v, _)| v == i) {
                let k = e[pos].1;
                let mut e2 = e.clone();
                if k == 1 {
                    e2.remove(pos);
                } else {
                    e2[pos].1 = k - 1;
                }
                terms.push((c * k as f64, e2));
            }
        }
        NumPoly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Variables appearing with a positive exponent.
    pub fn support(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.terms.iter().flat_map(|(_, e)| e.iter().map(|&(i, _)| i)).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Terms as `(coefficient, sparse exponents)`.
    pub fn terms(&self) -> &[(f64, Vec<(usize, u32)>)] {
        &self.terms
    }
}

/// Vector field with `f64` coefficients and a precomputed Jacobian.
#[derive(Clone, Debug, PartialEq)]
pub struct NumField {
    comps: Vec<NumPoly>,
    jac: Vec<Vec<NumPoly>>,
}

impl NumField {
    pub fn new(comps: Vec<NumPoly>) -> Self {
        let n = comps.len();
        let jac = comps.iter().map(|p| (0..n).map(|k| p.partial(k)).collect()).collect();
        NumField { comps, jac }
    }

    pub fn from_field(f: &PolyVectorField) -> Self {
        Self::new(f.comps().iter().map(NumPoly::from_poly).collect())
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn comp(&self, j: usize) -> &NumPoly {
        &self.comps[j]
    }

    #[inline]
    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        for (o, p) in out.iter_mut().zip(&self.comps) {
            *o = p.eval(x);
        }
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.eval_into(x, &mut out);
        out
    }

    /// Row-major Jacobian at `x`.
    pub fn jacobian_into(&self, x: &[f64], out: &mut [f64]) {
        let n = self.dim();
        for i in 0..n {
            for k in 0..n {
                out[i * n + k] = self.jac[i][k].eval(x);
            }
        }
    }

    /// Coordinate order in which each component depends only on earlier ones.
    pub fn layer_order(&self) -> Option<Vec<usize>> {
        let n = self.dim();
        let deps: Vec<Vec<usize>> = self.comps.iter().map(|p| p.support()).collect();
        let mut placed = vec![false; n];
        let mut order = Vec::with_capacity(n);
        while order.len() < n {
            let before = order.len();
            for j in 0..n {
                if !placed[j] && deps[j].iter().all(|&i| placed[i] && i != j) {
                    placed[j] = true;
                    order.push(j);
                }
            }
            if order.len() == before {
                return None;
            }
        }
        Some(order)
    }

    pub fn jacobian(&self, x: &[f64]) -> nalgebra::DMatrix<f64> {
        let n = self.dim();
        let mut buf = vec![0.0; n * n];
        self.jacobian_into(x, &mut buf);
        nalgebra::DMatrix::from_row_slice(n, n, &buf)
    }
}
