//! Exact rational elimination and small float helpers.

use nalgebra::DMatrix;
use num_traits::{One, Zero};

use crate::poly::Coeff;

/// Row-echelon basis that grows one vector at a time.
#[derive(Clone, Debug, Default)]
pub struct RationalBasis {
    rows: Vec<(usize, Vec<Coeff>)>,
}

impl RationalBasis {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, v: &[Coeff]) -> Vec<Coeff> {
        let mut v = v.to_vec();
        for (p, r) in &self.rows {
            if v[*p].is_zero() {
                continue;
            }
            let f = v[*p].clone() / r[*p].clone();
            for (a, b) in v.iter_mut().zip(r) {
                if !b.is_zero() {
                    *a -= f.clone() * b;
                }
            }
        }
        v
    }

    /// True if `v` is outside the current span; it is then added.
    pub fn insert(&mut self, v: &[Coeff]) -> bool {
        let r = self.reduce(v);
        match r.iter().position(|c| !c.is_zero()) {
            Some(p) => {
                self.rows.push((p, r));
                true
            }
            None => false,
        }
    }

    pub fn contains(&self, v: &[Coeff]) -> bool {
        self.reduce(v).iter().all(|c| c.is_zero())
    }
}

pub fn rational_rank(vs: &[Vec<Coeff>]) -> usize {
    let mut b = RationalBasis::new();
    for v in vs {
        b.insert(v);
    }
    b.rank()
}

/// Determinant of a square matrix given by rows.
pub fn rational_det(m: &[Vec<Coeff>]) -> Coeff {
    let n = m.len();
    let mut a: Vec<Vec<Coeff>> = m.to_vec();
    let mut det = Coeff::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !a[r][c].is_zero()) else {
            return Coeff::zero();
        };
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        let piv = a[c][c].clone();
        det *= piv.clone();
        for r in (c + 1)..n {
            if a[r][c].is_zero() {
                continue;
            }
            let f = a[r][c].clone() / piv.clone();
            for k in c..n {
                let sub = f.clone() * a[c][k].clone();
                a[r][k] -= sub;
            }
        }
    }
    det
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let sym = 0.5 * (m + m.transpose());
    sym.symmetric_eigen().eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// `min_eig > rel_tol * trace / n`, the invertibility rule used throughout.
pub fn is_invertible_psd(m: &DMatrix<f64>, rel_tol: f64) -> bool {
    let n = m.nrows() as f64;
    let tr = m.trace();
    tr > 0.0 && min_eigenvalue(m) > rel_tol * tr / n
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(i: i64) -> Coeff {
        Coeff::from_integer(i.into())
    }

    #[test]
    fn rank_and_det() {
        let vs = vec![vec![q(1), q(2), q(3)], vec![q(2), q(4), q(6)], vec![q(0), q(1), q(1)]];
        assert_eq!(rational_rank(&vs), 2);
        assert!(rational_det(&vs).is_zero());
        let m = vec![vec![q(0), q(1)], vec![q(1), q(0)]];
        assert_eq!(rational_det(&m), q(-1));
    }
}
