//! Rank of the bracket list generated by `Z_0 = Q` and the noise fields
//! `Z_l = sigma^l e_l`, evaluated at a point.

use std::collections::HashSet;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::RationalBasis;
use crate::poly::{rational_from_f64, Coeff, PolyVectorField};

/// Stop generating once this many distinct brackets are alive.
const MAX_FIELDS: usize = 20_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub rank: usize,
    pub spanning: bool,
    /// Nesting depth at which generation stopped.
    pub depth_reached: usize,
    pub fields: usize,
    pub exact: bool,
    /// Brackets realising the rank, as printed fields.
    pub witnesses: Vec<String>,
}

fn key(v: &PolyVectorField) -> String {
    // Normalise so the first nonzero coefficient is one; brackets equal up to
    // scaling carry the same information.
    for c in v.comps() {
        if let Some((_, lead)) = c.terms().next() {
            return v.scale(&(Coeff::from_integer(1.into()) / lead.clone())).to_string();
        }
    }
    String::new()
}

/// Left-nested brackets `[..[[Z_a, Z_b], Z_c]..]`, level by level, each
/// handed to `visit`; generation stops when `visit` returns `true`.
fn generate(
    q: &PolyVectorField,
    sigma: &[Coeff],
    depth: usize,
    mut visit: impl FnMut(&PolyVectorField) -> bool,
) -> Result<(usize, usize)> {
    let n = q.dim();
    let mut gens = vec![q.clone()];
    let mut level = Vec::new();
    for (l, s) in sigma.iter().enumerate() {
        if s.clone() != Coeff::from_integer(0.into()) {
            let z = PolyVectorField::unit(n, l).scale(s);
            gens.push(z.clone());
            level.push(z);
        }
    }
    let mut seen: HashSet<String> = HashSet::new();
    let mut count = 0;
    for z in &level {
        seen.insert(key(z));
        count += 1;
        if visit(z) {
            return Ok((1, count));
        }
    }
    for d in 2..=depth {
        let mut next = Vec::new();
        for b in &level {
            for g in &gens {
                let br = b.lie_bracket(g)?;
                if br.is_zero() || !seen.insert(key(&br)) {
                    continue;
                }
                count += 1;
                if visit(&br) {
                    return Ok((d, count));
                }
                next.push(br);
            }
        }
        if next.is_empty() || count > MAX_FIELDS {
            return Ok((d, count));
        }
        level = next;
    }
    Ok((depth, count))
}

fn exact_sigma(sigma: &[f64]) -> Result<Vec<Coeff>> {
    sigma.iter().map(|&s| rational_from_f64(s)).collect()
}

/// Exact rank at `x` by rational elimination.
pub fn hormander_rank(q: &PolyVectorField, sigma: &[f64], x: &[f64], depth: usize) -> Result<RankReport> {
    let n = q.dim();
    let xs: Vec<Coeff> = x.iter().map(|&v| rational_from_f64(v)).collect::<Result<_>>()?;
    let mut basis = RationalBasis::new();
    let mut witnesses = Vec::new();
    let (depth_reached, fields) = generate(q, &exact_sigma(sigma)?, depth.max(1), |v| {
        if basis.insert(&v.eval_exact(&xs)) {
            witnesses.push(v.to_string());
        }
        basis.rank() == n
    })?;
    let rank = basis.rank();
    Ok(RankReport { rank, spanning: rank == n, depth_reached, fields, exact: true, witnesses })
}

/// Same list, rank by SVD with singular values above `tol` times the largest.
pub fn hormander_rank_svd(q: &PolyVectorField, sigma: &[f64], x: &[f64], depth: usize, tol: f64) -> Result<RankReport> {
    let n = q.dim();
    let mut cols: Vec<Vec<f64>> = Vec::new();
    let (depth_reached, fields) = generate(q, &exact_sigma(sigma)?, depth.max(1), |v| {
        cols.push(v.eval(x));
        false
    })?;
    let rank = if cols.is_empty() {
        0
    } else {
        let m = DMatrix::from_fn(n, cols.len(), |i, j| cols[j][i]);
        let sv = m.singular_values();
        let top = sv.iter().cloned().fold(0.0, f64::max);
        sv.iter().filter(|&&s| s > tol * top.max(f64::MIN_POSITIVE)).count()
    };
    Ok(RankReport { rank, spanning: rank == n, depth_reached, fields, exact: false, witnesses: Vec::new() })
}
