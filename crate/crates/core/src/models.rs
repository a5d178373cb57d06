//! Builders for the standard systems used in tests, examples and the guide.

use num_traits::One;

use crate::poly::{Coeff, Exponent, PolyVectorField, Polynomial};
use crate::system::SdeSystem;

fn int(i: i64) -> Coeff {
    Coeff::from_integer(i.into())
}

fn ratio(a: i64, b: i64) -> Coeff {
    Coeff::new(a.into(), b.into())
}

fn mono(n: usize, c: Coeff, pairs: &[(usize, u32)]) -> Polynomial {
    let mut e = Exponent::zero(n);
    for &(i, k) in pairs {
        e.0[i] += k;
    }
    Polynomial::monomial(c, e)
}

/// Lorenz '96 on `n >= 4` coordinates with periodic indices:
/// `dx_i = ((x_{i+1} - x_{i-2}) x_{i-1} - x_i) dt + sigma_i dB_i`.
pub fn lorenz96(n: usize, sigma: &[f64]) -> SdeSystem {
    assert!(n >= 4);
    let idx = |k: isize| k.rem_euclid(n as isize) as usize;
    let comps = (0..n as isize)
        .map(|i| {
            mono(n, int(1), &[(idx(i + 1), 1), (idx(i - 1), 1)])
                .add(&mono(n, int(-1), &[(idx(i - 2), 1), (idx(i - 1), 1)]))
                .add(&mono(n, int(-1), &[(idx(i), 1)]))
        })
        .collect();
    let mut s = vec![0.0; n];
    s[..sigma.len()].copy_from_slice(sigma);
    SdeSystem::new(PolyVectorField::new(comps).unwrap(), s).unwrap()
}

/// Second-order Langevin dynamics in `(q, p) in R^k x R^k` with unit friction
/// and noise `sqrt 2` on momenta. `potential` is a polynomial in `k` variables.
pub fn langevin(potential: &Polynomial) -> SdeSystem {
    let k = potential.nvars();
    let n = 2 * k;
    // Lift a polynomial in q to the (q, p) coordinates.
    let lift = |p: &Polynomial| {
        let subs: Vec<Polynomial> = (0..k).map(|i| Polynomial::var(n, i)).collect();
        if p.is_zero() {
            Polynomial::zero(n)
        } else {
            p.compose(&subs).unwrap()
        }
    };
    let mut comps = Vec::with_capacity(n);
    for j in 0..k {
        comps.push(Polynomial::var(n, k + j));
    }
    for j in 0..k {
        let grad = lift(&potential.partial(j));
        comps.push(Polynomial::var(n, k + j).add(&grad).neg());
    }
    let mut sigma = vec![0.0; n];
    for s in sigma.iter_mut().skip(k) {
        *s = std::f64::consts::SQRT_2;
    }
    SdeSystem::new(PolyVectorField::new(comps).unwrap(), sigma).unwrap()
}

/// `H(q, p) = |p|^2 / 2 + U(q)` in the coordinates of [`langevin`].
pub fn hamiltonian(potential: &Polynomial) -> Polynomial {
    let k = potential.nvars();
    let n = 2 * k;
    let subs: Vec<Polynomial> = (0..k).map(|i| Polynomial::var(n, i)).collect();
    let mut h = if potential.is_zero() { Polynomial::zero(n) } else { potential.compose(&subs).unwrap() };
    for j in 0..k {
        h = h.add(&mono(n, ratio(1, 2), &[(k + j, 2)]));
    }
    h
}

/// `U(q) = sum_i q_i^4 / 4 + q_i^2 / 2`.
pub fn quartic_potential(k: usize) -> Polynomial {
    let mut u = Polynomial::zero(k);
    for i in 0..k {
        u = u.add(&mono(k, ratio(1, 4), &[(i, 4)])).add(&mono(k, ratio(1, 2), &[(i, 2)]));
    }
    u
}

/// Iterated Kolmogorov chain: `dx_1 = dB`, `dx_j = x_{j-1} dt`.
pub fn iterated_kolmogorov(n: usize) -> SdeSystem {
    let comps = (0..n)
        .map(|j| if j == 0 { Polynomial::zero(n) } else { Polynomial::var(n, j - 1) })
        .collect();
    let mut sigma = vec![0.0; n];
    sigma[0] = 1.0;
    SdeSystem::new(PolyVectorField::new(comps).unwrap(), sigma).unwrap()
}

/// The two-dimensional chain `dx_1 = dB`, `dx_2 = x_1 dt`.
pub fn kolmogorov_pair() -> SdeSystem {
    iterated_kolmogorov(2)
}

/// Kolmogorov pair with damping on the forced coordinate, so that the
/// remainder does not vanish: `dx_1 = -x_1 dt + dB`, `dx_2 = x_1 dt`.
pub fn damped_kolmogorov_pair() -> SdeSystem {
    let n = 2;
    let comps = vec![Polynomial::var(n, 0).neg(), Polynomial::var(n, 0)];
    SdeSystem::new(PolyVectorField::new(comps).unwrap(), vec![1.0, 0.0]).unwrap()
}

/// System in `R^4` whose two limit drifts differ in the last component.
pub fn rdr() -> SdeSystem {
    let n = 4;
    let comps = vec![
        Polynomial::zero(n),
        Polynomial::zero(n),
        mono(n, int(1), &[(0, 1), (1, 1)]),
        mono(n, int(1), &[(0, 1), (2, 2)]).add(&mono(n, int(1), &[(2, 1), (0, 5)])),
    ];
    SdeSystem::new(PolyVectorField::new(comps).unwrap(), vec![1.0, 1.0, 0.0, 0.0]).unwrap()
}

/// Noise-propagating but not hypoelliptic: `dx_1 = dB`, `dx_2 = dx_3 = x_1 dt`.
pub fn npnh() -> SdeSystem {
    let n = 3;
    let comps = vec![Polynomial::zero(n), Polynomial::var(n, 0), Polynomial::var(n, 0)];
    SdeSystem::new(PolyVectorField::new(comps).unwrap(), vec![1.0, 0.0, 0.0]).unwrap()
}

/// Brownian motion in `R^n`.
pub fn brownian(n: usize) -> SdeSystem {
    SdeSystem::new(PolyVectorField::zero(n), vec![1.0; n]).unwrap()
}

/// `V0 = (x^2 - a y^2 + b y, 2x)` with noise on `y`.
pub fn quadratic_example(a: i64, b: i64) -> SdeSystem {
    let n = 2;
    let c0 = mono(n, int(1), &[(0, 2)])
        .add(&mono(n, int(-a), &[(1, 2)]))
        .add(&mono(n, int(b), &[(1, 1)]));
    let c1 = mono(n, int(2), &[(0, 1)]);
    SdeSystem::new(PolyVectorField::new(vec![c0, c1]).unwrap(), vec![0.0, 1.0]).unwrap()
}

/// Complex polynomial as a pair of real polynomials.
#[derive(Clone)]
struct CPoly {
    re: Polynomial,
    im: Polynomial,
}

impl CPoly {
    fn zero(n: usize) -> Self {
        CPoly { re: Polynomial::zero(n), im: Polynomial::zero(n) }
    }
    fn add(&self, o: &Self) -> Self {
        CPoly { re: self.re.add(&o.re), im: self.im.add(&o.im) }
    }
    fn mul(&self, o: &Self) -> Self {
        CPoly {
            re: self.re.mul(&o.re).sub(&self.im.mul(&o.im)),
            im: self.re.mul(&o.im).add(&self.im.mul(&o.re)),
        }
    }
    fn conj(&self) -> Self {
        CPoly { re: self.re.clone(), im: self.im.neg() }
    }
    fn scale(&self, c: &Coeff) -> Self {
        CPoly { re: self.re.scale(c), im: self.im.scale(c) }
    }
    fn times_i(&self) -> Self {
        CPoly { re: self.im.neg(), im: self.re.clone() }
    }
}

/// Realified Sabra shell model with `shells` complex modes and parameter
/// `delta = delta_num / delta_den`. Coordinates are `(Re u_1, Im u_1, Re u_2, ...)`;
/// noise acts on both parts of the first two shells.
pub fn sabra(shells: usize, delta_num: i64, delta_den: i64) -> SdeSystem {
    let n = 2 * shells;
    let delta = ratio(delta_num, delta_den);
    let u = |m: isize| -> CPoly {
        if m < 1 || m > shells as isize {
            CPoly::zero(n)
        } else {
            let k = (m as usize - 1) * 2;
            CPoly { re: Polynomial::var(n, k), im: Polynomial::var(n, k + 1) }
        }
    };
    let mut comps = Vec::with_capacity(n);
    for m in 1..=shells as isize {
        let t1 = u(m + 1).conj().mul(&u(m + 2));
        let t2 = u(m - 1).conj().mul(&u(m + 1)).scale(&-delta.clone());
        let t3 = u(m - 2)
            .mul(&u(m - 1))
            .scale(&(-(delta.clone() - Coeff::one()) / int(4)));
        let inner = t1.add(&t2).add(&t3);
        let two_m = int(1i64 << m);
        let lin = u(m).scale(&-(delta.clone() * int(1i64 << (2 * m))));
        let du = inner.times_i().scale(&two_m).add(&lin);
        comps.push(du.re);
        comps.push(du.im);
    }
    let mut sigma = vec![0.0; n];
    for s in sigma.iter_mut().take(4.min(n)) {
        *s = 1.0;
    }
    SdeSystem::new(PolyVectorField::new(comps).unwrap(), sigma).unwrap()
}
