//! Scaling exponents.
//!
//! A scaling is either a pair `(a1, a2)` of half-integers, standing for the
//! function `eps^a1 * (log log 1/eps)^a2`, or the formal value `Infinity`.
//! Pairs are stored by their numerators over 2, so `(3/2, 1/2)` is
//! `ScalingPair { num1: 3, num2: 1 }`.
//!
//! The order puts faster decay later: `a <= b` iff `a1 < b1`, or `a1 == b1`
//! and `a2 >= b2`.
//!
//! ```
//! use smalltime::scaling::Scaling;
//! let a = Scaling::half(1, 1);
//! let b = Scaling::half(1, 0);
//! assert!(a < b);
//! assert_eq!((a + Scaling::ONE_ZERO).to_string(), "(3/2, 1/2)");
//! ```

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ScalingPair {
    pub num1: i64,
    pub num2: i64,
}

impl ScalingPair {
    pub const fn new(num1: i64, num2: i64) -> Self {
        ScalingPair { num1, num2 }
    }

    pub fn is_nonneg(&self) -> bool {
        self.num1 >= 0 && self.num2 >= 0
    }

    pub fn a1(&self) -> f64 {
        self.num1 as f64 / 2.0
    }

    pub fn a2(&self) -> f64 {
        self.num2 as f64 / 2.0
    }

    /// `eps^a1 (log log 1/eps)^a2`.
    pub fn eval(&self, eps: f64) -> Result<f64> {
        check_eps(eps)?;
        let ll = (-eps.ln()).ln();
        Ok(eps.powf(self.a1()) * ll.powf(self.a2()))
    }
}

impl Ord for ScalingPair {
    fn cmp(&self, other: &Self) -> Ordering {
        self.num1
            .cmp(&other.num1)
            .then_with(|| other.num2.cmp(&self.num2))
    }
}

impl PartialOrd for ScalingPair {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for ScalingPair {
    type Output = ScalingPair;
    fn add(self, o: ScalingPair) -> ScalingPair {
        ScalingPair::new(self.num1 + o.num1, self.num2 + o.num2)
    }
}

impl std::ops::Sub for ScalingPair {
    type Output = ScalingPair;
    fn sub(self, o: ScalingPair) -> ScalingPair {
        ScalingPair::new(self.num1 - o.num1, self.num2 - o.num2)
    }
}

pub(crate) fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < (-1.0f64).exp() {
        Ok(())
    } else {
        Err(Error::EpsilonDomain(eps))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scaling {
    Finite(ScalingPair),
    Infinity,
}

impl Scaling {
    pub const ZERO: Scaling = Scaling::Finite(ScalingPair::new(0, 0));
    pub const ONE_ZERO: Scaling = Scaling::Finite(ScalingPair::new(2, 0));
    /// `(1/2, 1/2)`, the scaling of a directly forced coordinate.
    pub const NOISE_LIL: Scaling = Scaling::Finite(ScalingPair::new(1, 1));
    /// `(1/2, 0)`.
    pub const NOISE_DIST: Scaling = Scaling::Finite(ScalingPair::new(1, 0));

    /// Pair given by numerators over 2.
    pub const fn half(num1: i64, num2: i64) -> Scaling {
        Scaling::Finite(ScalingPair::new(num1, num2))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Scaling::Infinity)
    }

    pub fn finite(&self) -> Option<ScalingPair> {
        match self {
            Scaling::Finite(p) => Some(*p),
            Scaling::Infinity => None,
        }
    }

    /// First component numerator (over 2), `None` for infinity.
    pub fn proj1_num(&self) -> Option<i64> {
        self.finite().map(|p| p.num1)
    }

    /// `(a1, 0)`.
    pub fn proj1(&self) -> Scaling {
        match self {
            Scaling::Finite(p) => Scaling::half(p.num1, 0),
            Scaling::Infinity => Scaling::Infinity,
        }
    }

    /// `l * a` with `0 * anything = (0, 0)`.
    pub fn scale(&self, l: u32) -> Scaling {
        if l == 0 {
            return Scaling::ZERO;
        }
        match self {
            Scaling::Finite(p) => Scaling::half(p.num1 * l as i64, p.num2 * l as i64),
            Scaling::Infinity => Scaling::Infinity,
        }
    }

    pub fn eval(&self, eps: f64) -> Result<f64> {
        match self {
            Scaling::Finite(p) => p.eval(eps),
            Scaling::Infinity => Err(Error::Invalid("cannot evaluate eps^infinity".into())),
        }
    }
}

impl Ord for Scaling {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Scaling::Infinity, Scaling::Infinity) => Ordering::Equal,
            (Scaling::Infinity, _) => Ordering::Greater,
            (_, Scaling::Infinity) => Ordering::Less,
            (Scaling::Finite(a), Scaling::Finite(b)) => a.cmp(b),
        }
    }
}

impl PartialOrd for Scaling {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for Scaling {
    type Output = Scaling;
    fn add(self, o: Scaling) -> Scaling {
        match (self, o) {
            (Scaling::Finite(a), Scaling::Finite(b)) => Scaling::Finite(a + b),
            _ => Scaling::Infinity,
        }
    }
}

impl From<ScalingPair> for Scaling {
    fn from(p: ScalingPair) -> Self {
        Scaling::Finite(p)
    }
}

fn fmt_half(n: i64) -> String {
    if n % 2 == 0 {
        format!("{}", n / 2)
    } else {
        format!("{}/2", n)
    }
}

impl fmt::Display for ScalingPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", fmt_half(self.num1), fmt_half(self.num2))
    }
}

impl fmt::Display for Scaling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scaling::Finite(p) => p.fmt(f),
            Scaling::Infinity => write!(f, "inf"),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ScalingRepr {
    Finite { num1: i64, num2: i64 },
    Inf { inf: bool },
}

impl Serialize for Scaling {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Scaling::Finite(p) => ScalingRepr::Finite { num1: p.num1, num2: p.num2 },
            Scaling::Infinity => ScalingRepr::Inf { inf: true },
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Scaling {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match ScalingRepr::deserialize(d)? {
            ScalingRepr::Finite { num1, num2 } => Ok(Scaling::half(num1, num2)),
            ScalingRepr::Inf { inf: true } => Ok(Scaling::Infinity),
            ScalingRepr::Inf { inf: false } => {
                Err(serde::de::Error::custom("\"inf\" must be true"))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_matches_definition() {
        let a = Scaling::half(1, 1);
        assert!(a < Scaling::half(1, 0));
        assert!(a < Scaling::half(3, 5));
        assert!(Scaling::half(1, 3) < a);
        assert!(a < Scaling::Infinity);
        assert_eq!(Scaling::Infinity.cmp(&Scaling::Infinity), Ordering::Equal);
    }

    #[test]
    fn absorbing_and_zero() {
        assert_eq!(Scaling::Infinity + Scaling::half(1, 1), Scaling::Infinity);
        assert_eq!(Scaling::Infinity.scale(0), Scaling::ZERO);
        assert_eq!(Scaling::Infinity.scale(3), Scaling::Infinity);
        assert_eq!(Scaling::half(3, 1).scale(2), Scaling::half(6, 2));
    }

    #[test]
    fn eval_domain() {
        assert!(Scaling::half(1, 1).eval(0.5).is_err());
        assert!(Scaling::half(1, 1).eval(0.0).is_err());
        let e = 1e-4f64;
        let v = Scaling::half(1, 1).eval(e).unwrap();
        let want = e.sqrt() * (-e.ln()).ln().sqrt();
        assert!((v - want).abs() < 1e-15);
        assert!(Scaling::half(0, -2).eval(e).unwrap() < 1.0);
    }

    #[test]
    fn json_form() {
        let s = serde_json::to_string(&Scaling::half(3, 1)).unwrap();
        assert_eq!(s, r#"{"num1":3,"num2":1}"#);
        assert_eq!(serde_json::to_string(&Scaling::Infinity).unwrap(), r#"{"inf":true}"#);
        let back: Scaling = serde_json::from_str(r#"{"inf":true}"#).unwrap();
        assert_eq!(back, Scaling::Infinity);
    }

    #[test]
    fn display() {
        assert_eq!(Scaling::half(4, 2).to_string(), "(2, 1)");
        assert_eq!(Scaling::half(7, 3).to_string(), "(7/2, 3/2)");
    }
}
