use proptest::prelude::*;

use smalltime::numerics::{inverse_scale_map, scale_map, PiecewiseLinearControl};
use smalltime::poly::{Polynomial, PolyVectorField};
use smalltime::propagation::{dist_scalings, lil_scalings, remainder};
use smalltime::scaling::Scaling;
use smalltime::system::SdeSystem;

fn poly(n: usize) -> impl Strategy<Value = Polynomial> {
    prop::collection::vec((-3i64..=3, prop::collection::vec(0u32..=2, n)), 0..4).prop_map(move |terms| {
        let t: Vec<(i64, &[u32])> = terms.iter().map(|(c, e)| (*c, e.as_slice())).collect();
        Polynomial::from_int_terms(n, &t)
    })
}

fn field(n: usize) -> impl Strategy<Value = PolyVectorField> {
    prop::collection::vec(poly(n), n).prop_map(|c| PolyVectorField::new(c).unwrap())
}

fn system() -> impl Strategy<Value = SdeSystem> {
    (2usize..=4)
        .prop_flat_map(|n| (field(n), prop::collection::vec(prop::bool::ANY, n), Just(n)))
        .prop_map(|(f, noisy, _)| {
            let mut sigma: Vec<f64> = noisy.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
            sigma[0] = 1.0;
            SdeSystem::new(f, sigma).unwrap()
        })
}

fn scaling() -> impl Strategy<Value = Scaling> {
    prop_oneof![9 => (0i64..8, 0i64..8).prop_map(|(a, b)| Scaling::half(a, b)), 1 => Just(Scaling::Infinity)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn scaling_order_is_total_and_transitive(a in scaling(), b in scaling(), c in scaling()) {
        prop_assert!(a <= b || b <= a);
        if a <= b && b <= c {
            prop_assert!(a <= c);
        }
        prop_assert_eq!(a.proj1() <= b.proj1(), a.proj1_num().unwrap_or(i64::MAX) <= b.proj1_num().unwrap_or(i64::MAX));
    }

    #[test]
    fn bracket_is_antisymmetric_and_jacobi(x in field(3), y in field(3), z in field(3)) {
        let xy = x.lie_bracket(&y).unwrap();
        let yx = y.lie_bracket(&x).unwrap();
        prop_assert!(xy.add(&yx).is_zero());
        let a = x.lie_bracket(&y.lie_bracket(&z).unwrap()).unwrap();
        let b = y.lie_bracket(&z.lie_bracket(&x).unwrap()).unwrap();
        let c = z.lie_bracket(&x.lie_bracket(&y).unwrap()).unwrap();
        prop_assert!(a.add(&b).add(&c).is_zero());
    }

    #[test]
    fn propagation_invariants(sys in system()) {
        let (l, d) = (lil_scalings(&sys), dist_scalings(&sys));
        prop_assert_eq!(l.is_propagating(), d.is_propagating());
        prop_assert_eq!(&l.layers[0], &sys.noisy());
        let mut seen = vec![false; sys.dim()];
        for layer in &l.layers {
            for &j in layer {
                prop_assert!(!seen[j]);
                seen[j] = true;
            }
        }
        if l.is_propagating() {
            prop_assert!(seen.iter().all(|s| *s));
            let layer = l.layer_of();
            for j in 0..sys.dim() {
                prop_assert_eq!(l.scalings[j].proj1(), d.scalings[j]);
                for m in 0..sys.dim() {
                    if layer[m] < layer[j] {
                        prop_assert!(l.scalings[m] < l.scalings[j]);
                    }
                }
                let pd: Vec<_> = d.limit_drift.comps()[j].terms().collect();
                for t in l.limit_drift.comps()[j].terms() {
                    prop_assert!(pd.contains(&t));
                }
            }
            // Power-scaling remainders carry a strictly positive power of eps.
            let rem = remainder(&sys, &d).unwrap();
            for term in rem.comps.iter().flatten() {
                prop_assert!(term.eps_exponent.num1 > 0, "{:?}", term);
            }
        }
    }

    #[test]
    fn system_json_round_trip(sys in system()) {
        let s = serde_json::to_string(&sys.to_spec(None)).unwrap();
        prop_assert_eq!(SdeSystem::from_json(&s).unwrap(), sys);
    }

    #[test]
    fn shift_and_back(sys in system(), s in prop::collection::vec(-8i32..=8, 4)) {
        let n = sys.dim();
        let fwd: Vec<f64> = s[..n].iter().map(|&k| k as f64 / 4.0).collect();
        let back: Vec<f64> = fwd.iter().map(|v| -v).collect();
        prop_assert_eq!(sys.shift(&fwd).unwrap().shift(&back).unwrap(), sys);
    }

    #[test]
    fn scale_map_inverts(x in prop::collection::vec(-2.0f64..2.0, 3), eps in 1e-4f64..0.3) {
        let b = [Scaling::half(1, 1), Scaling::half(3, 1), Scaling::half(4, 0)];
        let y = scale_map(&x, &b, eps).unwrap();
        let back = inverse_scale_map(&y, &b, eps).unwrap();
        for (u, v) in x.iter().zip(&back) {
            prop_assert!((u - v).abs() <= 1e-9 * (1.0 + u.abs()));
        }
    }

    #[test]
    fn control_energy_is_quadratic(slopes in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 2), 1..5), c in -3.0f64..3.0) {
        let k = slopes.len();
        let times: Vec<f64> = (0..=k).map(|i| i as f64 / k as f64).collect();
        let f = PiecewiseLinearControl::new(times, slopes).unwrap();
        let e = f.energy();
        prop_assert!(e >= 0.0);
        prop_assert!((f.scaled(c).energy() - c * c * e).abs() <= 1e-9 * (1.0 + e));
    }
}
