//! Property tests for structural invariants.

use std::cmp::Ordering;

use mildlab::charts::make_charts;
use mildlab::diophantine::{degree_bound, farey_interior, hypersurface_cover, RationalPoint, RationalSet};
use mildlab::geometry::fixtures;
use mildlab::jets::{jet_eval_expr, Exponent, ExprNode};
use mildlab::mildness::{mild_compose, mild_product, mild_sum, MildParams, Order};
use mildlab::multiindex::{indices_up_to, lex_precedes, MultiIndex};
use mildlab::random::ExprGen;
use mildlab::substitution::{ChartMap, Substitution};
use num_integer::Integer;
use num_rational::Rational64;
use proptest::prelude::*;

fn index(dim: usize) -> impl Strategy<Value = MultiIndex> {
    prop::collection::vec(0u32..5, dim).prop_map(MultiIndex::new)
}

fn binom(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Euler's totient by trial division.
fn totient(n: u64) -> u64 {
    (1..=n).filter(|k| k.gcd(&n) == 1).count() as u64
}

fn params() -> impl Strategy<Value = MildParams> {
    (0.1f64..5.0, 0.1f64..5.0, 0.0f64..2.0)
        .prop_map(|(a, b, c)| MildParams::new(a, b, c, Order::Finite(6)).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn graded_order_is_strict_and_total(a in index(3), b in index(3)) {
        let ab = lex_precedes(&a, &b).unwrap();
        let ba = lex_precedes(&b, &a).unwrap();
        prop_assert!(!(ab && ba));
        prop_assert_eq!(ab || ba, a != b);
        if a.total() < b.total() {
            prop_assert!(ab);
        }
        prop_assert_eq!(a.graded_cmp(&b) == Ordering::Less, ab);
    }

    #[test]
    fn index_listing_is_sorted_and_complete(dim in 1usize..4, order in 0u32..6) {
        let all = indices_up_to(dim, order);
        prop_assert!(all.windows(2).all(|w| lex_precedes(&w[0], &w[1]).unwrap()));
        let expected = binom(dim as u32 + order, order).round() as usize;
        prop_assert_eq!(all.len(), expected);
    }

    /// Jet products obey the Leibniz rule computed from the factors' tables.
    #[test]
    fn jet_product_obeys_leibniz(seed in any::<u64>()) {
        let mut g = ExprGen::new(seed);
        let x = g.point(2);
        let f = g.bounded(2, 3, std::slice::from_ref(&x));
        let h = g.bounded(2, 3, std::slice::from_ref(&x));
        let order = 4;
        let jf = jet_eval_expr(&f, &x, order).unwrap();
        let jh = jet_eval_expr(&h, &x, order).unwrap();
        let prod = jf.mul(&jh).unwrap();
        for nu in prod.layout().indices() {
            let mut s = 0.0;
            for mu in indices_up_to(2, nu.total()).iter().filter(|m| MultiIndex::le(m, nu)) {
                let rest = nu.checked_sub(mu).unwrap();
                let c = binom(nu.get(0), mu.get(0)) * binom(nu.get(1), mu.get(1));
                s += c * jf.derivative(mu).unwrap() * jh.derivative(&rest).unwrap();
            }
            let d = prod.derivative(nu).unwrap();
            prop_assert!((s - d).abs() <= 1e-9 * s.abs().max(d.abs()).max(1.0), "{:?}: {} vs {}", nu, s, d);
        }
    }

    /// Sums and products of jets match the pointwise operations at order 0.
    #[test]
    fn jet_algebra_values(seed in any::<u64>()) {
        let mut g = ExprGen::new(seed);
        let x = g.point(3);
        let f = g.bounded(3, 3, std::slice::from_ref(&x));
        let h = g.bounded(3, 3, std::slice::from_ref(&x));
        let sum = ExprNode::Add(vec![f.clone(), h.clone()]);
        let a = jet_eval_expr(&sum, &x, 3).unwrap();
        let b = jet_eval_expr(&f, &x, 3).unwrap().add(&jet_eval_expr(&h, &x, 3).unwrap()).unwrap();
        for (u, v) in a.coeffs().iter().zip(b.coeffs()) {
            prop_assert!((u - v).abs() <= 1e-12 * u.abs().max(1.0));
        }
    }

    #[test]
    fn exponent_serde_round_trip(p in -50i64..50, q in 1i64..20) {
        let e = Exponent::ratio(p, q);
        let back: Exponent = serde_json::from_str(&serde_json::to_string(&e).unwrap()).unwrap();
        prop_assert_eq!(back.value(), e.value());
        prop_assert_eq!(back.exact(), e.exact());
    }

    /// Every point of the cube lies in exactly one half-open chart, and the
    /// listing is row-major.
    #[test]
    fn charts_tile_the_cube(dim in 1usize..4, n in 1u64..6, pt in prop::collection::vec(0.0f64..1.0, 3)) {
        let charts = make_charts(dim, n).unwrap();
        prop_assert_eq!(charts.len() as u64, n.pow(dim as u32));
        let x = &pt[..dim];
        let inside = charts
            .iter()
            .filter(|c| c.offset.iter().zip(x).all(|(o, v)| *v >= *o && *v < o + c.scale))
            .count();
        prop_assert_eq!(inside, 1);
        prop_assert!(charts.iter().any(|c| c.covers(x)));
        prop_assert!(charts.windows(2).all(|w| w[0].index < w[1].index));
    }

    #[test]
    fn farey_count_is_totient_sum(h in 1u64..60) {
        let expected: u64 = (2..=h).map(totient).sum();
        let f = farey_interior(h);
        prop_assert_eq!(f.len() as u64, expected);
        prop_assert!(f.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn degree_bound_is_monotone(h in 3u64..100_000, dh in 1u64..100_000) {
        prop_assert!(degree_bound(h, 1, 2).unwrap() <= degree_bound(h + dh, 1, 2).unwrap());
        prop_assert!(degree_bound(h, 1, 3).unwrap() <= degree_bound(h, 1, 2).unwrap());
    }

    /// A cover of arbitrary points in the square vanishes on every point.
    #[test]
    fn cover_is_sound(raw in prop::collection::vec((1i64..30, 1i64..30, 1i64..30, 1i64..30), 1..25), d in 1u32..4) {
        let pts: Vec<RationalPoint> = raw
            .into_iter()
            .filter_map(|(a, b, c, e)| {
                let x = Rational64::new(a.min(b), a.max(b) + 1);
                let y = Rational64::new(c.min(e), c.max(e) + 1);
                RationalPoint::new(vec![x, y]).ok()
            })
            .collect();
        let cover = hypersurface_cover(&pts, d, 2).unwrap();
        prop_assert!(cover.verify(&pts).is_ok());
        prop_assert_eq!(cover.assignment.len(), pts.len());
    }

    /// φ^r maps the open cube into the cusp cell.
    #[test]
    fn phi_r_lands_in_cell(r in 1u32..7, x in 0.001f64..0.999, y in 0.001f64..0.999) {
        let cell = fixtures::cusp().resolve(&[]).unwrap().cells[0].clone();
        let sub = Substitution::phi_r(cell.clone(), r).unwrap();
        match sub.jets(&[x, y], 0) {
            Ok(j) => {
                let v: Vec<f64> = j.iter().map(|c| c.value()).collect();
                prop_assert!(cell.contains(&v), "{:?}", v);
            }
            Err(mildlab::Error::Excluded(_)) => {}
            Err(e) => prop_assert!(false, "{}", e),
        }
    }

    /// The closure rules never shrink constants.
    #[test]
    fn closure_rules_are_monotone(f in params(), g in params(), m in 1usize..4) {
        let s = mild_sum(&f, &g).unwrap();
        let p = mild_product(&f, &g).unwrap();
        let c = mild_compose(&f, &g, m).unwrap();
        prop_assert!(s.a >= f.a.max(g.a) && s.b >= f.b.max(g.b));
        prop_assert!(p.a >= f.a.max(g.a));
        prop_assert!(c.b == f.b && c.a >= g.a);
    }

    #[test]
    fn parabola_points_are_on_the_curve(h in 1u64..80) {
        let set = RationalSet::parabola();
        for p in set.enumerate_points(h).unwrap() {
            prop_assert_eq!(p.0[1], p.0[0] * p.0[0]);
            prop_assert!(p.height() <= h as i64);
        }
    }
}
