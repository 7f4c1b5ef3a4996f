use mforge_core::checks::finite_difference_errors;
use mforge_core::legendre::{forward, invert};
use mforge_core::polytope::{
    classify_delzant, enumerate_vertices, parse_polytope, recession_cone_is_trivial_fm,
    recession_cone_is_trivial_rays, Facet, LabelledPolytope,
};
use mforge_core::potential::guillemin_sample;
use mforge_core::{Error, InvalidPolytope, Rational, Tolerances};
use num_bigint::BigInt;
use proptest::prelude::*;
use proptest::strategy::ValueTree;

const FIXTURES: [&str; 5] = [
    include_str!("../../../fixtures/cp1.json"),
    include_str!("../../../fixtures/cp2.json"),
    include_str!("../../../fixtures/square.json"),
    include_str!("../../../fixtures/wp12.json"),
    include_str!("../../../fixtures/hirzebruch.json"),
];

fn fixture(i: usize) -> LabelledPolytope {
    parse_polytope(FIXTURES[i]).unwrap()
}

fn combine(p: &LabelledPolytope, weights: &[f64]) -> Vec<f64> {
    let total: f64 = weights.iter().take(p.vertices().len()).sum();
    let mut x = vec![0.0; p.dim()];
    for (v, w) in p.vertices().iter().zip(weights) {
        for (xr, c) in x.iter_mut().zip(v.point_f64()) {
            *xr += w / total * c;
        }
    }
    x
}

fn diameter(p: &LabelledPolytope) -> f64 {
    let (lo, hi) = p.bounding_box();
    lo.iter().zip(&hi).map(|(a, b)| b - a).fold(0.0, f64::max)
}

fn sorted_orders(p: &LabelledPolytope) -> (String, Vec<Option<BigInt>>) {
    let r = classify_delzant(p);
    let mut o = r.vertex_orders;
    o.sort();
    (r.classification.label().into(), o)
}

/// Products of elementary integer matrices; determinant ±1.
fn unimodular(n: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    prop::collection::vec((0..n, 0..n, -2i64..=2, any::<bool>()), 1..6).prop_map(move |ops| {
        let mut a: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
        for (i, j, k, flip) in ops {
            if i != j {
                for c in 0..n {
                    a[i][c] += k * a[j][c];
                }
            }
            if flip {
                a[i].iter_mut().for_each(|v| *v = -*v);
            }
        }
        a
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn finite_differences_match(i in 0usize..5, w in prop::collection::vec(0.01f64..1.0, 4)) {
        let p = fixture(i);
        let x = combine(&p, &w);
        prop_assume!(p.ell(&x).iter().all(|&l| l >= 0.02));
        let (g, h) = finite_difference_errors(&p, &x, 1e-5 * diameter(&p), &Tolerances::default()).unwrap();
        prop_assert!(g <= 1e-6, "gradient {g:e}");
        prop_assert!(h <= 1e-5, "hessian {h:e}");
    }

    #[test]
    fn translation_covariance(
        i in 0usize..5,
        w in prop::collection::vec(0.05f64..1.0, 4),
        t in prop::collection::vec((-7i64..=7, 1i64..=5), 2),
    ) {
        let p = fixture(i);
        let x = combine(&p, &w);
        prop_assume!(p.ell(&x).iter().all(|&l| l >= 0.05 * diameter(&p)));
        let shift: Vec<Rational> = t[..p.dim()].iter().map(|&(a, b)| Rational::new(a.into(), b.into())).collect();
        let q = p.translated(&shift).unwrap();
        let moved: Vec<f64> = x.iter().zip(&t).map(|(a, &(n, d))| a + n as f64 / d as f64).collect();
        let tol = Tolerances::default();
        let (a, b) = (guillemin_sample(&p, &x, &tol).unwrap(), guillemin_sample(&q, &moved, &tol).unwrap());
        for (l1, l2) in a.ell.iter().zip(&b.ell) {
            prop_assert!((l1 - l2).abs() <= 1e-12);
        }
        prop_assert!((a.g - b.g).abs() <= 1e-12);
        prop_assert!((&a.hess_g - &b.hess_g).amax() <= 1e-12);
    }

    #[test]
    fn legendre_round_trip(i in 0usize..5, w in prop::collection::vec(0.01f64..1.0, 4)) {
        let p = fixture(i);
        let x = combine(&p, &w);
        prop_assume!(p.ell(&x).iter().all(|&l| l >= 1e-3));
        let tol = Tolerances::default();
        let s = invert(&p, &forward(&p, &x, &tol).unwrap(), &tol).unwrap();
        prop_assert!(s.converged);
        let err = s.x.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-8, "{err:e}");
    }

    #[test]
    fn facet_order_is_irrelevant(i in 0usize..5, perm in Just((0..4).collect::<Vec<usize>>()).prop_shuffle()) {
        let p = fixture(i);
        let order: Vec<usize> = perm.into_iter().filter(|&j| j < p.facet_count()).collect();
        let facets: Vec<Facet> = order.iter().map(|&j| p.facets()[j].clone()).collect();
        let q = LabelledPolytope::new(p.dim(), facets, None).unwrap();
        let set = |p: &LabelledPolytope| {
            let mut v: Vec<_> = enumerate_vertices(p).into_iter().map(|v| v.point).collect();
            v.sort();
            v
        };
        prop_assert_eq!(set(&p), set(&q));
        prop_assert_eq!(sorted_orders(&p), sorted_orders(&q));
    }

    #[test]
    fn classification_is_gl_n_z_invariant(i in 0usize..5, a2 in unimodular(2), a1 in any::<bool>()) {
        let p = fixture(i);
        let facets: Vec<Facet> = p
            .facets()
            .iter()
            .map(|f| {
                let normal = if p.dim() == 1 {
                    vec![if a1 { -f.normal[0] } else { f.normal[0] }]
                } else {
                    (0..2).map(|r| a2[r][0] * f.normal[0] + a2[r][1] * f.normal[1]).collect()
                };
                Facet { normal, ..f.clone() }
            })
            .collect();
        let q = LabelledPolytope::new(p.dim(), facets, None).unwrap();
        prop_assert_eq!(sorted_orders(&p), sorted_orders(&q));
    }

    #[test]
    fn recession_routes_agree(
        dim in 1usize..=3,
        raw in prop::collection::vec(prop::collection::vec(-3i64..=3, 3), 1..7),
    ) {
        let normals: Vec<Vec<i64>> = raw
            .into_iter()
            .map(|v| v[..dim].to_vec())
            .filter(|v| v.iter().any(|&c| c != 0))
            .collect();
        prop_assume!(!normals.is_empty());
        let fm = recession_cone_is_trivial_fm(&normals, dim);
        prop_assert_eq!(fm, recession_cone_is_trivial_rays(&normals, dim));
        // with λ = −1 the origin is interior, so boundedness is all that can fail
        let facets = normals.iter().map(|u| Facet::integral(u.clone(), -1)).collect();
        let unbounded = matches!(
            LabelledPolytope::new(dim, facets, None),
            Err(Error::InvalidPolytope(InvalidPolytope::Unbounded))
        );
        prop_assert_eq!(fm, !unbounded);
    }
}

#[test]
fn unimodular_strategy_has_unit_determinant() {
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    for _ in 0..50 {
        let a = unimodular(2).new_tree(&mut runner).unwrap().current();
        assert_eq!((a[0][0] * a[1][1] - a[0][1] * a[1][0]).abs(), 1);
    }
}
