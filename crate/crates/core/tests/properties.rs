use hvd::lifting::{hyperboloid_bisector, klein_bisector, site_hyperplane, subset_to_ball, SubsetGenerator};
use hvd::model::{
    klein_distance, klein_to_ambient, klein_to_poincare, minkowski_inner, poincare_to_klein, weierstrass_lift,
    AmbientPoint, KleinPoint, Measure,
};
use hvd::oracle::{k_nearest_set, level_of_point, verify_diagram, Neighborhood};
use hvd::power::{build_power_diagram, PowerCell};
use hvd::{build_hvd, locate};
use proptest::prelude::*;

fn klein_point(radius: f64) -> impl Strategy<Value = KleinPoint> {
    (0.0..1.0f64, 0.0..std::f64::consts::TAU)
        .prop_map(move |(r, t)| KleinPoint::new([radius * r.sqrt() * t.cos(), radius * r.sqrt() * t.sin()]).unwrap())
}

fn distinct_sites(n: std::ops::RangeInclusive<usize>, radius: f64) -> impl Strategy<Value = Vec<KleinPoint>> {
    prop::collection::vec(klein_point(radius), n).prop_filter("distinct sites", |v| {
        v.iter().enumerate().all(|(i, a)| {
            v[i + 1..].iter().all(|b| {
                let (a, b) = (a.coords(), b.coords());
                (a[0] - b[0]).abs() > 1e-6 || (a[1] - b[1]).abs() > 1e-6
            })
        })
    })
}

proptest! {
    #[test]
    fn poincare_roundtrip(x in klein_point(0.9999)) {
        let back = poincare_to_klein(&klein_to_poincare(&x)).unwrap();
        prop_assert!((back.coords()[0] - x.coords()[0]).abs() <= 1e-12);
        prop_assert!((back.coords()[1] - x.coords()[1]).abs() <= 1e-12);
    }

    #[test]
    fn metric_axioms(a in klein_point(0.99), b in klein_point(0.99)) {
        let ab = klein_distance(&a, &b, Measure::Hyperbolic).unwrap();
        prop_assert!(ab >= 0.0);
        prop_assert_eq!(ab, klein_distance(&b, &a, Measure::Hyperbolic).unwrap());
        prop_assert_eq!(klein_distance(&a, &a, Measure::Hyperbolic).unwrap(), 0.0);
    }

    #[test]
    fn arccosh_preserves_ordering(x in klein_point(0.99), p in klein_point(0.99), q in klein_point(0.99)) {
        let ep = klein_distance(&x, &p, Measure::Equivalent).unwrap();
        let eq = klein_distance(&x, &q, Measure::Equivalent).unwrap();
        let hp = klein_distance(&x, &p, Measure::Hyperbolic).unwrap();
        let hq = klein_distance(&x, &q, Measure::Hyperbolic).unwrap();
        if (ep - eq).abs() > 1e-12 {
            prop_assert_eq!(ep < eq, hp < hq);
        }
    }

    #[test]
    fn hyperboloid_bisector_lies_in_the_central_plane(
        p in (-2.0..2.0f64, -2.0..2.0f64),
        q in (-2.0..2.0f64, -2.0..2.0f64),
        s in -0.999..0.999f64,
    ) {
        prop_assume!((p.0 - q.0).abs() + (p.1 - q.1).abs() > 1e-3);
        let (pa, qa) = (AmbientPoint::new([p.0, p.1]).unwrap(), AmbientPoint::new([q.0, q.1]).unwrap());
        let b = hyperboloid_bisector(&pa, &qa).unwrap().normalized();
        let (u, c) = (b.normal(), b.offset());
        prop_assume!(c.abs() < 0.999);
        let half = (1.0 - c * c).sqrt();
        let x = KleinPoint::new([c * u[0] - s * half * u[1], c * u[1] + s * half * u[0]]).unwrap();
        let lifted = weierstrass_lift(&klein_to_ambient(&x));
        let (lp, lq) = (weierstrass_lift(&pa), weierstrass_lift(&qa));
        let form = minkowski_inner(&lifted, &lp) - minkowski_inner(&lifted, &lq);
        // scale by the size of the lifted point so the bound is relative
        prop_assert!(form.abs() <= 1e-10 * lifted.x0().max(1.0), "{}", form);
    }

    #[test]
    fn level_prefix_is_the_k_nearest_set(sites in distinct_sites(1..=8, 0.95), x in klein_point(0.99), k in 1usize..=8) {
        let k = k.min(sites.len());
        let level = level_of_point(&x, &sites);
        if let Neighborhood::Set(g) = k_nearest_set(&x, &sites, k, 1e-12).unwrap() {
            let mut prefix = level[..k].to_vec();
            prefix.sort_unstable();
            prop_assert_eq!(prefix.as_slice(), g.indices());
        }
    }

    #[test]
    fn level_order_matches_distance_order(sites in distinct_sites(2..=8, 0.95), x in klein_point(0.99)) {
        let level = level_of_point(&x, &sites);
        let d: Vec<f64> = sites.iter().map(|p| klein_distance(&x, p, Measure::Hyperbolic).unwrap()).collect();
        for w in level.windows(2) {
            prop_assert!(d[w[0]] <= d[w[1]] + 1e-12);
        }
    }

    #[test]
    fn klein_bisector_equidistance(p in klein_point(0.95), q in klein_point(0.95), s in -0.99..0.99f64) {
        prop_assume!((p.coords()[0] - q.coords()[0]).abs() + (p.coords()[1] - q.coords()[1]).abs() > 1e-6);
        let b = klein_bisector(&p, &q).unwrap().normalized();
        let (u, c) = (b.normal(), b.offset());
        let half = (1.0 - c * c).sqrt();
        let x = KleinPoint::new([c * u[0] - s * half * u[1], c * u[1] + s * half * u[0]]).unwrap();
        let dp = klein_distance(&x, &p, Measure::Hyperbolic).unwrap();
        let dq = klein_distance(&x, &q, Measure::Hyperbolic).unwrap();
        prop_assert!((dp - dq).abs() <= 1e-9);
    }

    #[test]
    fn power_plane_linearity(sites in distinct_sites(1..=8, 0.95), mask in 1u32..256, x in klein_point(0.99)) {
        let n = sites.len();
        let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        prop_assume!(!idx.is_empty());
        let g = SubsetGenerator::new(idx, n).unwrap();
        let ball = subset_to_ball(&g, &sites).unwrap();
        let direct: f64 = g.indices().iter().map(|&i| site_hyperplane(&sites[i]).eval(x.coords())).sum();
        prop_assert!((ball.power_plane().eval(x.coords()) - direct).abs() <= 1e-12 * direct.abs().max(1.0));
        prop_assert!(ball.weight <= ball.center[0].powi(2) + ball.center[1].powi(2));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn diagrams_tile_the_disk_and_match_the_oracle(
        sites in distinct_sites(1..=7, 0.9),
        k in 1usize..=4,
        l in prop::sample::select(vec![1.0, 0.8, 0.5]),
        seed in any::<u64>(),
    ) {
        let k = k.min(sites.len());
        let d = build_hvd(&sites, k, l).unwrap();
        let target = std::f64::consts::PI * l * l;
        prop_assert!((d.total_area() - target).abs() <= 1e-6 * target);
        let r = verify_diagram(&d, 2000, seed, 1e-7);
        prop_assert!(r.is_perfect(), "{:?}", r);
    }
}

#[test]
fn five_sites_order_two() {
    let sites: Vec<KleinPoint> = [[0.1, 0.7], [-0.5, -0.2], [0.6, -0.3], [0.0, 0.0], [-0.3, 0.6]]
        .into_iter()
        .map(|p| KleinPoint::new(p).unwrap())
        .collect();
    let d = build_hvd(&sites, 2, 1.0).unwrap();
    let r = verify_diagram(&d, 10_000, 42, 1e-7);
    assert!(r.agreement_ratio.unwrap() >= 0.999, "{r:?}");
}

#[test]
fn locate_matches_oracle_off_the_margin() {
    let sites: Vec<KleinPoint> = [[0.6, 0.0], [0.0, 0.0], [0.0, 0.6], [-0.7, 0.4], [0.2, -0.85], [-0.4, -0.4]]
        .into_iter()
        .map(|p| KleinPoint::new(p).unwrap())
        .collect();
    for k in 1..=3 {
        let d = build_hvd(&sites, k, 1.0).unwrap();
        for p in hvd::oracle::sample_disk(1.0, 1000, k as u64) {
            let x = KleinPoint::new(p).unwrap();
            if let Neighborhood::Set(g) = k_nearest_set(&x, &sites, k, 1e-9).unwrap() {
                assert_eq!(locate(&x, &d).unwrap(), &g);
            }
        }
    }
}

#[test]
fn unbounded_cells_reaching_the_disk_get_an_arc() {
    let sites: Vec<KleinPoint> = [[0.3, 0.1], [-0.2, 0.4], [0.1, -0.5], [-0.6, -0.1], [0.5, 0.5], [0.05, 0.0]]
        .into_iter()
        .map(|p| KleinPoint::new(p).unwrap())
        .collect();
    let gens: Vec<SubsetGenerator> = (0..sites.len()).map(SubsetGenerator::singleton).collect();
    let balls: Vec<_> = gens.iter().map(|g| subset_to_ball(g, &sites).unwrap()).collect();
    let power = build_power_diagram(&balls);
    let unbounded: Vec<&PowerCell> = power.cells.iter().filter(|c| c.is_unbounded()).collect();
    assert!(!unbounded.is_empty());
    let d = build_hvd(&sites, 1, 1.0).unwrap();
    for cell in unbounded {
        let clipped = d.cells.iter().find(|c| c.generator.indices() == [cell.ball]);
        if let Some(c) = clipped {
            assert!(c.has_arc(), "unbounded cell {} lost its arc", cell.ball);
        }
    }
    // the central site is enclosed by the others: bounded, no arc
    let center = d.cells.iter().find(|c| c.generator.indices() == [5]).unwrap();
    assert!(!center.has_arc());
}

#[test]
fn klein_circle_tangent_at_the_boundary_is_not_a_pencil() {
    // A Euclidean circle through (1, 0) is a horocycle in the Poincare disk,
    // not in the Klein disk; read as Klein coordinates the bisectors miss (1, 0).
    let sites: Vec<KleinPoint> = [0.7f64, 1.5, 2.5, std::f64::consts::PI, 4.0]
        .iter()
        .map(|t| KleinPoint::new([0.6 + 0.4 * t.cos(), 0.4 * t.sin()]).unwrap())
        .collect();
    let mut worst: f64 = 0.0;
    for i in 0..sites.len() {
        for j in i + 1..sites.len() {
            let b = klein_bisector(&sites[i], &sites[j]).unwrap().normalized();
            worst = worst.max((b.normal()[0] - b.offset()).abs());
        }
    }
    assert!(worst > 0.1, "{worst}");
}

#[test]
fn near_boundary_sites_still_verify() {
    let sites: Vec<KleinPoint> = [[0.999, 0.0], [0.0, -0.998], [-0.7, 0.7], [0.1, 0.1]]
        .into_iter()
        .map(|p| KleinPoint::new(p).unwrap())
        .collect();
    for k in 1..=2 {
        let d = build_hvd(&sites, k, 1.0).unwrap();
        let r = verify_diagram(&d, 20_000, 3, 1e-7);
        assert!(r.is_perfect(), "k={k}: {r:?}");
    }
}
