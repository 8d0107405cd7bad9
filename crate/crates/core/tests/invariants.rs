use proptest::prelude::*;

use ppw_core::dirichlet::{disjoint_union_spectrum, rectangle_spectrum, BoxSpec};
use ppw_core::moebius::{balance_from, center_of_mass_residual, BallPoint, DiscreteMeasure};
use ppw_core::sphere::round_spectrum;
use ppw_core::verify::{check_dirichlet_universal, check_thm1, InequalityReport};
use ppw_core::{Convention, Spectrum};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn from_unsorted_preserves_count_and_order(raw in prop::collection::vec((0.0f64..100.0, 1usize..4), 1..40)) {
        let total: usize = raw.iter().map(|r| r.1).sum();
        let s = Spectrum::from_unsorted(Convention::Dirichlet, 2, raw, 1e-12).unwrap();
        prop_assert_eq!(s.len(), total);
        let flat = s.flatten();
        prop_assert!(flat.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn box_eigenvalues_scale_inversely_with_area(a in 0.5f64..3.0, b in 0.5f64..3.0, t in 0.25f64..4.0) {
        let s = rectangle_spectrum(&BoxSpec::new(vec![a, b]).unwrap(), 15).unwrap();
        let st = rectangle_spectrum(&BoxSpec::new(vec![t * a, t * b]).unwrap(), 15).unwrap();
        for (x, y) in s.flatten().iter().zip(st.flatten()) {
            prop_assert!((x - y * t * t).abs() <= 1e-10 * x);
        }
    }

    #[test]
    fn universal_bounds_hold_on_random_boxes(sides in prop::collection::vec(0.3f64..3.0, 2..4)) {
        let s = rectangle_spectrum(&BoxSpec::new(sides).unwrap(), 40).unwrap();
        let reports = check_dirichlet_universal(&s, 20).unwrap();
        prop_assert!(reports.iter().all(|r| !r.is_failure()));
    }

    #[test]
    fn union_of_copies_multiplies_multiplicities(copies in 1usize..5) {
        let s = rectangle_spectrum(&BoxSpec::new(vec![1.0, 1.7]).unwrap(), 8).unwrap();
        let u = disjoint_union_spectrum(&vec![s.clone(); copies]).unwrap();
        for (e, f) in u.entries.iter().zip(&s.entries) {
            prop_assert_eq!(e.multiplicity, copies * f.multiplicity);
        }
    }

    #[test]
    fn thm1_margins_scale_with_homothety(n in 3usize..6, factor in 0.1f64..10.0) {
        let s = round_spectrum(n, 6).unwrap();
        let max_s = (n * (n - 1)) as f64;
        let a = check_thm1(&s, max_s, 3).unwrap();
        let b = check_thm1(&s.scaled(factor), factor * max_s, 3).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((y.margin - factor * x.margin).abs() <= 1e-10 * (1.0 + factor * x.margin.abs()));
        }
    }

    #[test]
    fn report_margin_is_rhs_minus_lhs(lhs in -1e3f64..1e3, rhs in -1e3f64..1e3) {
        let r = InequalityReport::new("p", None, lhs, rhs);
        prop_assert_eq!(r.margin, rhs - lhs);
        prop_assert_eq!(r.satisfied, r.margin >= -r.tol);
    }

    #[test]
    fn random_measures_balance(seed in 0u64..10_000) {
        let mu = DiscreteMeasure::random(3, 60, seed).unwrap();
        let out = balance_from(&mu, &BallPoint::origin(3), 1e-10).unwrap();
        let res: f64 = center_of_mass_residual(&out.xi, &mu).iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!(res <= 1e-9);
        prop_assert!(out.xi.norm() < 1.0);
    }
}
