//! Student t distribution checked against direct numerical integration of
//! its density.

use proptest::prelude::*;
use tangram_core::stats::{t_cdf, t_one_sample};

#[path = "criteria/stats.rs"]
mod criteria;

#[test]
fn matches_quadrature_and_analytic_cases() {
    criteria::check().unwrap();
}

#[test]
fn two_sided_p_is_twice_the_upper_tail() {
    for df in criteria::DFS {
        let r = t_one_sample(&[0.2, 0.5, 0.1, 0.4, 0.45, 0.3][..(df as usize).clamp(2, 6)], 0.1).unwrap();
        let upper = 1.0 - criteria::cdf_by_quadrature(r.t.abs(), r.df as f64);
        assert!((r.p_two_sided - 2.0 * upper).abs() < 1e-6);
    }
}

#[test]
fn reference_value() {
    assert!((t_cdf(2.0, 10) - 0.963_306_0).abs() < 1e-6);
}

proptest! {
    #[test]
    fn t_is_location_and_scale_free(
        xs in prop::collection::vec(-5.0f64..5.0, 3..30),
        shift in -100.0f64..100.0,
        scale in 0.01f64..100.0,
    ) {
        let base = t_one_sample(&xs, 0.5);
        prop_assume!(base.is_ok());
        let base = base.unwrap();
        let moved: Vec<f64> = xs.iter().map(|x| scale * x + shift).collect();
        let r = t_one_sample(&moved, scale * 0.5 + shift).unwrap();
        prop_assert!((r.t - base.t).abs() <= 1e-6 * base.t.abs().max(1.0));
        prop_assert!((r.p_two_sided - base.p_two_sided).abs() <= 1e-6);
    }

    #[test]
    fn cdf_is_monotone_and_symmetric(x in -20.0f64..20.0, df in 1u64..200) {
        let c = t_cdf(x, df);
        prop_assert!((0.0..=1.0).contains(&c));
        prop_assert!((c + t_cdf(-x, df) - 1.0).abs() < 1e-12);
        prop_assert!(t_cdf(x + 0.1, df) >= c);
    }
}
