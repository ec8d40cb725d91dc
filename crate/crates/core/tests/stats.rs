mod common;

use common::exact;
use proptest::prelude::*;
use qprop_core::rng::rng_for;
use qprop_core::stats::{
    binomial_two_sided, fisher_exact_two_sided, holm_bonferroni, mid_ranks, spearman_rank, ContingencyTable2x2,
    StatsError,
};
use rand::Rng;

fn rel_err(got: f64, want: f64) -> f64 {
    if want == 0.0 {
        got.abs()
    } else {
        (got - want).abs() / want
    }
}

#[test]
fn fisher_matches_enumeration_on_random_tables() {
    let mut rng = rng_for(0xf15e, 0);
    for _ in 0..200 {
        let n = rng.random_range(1..=200u64);
        let cuts = [rng.random_range(0..=n), rng.random_range(0..=n), rng.random_range(0..=n)];
        let mut cuts = cuts.to_vec();
        cuts.sort_unstable();
        let (a, b, c, d) = (cuts[0], cuts[1] - cuts[0], cuts[2] - cuts[1], n - cuts[2]);
        let got = fisher_exact_two_sided(&ContingencyTable2x2::new(a, b, c, d)).unwrap();
        let want = exact::fisher(a, b, c, d);
        assert!(rel_err(got, want) < 1e-10, "[[{a},{b}],[{c},{d}]]: {got} vs {want}");
    }
}

#[test]
fn fisher_extreme_tables() {
    for (a, b, c, d) in [(100, 0, 0, 100), (0, 100, 100, 0), (1, 99, 99, 1), (200, 0, 0, 0), (0, 0, 3, 197)] {
        let got = fisher_exact_two_sided(&ContingencyTable2x2::new(a, b, c, d)).unwrap();
        let want = exact::fisher(a, b, c, d);
        assert!(rel_err(got, want) < 1e-10, "[[{a},{b}],[{c},{d}]]: {got} vs {want}");
    }
}

#[test]
fn binomial_matches_enumeration() {
    let mut rng = rng_for(0xb170, 0);
    for _ in 0..100 {
        let n = rng.random_range(1..=150u64);
        let k = rng.random_range(0..=n);
        let p0 = [0.5, 0.25, 1.0 / 3.0, 0.9, rng.random_range(0.01..0.99)][rng.random_range(0..5)];
        let got = binomial_two_sided(k, n, p0).unwrap();
        let want = exact::binomial(k, n, p0);
        assert!(rel_err(got, want) < 1e-9, "k={k} n={n} p0={p0}: {got} vs {want}");
    }
}

#[test]
fn binomial_rejects_bad_arguments() {
    assert_eq!(binomial_two_sided(1, 2, 1.5), Err(StatsError::InvalidProbability(1.5)));
    assert_eq!(
        binomial_two_sided(3, 2, 0.5),
        Err(StatsError::InvalidCount { successes: 3, trials: 2 })
    );
    assert_eq!(binomial_two_sided(0, 10, 0.0).unwrap(), 1.0);
    assert_eq!(binomial_two_sided(1, 10, 0.0).unwrap(), 0.0);
}

#[test]
fn holm_matches_adjusted_p_values() {
    let mut rng = rng_for(0x401e, 0);
    for _ in 0..1000 {
        let m = rng.random_range(1..=40);
        let mut ps: Vec<f64> = (0..m)
            .map(|_| {
                // a mix of clear signals and nulls
                if rng.random_bool(0.3) {
                    rng.random_range(0.0..0.01)
                } else {
                    rng.random::<f64>()
                }
            })
            .collect();
        if m > 2 && rng.random_bool(0.2) {
            ps[1] = ps[0];
        }
        let alpha = [0.05, 0.01, 0.1][rng.random_range(0..3)];
        assert_eq!(holm_bonferroni(&ps, alpha).rejected, exact::holm(&ps, alpha), "{ps:?} at {alpha}");
    }
}

#[test]
fn spearman_matches_reference_values() {
    // reference values from an independent statistics package
    let cases: [(&[f64], &[f64], f64, f64); 3] = [
        (
            &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0],
            &[2.0, 1.0, 4.0, 3.0, 6.0, 5.0, 8.0, 7.0],
            0.9047619047619048,
            0.0020082755054294677,
        ),
        (
            &[1.0, 1.0, 2.0, 2.0, 3.0, 3.0, 4.0, 4.0, 5.0],
            &[5.0, 3.0, 4.0, 4.0, 2.0, 2.0, 1.0, 0.0, 1.0],
            -0.8884201995274431,
            0.0013677559355177343,
        ),
        (
            &[0.1, 0.4, 0.2, 0.9, 0.5, 0.3],
            &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
            0.48571428571428577,
            0.3287230320699709,
        ),
    ];
    for (xs, ys, r, p) in cases {
        let (gr, gp) = spearman_rank(xs, ys).unwrap();
        assert!((gr - r).abs() < 1e-12, "{gr} vs {r}");
        assert!(rel_err(gp, p) < 1e-8, "{gp} vs {p}");
    }
}

#[test]
fn spearman_rejects_degenerate_inputs() {
    assert_eq!(spearman_rank(&[1.0, 2.0], &[1.0, 2.0]), Err(StatsError::TooFewPoints(2)));
    assert_eq!(spearman_rank(&[1.0, 2.0, 3.0], &[1.0, 2.0]), Err(StatsError::LengthMismatch(3, 2)));
    assert_eq!(spearman_rank(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), Err(StatsError::ConstantInput));
}

proptest! {
    #[test]
    fn fisher_is_a_probability_and_symmetric(a in 0u64..60, b in 0u64..60, c in 0u64..60, d in 0u64..60) {
        prop_assume!(a + b + c + d > 0);
        let p = fisher_exact_two_sided(&ContingencyTable2x2::new(a, b, c, d)).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
        // swapping rows, columns, or transposing leaves the test unchanged
        for q in [
            fisher_exact_two_sided(&ContingencyTable2x2::new(c, d, a, b)).unwrap(),
            fisher_exact_two_sided(&ContingencyTable2x2::new(b, a, d, c)).unwrap(),
            fisher_exact_two_sided(&ContingencyTable2x2::new(a, c, b, d)).unwrap(),
        ] {
            prop_assert!((p - q).abs() <= 1e-9 * p.max(1e-300), "{} vs {}", p, q);
        }
    }

    #[test]
    fn binomial_is_a_probability(n in 1u64..500, frac in 0.0f64..=1.0, p0 in 0.0f64..=1.0) {
        let k = ((n as f64) * frac).floor() as u64;
        let p = binomial_two_sided(k, n, p0).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
    }

    #[test]
    fn holm_rejections_are_a_prefix_of_the_sorted_order(ps in prop::collection::vec(0.0f64..=1.0, 0..50), alpha in 0.001f64..0.2) {
        let out = holm_bonferroni(&ps, alpha);
        prop_assert_eq!(out.rejected.len(), ps.len());
        // every rejected p is below every accepted p
        let max_rej = ps.iter().zip(&out.rejected).filter(|(_, &r)| r).map(|(p, _)| *p).fold(f64::NEG_INFINITY, f64::max);
        let min_acc = ps.iter().zip(&out.rejected).filter(|(_, &r)| !r).map(|(p, _)| *p).fold(f64::INFINITY, f64::min);
        prop_assert!(max_rej <= min_acc);
        // Holm never rejects less than Bonferroni
        let m = ps.len() as f64;
        for (p, r) in ps.iter().zip(&out.rejected) {
            if *p <= alpha / m {
                prop_assert!(*r);
            }
        }
    }

    #[test]
    fn mid_ranks_sum_to_triangle(xs in prop::collection::vec(0u8..10, 1..40)) {
        let xs: Vec<f64> = xs.into_iter().map(f64::from).collect();
        let n = xs.len() as f64;
        let total: f64 = mid_ranks(&xs).iter().sum();
        prop_assert!((total - n * (n + 1.0) / 2.0).abs() < 1e-9);
    }

    #[test]
    fn spearman_is_bounded(xs in prop::collection::vec(0.0f64..1.0, 3..30), seed in any::<u64>()) {
        let mut rng = rng_for(seed, 0);
        let ys: Vec<f64> = xs.iter().map(|_| rng.random()).collect();
        if let Ok((r, p)) = spearman_rank(&xs, &ys) {
            prop_assert!((-1.0..=1.0).contains(&r));
            prop_assert!((0.0..=1.0).contains(&p));
        }
        // a strictly increasing transform gives r = 1
        let zs: Vec<f64> = xs.iter().map(|x| x * x * x + 2.0).collect();
        if let Ok((r, _)) = spearman_rank(&xs, &zs) {
            prop_assert!((r - 1.0).abs() < 1e-12);
        }
    }
}
