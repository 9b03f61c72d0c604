use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use repeater_core::channels::NoiseParams;
use repeater_core::fidelity::*;
use repeater_core::node_sim::SummaryCache;

#[test]
fn layout_counts_arithmetic() {
    let even = LayoutCounts::new(1000, 125).unwrap();
    assert!(even.is_even_split());
    assert_eq!(even.n_prime(), 8);
    assert_eq!(even.n_dblprime(), 8);

    let uneven = LayoutCounts::new(1003, 125).unwrap();
    assert!(!uneven.is_even_split());
    assert_eq!(uneven.n_prime(), 8);
    assert_eq!(uneven.n_dblprime(), 1003 - 8 * 124);
    // The split always covers the chain exactly.
    assert_eq!(
        uneven.n_prime() * (uneven.m_ii() - 1) + uneven.n_dblprime(),
        uneven.m_tot()
    );
    assert!(LayoutCounts::new(10, 0).is_err());
    assert!(LayoutCounts::new(10, 11).is_err());
}

#[test]
fn closed_form_boundary_values() {
    assert_abs_diff_eq!(fidelity_closed_form(0.97, 0.95, 0).unwrap(), 1.0);
    assert_abs_diff_eq!(fidelity_closed_form(0.97, 0.95, 1).unwrap(), 0.97, epsilon = 1e-15);
    assert_abs_diff_eq!(fidelity_closed_form(1.0, 1.0, 100).unwrap(), 1.0);
    assert!(fidelity_closed_form(0.99, 0.5, 3).is_err());
}

#[test]
fn closed_form_matches_direct_recurrence_reference_point() {
    // Hand-iterated oracle at alpha1 = 0.99, alpha2 = 0.981, m = 5 with
    // alpha' = (alpha2 - alpha1^2)/(1 - alpha1).
    let (a1, a2) = (0.99, 0.981);
    let ap = (a2 - a1 * a1) / (1.0 - a1);
    let (mut f0, mut f1) = (1.0, a1);
    for _ in 1..5 {
        let next = a1 * f1 + (1.0 - a1) * ap * f0;
        f0 = f1;
        f1 = next;
    }
    assert_abs_diff_eq!(fidelity_closed_form(a1, a2, 5).unwrap(), f1, epsilon = 1e-12);
    assert_abs_diff_eq!(fidelity_explicit(a1, a2, 5).unwrap(), f1, epsilon = 1e-12);
    assert_abs_diff_eq!(fidelity_iterated(a1, a2, 5).unwrap(), f1, epsilon = 1e-12);
}

#[test]
fn naive_error_basics() {
    assert_eq!(naive_effective_error(0.98, 0), 0.0);
    assert_eq!(naive_effective_error(1.0, 400), 0.0);
    assert_abs_diff_eq!(
        naive_effective_error(0.99, 3),
        1.0 - 0.99f64.powi(3),
        epsilon = 1e-15
    );
}

fn test_cache() -> (SummaryCache, NoiseParams) {
    (SummaryCache::new(), NoiseParams::from_epsilon_r(5e-4).unwrap())
}

#[test]
fn effective_error_zero_erasures_is_one_minus_fidelity() {
    let (cache, noise) = test_cache();
    let layout = LayoutCounts::new(20, 10).unwrap();
    let s = cache.summary(2, noise).unwrap();
    let eps = effective_error(&cache, noise, layout, 0).unwrap();
    let f = fidelity_closed_form(s.alpha1, s.alpha2, 10).unwrap();
    assert_abs_diff_eq!(eps, 1.0 - f, epsilon = 1e-12);
}

#[test]
fn effective_error_monotone_in_erasures() {
    let (cache, noise) = test_cache();
    let layout = LayoutCounts::new(20, 10).unwrap();
    let mut prev = -1.0;
    for i in 0..=10 {
        let eps = effective_error(&cache, noise, layout, i).unwrap();
        assert!(eps >= prev - 1e-12, "i={i}: {eps} < {prev}");
        prev = eps;
    }
    assert!(effective_error(&cache, noise, layout, 11).is_err());
}

#[test]
fn uneven_split_uses_both_segment_lengths() {
    let (cache, noise) = test_cache();
    let layout = LayoutCounts::new(23, 10).unwrap();
    assert_eq!((layout.n_prime(), layout.n_dblprime()), (2, 5));
    let eps = effective_error(&cache, noise, layout, 0).unwrap();
    // Must exceed the even layout with all segments at n = 2 (the leftover
    // segment is longer and noisier).
    let even = LayoutCounts::new(20, 10).unwrap();
    let eps_even = effective_error(&cache, noise, even, 0).unwrap();
    assert!(eps > eps_even);
    // All-erasure case uses only the loss factors.
    let sp = cache.summary(2, noise).unwrap();
    let sd = cache.summary(5, noise).unwrap();
    let all = effective_error(&cache, noise, layout, 10).unwrap();
    let want = 1.0 - (1.0 - sp.eps_loss).powi(9) * (1.0 - sd.eps_loss);
    assert_abs_diff_eq!(all, want, epsilon = 1e-12);
}

#[test]
fn uneven_formula_reduces_to_even_for_equal_segments() {
    // With both summaries identical, the second-case expression
    // 1 - (1-el)^i F_{m-1-i} F_1 approximates the first case
    // 1 - (1-el)^i F_{m-i}; they agree to first order in the error.
    let (cache, noise) = test_cache();
    let s = cache.summary(3, noise).unwrap();
    let layout = LayoutCounts::new(30, 10).unwrap();
    let even = effective_error_from_summaries(&s, &s, layout, 2).unwrap();
    let f_prime = fidelity_closed_form(s.alpha1, s.alpha2, 7).unwrap();
    let f_one = fidelity_closed_form(s.alpha1, s.alpha2, 1).unwrap();
    let case2 = 1.0 - (1.0 - s.eps_loss).powi(2) * f_prime * f_one;
    assert!((even - case2).abs() < 0.05 * even.max(case2));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    /// Companion-matrix evaluation equals naive iteration, and the explicit
    /// difference-of-powers formula agrees where it is well conditioned.
    #[test]
    fn closed_form_matches_iteration(
        a1 in 0.5f64..0.999999,
        gap in 0.0f64..0.2,
        m in 0u32..500,
    ) {
        // Choose alpha2 between the degenerate floor 3 a1^2/4 and a1.
        let floor = 0.75 * a1 * a1;
        let a2 = (floor + gap * (a1 - floor)).min(a1);
        let fast = fidelity_closed_form(a1, a2, m).unwrap();
        let slow = fidelity_iterated(a1, a2, m).unwrap();
        prop_assert!((fast - slow).abs() < 1e-10, "m={m}: {fast} vs {slow}");
        prop_assert!((0.0..=1.0).contains(&fast));
        let explicit = fidelity_explicit(a1, a2, m).unwrap();
        if 4.0 * a2 - 3.0 * a1 * a1 > 1e-4 && m < 200 {
            prop_assert!((explicit - slow).abs() < 1e-8, "m={m}: {explicit} vs {slow}");
        }
    }

    /// Fidelity never increases with chain length (for alpha' in [0, 1],
    /// i.e. alpha2 between alpha1^2 and alpha1).
    #[test]
    fn fidelity_nonincreasing_in_m(
        a1 in 0.8f64..0.9999,
        gap in 0.0f64..1.0,
        m in 0u32..300,
    ) {
        let floor = a1 * a1;
        let a2 = (floor + gap * (a1 - floor)).min(a1);
        let f_m = fidelity_closed_form(a1, a2, m).unwrap();
        let f_m1 = fidelity_closed_form(a1, a2, m + 1).unwrap();
        prop_assert!(f_m1 <= f_m + 1e-12);
    }
}
