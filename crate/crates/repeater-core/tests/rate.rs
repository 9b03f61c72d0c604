use approx::assert_abs_diff_eq;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use repeater_core::channels::{depolarize_single, DensityMatrix, NoiseParams};
use repeater_core::node_sim::SummaryCache;
use repeater_core::rate::*;
use repeater_core::tree_code::BranchingVector;

fn default_config(eps_r: f64) -> NetworkConfig {
    NetworkConfig {
        l_tot_km: 200.0,
        m_tot: 40,
        m_ii: 10,
        tree: BranchingVector::new(vec![4, 13, 4]).unwrap(),
        noise: NoiseParams::from_epsilon_r(eps_r).unwrap(),
        kappa: 1.0,
        constants: HardwareConstants::default(),
    }
}

#[test]
fn entropy_basics() {
    assert_eq!(binary_entropy(0.0), 0.0);
    assert_eq!(binary_entropy(1.0), 0.0);
    assert_abs_diff_eq!(binary_entropy(0.5), 1.0, epsilon = 1e-15);
    assert_abs_diff_eq!(binary_entropy(0.3), binary_entropy(0.7), epsilon = 1e-15);
}

#[test]
fn key_fraction_endpoints_and_reference_value() {
    assert_abs_diff_eq!(secret_key_fraction(0.0).unwrap(), 1.0, epsilon = 1e-15);
    assert_eq!(secret_key_fraction(0.5).unwrap(), 0.0);
    assert!(secret_key_fraction(1.2).is_err());
    // Independent evaluation at Q = 0.05.
    let q: f64 = 0.05;
    let h = |p: f64| -p * p.log2() - (1.0 - p) * (1.0 - p).log2();
    let want = (1.0 - q) * (1.0 - h((1.0 - 1.5 * q) / (1.0 - q))) - h(q);
    assert_abs_diff_eq!(secret_key_fraction(q).unwrap(), want, epsilon = 1e-12);
}

#[test]
fn six_state_threshold_location() {
    assert!(secret_key_fraction(0.125).unwrap() > 0.0);
    assert_eq!(secret_key_fraction(0.127).unwrap(), 0.0);
}

#[test]
fn p_trans_identities() {
    assert_abs_diff_eq!(p_trans(1.0, 3, 7, 0).unwrap(), 1.0, epsilon = 1e-15);
    assert_eq!(p_trans(1.0, 3, 7, 2).unwrap(), 0.0);
    let eta: f64 = 0.995;
    assert_abs_diff_eq!(
        p_trans(eta, 2, 4, 0).unwrap(),
        eta.powi(5 * 2 * 4),
        epsilon = 1e-15
    );
    // Term isolation at i = 1.
    let en = eta.powi(2);
    assert_abs_diff_eq!(
        p_trans(eta, 2, 4, 1).unwrap(),
        en.powi(5 * 3) * 5.0 * en.powi(4) * (1.0 - en),
        epsilon = 1e-15
    );
    assert!(p_trans(eta, 2, 4, 5).is_err());
}

#[test]
fn transmission_weights_sum_with_abort() {
    // Sum over i of C(m,i) p_trans(i) plus the abort probability is exactly
    // the m-fold product rule; cross-check by Monte Carlo over per-node
    // three-way outcomes.
    let (eta, n, m_ii): (f64, u32, u32) = (0.99, 3, 12);
    let en = eta.powi(n as i32);
    let q0 = en.powi(5);
    let q1 = 5.0 * en.powi(4) * (1.0 - en);
    let analytic_success: f64 = (0..=m_ii)
        .map(|i| {
            let binom: f64 = (0..i).map(|k| (m_ii - k) as f64 / (k + 1) as f64).product();
            binom * p_trans(eta, n, m_ii, i).unwrap()
        })
        .sum();
    assert_abs_diff_eq!(analytic_success, (q0 + q1).powi(m_ii as i32), epsilon = 1e-12);

    let mut rng = ChaCha12Rng::seed_from_u64(99);
    let trials = 200_000u64;
    let mut ok = 0u64;
    for _ in 0..trials {
        let mut alive = true;
        for _ in 0..m_ii {
            let x: f64 = rng.gen();
            if x >= q0 + q1 {
                alive = false;
                break;
            }
        }
        if alive {
            ok += 1;
        }
    }
    let p_hat = ok as f64 / trials as f64;
    let sigma = (analytic_success * (1.0 - analytic_success) / trials as f64).sqrt();
    assert!(
        (p_hat - analytic_success).abs() < 4.0 * sigma,
        "MC {p_hat} vs analytic {analytic_success}"
    );
}

#[test]
fn node_time_reference_point() {
    let c = HardwareConstants::default();
    let tau = node_processing_time(7060e-9, &c);
    assert_abs_diff_eq!(tau, 42.46e-6, epsilon = 1e-12);
    assert_abs_diff_eq!(node_processing_time(7060e-9, &c), 7060e-9 + 14.0 * c.tau_ss_s + 26.0 * c.tau_tele_s + 8.0 * c.tau_meas_s, epsilon = 1e-18);
}

#[test]
fn expected_ft_time_identities() {
    let c = HardwareConstants::default();
    // All sub-circuits pass quietly.
    let quiet = expected_ft_time(&[0.0, 0.0, 0.0, 0.0, 1.0], &c).unwrap();
    assert_abs_diff_eq!(
        quiet,
        11.0 * c.tau_ss_s + 13.0 * c.tau_tele_s + 4.0 * c.tau_meas_s,
        epsilon = 1e-18
    );
    // Trigger at the last sub-circuit is the worst case and equals the
    // budgeted node time minus the tree part.
    let worst = expected_ft_time(&[0.0, 0.0, 0.0, 1.0, 0.0], &c).unwrap();
    assert_abs_diff_eq!(worst, node_processing_time(0.0, &c), epsilon = 1e-18);
    // Trigger at the first sub-circuit.
    let first = expected_ft_time(&[1.0, 0.0, 0.0, 0.0, 0.0], &c).unwrap();
    let tau_nf = 3.0 * c.tau_ss_s + 13.0 * c.tau_tele_s + 4.0 * c.tau_meas_s;
    let tau_f1 = 3.0 * c.tau_ss_s + 3.0 * c.tau_tele_s + c.tau_meas_s;
    assert_abs_diff_eq!(first, tau_nf + tau_f1, epsilon = 1e-18);
    assert!(expected_ft_time(&[0.5, 0.0, 0.0, 0.0, 0.0], &c).is_err());
}

#[test]
fn config_validation() {
    let mut cfg = default_config(1e-3);
    assert!(cfg.validate().is_ok());
    cfg.m_tot = 300; // L0 < 1 km
    assert!(cfg.validate().is_err());
    let mut cfg = default_config(1e-3);
    cfg.tree = BranchingVector::new(vec![10, 10, 10]).unwrap(); // N > 300
    assert!(cfg.validate().is_err());
    let mut cfg = default_config(1e-3);
    cfg.kappa = -1.0;
    assert!(cfg.validate().is_err());
}

#[test]
fn skr_bounded_by_cycle_rate_and_terms_nonnegative() {
    let cache = SummaryCache::new();
    let cfg = default_config(1e-3);
    let out = skr(&cfg, &cache).unwrap();
    assert!(out.skr_hz > 0.0);
    assert!(out.skr_hz <= 1.0 / out.tau_tot_s + 1e-9);
    let mut weight_sum = 0.0;
    for t in &out.terms {
        assert!(t.weight >= 0.0 && t.fraction >= 0.0 && t.fraction <= 1.0);
        weight_sum += t.weight;
    }
    assert!(weight_sum <= 1.0 + 1e-9);
}

#[test]
fn skr_near_cycle_rate_when_noiseless_and_lossless() {
    let cache = SummaryCache::new();
    let mut cfg = default_config(0.0);
    cfg.noise = NoiseParams::noiseless();
    cfg.constants.eta_d = 1.0;
    cfg.constants.l_att_km = 1e12;
    let out = skr(&cfg, &cache).unwrap();
    assert_abs_diff_eq!(out.skr_hz * out.tau_tot_s, 1.0, epsilon = 1e-6);
}

#[test]
fn skr_nonincreasing_in_reencoding_error() {
    let cache = SummaryCache::new();
    let mut prev = f64::INFINITY;
    for eps_r in [2e-4, 5e-4, 1e-3, 2e-3] {
        let out = skr(&default_config(eps_r), &cache).unwrap();
        assert!(out.skr_hz <= prev + 1e-9, "eps_r={eps_r}");
        prev = out.skr_hz;
    }
}

#[test]
fn truncating_erasure_terms_lowers_skr() {
    let cache = SummaryCache::new();
    let cfg = default_config(1e-3);
    let out = skr(&cfg, &cache).unwrap();
    let i0_only = out.terms[0].weight * out.terms[0].fraction / out.tau_tot_s;
    assert!(i0_only < out.skr_hz);
}

#[test]
fn homogeneous_baseline_identities() {
    let tree = BranchingVector::new(vec![4, 13, 4]).unwrap();
    let c = HardwareConstants::default();
    let noise = NoiseParams::noiseless();
    // m_tot = 1, eps_r = 0: rate is eta_e / tau_tree.
    let rate = homogeneous_skr(2.0, 1, &tree, &noise, &c).unwrap();
    let link = repeater_core::tree_code::LinkParams::new(2.0, c.l_att_km, c.eta_d).unwrap();
    let eta = repeater_core::tree_code::eta_e(&tree, link.mu()).unwrap();
    let tau_tree = repeater_core::tree_code::tree_generation_time(&tree, c.tau_ph_s, c.tau_ss_s).unwrap();
    assert_abs_diff_eq!(rate, eta / tau_tree, epsilon = 1e-6);
}

#[test]
fn depolarizing_composition_matches_density_matrix() {
    // eps_h = (3/4)(1 - p^m) with p = 1 - 4 eps_r/3 must agree with m
    // sequential single-qubit depolarizations.
    let eps_r = 7e-3;
    let m = 9;
    let p: f64 = 1.0 - 4.0 * eps_r / 3.0;
    let eps_h = 0.75 * (1.0 - p.powi(m));
    let mut rho = DensityMatrix::basis_state(1, 0);
    for _ in 0..m {
        rho = depolarize_single(&rho, 0, eps_r).unwrap();
    }
    // One depolarization of strength eps_h applied to |0> gives the same
    // population.
    let direct = depolarize_single(&DensityMatrix::basis_state(1, 0), 0, eps_h).unwrap();
    assert_abs_diff_eq!(rho.entry(0, 0).re, direct.entry(0, 0).re, epsilon = 1e-12);
}
