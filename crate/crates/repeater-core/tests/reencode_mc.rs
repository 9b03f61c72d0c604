use repeater_core::reencode_mc::*;
use repeater_core::tree_code::{eta_e, BranchingVector};

fn tree(b: &[u32]) -> BranchingVector {
    BranchingVector::new(b.to_vec()).unwrap()
}

#[test]
fn lossless_noiseless_decode_always_succeeds() {
    let est = simulate_decode(&tree(&[3, 5, 2]), 0.0, 0.0, 5_000, 1).unwrap();
    assert_eq!(est.success_rate.value, 1.0);
    assert_eq!(est.logical_x_rate.value, 0.0);
    assert_eq!(est.logical_z_rate.value, 0.0);
    assert_eq!(est.logical_y_rate.value, 0.0);
    assert_eq!(est.effective_epsilon.value, 0.0);
}

#[test]
fn input_validation() {
    let t = tree(&[2, 2, 2]);
    assert!(simulate_decode(&t, 0.1, 0.0, 0, 1).is_err());
    assert!(simulate_decode(&t, 1.5, 0.0, 10, 1).is_err());
    assert!(simulate_decode(&BranchingVector::new(vec![2, 2]).unwrap(), 0.1, 0.0, 10, 1).is_err());
}

#[test]
fn seeded_runs_are_bit_identical() {
    let t = tree(&[3, 4, 2]);
    let a = simulate_decode(&t, 0.12, 2e-3, 20_000, 777).unwrap();
    let b = simulate_decode(&t, 0.12, 2e-3, 20_000, 777).unwrap();
    assert_eq!(a.success_rate.value, b.success_rate.value);
    assert_eq!(a.effective_epsilon.value, b.effective_epsilon.value);
    let c = simulate_decode(&t, 0.12, 2e-3, 20_000, 778).unwrap();
    assert_ne!(a.success_rate.value, c.success_rate.value);
}

#[test]
fn loss_only_success_matches_analytic_eta() {
    // The central cross-module check: frequency vs the analytic recursion.
    let cases: [(&[u32], f64); 6] = [
        (&[2, 2, 2], 0.30),
        (&[2, 3, 1], 0.20),
        (&[3, 5, 2], 0.15),
        (&[4, 7, 3], 0.12),
        (&[5, 11, 4], 0.10),
        (&[4, 13, 4], 0.10),
    ];
    for (b, mu) in cases {
        let t = tree(b);
        let est = simulate_decode(&t, mu, 0.0, 100_000, 4242).unwrap();
        let eta = eta_e(&t, mu).unwrap();
        let sigma = est.success_rate.sigma.max(1e-6);
        assert!(
            (est.success_rate.value - eta).abs() <= 4.0 * sigma,
            "{t} at mu={mu}: MC {} +- {sigma} vs analytic {eta}",
            est.success_rate.value
        );
        assert_eq!(est.effective_epsilon.value, 0.0);
    }
}

#[test]
fn tree_channel_is_roughly_pauli_symmetric() {
    let t = tree(&[4, 13, 4]);
    let est = simulate_decode(&t, 0.02, 1e-3, 200_000, 5).unwrap();
    let sigma = est.logical_x_rate.sigma + est.logical_z_rate.sigma;
    assert!(
        (est.logical_x_rate.value - est.logical_z_rate.value).abs() <= 5.0 * sigma.max(1e-5),
        "x {} vs z {}",
        est.logical_x_rate.value,
        est.logical_z_rate.value
    );
}

#[test]
fn reencoding_error_is_about_three_eps0() {
    for b in [&[4u32, 13, 4][..], &[4, 12, 5][..]] {
        let t = tree(b);
        let eps0 = 3.33e-4;
        let eps_r = reencode_channel_estimate(&t, 0.01, eps0, 100_000, 11).unwrap();
        let ratio = eps_r / eps0;
        assert!(
            (2.5..=3.5).contains(&ratio),
            "{t}: eps_r/eps0 = {ratio}"
        );
    }
    // No noise, no error.
    assert_eq!(
        reencode_channel_estimate(&tree(&[2, 2, 2]), 0.0, 0.0, 1_000, 1).unwrap(),
        0.0
    );
}
