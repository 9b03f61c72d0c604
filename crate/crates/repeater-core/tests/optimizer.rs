use approx::assert_abs_diff_eq;
use repeater_core::channels::NoiseParams;
use repeater_core::node_sim::SummaryCache;
use repeater_core::optimizer::*;
use repeater_core::rate::{skr, HardwareConstants, NetworkConfig};
use repeater_core::tree_code::BranchingVector;

fn quick_result(
    l_tot: f64,
    objective: Objective,
    cache: &SummaryCache,
) -> OptimizationResult {
    let space = SearchSpace::new(l_tot).unwrap();
    minimize(
        &space,
        NoiseParams::from_epsilon_r(1e-3).unwrap(),
        1.0,
        HardwareConstants::default(),
        objective,
        cache,
    )
    .unwrap()
}

#[test]
fn cost_formula_and_sentinel() {
    let config = NetworkConfig {
        l_tot_km: 1000.0,
        m_tot: 100,
        m_ii: 20,
        tree: BranchingVector::new(vec![4, 13, 4]).unwrap(),
        noise: NoiseParams::from_epsilon_r(1e-3).unwrap(),
        kappa: 1.0,
        constants: HardwareConstants::default(),
    };
    // kappa = 1 collapses to m_tot / SKR times the prefactor.
    let c = cost(&config, 5000.0);
    let prefactor = 20.0 / (1e-9 * 1000.0);
    assert_abs_diff_eq!(c, prefactor * 100.0 / 5000.0, epsilon = 1e-9);
    // Doubling the rate halves the cost.
    assert_abs_diff_eq!(cost(&config, 10000.0), c / 2.0, epsilon = 1e-9);
    assert!(cost(&config, 0.0).is_infinite());
    // kappa weighting.
    let mut config10 = config.clone();
    config10.kappa = 10.0;
    assert_abs_diff_eq!(
        cost(&config10, 5000.0),
        prefactor * (80.0 + 10.0 * 20.0) / 5000.0,
        epsilon = 1e-9
    );
}

#[test]
fn search_space_validation() {
    assert!(SearchSpace::new(1.0).is_err());
    assert!(SearchSpace::new(50.0).is_ok());
}

#[test]
fn minimize_satisfies_constraints_and_is_deterministic() {
    let cache = SummaryCache::new();
    let a = quick_result(60.0, Objective::Cost, &cache);
    let b = quick_result(60.0, Objective::Cost, &cache);
    assert_eq!(a.config, b.config);
    assert_eq!(a.cost, b.cost);

    let c = &a.config;
    assert!(c.l0_km() >= 1.0);
    assert!(c.m_ii >= 1 && c.m_ii <= c.m_tot / 2);
    assert!(c.tree.photon_count() <= 300);
    assert_eq!(c.tree.depth(), 2);
    assert!(a.skr_hz > 0.0 && a.cost.is_finite());
}

#[test]
fn reported_skr_matches_rate_module() {
    let cache = SummaryCache::new();
    let res = quick_result(60.0, Objective::Cost, &cache);
    let direct = skr(&res.config, &cache).unwrap();
    assert_abs_diff_eq!(res.skr_hz, direct.skr_hz, epsilon = 1e-9 * res.skr_hz.abs());
    assert_abs_diff_eq!(res.cost, cost(&res.config, direct.skr_hz), epsilon = 1e-9 * res.cost);
}

#[test]
fn incumbent_is_locally_optimal_in_m_ii() {
    let cache = SummaryCache::new();
    let res = quick_result(60.0, Objective::Cost, &cache);
    for delta in [-1i64, 1] {
        let m_ii = res.config.m_ii as i64 + delta;
        if m_ii < 1 || m_ii > (res.config.m_tot / 2) as i64 {
            continue;
        }
        let mut neighbor = res.config.clone();
        neighbor.m_ii = m_ii as u32;
        let rate = skr(&neighbor, &cache).unwrap();
        let neighbor_cost = cost(&neighbor, rate.skr_hz);
        assert!(
            neighbor_cost >= res.cost - 1e-9 * res.cost,
            "m_II {} beats incumbent: {} < {}",
            neighbor.m_ii,
            neighbor_cost,
            res.cost
        );
    }
}

#[test]
fn max_skr_dominates_cost_objective_rate() {
    let cache = SummaryCache::new();
    let by_cost = quick_result(60.0, Objective::Cost, &cache);
    let by_rate = quick_result(60.0, Objective::MaxSkr, &cache);
    assert!(by_rate.skr_hz >= by_cost.skr_hz - 1e-9);
    assert!(by_rate.cost >= by_cost.cost - 1e-9);
}

#[test]
fn type_ii_only_uses_all_nodes() {
    let cache = SummaryCache::new();
    let res = quick_result(40.0, Objective::CostTypeIiOnly, &cache);
    assert_eq!(res.config.m_ii, res.config.m_tot);
}

#[test]
fn infeasible_when_noise_is_hopeless() {
    let cache = SummaryCache::new();
    let space = SearchSpace::new(50.0).unwrap();
    let res = minimize(
        &space,
        NoiseParams::from_epsilon_r(0.2).unwrap(),
        1.0,
        HardwareConstants::default(),
        Objective::Cost,
        &cache,
    );
    assert!(matches!(res, Err(repeater_core::Error::NoFeasibleConfig)));
}

#[test]
fn homogeneous_optimum_is_positive_and_valid() {
    let space = SearchSpace::new(100.0).unwrap();
    let res = minimize_homogeneous(
        &space,
        NoiseParams::from_epsilon_r(1e-3).unwrap(),
        HardwareConstants::default(),
    )
    .unwrap();
    assert!(res.skr_hz > 0.0);
    assert!(res.m_tot >= 1 && res.m_tot <= 100);
    assert!(res.tree.photon_count() <= 300);
}
