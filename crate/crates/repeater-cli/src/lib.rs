//! Run-configuration handling and command implementations behind the
//! `repeater` binary. Kept as a library so integration tests can drive the
//! commands without spawning processes.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use repeater_core::channels::NoiseParams;
use repeater_core::fidelity::{effective_error, naive_effective_error, LayoutCounts};
use repeater_core::five_qubit::{
    build_erasure_table, build_erasure_table_full, build_flagged_table, build_weight1_table,
};
use repeater_core::node_sim::{
    channel_summary, exact_chain_fidelity, NodeChannelParams, SummaryCache,
};
use repeater_core::optimizer::{minimize, minimize_homogeneous, Objective, SearchSpace};
use repeater_core::rate::HardwareConstants;
use repeater_core::reencode_mc::simulate_decode;
use repeater_core::tree_code::BranchingVector;

/// Fixed CSV header for optimizer output rows.
pub const OPTIMIZE_CSV_HEADER: &str =
    "L_tot_km,skr_hz,cost,L0_km,m_II,m_tot,b0,b1,b2,eps_r,kappa,status";

fn default_l_tot() -> Vec<f64> {
    // 21 log-spaced points over 1e2..1e4 km.
    (0..21)
        .map(|i| 10f64.powf(2.0 + 2.0 * i as f64 / 20.0))
        .collect()
}

fn default_eps_r() -> Vec<f64> {
    vec![1e-4, 3e-4, 5e-4, 1e-3, 2e-3]
}

fn default_kappa() -> Vec<f64> {
    vec![1.0, 2.0, 10.0]
}

fn default_trials() -> u64 {
    100_000
}

fn default_seed() -> u64 {
    1
}

fn default_objective() -> Objective {
    Objective::Cost
}

fn default_trees() -> Vec<Vec<u32>> {
    vec![
        vec![4, 13, 4],
        vec![5, 11, 4],
        vec![4, 14, 4],
        vec![4, 12, 5],
    ]
}

/// One file controls a whole run; hardware constants live in a single block
/// so sensitivity studies touch one place.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub l_tot_km: Vec<f64>,
    pub eps_r: Vec<f64>,
    pub kappa: Vec<f64>,
    pub objective: Objective,
    pub trials: u64,
    pub seed: u64,
    /// Trees for the mc-reencode command.
    pub trees: Vec<Vec<u32>>,
    /// Per-photon loss values for the mc-reencode command.
    pub mu: Vec<f64>,
    pub eps_0: Vec<f64>,
    pub constants: HardwareConstants,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            l_tot_km: default_l_tot(),
            eps_r: default_eps_r(),
            kappa: default_kappa(),
            objective: default_objective(),
            trials: default_trials(),
            seed: default_seed(),
            trees: default_trees(),
            mu: vec![0.01],
            eps_0: vec![1e-4, 3.33e-4],
            constants: HardwareConstants::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: RunConfig = toml::from_str(&text).context("parsing config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.l_tot_km.is_empty() || self.eps_r.is_empty() || self.kappa.is_empty() {
            bail!("l_tot_km, eps_r and kappa lists must be nonempty");
        }
        for &e in self.eps_r.iter().chain(&self.eps_0).chain(&self.mu) {
            if !(0.0..=1.0).contains(&e) {
                bail!("probability {e} outside [0, 1]");
            }
        }
        self.constants.validate()?;
        Ok(())
    }
}

fn fmt_csv_f64(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else {
        format!("{x:.6e}")
    }
}

/// Optimizer sweep over (L_tot, eps_r, kappa); returns the main CSV and the
/// homogeneous-baseline companion CSV (baseline rate multiplied by the
/// five-fold parallel-channel presentation factor).
pub fn cmd_optimize(config: &RunConfig) -> Result<(String, String)> {
    let cache = SummaryCache::new();
    let mut main_csv = String::from(OPTIMIZE_CSV_HEADER);
    main_csv.push('\n');
    let mut hom_csv = String::from("L_tot_km,skr_x5_hz,m_tot,b0,b1,b2,eps_r\n");
    for &eps_r in &config.eps_r {
        let noise = NoiseParams::from_epsilon_r(eps_r)?;
        for &l_tot in &config.l_tot_km {
            let space = SearchSpace::new(l_tot)?;
            for &kappa in &config.kappa {
                let row = match minimize(
                    &space,
                    noise,
                    kappa,
                    config.constants,
                    config.objective,
                    &cache,
                ) {
                    Ok(res) => {
                        let c = &res.config;
                        let b = c.tree.branches();
                        format!(
                            "{},{},{},{},{},{},{},{},{},{},{},ok",
                            fmt_csv_f64(l_tot),
                            fmt_csv_f64(res.skr_hz),
                            fmt_csv_f64(res.cost),
                            fmt_csv_f64(c.l0_km()),
                            c.m_ii,
                            c.m_tot,
                            b[0],
                            b[1],
                            b[2],
                            fmt_csv_f64(eps_r),
                            fmt_csv_f64(kappa)
                        )
                    }
                    Err(repeater_core::Error::NoFeasibleConfig) => format!(
                        "{},0,inf,0,0,0,0,0,0,{},{},no_feasible_config",
                        fmt_csv_f64(l_tot),
                        fmt_csv_f64(eps_r),
                        fmt_csv_f64(kappa)
                    ),
                    Err(e) => return Err(e.into()),
                };
                main_csv.push_str(&row);
                main_csv.push('\n');
            }
            match minimize_homogeneous(&space, noise, config.constants) {
                Ok(hom) => {
                    let b = hom.tree.branches();
                    writeln!(
                        hom_csv,
                        "{},{},{},{},{},{},{}",
                        fmt_csv_f64(l_tot),
                        fmt_csv_f64(5.0 * hom.skr_hz),
                        hom.m_tot,
                        b[0],
                        b[1],
                        b[2],
                        fmt_csv_f64(eps_r)
                    )?;
                }
                Err(repeater_core::Error::NoFeasibleConfig) => {
                    writeln!(hom_csv, "{},0,0,0,0,0,{}", fmt_csv_f64(l_tot), fmt_csv_f64(eps_r))?;
                }
                Err(e) => return Err(e.into()),
            }
        }
    }
    Ok((main_csv, hom_csv))
}

/// Channel summary for each (n, eps_r) pair: the per-node fidelity inputs.
pub fn cmd_channel(config: &RunConfig, n_values: &[u32]) -> Result<String> {
    let mut out = String::from("n,eps_r,alpha1,alpha2,eps_loss\n");
    for &eps_r in &config.eps_r {
        let noise = NoiseParams::from_epsilon_r(eps_r)?;
        for &n in n_values {
            let s = channel_summary(&NodeChannelParams::new(n, noise)?)?;
            writeln!(
                out,
                "{},{},{},{},{}",
                n,
                fmt_csv_f64(eps_r),
                fmt_csv_f64(s.alpha1),
                fmt_csv_f64(s.alpha2),
                fmt_csv_f64(s.eps_loss)
            )?;
        }
    }
    Ok(out)
}

/// Exact vs recursion vs naive effective error at n = 8, m_II = 125 over an
/// eps_r sweep.
pub fn cmd_validate_recursion(eps_r_values: &[f64], n: u32, m_ii: u32) -> Result<String> {
    let cache = SummaryCache::new();
    let layout = LayoutCounts::new(n * m_ii, m_ii)?;
    let mut out = String::from("eps_r,eps_eff_exact,eps_eff_recursion,eps_eff_naive\n");
    for &eps_r in eps_r_values {
        let noise = NoiseParams::from_epsilon_r(eps_r)?;
        let params = NodeChannelParams::new(n, noise)?;
        let exact = 1.0 - exact_chain_fidelity(&params, m_ii)?;
        let recursion = effective_error(&cache, noise, layout, 0)?;
        let naive = naive_effective_error(cache.summary(n, noise)?.alpha1, m_ii);
        writeln!(
            out,
            "{},{},{},{}",
            fmt_csv_f64(eps_r),
            fmt_csv_f64(exact),
            fmt_csv_f64(recursion),
            fmt_csv_f64(naive)
        )?;
    }
    Ok(out)
}

/// Monte Carlo re-encoding estimates, one row per (tree, mu, eps_0).
pub fn cmd_mc_reencode(config: &RunConfig) -> Result<String> {
    let mut out = String::from(
        "b0,b1,b2,mu,eps_0,trials,success_rate,success_sigma,x_rate,z_rate,y_rate,eps_tree,eps_tree_sigma,eps_r_estimate\n",
    );
    for tree in &config.trees {
        let t = BranchingVector::new(tree.clone())?;
        for &mu in &config.mu {
            for &eps0 in &config.eps_0 {
                let est = simulate_decode(&t, mu, eps0, config.trials, config.seed)?;
                let p_tree = 1.0 - 4.0 * est.effective_epsilon.value / 3.0;
                let p0 = 1.0 - 4.0 * eps0 / 3.0;
                let eps_r = 0.75 * (1.0 - p0 * p0 * p_tree);
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                    tree[0],
                    tree[1],
                    tree[2],
                    fmt_csv_f64(mu),
                    fmt_csv_f64(eps0),
                    config.trials,
                    fmt_csv_f64(est.success_rate.value),
                    fmt_csv_f64(est.success_rate.sigma),
                    fmt_csv_f64(est.logical_x_rate.value),
                    fmt_csv_f64(est.logical_z_rate.value),
                    fmt_csv_f64(est.logical_y_rate.value),
                    fmt_csv_f64(est.effective_epsilon.value),
                    fmt_csv_f64(est.effective_epsilon.sigma),
                    fmt_csv_f64(eps_r)
                )?;
            }
        }
    }
    Ok(out)
}

/// Dump every correction table in a readable form.
pub fn cmd_tables() -> Result<String> {
    let mut out = String::new();
    writeln!(out, "# weight-1 corrections")?;
    for (s, p) in build_weight1_table().entries() {
        writeln!(out, "{s} {p}")?;
    }
    for k in 1..=4 {
        writeln!(out, "\n# flag triggered in sub-circuit {k}")?;
        for (s, p) in build_flagged_table(k)?.entries() {
            writeln!(out, "{s} {p}")?;
        }
    }
    for lost in 1..=5 {
        writeln!(out, "\n# erasure of qubit {lost} (clean rows)")?;
        for (s, p) in build_erasure_table(lost)?.entries() {
            writeln!(out, "{s} {p}")?;
        }
        writeln!(out, "\n# erasure of qubit {lost} (full table)")?;
        for (s, p) in build_erasure_table_full(lost)?.entries() {
            writeln!(out, "{s} {p}")?;
        }
    }
    Ok(out)
}

/// The five transmission-probability series at fixed eta_e over n = 1..50:
/// totals with 2- and 1-erasure correction, the no-erasure term, and the
/// individual 1- and 2-erasure contributions.
pub fn cmd_sweep_eta(eta_e: f64, n_max: u32) -> Result<String> {
    if !(0.0..=1.0).contains(&eta_e) {
        bail!("eta_e = {eta_e} outside [0, 1]");
    }
    let mut out =
        String::from("n,p_total_2erasure,p_total_1erasure,p_no_erasure,p_1erasure,p_2erasure\n");
    for n in 1..=n_max {
        let en = eta_e.powi(n as i32);
        let p0 = en.powi(5);
        let p1 = 5.0 * en.powi(4) * (1.0 - en);
        let p2 = 10.0 * en.powi(3) * (1.0 - en) * (1.0 - en);
        writeln!(
            out,
            "{},{},{},{},{},{}",
            n,
            fmt_csv_f64(p0 + p1 + p2),
            fmt_csv_f64(p0 + p1),
            fmt_csv_f64(p0),
            fmt_csv_f64(p1),
            fmt_csv_f64(p2)
        )?;
    }
    Ok(out)
}

/// Machine-readable record of what produced an output file.
#[derive(Debug, Serialize)]
pub struct RunManifest<'a> {
    pub command: &'a str,
    pub package_version: &'a str,
    pub seed: u64,
    pub config: &'a RunConfig,
}

pub fn write_manifest(path: &Path, command: &str, config: &RunConfig) -> Result<()> {
    let manifest = RunManifest {
        command,
        package_version: env!("CARGO_PKG_VERSION"),
        seed: config.seed,
        config,
    };
    std::fs::write(path, serde_json::to_string_pretty(&manifest)?)
        .with_context(|| format!("writing manifest {}", path.display()))?;
    Ok(())
}
