//! Constrained grid search over (m_tot, m_II, branching vector) minimizing
//! the dimensionless cost (or maximizing SKR), with the expensive channel
//! summaries shared across layouts through the cache.

use crate::channels::NoiseParams;
use crate::fidelity::{effective_error, LayoutCounts};
use crate::node_sim::SummaryCache;
use crate::rate::{
    homogeneous_skr, node_processing_time, secret_key_fraction, HardwareConstants, NetworkConfig,
    TransmissionModel,
};
use crate::tree_code::{enumerate_trees, eta_e, tree_generation_time, BranchingVector, LinkParams};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// Minimize the cost function with 1 <= m_II <= floor(m_tot/2).
    Cost,
    /// Maximize SKR over the same layout space.
    MaxSkr,
    /// Minimize cost with every node a TYPE II node (m_II = m_tot, n = 1).
    CostTypeIiOnly,
}

/// Candidate grid for one total distance.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SearchSpace {
    pub l_tot_km: f64,
    /// Tree photon cap N.
    pub max_photons: u64,
    /// m_tot values up to this bound are enumerated exhaustively; beyond it
    /// a geometric grid plus local refinement is used.
    pub dense_m_tot: u32,
    /// Segments longer than this many links are treated as infeasible
    /// rather than simulated; the transmission error there is far past the
    /// key-rate threshold for every noise level of interest.
    pub max_links: u32,
}

impl SearchSpace {
    pub fn new(l_tot_km: f64) -> Result<Self> {
        if l_tot_km < 2.0 {
            return Err(Error::InvalidArgument(format!(
                "L_tot = {l_tot_km} km leaves no room for a repeater (need >= 2 km)"
            )));
        }
        Ok(SearchSpace {
            l_tot_km,
            max_photons: 300,
            dense_m_tot: 500,
            max_links: 256,
        })
    }

    /// Largest m_tot honoring L0 >= 1 km.
    fn m_tot_cap(&self) -> u32 {
        self.l_tot_km.floor() as u32
    }

    fn m_tot_candidates(&self) -> Vec<u32> {
        let cap = self.m_tot_cap();
        let mut out: Vec<u32> = (1..=cap.min(self.dense_m_tot)).collect();
        if cap > self.dense_m_tot {
            let mut m = self.dense_m_tot as f64;
            loop {
                m *= 1.08;
                let mi = (m.round() as u32).min(cap);
                out.push(mi);
                if mi == cap {
                    break;
                }
            }
        }
        out.dedup();
        out
    }
}

/// m_II grid for one m_tot: exhaustive when small, otherwise a dense head
/// plus geometric sampling (the refinement pass fills in around the
/// incumbent).
fn m_ii_candidates(m_tot: u32, objective: Objective) -> Vec<u32> {
    if objective == Objective::CostTypeIiOnly {
        return vec![m_tot];
    }
    let hi = m_tot / 2;
    if hi == 0 {
        return Vec::new();
    }
    if hi <= 48 {
        return (1..=hi).collect();
    }
    let mut out: Vec<u32> = (1..=32).collect();
    let mut m = 32.0f64;
    loop {
        m *= 1.15;
        let mi = (m.round() as u32).min(hi);
        out.push(mi);
        if mi == hi {
            break;
        }
    }
    out.dedup();
    out
}

#[derive(Debug, Clone)]
pub struct OptimizationResult {
    pub config: NetworkConfig,
    pub cost: f64,
    pub skr_hz: f64,
    pub objective: Objective,
}

/// C = SKR^{-1} (L_att/(tau_ph L_tot)) (m_I + kappa m_II); infinite when
/// the configuration yields no key.
pub fn cost(config: &NetworkConfig, skr_hz: f64) -> f64 {
    if skr_hz <= 0.0 {
        return f64::INFINITY;
    }
    let m_i = (config.m_tot - config.m_ii) as f64;
    let prefactor = config.constants.l_att_km / (config.constants.tau_ph_s * config.l_tot_km);
    prefactor * (m_i + config.kappa * config.m_ii as f64) / skr_hz
}

struct Candidate {
    config: NetworkConfig,
    cost: f64,
    skr_hz: f64,
}

/// True when `a` should replace `b` as the incumbent.
fn better(a: &Candidate, b: &Candidate, objective: Objective) -> bool {
    let primary = match objective {
        Objective::MaxSkr => b
            .skr_hz
            .partial_cmp(&a.skr_hz)
            .unwrap_or(std::cmp::Ordering::Equal),
        _ => a
            .cost
            .partial_cmp(&b.cost)
            .unwrap_or(std::cmp::Ordering::Equal),
    };
    let secondary = match objective {
        Objective::MaxSkr => a
            .cost
            .partial_cmp(&b.cost)
            .unwrap_or(std::cmp::Ordering::Equal),
        _ => b
            .skr_hz
            .partial_cmp(&a.skr_hz)
            .unwrap_or(std::cmp::Ordering::Equal),
    };
    primary
        .then(secondary)
        .then(a.config.m_tot.cmp(&b.config.m_tot))
        .then(a.config.m_ii.cmp(&b.config.m_ii))
        .then(a.config.tree.branches().cmp(b.config.tree.branches()))
        .is_lt()
}

struct Searcher<'a> {
    space: &'a SearchSpace,
    noise: NoiseParams,
    kappa: f64,
    constants: HardwareConstants,
    objective: Objective,
    cache: &'a SummaryCache,
    trees: Vec<BranchingVector>,
    tau_tot: Vec<f64>,
    best: Option<Candidate>,
}

impl<'a> Searcher<'a> {
    fn new(
        space: &'a SearchSpace,
        noise: NoiseParams,
        kappa: f64,
        constants: HardwareConstants,
        objective: Objective,
        cache: &'a SummaryCache,
    ) -> Result<Self> {
        constants.validate()?;
        let trees = enumerate_trees(space.max_photons);
        let tau_tot = trees
            .iter()
            .map(|t| {
                tree_generation_time(t, constants.tau_ph_s, constants.tau_ss_s)
                    .map(|tt| node_processing_time(tt, &constants))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Searcher {
            space,
            noise,
            kappa,
            constants,
            objective,
            cache,
            trees,
            tau_tot,
            best: None,
        })
    }

    /// Secret-key fractions f_i for i = 0.. until they vanish; empty when
    /// even the erasure-free term is below threshold.
    fn active_fractions(&self, layout: LayoutCounts) -> Result<Vec<f64>> {
        let mut out = Vec::new();
        for i in 0..=layout.m_ii() {
            let eps = effective_error(self.cache, self.noise, layout, i)?;
            let f = secret_key_fraction((2.0 * eps / 3.0).min(1.0))?;
            if f == 0.0 {
                break;
            }
            out.push(f);
        }
        Ok(out)
    }

    fn evaluate_layout(&mut self, m_tot: u32, m_ii: u32) -> Result<()> {
        let layout = LayoutCounts::new(m_tot, m_ii)?;
        if layout.n_prime() > self.space.max_links || layout.n_dblprime() > self.space.max_links {
            return Ok(());
        }
        let fractions = match self.active_fractions(layout) {
            Ok(f) => f,
            // Noise past the recursion's validity cannot yield key anyway.
            Err(Error::DegenerateRecursion { .. }) => return Ok(()),
            Err(e) => return Err(e),
        };
        if fractions.is_empty() {
            return Ok(());
        }
        let l0 = self.space.l_tot_km / m_tot as f64;
        let link = LinkParams::new(l0, self.constants.l_att_km, self.constants.eta_d)?;
        let mu = link.mu();
        let model = TransmissionModel::new(layout);
        let layout_cost_numer = (m_tot - m_ii) as f64 + self.kappa * m_ii as f64;
        let prefactor = self.constants.l_att_km / (self.constants.tau_ph_s * self.space.l_tot_km);
        for ti in 0..self.trees.len() {
            let tau_tot = self.tau_tot[ti];
            // SKR <= 1/tau_tot bounds the achievable cost and rate; skip
            // trees that cannot beat the incumbent even at perfect
            // transmission.
            if let Some(best) = &self.best {
                match self.objective {
                    Objective::MaxSkr => {
                        if 1.0 / tau_tot <= best.skr_hz {
                            continue;
                        }
                    }
                    _ => {
                        if prefactor * layout_cost_numer * tau_tot >= best.cost {
                            continue;
                        }
                    }
                }
            }
            let eta = eta_e(&self.trees[ti], mu)?;
            let mut total = 0.0;
            for (i, f) in fractions.iter().enumerate() {
                total += model.weight(eta, i as u32) * f;
            }
            if total <= 0.0 {
                continue;
            }
            let skr_hz = total / tau_tot;
            let config = NetworkConfig {
                l_tot_km: self.space.l_tot_km,
                m_tot,
                m_ii,
                tree: self.trees[ti].clone(),
                noise: self.noise,
                kappa: self.kappa,
                constants: self.constants,
            };
            let c = cost(&config, skr_hz);
            let cand = Candidate {
                config,
                cost: c,
                skr_hz,
            };
            if self
                .best
                .as_ref()
                .map_or(true, |b| better(&cand, b, self.objective))
            {
                self.best = Some(cand);
            }
        }
        Ok(())
    }

    fn evaluate_m_tot(&mut self, m_tot: u32) -> Result<()> {
        for m_ii in m_ii_candidates(m_tot, self.objective) {
            self.evaluate_layout(m_tot, m_ii)?;
        }
        Ok(())
    }

    /// Dense re-scan of the m_II window around the incumbent, plus
    /// neighboring m_tot values the geometric grid skipped.
    fn refine(&mut self, visited: &[u32]) -> Result<()> {
        let Some(best) = &self.best else {
            return Ok(());
        };
        let (m_tot0, m_ii0) = (best.config.m_tot, best.config.m_ii);
        let cap = self.space.m_tot_cap();
        let lo = m_tot0.saturating_sub(6).max(1);
        let hi = (m_tot0 + 6).min(cap);
        for m_tot in lo..=hi {
            let ii_hi = if self.objective == Objective::CostTypeIiOnly {
                m_tot
            } else {
                m_tot / 2
            };
            let ii_lo = m_ii0.saturating_sub(12).max(1);
            for m_ii in ii_lo..=(m_ii0 + 12).min(ii_hi) {
                self.evaluate_layout(m_tot, m_ii)?;
            }
            if !visited.contains(&m_tot) {
                self.evaluate_m_tot(m_tot)?;
            }
        }
        Ok(())
    }
}

/// Exhaustive-with-pruning search for the best configuration under the given
/// objective. Deterministic: ties break toward lower cost, then higher SKR,
/// then smaller m_tot, then lexicographically smaller tree.
pub fn minimize(
    space: &SearchSpace,
    noise: NoiseParams,
    kappa: f64,
    constants: HardwareConstants,
    objective: Objective,
    cache: &SummaryCache,
) -> Result<OptimizationResult> {
    let mut searcher = Searcher::new(space, noise, kappa, constants, objective, cache)?;
    let candidates = space.m_tot_candidates();
    for &m_tot in &candidates {
        searcher.evaluate_m_tot(m_tot)?;
    }
    searcher.refine(&candidates)?;
    let best = searcher.best.ok_or(Error::NoFeasibleConfig)?;
    Ok(OptimizationResult {
        config: best.config,
        cost: best.cost,
        skr_hz: best.skr_hz,
        objective,
    })
}

#[derive(Debug, Clone)]
pub struct HomogeneousResult {
    pub skr_hz: f64,
    pub m_tot: u32,
    pub tree: BranchingVector,
}

/// Best tree-only baseline chain: maximize the homogeneous SKR over m_tot
/// and tree. The five-fold presentation factor for parallel channels is
/// applied by consumers, never here.
pub fn minimize_homogeneous(
    space: &SearchSpace,
    noise: NoiseParams,
    constants: HardwareConstants,
) -> Result<HomogeneousResult> {
    constants.validate()?;
    let trees = enumerate_trees(space.max_photons);
    let mut best: Option<HomogeneousResult> = None;
    for m_tot in space.m_tot_candidates() {
        let l0 = space.l_tot_km / m_tot as f64;
        if l0 < 1.0 {
            continue;
        }
        for tree in &trees {
            let skr = homogeneous_skr(space.l_tot_km, m_tot, tree, &noise, &constants)?;
            let replace = match &best {
                None => skr > 0.0,
                Some(b) => {
                    skr > b.skr_hz
                        || (skr == b.skr_hz
                            && (m_tot, tree.branches()) < (b.m_tot, b.tree.branches()))
                }
            };
            if replace {
                best = Some(HomogeneousResult {
                    skr_hz: skr,
                    m_tot,
                    tree: tree.clone(),
                });
            }
        }
    }
    best.ok_or(Error::NoFeasibleConfig)
}
