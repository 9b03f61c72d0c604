//! Secret-key-rate model: six-state key fraction, transmission probabilities
//! with erasure accounting, node timing, the full SKR sum, and the
//! tree-only homogeneous baseline.

use crate::channels::NoiseParams;
use crate::fidelity::{effective_error, LayoutCounts};
use crate::node_sim::SummaryCache;
use crate::tree_code::{eta_e, tree_generation_time, BranchingVector, LinkParams};
use crate::{Error, Result};

/// Hardware timing and loss constants. Defaults are the baseline operating
/// point: tau_ss = 100 ns, tau_ph = 1 ns, tau_meas = tau_tele = 1 us,
/// L_att = 20 km, eta_d = 0.95. All times in seconds.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct HardwareConstants {
    pub tau_ss_s: f64,
    pub tau_ph_s: f64,
    pub tau_meas_s: f64,
    pub tau_tele_s: f64,
    pub l_att_km: f64,
    pub eta_d: f64,
}

impl Default for HardwareConstants {
    fn default() -> Self {
        HardwareConstants {
            tau_ss_s: 100e-9,
            tau_ph_s: 1e-9,
            tau_meas_s: 1e-6,
            tau_tele_s: 1e-6,
            l_att_km: 20.0,
            eta_d: 0.95,
        }
    }
}

impl HardwareConstants {
    pub fn validate(&self) -> Result<()> {
        let times = [self.tau_ss_s, self.tau_ph_s, self.tau_meas_s, self.tau_tele_s];
        if times.iter().any(|&t| t <= 0.0 || !t.is_finite()) || self.l_att_km <= 0.0 {
            return Err(Error::InvalidArgument(
                "hardware times and L_att must be positive".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.eta_d) || self.eta_d == 0.0 {
            return Err(Error::InvalidArgument(format!(
                "eta_d = {} outside (0, 1]",
                self.eta_d
            )));
        }
        Ok(())
    }
}

/// One repeater-chain configuration to be rated.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NetworkConfig {
    pub l_tot_km: f64,
    pub m_tot: u32,
    pub m_ii: u32,
    pub tree: BranchingVector,
    pub noise: NoiseParams,
    pub kappa: f64,
    pub constants: HardwareConstants,
}

impl NetworkConfig {
    pub fn l0_km(&self) -> f64 {
        self.l_tot_km / self.m_tot as f64
    }

    pub fn link_params(&self) -> Result<LinkParams> {
        LinkParams::new(self.l0_km(), self.constants.l_att_km, self.constants.eta_d)
    }

    pub fn layout(&self) -> Result<LayoutCounts> {
        LayoutCounts::new(self.m_tot, self.m_ii)
    }

    /// Check the optimizer's hard constraints: L0 >= 1 km, d = 2, N <= 300.
    pub fn validate(&self) -> Result<()> {
        self.constants.validate()?;
        if self.m_tot == 0 || self.l0_km() < 1.0 {
            return Err(Error::InvalidArgument(format!(
                "L0 = {:.3} km below the 1 km floor (L_tot = {}, m_tot = {})",
                self.l0_km(),
                self.l_tot_km,
                self.m_tot
            )));
        }
        self.layout()?;
        if self.tree.depth() != 2 {
            return Err(Error::UnsupportedDepth {
                got: self.tree.depth(),
                expected: 2,
            });
        }
        if self.tree.photon_count() > 300 {
            return Err(Error::InvalidArgument(format!(
                "tree {} has {} photons, above the 300 cap",
                self.tree,
                self.tree.photon_count()
            )));
        }
        if self.kappa < 0.0 || !self.kappa.is_finite() {
            return Err(Error::InvalidArgument("kappa must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Binary entropy in bits, with h(0) = h(1) = 0 by continuity.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

/// Asymptotic six-state secret key fraction at QBER Q:
/// f = max((1-Q)[1 - h((1 - 3Q/2)/(1-Q))] - h(Q), 0).
pub fn secret_key_fraction(q: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidArgument(format!("QBER {q} outside [0, 1]")));
    }
    if q >= 1.0 {
        return Ok(0.0);
    }
    let arg = (1.0 - 1.5 * q) / (1.0 - q);
    if !(0.0..=1.0).contains(&arg) {
        // Beyond this point the raw expression is already negative.
        return Ok(0.0);
    }
    Ok(((1.0 - q) * (1.0 - binary_entropy(arg)) - binary_entropy(q)).max(0.0))
}

/// Probability that transmission succeeds with 1-erasure errors at `i`
/// specific TYPE II nodes of an evenly spaced chain (per-combination, i.e.
/// without the binomial factor):
/// [eta_e^{5n}]^{m_II - i} [5 eta_e^{4n}(1 - eta_e^n)]^i.
pub fn p_trans(eta_e: f64, n: u32, m_ii: u32, i: u32) -> Result<f64> {
    if i > m_ii {
        return Err(Error::InvalidArgument(format!(
            "erasure count {i} exceeds m_II = {m_ii}"
        )));
    }
    if !(0.0..=1.0).contains(&eta_e) {
        return Err(Error::InvalidArgument(format!(
            "eta_e = {eta_e} outside [0, 1]"
        )));
    }
    let en = eta_e.powi(n as i32);
    let full = en.powi(5);
    let one_loss = 5.0 * en.powi(4) * (1.0 - en);
    Ok((full.powi((m_ii - i) as i32) * one_loss.powi(i as i32)).clamp(0.0, 1.0))
}

/// tau_tot = tau_tree + 14 tau_ss + 26 tau_tele + 8 tau_meas: worst-case
/// processing time of one TYPE II node (all flagged plus all unflagged
/// sub-circuits).
pub fn node_processing_time(tree_time_s: f64, c: &HardwareConstants) -> f64 {
    tree_time_s + 14.0 * c.tau_ss_s + 26.0 * c.tau_tele_s + 8.0 * c.tau_meas_s
}

/// Sub-circuit durations tau_f1..tau_f4 and the unflagged block tau_nf.
fn subcircuit_times(c: &HardwareConstants) -> ([f64; 4], f64) {
    let f1 = 3.0 * c.tau_ss_s + 3.0 * c.tau_tele_s + c.tau_meas_s;
    let f2 = 2.0 * c.tau_ss_s + 4.0 * c.tau_tele_s + c.tau_meas_s;
    let nf = 3.0 * c.tau_ss_s + 13.0 * c.tau_tele_s + 4.0 * c.tau_meas_s;
    ([f1, f2, f1, f1], nf)
}

/// Expected syndrome-sequence time: p[4] is the no-trigger probability
/// (all four flagged sub-circuits pass), p[k-1] for k = 1..4 the probability
/// of exiting into the unflagged block after sub-circuit k:
/// T_f = p5 sum_i tau_fi + sum_k p_k (tau_nf + sum_{l<=k} tau_fl).
pub fn expected_ft_time(p: &[f64; 5], c: &HardwareConstants) -> Result<f64> {
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-9 || p.iter().any(|&x| x < 0.0) {
        return Err(Error::InvalidArgument(format!(
            "branch probabilities must sum to 1, got {total}"
        )));
    }
    let (tau_f, tau_nf) = subcircuit_times(c);
    let mut t = p[4] * tau_f.iter().sum::<f64>();
    let mut prefix = 0.0;
    for k in 0..4 {
        prefix += tau_f[k];
        t += p[k] * (tau_nf + prefix);
    }
    Ok(t)
}

/// One summand of the SKR sum.
#[derive(Debug, Clone, Copy)]
pub struct SkrTerm {
    pub i: u32,
    /// Binomial-weighted transmission probability C(m_II, i) p_trans.
    pub weight: f64,
    pub eps_eff: f64,
    pub fraction: f64,
}

#[derive(Debug, Clone)]
pub struct SkrBreakdown {
    pub skr_hz: f64,
    pub tau_tot_s: f64,
    pub eta_e: f64,
    pub terms: Vec<SkrTerm>,
}

/// ln n! for n = 0..=max.
fn ln_factorials(max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(max + 1);
    out.push(0.0);
    for n in 1..=max {
        out.push(out[n - 1] + (n as f64).ln());
    }
    out
}

fn ln_binomial(lf: &[f64], n: u32, k: u32) -> f64 {
    lf[n as usize] - lf[k as usize] - lf[(n - k) as usize]
}

/// q^k as exp(k ln q) with the q = 0 edge handled exactly; used to combine
/// huge binomials with tiny probabilities without overflow.
fn ln_pow(q: f64, k: u32) -> Option<f64> {
    if k == 0 {
        return Some(0.0);
    }
    if q <= 0.0 {
        return None;
    }
    Some(k as f64 * q.ln())
}

/// Per-segment success and 1-erasure probabilities at n links.
fn segment_probs(eta: f64, n: u32) -> (f64, f64) {
    let en = eta.powi(n as i32);
    (en.powi(5), 5.0 * en.powi(4) * (1.0 - en))
}

/// Total weight of the i-erasure term, including the multiplicity over node
/// choices. Even spacing: C(m_II, i) q0^{m_II - i} q1^i. Uneven spacing
/// distributes the erasures exactly over the m_II - 1 segments of n' links
/// and the single segment of n'' links.
fn erasure_weight(lf: &[f64], eta: f64, layout: &LayoutCounts, i: u32) -> f64 {
    let m_ii = layout.m_ii();
    if layout.is_even_split() {
        let (q0, q1) = segment_probs(eta, layout.n_prime());
        return match (ln_pow(q0, m_ii - i), ln_pow(q1, i)) {
            (Some(a), Some(b)) => (ln_binomial(lf, m_ii, i) + a + b).exp(),
            _ => 0.0,
        };
    }
    let (q0p, q1p) = segment_probs(eta, layout.n_prime());
    let (q0d, q1d) = segment_probs(eta, layout.n_dblprime());
    let mut w = 0.0;
    // Erasure in i of the n' segments, none in the n'' segment.
    if i <= m_ii - 1 {
        if let (Some(a), Some(b), Some(c)) =
            (ln_pow(q0p, m_ii - 1 - i), ln_pow(q1p, i), ln_pow(q0d, 1))
        {
            w += (ln_binomial(lf, m_ii - 1, i) + a + b + c).exp();
        }
    }
    // Erasure in i - 1 of the n' segments plus the n'' segment.
    if i >= 1 {
        if let (Some(a), Some(b), Some(c)) =
            (ln_pow(q0p, m_ii - i), ln_pow(q1p, i - 1), ln_pow(q1d, 1))
        {
            w += (ln_binomial(lf, m_ii - 1, i - 1) + a + b + c).exp();
        }
    }
    w
}

/// Binomial-weighted erasure-term probabilities of one layout, with the
/// ln-factorial table built once so the optimizer can evaluate many trees
/// against the same layout cheaply.
pub struct TransmissionModel {
    layout: LayoutCounts,
    lf: Vec<f64>,
}

impl TransmissionModel {
    pub fn new(layout: LayoutCounts) -> Self {
        let lf = ln_factorials(layout.m_ii() as usize);
        TransmissionModel { layout, lf }
    }

    /// C(m_II, i) p_trans(i) at the given per-link tree efficiency.
    pub fn weight(&self, eta: f64, i: u32) -> f64 {
        erasure_weight(&self.lf, eta, &self.layout, i)
    }
}

/// Secret key rate of one configuration:
/// SKR = tau_tot^{-1} sum_i C(m_II, i) f_{m_II, i} p_trans(m_II, i),
/// with f evaluated at Q = 2 eps_eff(i)/3.
pub fn skr(config: &NetworkConfig, cache: &SummaryCache) -> Result<SkrBreakdown> {
    config.validate()?;
    let layout = config.layout()?;
    let link = config.link_params()?;
    let eta = eta_e(&config.tree, link.mu())?;
    let tau_tree = tree_generation_time(
        &config.tree,
        config.constants.tau_ph_s,
        config.constants.tau_ss_s,
    )?;
    let tau_tot = node_processing_time(tau_tree, &config.constants);
    let model = TransmissionModel::new(layout);
    let mut terms = Vec::new();
    let mut total = 0.0;
    for i in 0..=layout.m_ii() {
        let eps_eff = effective_error(cache, config.noise, layout, i)?;
        let fraction = secret_key_fraction((2.0 * eps_eff / 3.0).min(1.0))?;
        let weight = model.weight(eta, i);
        total += weight * fraction;
        terms.push(SkrTerm {
            i,
            weight,
            eps_eff,
            fraction,
        });
        // The fraction is nonincreasing in i (each erasure correction adds
        // error); once it hits zero every later term contributes zero.
        if fraction == 0.0 {
            break;
        }
    }
    Ok(SkrBreakdown {
        skr_hz: total / tau_tot,
        tau_tot_s: tau_tot,
        eta_e: eta,
        terms,
    })
}

/// Baseline: a homogeneous chain of m_tot TYPE I nodes that only re-encode
/// the tree, with no outer code. The effective error composes m_tot
/// depolarizing re-encodings: eps_h = (3/4)(1 - (1 - 4 eps_r/3)^{m_tot});
/// the cycle time is the tree generation time alone.
pub fn homogeneous_skr(
    l_tot_km: f64,
    m_tot: u32,
    tree: &BranchingVector,
    noise: &NoiseParams,
    constants: &HardwareConstants,
) -> Result<f64> {
    if m_tot == 0 {
        return Err(Error::InvalidArgument("need m_tot >= 1".into()));
    }
    let link = LinkParams::new(
        l_tot_km / m_tot as f64,
        constants.l_att_km,
        constants.eta_d,
    )?;
    let eta = eta_e(tree, link.mu())?;
    let tau_tree = tree_generation_time(tree, constants.tau_ph_s, constants.tau_ss_s)?;
    let eps_h = 0.75 * (1.0 - (1.0 - 4.0 * noise.epsilon_r / 3.0).powi(m_tot as i32));
    let fraction = secret_key_fraction((2.0 * eps_h / 3.0).clamp(0.0, 1.0))?;
    Ok(fraction * eta.powi(m_tot as i32) / tau_tree)
}
