//! Analytics of the photonic tree-cluster inner code: branching vectors,
//! photon counts, the per-link transmission probability eta_e, and the tree
//! generation time.

use crate::{Error, Result};

/// Per-level child counts [b0, b1, ..., bd] of a tree-cluster state.
#[derive(Debug, Clone, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct BranchingVector {
    branches: Vec<u32>,
}

impl BranchingVector {
    pub fn new(branches: Vec<u32>) -> Result<Self> {
        if branches.is_empty() || branches.iter().any(|&b| b == 0) {
            return Err(Error::InvalidArgument(format!(
                "branching vector entries must be >= 1, got {branches:?}"
            )));
        }
        Ok(BranchingVector { branches })
    }

    pub fn branches(&self) -> &[u32] {
        &self.branches
    }

    /// b_k, or 0 beyond the last level (the recursion's boundary convention).
    pub fn branch_or_zero(&self, k: usize) -> u32 {
        self.branches.get(k).copied().unwrap_or(0)
    }

    pub fn depth(&self) -> usize {
        self.branches.len() - 1
    }

    /// Total photon number N = sum_{i=0..d} prod_{j=0..i} b_j.
    pub fn photon_count(&self) -> u64 {
        let mut total = 0u64;
        let mut prod = 1u64;
        for &b in &self.branches {
            prod *= b as u64;
            total += prod;
        }
        total
    }
}

impl std::fmt::Display for BranchingVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[")?;
        for (i, b) in self.branches.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{b}")?;
        }
        write!(f, "]")
    }
}

/// Inter-node link parameters entering the effective loss mu.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LinkParams {
    /// Inter-node distance in km.
    pub l0_km: f64,
    /// Fiber attenuation length in km.
    pub l_att_km: f64,
    /// Detection efficiency.
    pub eta_d: f64,
}

impl LinkParams {
    pub fn new(l0_km: f64, l_att_km: f64, eta_d: f64) -> Result<Self> {
        if l0_km <= 0.0 || l_att_km <= 0.0 || !(0.0..=1.0).contains(&eta_d) || eta_d == 0.0 {
            return Err(Error::InvalidArgument(format!(
                "need L0 > 0, L_att > 0, 0 < eta_d <= 1; got L0 = {l0_km}, L_att = {l_att_km}, eta_d = {eta_d}"
            )));
        }
        Ok(LinkParams {
            l0_km,
            l_att_km,
            eta_d,
        })
    }

    /// Effective per-photon loss mu = 1 - exp(-L0/L_att) * eta_d.
    pub fn mu(&self) -> f64 {
        1.0 - (-self.l0_km / self.l_att_km).exp() * self.eta_d
    }
}

/// Indirect-measurement success probabilities R_k with boundary R_{d+1} = 0,
/// b_{d+1} = 0:
/// R_k = 1 - [1 - (1-mu)(1 - mu + mu R_{k+2})^{b_{k+1}}]^{b_k}.
fn r_values(t: &BranchingVector, mu: f64) -> Vec<f64> {
    let d = t.depth();
    // R_1 .. R_{d+2}; indices k beyond d+1 are 0.
    let mut r = vec![0.0f64; d + 3];
    for k in (1..=d + 1).rev() {
        let r_next = r.get(k + 2).copied().unwrap_or(0.0);
        let b_k = t.branch_or_zero(k) as f64;
        let b_next = t.branch_or_zero(k + 1) as f64;
        let inner = (1.0 - mu) * (1.0 - mu + mu * r_next).powf(b_next);
        r[k] = 1.0 - (1.0 - inner).powf(b_k);
    }
    r
}

/// Probability eta_e of successfully decoding a single tree-cluster state
/// with branching vector `t` at per-photon loss `mu`:
/// eta_e = [(1 - mu + mu R_1)^{b0} - (mu R_1)^{b0}] (1 - mu + mu R_2)^{b1}.
pub fn eta_e(t: &BranchingVector, mu: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&mu) {
        return Err(Error::InvalidArgument(format!("mu = {mu} outside [0, 1]")));
    }
    let r = r_values(t, mu);
    let b0 = t.branches()[0] as f64;
    let b1 = t.branch_or_zero(1) as f64;
    let first = (1.0 - mu + mu * r[1]).powf(b0) - (mu * r[1]).powf(b0);
    let second = (1.0 - mu + mu * r[2]).powf(b1);
    Ok((first * second).clamp(0.0, 1.0))
}

/// Generation time of one depth-2 tree:
/// tau_tree = b0 [100 + b1 (1 + b2)] tau_ph + b0 [3 + b1] tau_ss.
///
/// The second bracket's d=2 truncation (3 + b1) is a convention: the source
/// formula's ellipsis degenerates at this depth, so the nesting is cut one
/// level short of the first bracket's. Kept in this one function so the
/// convention can be swapped if needed.
pub fn tree_generation_time(t: &BranchingVector, tau_ph: f64, tau_ss: f64) -> Result<f64> {
    if t.depth() != 2 {
        return Err(Error::UnsupportedDepth {
            got: t.depth(),
            expected: 2,
        });
    }
    let [b0, b1, b2] = [t.branches()[0] as f64, t.branches()[1] as f64, t.branches()[2] as f64];
    Ok(b0 * (100.0 + b1 * (1.0 + b2)) * tau_ph + b0 * (3.0 + b1) * tau_ss)
}

/// All depth-2 branching vectors with photon count N <= `max_photons`.
/// This is the optimizer's tree candidate set (a few thousand at N <= 300).
pub fn enumerate_trees(max_photons: u64) -> Vec<BranchingVector> {
    let mut out = Vec::new();
    for b0 in 1..=max_photons as u32 {
        if b0 as u64 > max_photons {
            break;
        }
        for b1 in 1.. {
            let two_level = b0 as u64 + b0 as u64 * b1 as u64;
            if two_level + (b0 as u64 * b1 as u64) > max_photons {
                break;
            }
            for b2 in 1.. {
                let n = two_level + b0 as u64 * b1 as u64 * b2 as u64;
                if n > max_photons {
                    break;
                }
                out.push(BranchingVector::new(vec![b0, b1, b2]).expect("entries >= 1"));
            }
        }
    }
    out
}
