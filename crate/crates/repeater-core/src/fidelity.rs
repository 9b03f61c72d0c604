//! Effective-error model along a chain of TYPE II nodes: the two-term
//! fidelity recurrence, its closed form, and the erasure-aware effective
//! error for even and uneven node spacings.

use crate::channels::NoiseParams;
use crate::node_sim::{ChannelSummary, SummaryCache};
use crate::{Error, Result};

/// Node counts of one repeater layout. `m_tot` counts all nodes after the
/// start node; `m_ii` of them run syndrome extraction. The uneven-spacing
/// split puts `m_ii - 1` segments of `n_prime` links plus one segment of
/// `n_dblprime` links.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayoutCounts {
    m_tot: u32,
    m_ii: u32,
}

impl LayoutCounts {
    pub fn new(m_tot: u32, m_ii: u32) -> Result<Self> {
        if m_tot == 0 || m_ii == 0 || m_ii > m_tot {
            return Err(Error::InvalidArgument(format!(
                "need 1 <= m_II <= m_tot, got m_II = {m_ii}, m_tot = {m_tot}"
            )));
        }
        Ok(LayoutCounts { m_tot, m_ii })
    }

    pub fn m_tot(&self) -> u32 {
        self.m_tot
    }

    pub fn m_ii(&self) -> u32 {
        self.m_ii
    }

    pub fn is_even_split(&self) -> bool {
        self.m_tot % self.m_ii == 0
    }

    /// n' = floor(m_tot / m_II).
    pub fn n_prime(&self) -> u32 {
        self.m_tot / self.m_ii
    }

    /// n'' = m_tot - n'(m_II - 1); the leftover segment length. Equals n'
    /// exactly when the split is even.
    pub fn n_dblprime(&self) -> u32 {
        self.m_tot - self.n_prime() * (self.m_ii - 1)
    }
}

/// alpha' = (alpha2 - alpha1^2)/(1 - alpha1), the conditional second-step
/// fidelity entering the recurrence.
fn alpha_prime(alpha1: f64, alpha2: f64) -> f64 {
    (alpha2 - alpha1 * alpha1) / (1.0 - alpha1)
}

/// 2x2 matrix power by squaring.
fn mat2_pow(mut m: [[f64; 2]; 2], mut e: u32) -> [[f64; 2]; 2] {
    let mut acc = [[1.0, 0.0], [0.0, 1.0]];
    let mul = |a: &[[f64; 2]; 2], b: &[[f64; 2]; 2]| {
        [
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ]
    };
    while e > 0 {
        if e & 1 == 1 {
            acc = mul(&acc, &m);
        }
        m = mul(&m, &m);
        e >>= 1;
    }
    acc
}

/// Chain fidelity F_m from the two-term recurrence
/// a_m = alpha1 a_{m-1} + (1 - alpha1) alpha' a_{m-2}, a_0 = 1, a_1 = alpha1,
/// evaluated via the companion-matrix power. This avoids the catastrophic
/// cancellation of the explicit closed form when zeta is small.
pub fn fidelity_closed_form(alpha1: f64, alpha2: f64, m: u32) -> Result<f64> {
    let zeta_sq = 4.0 * alpha2 - 3.0 * alpha1 * alpha1;
    if zeta_sq < 0.0 {
        return Err(Error::DegenerateRecursion { zeta_sq });
    }
    if m == 0 {
        return Ok(1.0);
    }
    if 1.0 - alpha1 < 1e-14 {
        return Ok(1.0);
    }
    let ap = alpha_prime(alpha1, alpha2);
    let companion = [[alpha1, (1.0 - alpha1) * ap], [1.0, 0.0]];
    let p = mat2_pow(companion, m - 1);
    // (a_m, a_{m-1}) = companion^{m-1} (a_1, a_0).
    Ok((p[0][0] * alpha1 + p[0][1]).clamp(0.0, 1.0))
}

/// Explicit solution of the same recurrence:
/// F = [(alpha1 + zeta)^{m+1} - (alpha1 - zeta)^{m+1}] / (2^{m+1} zeta) with
/// zeta = sqrt(4 alpha2 - 3 alpha1^2). Kept as a cross-check path; use
/// `fidelity_closed_form` for production evaluation.
pub fn fidelity_explicit(alpha1: f64, alpha2: f64, m: u32) -> Result<f64> {
    let zeta_sq = 4.0 * alpha2 - 3.0 * alpha1 * alpha1;
    if zeta_sq < 0.0 {
        return Err(Error::DegenerateRecursion { zeta_sq });
    }
    if m == 0 {
        return Ok(1.0);
    }
    let zeta = zeta_sq.sqrt();
    if zeta < 1e-9 {
        // Degenerate-root limit of the quotient.
        return Ok(((m as f64 + 1.0) * alpha1.powi(m as i32) / 2f64.powi(m as i32)).clamp(0.0, 1.0));
    }
    let mp1 = m as i32 + 1;
    let val = ((alpha1 + zeta).powi(mp1) - (alpha1 - zeta).powi(mp1)) / (2f64.powi(mp1) * zeta);
    Ok(val.clamp(0.0, 1.0))
}

/// Direct iteration of the recurrence; the test oracle for both closed
/// forms.
pub fn fidelity_iterated(alpha1: f64, alpha2: f64, m: u32) -> Result<f64> {
    let zeta_sq = 4.0 * alpha2 - 3.0 * alpha1 * alpha1;
    if zeta_sq < 0.0 {
        return Err(Error::DegenerateRecursion { zeta_sq });
    }
    if m == 0 {
        return Ok(1.0);
    }
    if 1.0 - alpha1 < 1e-14 {
        return Ok(1.0);
    }
    let ap = alpha_prime(alpha1, alpha2);
    let (mut prev2, mut prev1) = (1.0, alpha1);
    for _ in 1..m {
        let next = alpha1 * prev1 + (1.0 - alpha1) * ap * prev2;
        prev2 = prev1;
        prev1 = next;
    }
    Ok(prev1.clamp(0.0, 1.0))
}

/// Effective end-to-end error with `i` erasure-corrected nodes. Nodes that
/// corrected an erasure contribute the factor (1 - eps_loss) and drop out of
/// the fidelity recurrence (an erased tree cannot be recovered after one
/// failed attempt, so its node restarts the chain's error budget).
pub fn effective_error(
    cache: &SummaryCache,
    noise: NoiseParams,
    layout: LayoutCounts,
    i: u32,
) -> Result<f64> {
    let m_ii = layout.m_ii();
    if i > m_ii {
        return Err(Error::InvalidArgument(format!(
            "erasure count {i} exceeds m_II = {m_ii}"
        )));
    }
    if layout.is_even_split() {
        let s = cache.summary(layout.n_prime(), noise)?;
        let f = fidelity_closed_form(s.alpha1, s.alpha2, m_ii - i)?;
        return Ok((1.0 - (1.0 - s.eps_loss).powi(i as i32) * f).clamp(0.0, 1.0));
    }
    let sp = cache.summary(layout.n_prime(), noise)?;
    let sd = cache.summary(layout.n_dblprime(), noise)?;
    if i == m_ii {
        let val = 1.0 - (1.0 - sp.eps_loss).powi(i as i32 - 1) * (1.0 - sd.eps_loss);
        return Ok(val.clamp(0.0, 1.0));
    }
    let f_prime = fidelity_closed_form(sp.alpha1, sp.alpha2, m_ii - 1 - i)?;
    let f_dbl = fidelity_closed_form(sd.alpha1, sd.alpha2, 1)?;
    let val = 1.0 - (1.0 - sp.eps_loss).powi(i as i32) * f_prime * f_dbl;
    Ok(val.clamp(0.0, 1.0))
}

/// Same, with channel summaries supplied directly (used when the summaries
/// come from somewhere other than the shared cache, e.g. exact-chain
/// comparisons).
pub fn effective_error_from_summaries(
    s_prime: &ChannelSummary,
    s_dbl: &ChannelSummary,
    layout: LayoutCounts,
    i: u32,
) -> Result<f64> {
    let m_ii = layout.m_ii();
    if i > m_ii {
        return Err(Error::InvalidArgument(format!(
            "erasure count {i} exceeds m_II = {m_ii}"
        )));
    }
    if layout.is_even_split() {
        let f = fidelity_closed_form(s_prime.alpha1, s_prime.alpha2, m_ii - i)?;
        return Ok((1.0 - (1.0 - s_prime.eps_loss).powi(i as i32) * f).clamp(0.0, 1.0));
    }
    if i == m_ii {
        let val = 1.0 - (1.0 - s_prime.eps_loss).powi(i as i32 - 1) * (1.0 - s_dbl.eps_loss);
        return Ok(val.clamp(0.0, 1.0));
    }
    let f_prime = fidelity_closed_form(s_prime.alpha1, s_prime.alpha2, m_ii - 1 - i)?;
    let f_dbl = fidelity_closed_form(s_dbl.alpha1, s_dbl.alpha2, 1)?;
    let val = 1.0 - (1.0 - s_prime.eps_loss).powi(i as i32) * f_prime * f_dbl;
    Ok(val.clamp(0.0, 1.0))
}

/// Single-term approximation obtained by dropping the memory term
/// (alpha' = 0): 1 - alpha1^m. Overestimates the error, by about an order of
/// magnitude in the low-noise regime.
pub fn naive_effective_error(alpha1: f64, m: u32) -> f64 {
    (1.0 - alpha1.powi(m as i32)).clamp(0.0, 1.0)
}
