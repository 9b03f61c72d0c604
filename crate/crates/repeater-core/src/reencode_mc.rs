//! Monte Carlo Pauli-frame simulation of tree-code decoding under photon
//! loss and depolarizing noise. Serves two roles: a loss-only oracle that
//! must reproduce the analytic eta_e, and an estimate of the effective
//! re-encoding channel confirming eps_r ~ 3 eps_0.
//!
//! Full state-vector simulation is out of reach for trees with hundreds of
//! photons; a Pauli frame suffices because every noise process here is
//! Pauli or loss and every operation is Clifford.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::tree_code::BranchingVector;
use crate::{Error, Result};

/// A Monte Carlo probability with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimate {
    pub value: f64,
    pub sigma: f64,
}

impl RateEstimate {
    fn from_counts(hits: u64, trials: u64) -> Self {
        let p = hits as f64 / trials as f64;
        RateEstimate {
            value: p,
            sigma: (p * (1.0 - p) / trials as f64).sqrt(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct McEstimate {
    pub trials: u64,
    pub success_rate: RateEstimate,
    /// Logical flip rates conditioned on decode success.
    pub logical_x_rate: RateEstimate,
    pub logical_z_rate: RateEstimate,
    pub logical_y_rate: RateEstimate,
    /// Total error probability of the tree channel under the depolarizing
    /// fit, eps = (3/4)(1 - p_hat) = px + py + pz.
    pub effective_epsilon: RateEstimate,
}

/// Per-photon sampled state for one trial.
#[derive(Clone, Copy, Default)]
struct PhotonState {
    lost: bool,
    x: bool,
    z: bool,
}

fn sample_photon(rng: &mut ChaCha12Rng, mu: f64, eps0: f64) -> PhotonState {
    let mut p = PhotonState {
        lost: rng.gen::<f64>() < mu,
        ..Default::default()
    };
    if eps0 > 0.0 && rng.gen::<f64>() < eps0 {
        match rng.gen_range(0..3u8) {
            0 => p.x = true,
            1 => {
                p.x = true;
                p.z = true;
            }
            _ => p.z = true,
        }
    }
    p
}

/// Majority vote over outcome parities; ties (including no votes) decide
/// "no flip".
fn majority(votes: &[bool]) -> bool {
    let flips = votes.iter().filter(|&&v| v).count();
    2 * flips > votes.len()
}

/// Decode outcome of one sampled tree.
enum TrialOutcome {
    Erasure,
    Decoded { x_flip: bool, z_flip: bool },
}

/// One decode attempt on a depth-2 tree [b0, b1, b2]. Photons live on three
/// levels below the root: top photons u_i (i < b0), their children v_ij
/// (j < b1), and leaves w_ijl (l < b2).
///
/// Success requires the same pattern the analytic eta_e counts: a surviving
/// top photon s for heralded storage, a Z outcome for every other top photon
/// (directly, or indirectly through a child that survives along with all of
/// its leaves), and a Z outcome for every child of s (directly or through a
/// surviving leaf).
///
/// The logical frame on the re-encoded qubit:
///   z_flip = x_s XOR parity of the chosen Z outcomes of the other u_i,
///   x_flip = z_s XOR parity of the chosen Z outcomes of s's children,
/// with each Z outcome decided by majority vote over all available copies:
/// the direct measurement (flipped by the photon's X error) and one
/// indirect copy per qualifying child subtree (flipped by the child's Z
/// error and its measured children's X errors).
fn run_trial(t: &BranchingVector, rng: &mut ChaCha12Rng, mu: f64, eps0: f64) -> TrialOutcome {
    let [b0, b1, b2] = [
        t.branches()[0] as usize,
        t.branches()[1] as usize,
        t.branches()[2] as usize,
    ];
    let top: Vec<PhotonState> = (0..b0).map(|_| sample_photon(rng, mu, eps0)).collect();
    let mid: Vec<PhotonState> = (0..b0 * b1).map(|_| sample_photon(rng, mu, eps0)).collect();
    let leaf: Vec<PhotonState> = (0..b0 * b1 * b2)
        .map(|_| sample_photon(rng, mu, eps0))
        .collect();

    let Some(s) = top.iter().position(|p| !p.lost) else {
        return TrialOutcome::Erasure;
    };

    // Z outcome of top photon u_i (i != s), by majority over the direct
    // measurement and the indirect stabilizer copies.
    let mut z_parity_others = false;
    for (i, u) in top.iter().enumerate() {
        if i == s {
            continue;
        }
        let mut votes = Vec::new();
        if !u.lost {
            votes.push(u.x);
        }
        for j in 0..b1 {
            let v = &mid[i * b1 + j];
            if v.lost {
                continue;
            }
            let leaves = &leaf[(i * b1 + j) * b2..(i * b1 + j + 1) * b2];
            if leaves.iter().any(|w| w.lost) {
                continue;
            }
            let mut parity = v.z;
            for w in leaves {
                parity ^= w.x;
            }
            votes.push(parity);
        }
        if votes.is_empty() {
            return TrialOutcome::Erasure;
        }
        z_parity_others ^= majority(&votes);
    }

    // Z outcome of each child of s: direct, or indirectly via any surviving
    // leaf (an X measurement on the leaf reads the child's Z).
    let mut z_parity_children = false;
    for j in 0..b1 {
        let v = &mid[s * b1 + j];
        let mut votes = Vec::new();
        if !v.lost {
            votes.push(v.x);
        }
        for w in &leaf[(s * b1 + j) * b2..(s * b1 + j + 1) * b2] {
            if !w.lost {
                votes.push(w.z);
            }
        }
        if votes.is_empty() {
            return TrialOutcome::Erasure;
        }
        z_parity_children ^= majority(&votes);
    }

    TrialOutcome::Decoded {
        z_flip: top[s].x ^ z_parity_others,
        x_flip: top[s].z ^ z_parity_children,
    }
}

/// Sample `trials` decode attempts of the tree channel at per-photon loss
/// `mu` and depolarizing strength `eps0`.
pub fn simulate_decode(
    t: &BranchingVector,
    mu: f64,
    eps0: f64,
    trials: u64,
    seed: u64,
) -> Result<McEstimate> {
    if trials == 0 {
        return Err(Error::InvalidArgument("need trials >= 1".into()));
    }
    if t.depth() != 2 {
        return Err(Error::UnsupportedDepth {
            got: t.depth(),
            expected: 2,
        });
    }
    if !(0.0..=1.0).contains(&mu) || !(0.0..=1.0).contains(&eps0) {
        return Err(Error::InvalidArgument(format!(
            "mu = {mu}, eps0 = {eps0} must lie in [0, 1]"
        )));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let (mut successes, mut nx, mut nz, mut ny) = (0u64, 0u64, 0u64, 0u64);
    for _ in 0..trials {
        match run_trial(t, &mut rng, mu, eps0) {
            TrialOutcome::Erasure => {}
            TrialOutcome::Decoded { x_flip, z_flip } => {
                successes += 1;
                match (x_flip, z_flip) {
                    (true, false) => nx += 1,
                    (false, true) => nz += 1,
                    (true, true) => ny += 1,
                    (false, false) => {}
                }
            }
        }
    }
    let denom = successes.max(1);
    Ok(McEstimate {
        trials,
        success_rate: RateEstimate::from_counts(successes, trials),
        logical_x_rate: RateEstimate::from_counts(nx, denom),
        logical_z_rate: RateEstimate::from_counts(nz, denom),
        logical_y_rate: RateEstimate::from_counts(ny, denom),
        effective_epsilon: RateEstimate::from_counts(nx + nz + ny, denom),
    })
}

/// End-to-end re-encoding error estimate: the simulated tree channel
/// composed with the two memory-qubit depolarizations, combined in the
/// p-product sense (D_p D_q = D_pq):
/// eps_r = (3/4)(1 - p0^2 p_tree) with p = 1 - 4 eps/3.
pub fn reencode_channel_estimate(
    t: &BranchingVector,
    mu: f64,
    eps0: f64,
    trials: u64,
    seed: u64,
) -> Result<f64> {
    let est = simulate_decode(t, mu, eps0, trials, seed)?;
    let p_tree = 1.0 - 4.0 * est.effective_epsilon.value / 3.0;
    let p0 = 1.0 - 4.0 * eps0 / 3.0;
    Ok(0.75 * (1.0 - p0 * p0 * p_tree))
}
