//! Exact density-matrix simulation of the TYPE II node quantum channel:
//! transmission noise, flag-based fault-tolerant syndrome extraction with
//! noisy two-qubit gates, and Pauli-frame correction.
//!
//! The channel is evaluated by exact branch enumeration over measurement
//! outcomes (Def.-1-style protocol logic); a trajectory-sampling Monte Carlo
//! implementation of the same circuit exists only as a test oracle.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::channels::{
    depolarize_single, depolarize_two, pauli_apply, transmission_error, DensityMatrix,
    NoiseParams, Pauli, PauliString,
};
use crate::five_qubit::{
    build_erasure_table_full, build_flagged_table, build_weight1_table, erase_to_zero,
    flagged_subcircuit, reference_logical_state, unflagged_subcircuit, CorrectionTable, Syndrome,
    ANCILLA, DATA_QUBITS, FLAG,
};
use crate::pauli_prop::{conjugate, ControlledPauli, ErrorFrame};
use crate::{Error, Result};

/// Parameters of one TYPE II node channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeChannelParams {
    /// Links (TYPE I hops + 1) since the previous TYPE II node.
    pub n: u32,
    pub noise: NoiseParams,
    /// 1-based index of the data qubit co-located with the ancilla/flag
    /// module; its controlled gates are local (eps_0) instead of teleported
    /// (3 eps_0). The sub-circuit timing arithmetic pins this to qubit 1.
    pub local_qubit: usize,
}

impl NodeChannelParams {
    pub fn new(n: u32, noise: NoiseParams) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("need n >= 1 links".into()));
        }
        Ok(NodeChannelParams {
            n,
            noise,
            local_qubit: 1,
        })
    }

    pub fn transmission_error(&self) -> Result<f64> {
        transmission_error(&self.noise, self.n)
    }
}

/// One measurement-outcome branch of a channel evaluation (diagnostic view).
#[derive(Debug, Clone)]
pub struct BranchRecord {
    pub probability: f64,
    /// Normalized post-measurement 5-qubit state after correction.
    pub state: DensityMatrix,
    /// (flag, ancilla) outcomes in execution order; unflagged follow-up
    /// ancillas are recorded with flag = +1.
    pub syndrome_history: Vec<(i8, i8)>,
    pub correction: PauliString,
}

/// Fidelity summary of one node channel, feeding the two-term recursion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSummary {
    pub alpha1: f64,
    pub alpha2: f64,
    pub eps_loss: f64,
    pub n: u32,
    pub noise: NoiseParams,
}

impl ChannelSummary {
    pub fn zeta_squared(&self) -> f64 {
        4.0 * self.alpha2 - 3.0 * self.alpha1 * self.alpha1
    }
}

/// A single injected Pauli fault after one two-qubit gate of the flagged
/// circuit; used by the fault-tolerance enumeration.
#[derive(Debug, Clone, Copy)]
pub struct FaultSpec {
    /// 1-based flagged sub-circuit index.
    pub subcircuit: usize,
    /// Gate position within the sub-circuit (0..6).
    pub gate_index: usize,
    /// Pauli letters on (control wire, target wire) of that gate.
    pub pauli: (Pauli, Pauli),
}

struct Tables {
    weight1: CorrectionTable,
    flagged: [CorrectionTable; 4],
    erasure_full: [CorrectionTable; 5],
}

fn tables() -> &'static Tables {
    static TABLES: OnceLock<Tables> = OnceLock::new();
    TABLES.get_or_init(|| Tables {
        weight1: build_weight1_table(),
        flagged: [1, 2, 3, 4].map(|k| build_flagged_table(k).expect("table build succeeds")),
        erasure_full: [1, 2, 3, 4, 5]
            .map(|l| build_erasure_table_full(l).expect("table build succeeds")),
    })
}

fn plus_state() -> DensityMatrix {
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    DensityMatrix::from_statevector(&[h, h]).expect("normalized")
}

/// rho5 (x) |+><+| ancilla (x) |0><0| flag.
fn attach_ancilla_flag(rho5: &DensityMatrix) -> DensityMatrix {
    rho5.tensor(&plus_state())
        .tensor(&DensityMatrix::basis_state(1, 0))
}

/// Conjugation by a controlled-Pauli: a generalized-permutation matrix, so
/// the update is a single O(dim^2) index-mapped pass.
fn apply_controlled_pauli(rho: &DensityMatrix, gate: &ControlledPauli) -> DensityMatrix {
    let d = rho.dim();
    let cm = 1usize << gate.control;
    let tm = 1usize << gate.target;
    // Per-basis-state action: perm[i] and phase[i] with U|i> = phase|perm>.
    let map = |i: usize| -> (usize, C64) {
        if i & cm == 0 {
            return (i, C64::new(1.0, 0.0));
        }
        match gate.letter {
            Pauli::I => (i, C64::new(1.0, 0.0)),
            Pauli::X => (i ^ tm, C64::new(1.0, 0.0)),
            Pauli::Z => (
                i,
                if i & tm == 0 {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(-1.0, 0.0)
                },
            ),
            Pauli::Y => (
                i ^ tm,
                if i & tm == 0 {
                    C64::new(0.0, 1.0)
                } else {
                    C64::new(0.0, -1.0)
                },
            ),
        }
    };
    let mut perm = vec![0usize; d];
    let mut phase = vec![C64::new(0.0, 0.0); d];
    for i in 0..d {
        let (p, ph) = map(i);
        perm[i] = p;
        phase[i] = ph;
    }
    let mut out = DensityMatrix::zeros(rho.qubit_count());
    for r in 0..d {
        let pr = perm[r];
        let fr = phase[r];
        for c in 0..d {
            out.set_entry(pr, perm[c], fr * phase[c].conj() * rho.entry(r, c));
        }
    }
    out
}

/// Unnormalized projection of an X-basis measurement on `qubit`:
/// (I + sign X)/2 applied on both sides.
fn measure_x(rho: &DensityMatrix, qubit: usize, sign: f64) -> DensityMatrix {
    let d = rho.dim();
    let m = 1usize << qubit;
    let mut out = DensityMatrix::zeros(rho.qubit_count());
    for r in 0..d {
        for c in 0..d {
            let v = rho.entry(r, c)
                + sign * rho.entry(r ^ m, c)
                + sign * rho.entry(r, c ^ m)
                + rho.entry(r ^ m, c ^ m);
            out.set_entry(r, c, 0.25 * v);
        }
    }
    out
}

/// Unnormalized projection of a Z-basis measurement on `qubit`.
fn measure_z(rho: &DensityMatrix, qubit: usize, outcome: usize) -> DensityMatrix {
    let d = rho.dim();
    let m = 1usize << qubit;
    let want = outcome * m;
    let mut out = DensityMatrix::zeros(rho.qubit_count());
    for r in 0..d {
        if r & m != want {
            continue;
        }
        for c in 0..d {
            if c & m == want {
                out.set_entry(r, c, rho.entry(r, c));
            }
        }
    }
    out
}

/// Noise strength after one ancilla-data/ancilla-flag controlled gate.
fn gate_eps(params: &NodeChannelParams, gate: &ControlledPauli) -> f64 {
    if gate.target == FLAG || gate.target == params.local_qubit - 1 {
        params.noise.epsilon_0
    } else {
        3.0 * params.noise.epsilon_0
    }
}

fn apply_gate_with_noise(
    params: &NodeChannelParams,
    rho: DensityMatrix,
    gate: &ControlledPauli,
) -> Result<DensityMatrix> {
    let mut rho = apply_controlled_pauli(&rho, gate);
    let eps = gate_eps(params, gate);
    if eps > 0.0 {
        rho = depolarize_two(&rho, (gate.control, gate.target), eps)?;
    }
    Ok(rho)
}

/// Run flagged sub-circuit `k` (0-based) on a 7-qubit state, injecting the
/// optional fault after its configured gate.
fn run_flagged_subcircuit(
    params: &NodeChannelParams,
    mut rho7: DensityMatrix,
    k: usize,
    fault: Option<&FaultSpec>,
) -> Result<DensityMatrix> {
    for (gi, gate) in flagged_subcircuit(k).iter().enumerate() {
        rho7 = apply_gate_with_noise(params, rho7, gate)?;
        if let Some(f) = fault {
            if f.subcircuit == k + 1 && f.gate_index == gi {
                let mut letters = vec![Pauli::I; 7];
                letters[gate.control] = f.pauli.0;
                letters[gate.target] = f.pauli.1;
                rho7 = pauli_apply(&rho7, &PauliString::new(letters))?;
            }
        }
    }
    Ok(rho7)
}

/// Unflagged syndrome extraction: returns the 16 unnormalized syndrome
/// branches (pre-correction), indexed by the packed syndrome.
fn unflagged_branches(
    params: &NodeChannelParams,
    rho5: &DensityMatrix,
    cutoff: f64,
) -> Result<Vec<(usize, DensityMatrix)>> {
    let mut out = Vec::with_capacity(16);
    let mut stack = vec![(0usize, 0usize, rho5.clone())];
    while let Some((k, idx, rho5)) = stack.pop() {
        if k == 4 {
            out.push((idx, rho5));
            continue;
        }
        let mut rho6 = rho5.tensor(&plus_state());
        for gate in unflagged_subcircuit(k) {
            rho6 = apply_gate_with_noise(params, rho6, &gate)?;
        }
        for (sign, bit) in [(1.0, 0usize), (-1.0, 1usize)] {
            let branch = measure_x(&rho6, ANCILLA, sign).partial_trace_high(1);
            if branch.frobenius_norm() > cutoff {
                stack.push((k + 1, idx | (bit << k), branch));
            }
        }
    }
    Ok(out)
}

/// Unflagged extraction followed by the given correction table, summed over
/// syndrome branches.
fn unflagged_corrected(
    params: &NodeChannelParams,
    rho5: &DensityMatrix,
    table: &CorrectionTable,
    cutoff: f64,
) -> Result<DensityMatrix> {
    let mut acc = DensityMatrix::zeros(DATA_QUBITS);
    for (idx, branch) in unflagged_branches(params, rho5, cutoff)? {
        let correction = table
            .correction(&Syndrome::from_index(idx))
            .ok_or_else(|| {
                Error::InternalConsistency(format!("table missing syndrome index {idx}"))
            })?;
        acc.add_assign(&pauli_apply(&branch, correction)?);
    }
    Ok(acc)
}

/// The flag-protocol error-correction channel, as an unnormalized linear
/// branch sum (no numerical hygiene); this is the map that gets precomposed
/// into a superoperator. `fault` optionally injects a single Pauli after one
/// gate of the flagged circuit.
pub fn ft_qec_channel_unnormalized(
    params: &NodeChannelParams,
    rho_in: &DensityMatrix,
    fault: Option<&FaultSpec>,
) -> Result<DensityMatrix> {
    if rho_in.qubit_count() != DATA_QUBITS {
        return Err(Error::DimensionMismatch(format!(
            "expected 5-qubit state, got {} qubits",
            rho_in.qubit_count()
        )));
    }
    let t = tables();
    let cutoff = rho_in.frobenius_norm() * 1e-16;
    let mut acc = DensityMatrix::zeros(DATA_QUBITS);
    let mut cur = rho_in.clone();
    for k in 0..4 {
        if cur.frobenius_norm() <= cutoff {
            break;
        }
        let rho7 = run_flagged_subcircuit(params, attach_ancilla_flag(&cur), k, fault)?;
        let flag_ok = measure_z(&rho7, FLAG, 0);
        // Case 1: F = +1, A = +1 -> continue with the flagged circuit.
        let cont = measure_x(&flag_ok, ANCILLA, 1.0).partial_trace_high(2);
        // Case 2: F = +1, A = -1 -> unflagged follow-up, weight <= 1 table.
        let case2 = measure_x(&flag_ok, ANCILLA, -1.0).partial_trace_high(2);
        // Case 3: F = -1, either A -> unflagged follow-up, flagged(k) table.
        // Summing the discarded ancilla outcomes equals tracing it out.
        let case3 = measure_z(&rho7, FLAG, 1).partial_trace_high(2);
        if case2.frobenius_norm() > cutoff {
            acc.add_assign(&unflagged_corrected(params, &case2, &t.weight1, cutoff)?);
        }
        if case3.frobenius_norm() > cutoff {
            acc.add_assign(&unflagged_corrected(params, &case3, &t.flagged[k], cutoff)?);
        }
        cur = cont;
    }
    acc.add_assign(&cur);
    Ok(acc)
}

/// Def.-1 protocol channel with numerical hygiene (symmetrize + renormalize).
pub fn ft_qec_channel(params: &NodeChannelParams, rho_in: &DensityMatrix) -> Result<DensityMatrix> {
    let mut out = ft_qec_channel_unnormalized(params, rho_in, None)?;
    out.hermitize_and_normalize()?;
    Ok(out)
}

/// Transmission noise over n links on each data qubit, then FT QEC;
/// unnormalized linear version.
pub fn node_channel_unnormalized(
    params: &NodeChannelParams,
    rho_in: &DensityMatrix,
) -> Result<DensityMatrix> {
    let eps_trans = params.transmission_error()?;
    let mut rho = rho_in.clone();
    for q in 0..DATA_QUBITS {
        rho = depolarize_single(&rho, q, eps_trans)?;
    }
    ft_qec_channel_unnormalized(params, &rho, None)
}

/// The full TYPE II node channel.
pub fn node_channel(params: &NodeChannelParams, rho_in: &DensityMatrix) -> Result<DensityMatrix> {
    let mut out = node_channel_unnormalized(params, rho_in)?;
    out.hermitize_and_normalize()?;
    Ok(out)
}

/// 1-erasure correction channel: qubit `lost` (1-based) is replaced by |0>,
/// the survivors carry transmission noise, and the unflagged extraction with
/// the erasure decoder runs with the usual gate-noise model.
pub fn erasure_channel(
    params: &NodeChannelParams,
    lost: usize,
    rho_in: &DensityMatrix,
) -> Result<DensityMatrix> {
    if !(1..=5).contains(&lost) {
        return Err(Error::InvalidArgument(format!(
            "lost qubit {lost} outside 1..5"
        )));
    }
    let eps_trans = params.transmission_error()?;
    let mut rho = erase_to_zero(rho_in, lost - 1);
    for q in 0..DATA_QUBITS {
        if q != lost - 1 {
            rho = depolarize_single(&rho, q, eps_trans)?;
        }
    }
    let cutoff = rho.frobenius_norm() * 1e-16;
    let mut out = unflagged_corrected(params, &rho, &tables().erasure_full[lost - 1], cutoff)?;
    out.hermitize_and_normalize()?;
    Ok(out)
}

/// eps_loss = 1 - average over lost positions of Tr(rho0 erasure(rho0)).
/// Starting from rho0 honors the "error-free at the previous node"
/// conditioning of the model.
pub fn epsilon_loss(params: &NodeChannelParams) -> Result<f64> {
    let rho0 = reference_logical_state();
    let mut acc = 0.0;
    for lost in 1..=5 {
        acc += erasure_channel(params, lost, &rho0)?.overlap(&rho0)?;
    }
    Ok(1.0 - acc / 5.0)
}

/// Per-position erasure fidelities, exposed for inspection.
pub fn epsilon_loss_per_position(params: &NodeChannelParams) -> Result<[f64; 5]> {
    let rho0 = reference_logical_state();
    let mut out = [0.0; 5];
    for lost in 1..=5 {
        out[lost - 1] = 1.0 - erasure_channel(params, lost, &rho0)?.overlap(&rho0)?;
    }
    Ok(out)
}

/// alpha1, alpha2 and eps_loss of one node channel.
pub fn channel_summary(params: &NodeChannelParams) -> Result<ChannelSummary> {
    let rho0 = reference_logical_state();
    let c1 = node_channel(params, &rho0)?;
    let alpha1 = c1.overlap(&rho0)?;
    let c2 = node_channel(params, &c1)?;
    let alpha2 = c2.overlap(&rho0)?;
    let eps_loss = epsilon_loss(params)?;
    let summary = ChannelSummary {
        alpha1,
        alpha2,
        eps_loss,
        n: params.n,
        noise: params.noise,
    };
    let zeta_sq = summary.zeta_squared();
    if zeta_sq < 0.0 {
        return Err(Error::DegenerateRecursion { zeta_sq });
    }
    Ok(summary)
}

/// Shared cache of channel summaries keyed by (n, eps_r, eps_0); the
/// optimizer re-evaluates many layouts sharing the same n.
#[derive(Default)]
pub struct SummaryCache {
    map: Mutex<HashMap<(u32, u64, u64), ChannelSummary>>,
}

impl SummaryCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn summary(&self, n: u32, noise: NoiseParams) -> Result<ChannelSummary> {
        let key = (n, noise.epsilon_r.to_bits(), noise.epsilon_0.to_bits());
        if let Some(s) = self.map.lock().expect("cache lock").get(&key) {
            return Ok(*s);
        }
        let s = channel_summary(&NodeChannelParams::new(n, noise)?)?;
        self.map.lock().expect("cache lock").insert(key, s);
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.map.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Tr(rho0 C^m(rho0)): the channel is precomposed into a fixed linear map
/// over 5-qubit operators (1024 x 1024), then applied m times to rho0.
/// Hermiticity of the channel halves the basis evaluations:
/// C(E_ba) = C(E_ab)^dag.
pub fn exact_chain_fidelity(params: &NodeChannelParams, m: u32) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidArgument("need m >= 1 nodes".into()));
    }
    let d = 1usize << DATA_QUBITS;
    let dim = d * d;
    let mut superop = vec![C64::new(0.0, 0.0); dim * dim];
    for a in 0..d {
        for b in a..d {
            let mut basis = DensityMatrix::zeros(DATA_QUBITS);
            basis.set_entry(a, b, C64::new(1.0, 0.0));
            let image = node_channel_unnormalized(params, &basis)?;
            let col_ab = a * d + b;
            let col_ba = b * d + a;
            for r in 0..d {
                for c in 0..d {
                    let v = image.entry(r, c);
                    superop[(r * d + c) * dim + col_ab] = v;
                    if a != b {
                        superop[(c * d + r) * dim + col_ba] = v.conj();
                    }
                }
            }
        }
    }
    let rho0 = reference_logical_state();
    let mut v: Vec<C64> = (0..dim).map(|i| rho0.entry(i / d, i % d)).collect();
    let mut next = vec![C64::new(0.0, 0.0); dim];
    for _ in 0..m {
        for (o, slot) in next.iter_mut().enumerate() {
            let row = &superop[o * dim..(o + 1) * dim];
            let mut acc = C64::new(0.0, 0.0);
            for (s, x) in row.iter().zip(v.iter()) {
                acc += s * x;
            }
            *slot = acc;
        }
        std::mem::swap(&mut v, &mut next);
        // Renormalize the trace to absorb drift over long chains.
        let tr: C64 = (0..d).map(|i| v[i * d + i]).sum();
        if tr.re > 0.0 {
            let inv = 1.0 / tr.re;
            for x in v.iter_mut() {
                *x *= inv;
            }
        }
    }
    let mut fid = C64::new(0.0, 0.0);
    for r in 0..d {
        for c in 0..d {
            fid += rho0.entry(r, c) * v[c * d + r];
        }
    }
    Ok(fid.re)
}

/// Enumerate the protocol's measurement branches for diagnostics; the
/// returned probabilities sum to 1.
pub fn branch_records(
    params: &NodeChannelParams,
    rho_in: &DensityMatrix,
) -> Result<Vec<BranchRecord>> {
    let t = tables();
    let cutoff = rho_in.frobenius_norm() * 1e-14;
    let mut records = Vec::new();
    let mut cur = rho_in.clone();
    let mut history: Vec<(i8, i8)> = Vec::new();
    for k in 0..4 {
        let rho7 = run_flagged_subcircuit(params, attach_ancilla_flag(&cur), k, None)?;
        let mut exits: Vec<(i8, i8, DensityMatrix, &CorrectionTable)> = Vec::new();
        let flag_ok = measure_z(&rho7, FLAG, 0);
        let flag_bad = measure_z(&rho7, FLAG, 1);
        exits.push((
            1,
            -1,
            measure_x(&flag_ok, ANCILLA, -1.0).partial_trace_high(2),
            &t.weight1,
        ));
        for (a_sign, a) in [(1.0, 1i8), (-1.0, -1i8)] {
            exits.push((
                -1,
                a,
                measure_x(&flag_bad, ANCILLA, a_sign).partial_trace_high(2),
                &t.flagged[k],
            ));
        }
        for (f, a, rho5, table) in exits {
            if rho5.frobenius_norm() <= cutoff {
                continue;
            }
            let mut hist = history.clone();
            hist.push((f, a));
            for (idx, branch) in unflagged_branches(params, &rho5, cutoff)? {
                let syndrome = Syndrome::from_index(idx);
                for (bit, &s) in syndrome.bits().iter().enumerate() {
                    let _ = bit;
                    hist.push((1, s));
                    hist.pop();
                }
                let mut hist2 = hist.clone();
                for &s in syndrome.bits().iter() {
                    hist2.push((1, s));
                }
                let correction = table.correction(&syndrome).expect("tables are total");
                let mut state = pauli_apply(&branch, correction)?;
                let p = state.trace().re;
                if p <= 1e-15 {
                    continue;
                }
                state.scale(1.0 / p);
                records.push(BranchRecord {
                    probability: p,
                    state,
                    syndrome_history: hist2,
                    correction: correction.clone(),
                });
            }
        }
        let cont = measure_x(&flag_ok, ANCILLA, 1.0).partial_trace_high(2);
        history.push((1, 1));
        cur = cont;
    }
    let p = cur.trace().re;
    if p > 1e-15 {
        let mut state = cur;
        state.scale(1.0 / p);
        records.push(BranchRecord {
            probability: p,
            state,
            syndrome_history: history,
            correction: PauliString::identity(DATA_QUBITS),
        });
    }
    Ok(records)
}

/// One noiseless unflagged extraction + weight <= 1 correction; the "ideal
/// decoder round" used when checking that residual errors after a single
/// fault are correctable.
pub fn ideal_correction_round(rho_in: &DensityMatrix) -> Result<DensityMatrix> {
    let params = NodeChannelParams::new(1, NoiseParams::noiseless())?;
    let cutoff = rho_in.frobenius_norm() * 1e-16;
    let mut out = unflagged_corrected(&params, rho_in, &tables().weight1, cutoff)?;
    out.hermitize_and_normalize()?;
    Ok(out)
}

/// Protocol run with a single injected fault (and otherwise the configured
/// noise), with hygiene; used by the fault-tolerance enumeration.
pub fn ft_qec_channel_with_fault(
    params: &NodeChannelParams,
    rho_in: &DensityMatrix,
    fault: &FaultSpec,
) -> Result<DensityMatrix> {
    let mut out = ft_qec_channel_unnormalized(params, rho_in, Some(fault))?;
    out.hermitize_and_normalize()?;
    Ok(out)
}

// ---------------------------------------------------------------------------
// Trajectory-sampling Monte Carlo oracle.
//
// The input rho0 is a stabilizer-frame state, all gates are Clifford and all
// faults Pauli, so every measurement outcome is a deterministic function of
// the sampled fault pattern. This re-implements the protocol independently
// of the density-matrix path (sharing only the correction tables) and is
// used to cross-validate alpha1.
// ---------------------------------------------------------------------------

fn table_masks(table: &CorrectionTable) -> [(u32, u32); 16] {
    let mut out = [(0u32, 0u32); 16];
    for (s, p) in table.entries() {
        out[s.index()] = (p.x_mask(), p.z_mask());
    }
    out
}

fn sample_two_qubit_fault(rng: &mut ChaCha12Rng, eps: f64, c: usize, t: usize, f: &mut ErrorFrame) {
    if eps > 0.0 && rng.gen::<f64>() < eps {
        let idx = rng.gen_range(1..16u32);
        let (cx, cz) = ((idx >> 3) & 1, (idx >> 2) & 1);
        let (tx, tz) = ((idx >> 1) & 1, idx & 1);
        f.xor_pauli((cx << c) | (tx << t), (cz << c) | (tz << t));
    }
}

fn strip_ancilla_flag(f: &mut ErrorFrame) {
    let data_mask = (1u32 << DATA_QUBITS) - 1;
    f.x &= data_mask;
    f.z &= data_mask;
}

fn run_unflagged_trajectory(
    params: &NodeChannelParams,
    rng: &mut ChaCha12Rng,
    frame: &mut ErrorFrame,
    table: &[(u32, u32); 16],
) {
    let mut syndrome_idx = 0usize;
    for k in 0..4 {
        for gate in unflagged_subcircuit(k) {
            conjugate(frame, &gate);
            sample_two_qubit_fault(rng, gate_eps(params, &gate), gate.control, gate.target, frame);
        }
        if ErrorFrame::bit(frame.z, ANCILLA) {
            syndrome_idx |= 1 << k;
        }
        strip_ancilla_flag(frame);
    }
    let (x, z) = table[syndrome_idx];
    frame.xor_pauli(x, z);
}

/// Monte Carlo estimate of alpha1 (mean, standard error) by sampling Pauli
/// faults and deterministic outcomes through the same protocol logic.
pub fn trajectory_alpha1(
    params: &NodeChannelParams,
    trials: u64,
    seed: u64,
) -> Result<(f64, f64)> {
    use crate::five_qubit::{error_class, ErrorClass};
    if trials == 0 {
        return Err(Error::InvalidArgument("need trials >= 1".into()));
    }
    let t = tables();
    let weight1 = table_masks(&t.weight1);
    let flagged: Vec<[(u32, u32); 16]> = t.flagged.iter().map(table_masks).collect();
    let eps_trans = params.transmission_error()?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let (mut n_one, mut n_third) = (0u64, 0u64);
    for _ in 0..trials {
        let mut frame = ErrorFrame::default();
        for q in 0..DATA_QUBITS {
            if rng.gen::<f64>() < eps_trans {
                match rng.gen_range(0..3u8) {
                    0 => frame.x ^= 1 << q,
                    1 => {
                        frame.x ^= 1 << q;
                        frame.z ^= 1 << q;
                    }
                    _ => frame.z ^= 1 << q,
                }
            }
        }
        let mut exited = false;
        for k in 0..4 {
            for gate in flagged_subcircuit(k) {
                conjugate(&mut frame, &gate);
                sample_two_qubit_fault(
                    &mut rng,
                    gate_eps(params, &gate),
                    gate.control,
                    gate.target,
                    &mut frame,
                );
            }
            let ancilla_triggered = ErrorFrame::bit(frame.z, ANCILLA);
            let flag_triggered = ErrorFrame::bit(frame.x, FLAG);
            strip_ancilla_flag(&mut frame);
            if flag_triggered {
                run_unflagged_trajectory(params, &mut rng, &mut frame, &flagged[k]);
                exited = true;
                break;
            }
            if ancilla_triggered {
                run_unflagged_trajectory(params, &mut rng, &mut frame, &weight1);
                exited = true;
                break;
            }
        }
        let _ = exited;
        let residual = PauliString::from_masks(DATA_QUBITS, frame.x, frame.z);
        match error_class(&residual) {
            ErrorClass::Stabilizer => n_one += 1,
            // Logical Paulis overlap the reference state with |<P>|^2 = 1/3.
            ErrorClass::LogicalX | ErrorClass::LogicalY | ErrorClass::LogicalZ => n_third += 1,
            ErrorClass::Detectable => {}
        }
    }
    let tn = trials as f64;
    let mean = (n_one as f64 + n_third as f64 / 3.0) / tn;
    let second_moment = (n_one as f64 + n_third as f64 / 9.0) / tn;
    let var = (second_moment - mean * mean).max(0.0);
    Ok((mean, (var / tn).sqrt()))
}
