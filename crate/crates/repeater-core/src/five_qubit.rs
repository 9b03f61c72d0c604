//! The outer [[5,1,3]] code: stabilizers, logical states, syndrome
//! computation, and the three correction tables (weight <= 1, flagged
//! weight <= 2, and 1-erasure).
//!
//! Data qubits are 0..4 internally (1..5 in user-facing labels); the shared
//! ancilla is qubit 5 and the flag qubit 6 in circuit contexts.

use num_complex::Complex64 as C64;

use crate::channels::{
    pauli_apply, pauli_left_mul, pauli_phase, pauli_right_mul, DensityMatrix, Pauli, PauliString,
};
use crate::pauli_prop::{conjugate, ControlledPauli, ErrorFrame};
use crate::{Error, Result};

pub const DATA_QUBITS: usize = 5;
/// Circuit wire indices for the syndrome-extraction registers.
pub(crate) const ANCILLA: usize = 5;
pub(crate) const FLAG: usize = 6;

/// Generator letters in qubit order (qubits 1..5):
/// g1 = X1 Z2 Z3 X4, g2 = X2 Z3 Z4 X5, g3 = X1 X3 Z4 Z5, g4 = Z1 X2 X4 Z5.
const GENERATOR_LETTERS: [[Pauli; 5]; 4] = [
    [Pauli::X, Pauli::Z, Pauli::Z, Pauli::X, Pauli::I],
    [Pauli::I, Pauli::X, Pauli::Z, Pauli::Z, Pauli::X],
    [Pauli::X, Pauli::I, Pauli::X, Pauli::Z, Pauli::Z],
    [Pauli::Z, Pauli::X, Pauli::I, Pauli::X, Pauli::Z],
];

/// The four stabilizer generators of the code.
#[derive(Debug, Clone)]
pub struct StabilizerSet {
    generators: [PauliString; 4],
}

impl Default for StabilizerSet {
    fn default() -> Self {
        StabilizerSet {
            generators: GENERATOR_LETTERS.map(|letters| PauliString::new(letters.to_vec())),
        }
    }
}

impl StabilizerSet {
    pub fn generators(&self) -> &[PauliString; 4] {
        &self.generators
    }

    /// All 16 elements of the stabilizer group, phases dropped.
    pub fn group(&self) -> Vec<PauliString> {
        (0..16u32)
            .map(|subset| {
                let mut p = PauliString::identity(DATA_QUBITS);
                for (k, g) in self.generators.iter().enumerate() {
                    if (subset >> k) & 1 == 1 {
                        p = p.times(g);
                    }
                }
                p
            })
            .collect()
    }
}

pub fn generators() -> [PauliString; 4] {
    StabilizerSet::default().generators.clone()
}

/// X_L = X x X x X x X x X.
pub fn logical_x() -> PauliString {
    PauliString::new(vec![Pauli::X; 5])
}

/// Z_L = Z x Z x Z x Z x Z.
pub fn logical_z() -> PauliString {
    PauliString::new(vec![Pauli::Z; 5])
}

/// Apply a Pauli string to a statevector in place (full phases).
fn pauli_on_vec(psi: &[C64], p: &PauliString) -> Vec<C64> {
    let x = p.x_mask() as usize;
    let mut out = vec![C64::new(0.0, 0.0); psi.len()];
    for (i, &a) in psi.iter().enumerate() {
        out[i ^ x] = pauli_phase(p, i) * a;
    }
    out
}

/// |0_L> as a statevector: project |00000> onto the codespace and normalize.
/// |00000> already has Z_L = +1, which the (commuting) projectors preserve.
fn logical_zero_vec() -> Vec<C64> {
    let dim = 1usize << DATA_QUBITS;
    let mut psi = vec![C64::new(0.0, 0.0); dim];
    psi[0] = C64::new(1.0, 0.0);
    for g in generators().iter() {
        let g_psi = pauli_on_vec(&psi, g);
        for (a, b) in psi.iter_mut().zip(g_psi) {
            *a = (*a + b) * 0.5;
        }
    }
    let norm = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    assert!(norm > 1e-9, "codespace projection of |00000> vanished");
    for a in psi.iter_mut() {
        *a /= norm;
    }
    psi
}

/// Statevector of alpha |0_L> + beta |1_L> with |1_L> = X_L |0_L>.
pub fn encode_vec(alpha: C64, beta: C64) -> Result<Vec<C64>> {
    let norm = alpha.norm_sqr() + beta.norm_sqr();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "non-normalized logical amplitudes: |alpha|^2 + |beta|^2 = {norm}"
        )));
    }
    let zero = logical_zero_vec();
    let one = pauli_on_vec(&zero, &logical_x());
    Ok(zero
        .iter()
        .zip(one.iter())
        .map(|(&z, &o)| alpha * z + beta * o)
        .collect())
}

/// (|0_L><0_L|, |1_L><1_L|).
pub fn logical_states() -> (DensityMatrix, DensityMatrix) {
    let zero = logical_zero_vec();
    let one = pauli_on_vec(&zero, &logical_x());
    (
        DensityMatrix::from_statevector(&zero).expect("normalized by construction"),
        DensityMatrix::from_statevector(&one).expect("normalized by construction"),
    )
}

/// Density matrix of alpha |0_L> + beta |1_L>.
pub fn encode(alpha: C64, beta: C64) -> Result<DensityMatrix> {
    DensityMatrix::from_statevector(&encode_vec(alpha, beta)?)
}

/// The reference logical state rho_0 used for channel fidelities: Bloch
/// vector (1,1,1)/sqrt(3), so that each of X_L, Y_L, Z_L degrades the
/// fidelity equally (by 2/3) and no logical error direction is invisible.
pub fn reference_logical_state() -> DensityMatrix {
    let cos_theta = 1.0 / 3.0_f64.sqrt();
    let alpha = ((1.0 + cos_theta) / 2.0).sqrt();
    let beta_mag = ((1.0 - cos_theta) / 2.0).sqrt();
    let phase = C64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
    encode(C64::new(alpha, 0.0), phase * beta_mag).expect("normalized by construction")
}

/// Ordered outcomes (g1, g2, g3, g4), +1 meaning "not triggered".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Syndrome {
    bits: [i8; 4],
}

impl Syndrome {
    pub fn from_bits(bits: [i8; 4]) -> Result<Self> {
        if bits.iter().any(|&b| b != 1 && b != -1) {
            return Err(Error::InvalidArgument(format!(
                "syndrome bits must be +/-1, got {bits:?}"
            )));
        }
        Ok(Syndrome { bits })
    }

    pub fn trivial() -> Self {
        Syndrome { bits: [1; 4] }
    }

    pub fn bits(&self) -> [i8; 4] {
        self.bits
    }

    /// Bit-packed index: bit k set iff generator k is triggered (-1).
    pub fn index(&self) -> usize {
        self.bits
            .iter()
            .enumerate()
            .map(|(k, &b)| if b == -1 { 1 << k } else { 0 })
            .sum()
    }

    pub fn from_index(index: usize) -> Self {
        let mut bits = [1i8; 4];
        for (k, b) in bits.iter_mut().enumerate() {
            if (index >> k) & 1 == 1 {
                *b = -1;
            }
        }
        Syndrome { bits }
    }
}

impl std::fmt::Display for Syndrome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (k, &b) in self.bits.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", if b == 1 { "+" } else { "-" })?;
        }
        write!(f, ")")
    }
}

/// Syndrome of a 5-qubit Pauli error: bit k is -1 iff the error anticommutes
/// with g_k.
pub fn syndrome_of(error: &PauliString) -> Syndrome {
    let bits = generators().map(|g| if error.commutes_with(&g) { 1i8 } else { -1 });
    Syndrome { bits }
}

/// Which correction context a table serves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableContext {
    /// Weight <= 1 corrections for the plain syndrome lookup.
    Weight1,
    /// Weight <= 2 corrections after the flag of sub-circuit k (1-based).
    Flagged(usize),
    /// Restoration after a 1-erasure on qubit `lost` (1-based).
    Erasure(usize),
}

/// Syndrome -> Pauli correction map. Erasure tables from
/// [`build_erasure_table`] populate only the four reachable syndromes;
/// all other builders fill all 16 entries.
#[derive(Debug, Clone)]
pub struct CorrectionTable {
    pub context: TableContext,
    map: [Option<PauliString>; 16],
}

impl CorrectionTable {
    pub fn correction(&self, syndrome: &Syndrome) -> Option<&PauliString> {
        self.map[syndrome.index()].as_ref()
    }

    pub fn entries(&self) -> impl Iterator<Item = (Syndrome, &PauliString)> {
        self.map
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.as_ref().map(|p| (Syndrome::from_index(i), p)))
    }
}

/// Weight <= 1 table: the perfect-code bijection between the 16 syndromes
/// and {identity} + {15 single-qubit Paulis}.
pub fn build_weight1_table() -> CorrectionTable {
    let mut map: [Option<PauliString>; 16] = Default::default();
    map[Syndrome::trivial().index()] = Some(PauliString::identity(DATA_QUBITS));
    for q in 0..DATA_QUBITS {
        for p in [Pauli::X, Pauli::Y, Pauli::Z] {
            let e = PauliString::single(DATA_QUBITS, q, p);
            let idx = syndrome_of(&e).index();
            assert!(
                map[idx].is_none(),
                "perfect-code property violated: syndrome collision for {e}"
            );
            map[idx] = Some(e);
        }
    }
    CorrectionTable {
        context: TableContext::Weight1,
        map,
    }
}

/// Gate list of flagged sub-circuit k (0-based): the four controlled-Paulis
/// of g_{k+1} from the ancilla onto the data qubits in qubit order, with
/// flag CNOTs after the first and before the last.
pub(crate) fn flagged_subcircuit(k: usize) -> Vec<ControlledPauli> {
    let cps: Vec<ControlledPauli> = GENERATOR_LETTERS[k]
        .iter()
        .enumerate()
        .filter(|(_, &p)| p != Pauli::I)
        .map(|(q, &p)| ControlledPauli {
            control: ANCILLA,
            target: q,
            letter: p,
        })
        .collect();
    debug_assert_eq!(cps.len(), 4, "all generators have weight 4");
    let fg = ControlledPauli {
        control: ANCILLA,
        target: FLAG,
        letter: Pauli::X,
    };
    vec![cps[0], fg, cps[1], cps[2], fg, cps[3]]
}

/// Gate list of the unflagged sub-circuit k (0-based): controlled-Paulis only.
pub(crate) fn unflagged_subcircuit(k: usize) -> Vec<ControlledPauli> {
    GENERATOR_LETTERS[k]
        .iter()
        .enumerate()
        .filter(|(_, &p)| p != Pauli::I)
        .map(|(q, &p)| ControlledPauli {
            control: ANCILLA,
            target: q,
            letter: p,
        })
        .collect()
}

/// Minimum-weight representative of E modulo the stabilizer group, with the
/// fixed collision policy as tie-break.
pub fn reduce_mod_stabilizer(e: &PauliString) -> PauliString {
    StabilizerSet::default()
        .group()
        .iter()
        .map(|s| e.times(s))
        .min_by(|a, b| a.priority_key().cmp(&b.priority_key()))
        .expect("group is nonempty")
}

/// Classification of a data error relative to the code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// In the stabilizer group: acts trivially on the codespace.
    Stabilizer,
    LogicalX,
    LogicalY,
    LogicalZ,
    /// Anticommutes with at least one generator (detectable).
    Detectable,
}

pub fn error_class(e: &PauliString) -> ErrorClass {
    if syndrome_of(e) != Syndrome::trivial() {
        return ErrorClass::Detectable;
    }
    let group: std::collections::HashSet<(u32, u32)> = StabilizerSet::default()
        .group()
        .iter()
        .map(|s| (s.x_mask(), s.z_mask()))
        .collect();
    let key = |p: &PauliString| (p.x_mask(), p.z_mask());
    if group.contains(&key(e)) {
        ErrorClass::Stabilizer
    } else if group.contains(&key(&e.times(&logical_x()))) {
        ErrorClass::LogicalX
    } else if group.contains(&key(&e.times(&logical_y()))) {
        ErrorClass::LogicalY
    } else {
        debug_assert!(group.contains(&key(&e.times(&logical_z()))));
        ErrorClass::LogicalZ
    }
}

/// Y_L = X_L Z_L up to phase.
pub fn logical_y() -> PauliString {
    logical_x().times(&logical_z())
}

/// Flagged weight <= 2 table for sub-circuit k (1-based).
///
/// Built by exhausting single faults inside the flagged sub-circuit: every
/// non-identity two-qubit Pauli after every gate is propagated to the end of
/// the sub-circuit; faults that flip the flag contribute their residual data
/// error (reduced modulo the stabilizer group) at the follow-up syndrome.
/// Collisions resolve by the fixed priority; unreachable syndromes fall back
/// to the weight <= 1 corrections so the table is total.
pub fn build_flagged_table(k: usize) -> Result<CorrectionTable> {
    if !(1..=4).contains(&k) {
        return Err(Error::InvalidArgument(format!(
            "sub-circuit index {k} outside 1..4"
        )));
    }
    let gates = flagged_subcircuit(k - 1);
    let mut candidates: [Vec<PauliString>; 16] = Default::default();
    for fault_pos in 0..gates.len() {
        let (c, t) = (gates[fault_pos].control, gates[fault_pos].target);
        for fault_idx in 1..16u32 {
            // Decode the two-qubit fault Pauli onto wires (c, t).
            let (cx, cz) = ((fault_idx >> 3) & 1, (fault_idx >> 2) & 1);
            let (tx, tz) = ((fault_idx >> 1) & 1, fault_idx & 1);
            let mut frame = ErrorFrame::default();
            frame.xor_pauli(
                (cx << c) | (tx << t),
                (cz << c) | (tz << t),
            );
            for gate in &gates[fault_pos + 1..] {
                conjugate(&mut frame, gate);
            }
            let flag_flipped = ErrorFrame::bit(frame.x, FLAG);
            if !flag_flipped {
                continue;
            }
            let data_mask = (1u32 << DATA_QUBITS) - 1;
            let residual =
                PauliString::from_masks(DATA_QUBITS, frame.x & data_mask, frame.z & data_mask);
            let reduced = reduce_mod_stabilizer(&residual);
            candidates[syndrome_of(&residual).index()].push(reduced);
        }
    }
    let weight1 = build_weight1_table();
    let mut map: [Option<PauliString>; 16] = Default::default();
    for (idx, cands) in candidates.iter().enumerate() {
        let chosen = cands
            .iter()
            .min_by(|a, b| a.priority_key().cmp(&b.priority_key()))
            .cloned()
            .or_else(|| weight1.map[idx].clone())
            .expect("weight-1 table is total");
        if chosen.weight() > 2 {
            return Err(Error::InternalConsistency(format!(
                "flagged table entry {chosen} has weight > 2"
            )));
        }
        map[idx] = Some(chosen);
    }
    Ok(CorrectionTable {
        context: TableContext::Flagged(k),
        map,
    })
}

/// Trace out qubit `q` (0-based) and re-insert it in |0>.
pub(crate) fn erase_to_zero(rho: &DensityMatrix, q: usize) -> DensityMatrix {
    let qc = rho.qubit_count();
    let d = rho.dim();
    let m = 1usize << q;
    let low = m - 1;
    let mut out = DensityMatrix::zeros(qc);
    // Index with bit q removed, then re-inserted as 0.
    let drop_bit = |i: usize| (i & low) | ((i >> 1) & !low);
    let insert0 = |i: usize| (i & low) | ((i & !low) << 1);
    let mut reduced = vec![C64::new(0.0, 0.0); (d / 2) * (d / 2)];
    for r in 0..d {
        for c in 0..d {
            if (r & m) == (c & m) {
                reduced[drop_bit(r) * (d / 2) + drop_bit(c)] += rho.entry(r, c);
            }
        }
    }
    for r in 0..d / 2 {
        for c in 0..d / 2 {
            out.set_entry(insert0(r), insert0(c), reduced[r * (d / 2) + c]);
        }
    }
    out
}

/// Unnormalized projection onto the syndrome sector: applies
/// (I + s_k g_k)/2 for every generator.
pub(crate) fn project_syndrome(rho: &DensityMatrix, syndrome: &Syndrome) -> DensityMatrix {
    let mut out = rho.clone();
    for (g, &s) in generators().iter().zip(syndrome.bits.iter()) {
        let sign = s as f64;
        let left = pauli_left_mul(&out, g);
        let right = pauli_right_mul(&out, g);
        let both = pauli_apply(&out, g).expect("matching dimensions");
        let d = out.dim();
        for r in 0..d {
            for c in 0..d {
                let v = 0.25
                    * (out.entry(r, c)
                        + sign * left.entry(r, c)
                        + sign * right.entry(r, c)
                        + both.entry(r, c));
                out.set_entry(r, c, v);
            }
        }
    }
    out
}

/// 1-erasure table for `lost` (1-based): the four syndromes reachable when
/// qubit `lost` of a perfect logical state is replaced by |0>, each mapped
/// to the restoring Pauli on that qubit. Derived by density-matrix brute
/// force and validated on two independent logical states.
pub fn build_erasure_table(lost: usize) -> Result<CorrectionTable> {
    if !(1..=5).contains(&lost) {
        return Err(Error::InvalidArgument(format!(
            "lost qubit {lost} outside 1..5"
        )));
    }
    let q = lost - 1;
    let test_states = [
        encode(C64::new(1.0, 0.0), C64::new(0.0, 0.0))?,
        encode(
            C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
        )?,
    ];
    let erased: Vec<DensityMatrix> = test_states.iter().map(|s| erase_to_zero(s, q)).collect();
    let restorers = [Pauli::I, Pauli::X, Pauli::Z, Pauli::Y];
    let mut map: [Option<PauliString>; 16] = Default::default();
    let mut reachable = 0;
    for idx in 0..16 {
        let syndrome = Syndrome::from_index(idx);
        let branch = project_syndrome(&erased[0], &syndrome);
        let prob = branch.trace().re;
        if prob < 1e-12 {
            continue;
        }
        reachable += 1;
        let mut found = None;
        'search: for p in restorers {
            let correction = PauliString::single(DATA_QUBITS, q, p);
            for (state, ref_state) in erased.iter().zip(test_states.iter()) {
                let mut projected = project_syndrome(state, &syndrome);
                let t = projected.trace().re;
                if t < 1e-12 {
                    continue 'search;
                }
                projected.scale(1.0 / t);
                let corrected = pauli_apply(&projected, &correction)?;
                if (corrected.overlap(ref_state)? - 1.0).abs() > 1e-9 {
                    continue 'search;
                }
            }
            found = Some(correction);
            break;
        }
        map[idx] = Some(found.ok_or_else(|| {
            Error::InternalConsistency(format!(
                "no single-qubit restorer for lost = {lost}, syndrome {syndrome}"
            ))
        })?);
    }
    if reachable != 4 {
        return Err(Error::InternalConsistency(format!(
            "expected 4 reachable erasure syndromes for lost = {lost}, found {reachable}"
        )));
    }
    Ok(CorrectionTable {
        context: TableContext::Erasure(lost),
        map,
    })
}

/// Total (16-entry) erasure decoder for `lost`: extends the clean 4-row
/// table to syndromes shifted by an additional single-qubit Pauli on a
/// non-lost qubit, as needed when the extraction circuit itself is noisy.
/// Each syndrome s decomposes as s = synd(extra) xor s_clean; the candidate
/// with the lowest-priority extra error wins.
pub fn build_erasure_table_full(lost: usize) -> Result<CorrectionTable> {
    let clean = build_erasure_table(lost)?;
    let weight1 = build_weight1_table();
    let mut map: [Option<PauliString>; 16] = Default::default();
    for idx in 0..16 {
        let mut best: Option<(PauliString, PauliString)> = None;
        for (clean_syndrome, restore) in clean.entries() {
            let extra_idx = idx ^ clean_syndrome.index();
            let extra = weight1.map[extra_idx]
                .clone()
                .expect("weight-1 table is total");
            if extra.letter(lost - 1) != Pauli::I && extra.weight() > 0 {
                // An "extra" error on the lost qubit is just another clean
                // branch; it is covered by the extra = identity decomposition.
                continue;
            }
            let replace = match &best {
                None => true,
                Some((cur_extra, _)) => extra.priority_key() < cur_extra.priority_key(),
            };
            if replace {
                best = Some((extra.clone(), restore.times(&extra)));
            }
        }
        map[idx] = Some(
            best.ok_or_else(|| {
                Error::InternalConsistency(format!(
                    "erasure decoder has no candidate for syndrome index {idx}"
                ))
            })?
            .1,
        );
    }
    Ok(CorrectionTable {
        context: TableContext::Erasure(lost),
        map,
    })
}
