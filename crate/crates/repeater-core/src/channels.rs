//! Quantum-state and noise-channel algebra.
//!
//! Dense complex density matrices up to 7 qubits (128x128), Pauli strings,
//! single- and two-qubit depolarizing channels, and the transmission-error
//! formula eps_trans = 1 - (1-eps_r)^n (1-eps_0).
//!
//! Qubit `i` corresponds to bit `i` of the computational-basis index
//! (little-endian), so |q4 q3 q2 q1 q0> has index sum(q_i << i).

use num_complex::Complex64;

use crate::{Error, Result};

pub type C64 = Complex64;

/// Hard cap on simulated register size; everything in this crate fits in
/// 5 data qubits + ancilla + flag.
pub const MAX_QUBITS: usize = 7;

/// A single-qubit Pauli letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// True if the two letters anticommute (both non-identity and different).
    pub fn anticommutes(self, other: Pauli) -> bool {
        self != Pauli::I && other != Pauli::I && self != other
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// A Pauli operator on `qubit_count` qubits, one letter per qubit.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    letters: Vec<Pauli>,
}

impl PauliString {
    pub fn identity(qubit_count: usize) -> Self {
        PauliString {
            letters: vec![Pauli::I; qubit_count],
        }
    }

    pub fn new(letters: Vec<Pauli>) -> Self {
        PauliString { letters }
    }

    /// Single non-identity letter at `qubit`, identity elsewhere.
    pub fn single(qubit_count: usize, qubit: usize, p: Pauli) -> Self {
        let mut letters = vec![Pauli::I; qubit_count];
        letters[qubit] = p;
        PauliString { letters }
    }

    /// Construct from X/Z bit masks (Y where both bits are set).
    pub fn from_masks(qubit_count: usize, x_mask: u32, z_mask: u32) -> Self {
        let letters = (0..qubit_count)
            .map(|q| {
                let x = (x_mask >> q) & 1 == 1;
                let z = (z_mask >> q) & 1 == 1;
                match (x, z) {
                    (false, false) => Pauli::I,
                    (true, false) => Pauli::X,
                    (true, true) => Pauli::Y,
                    (false, true) => Pauli::Z,
                }
            })
            .collect();
        PauliString { letters }
    }

    pub fn qubit_count(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn letter(&self, qubit: usize) -> Pauli {
        self.letters[qubit]
    }

    /// Number of non-identity letters.
    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&p| p != Pauli::I).count()
    }

    /// Bit mask of qubits with an X or Y letter.
    pub fn x_mask(&self) -> u32 {
        self.letters
            .iter()
            .enumerate()
            .filter(|(_, &p)| p == Pauli::X || p == Pauli::Y)
            .map(|(q, _)| 1u32 << q)
            .sum()
    }

    /// Bit mask of qubits with a Z or Y letter.
    pub fn z_mask(&self) -> u32 {
        self.letters
            .iter()
            .enumerate()
            .filter(|(_, &p)| p == Pauli::Z || p == Pauli::Y)
            .map(|(q, _)| 1u32 << q)
            .sum()
    }

    /// Symplectic commutation check: true if `self` and `other` commute.
    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let a = (self.x_mask() & other.z_mask()).count_ones();
        let b = (self.z_mask() & other.x_mask()).count_ones();
        (a + b) % 2 == 0
    }

    /// Product up to phase (mask xor); sufficient for error bookkeeping.
    pub fn times(&self, other: &PauliString) -> PauliString {
        PauliString::from_masks(
            self.letters.len(),
            self.x_mask() ^ other.x_mask(),
            self.z_mask() ^ other.z_mask(),
        )
    }

    /// Sort key implementing the fixed table collision policy:
    /// lowest weight first, then lowest qubit index, then X < Y < Z.
    pub fn priority_key(&self) -> (usize, Vec<(usize, u8)>) {
        let support = self
            .letters
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != Pauli::I)
            .map(|(q, &p)| {
                let rank = match p {
                    Pauli::X => 0u8,
                    Pauli::Y => 1,
                    Pauli::Z => 2,
                    Pauli::I => unreachable!(),
                };
                (q, rank)
            })
            .collect();
        (self.weight(), support)
    }
}

impl std::fmt::Display for PauliString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.weight() == 0 {
            return write!(f, "I");
        }
        for (q, &p) in self.letters.iter().enumerate() {
            if p != Pauli::I {
                write!(f, "{}{}", p.symbol(), q + 1)?;
            }
        }
        Ok(())
    }
}

/// Noise knobs of the error model: re-encoding error eps_r and per-operation
/// error eps_0, tied by eps_0 = eps_r/3 unless explicitly overridden.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NoiseParams {
    pub epsilon_r: f64,
    pub epsilon_0: f64,
}

impl NoiseParams {
    /// Single-knob construction with eps_0 = eps_r/3 exactly.
    pub fn from_epsilon_r(epsilon_r: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon_r) {
            return Err(Error::InvalidArgument(format!(
                "epsilon_r = {epsilon_r} outside [0, 1]"
            )));
        }
        Ok(NoiseParams {
            epsilon_r,
            epsilon_0: epsilon_r / 3.0,
        })
    }

    pub fn with_epsilon_0(epsilon_r: f64, epsilon_0: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon_r) || !(0.0..=epsilon_r).contains(&epsilon_0) {
            return Err(Error::InvalidArgument(format!(
                "need 0 <= epsilon_0 <= epsilon_r <= 1, got eps_r = {epsilon_r}, eps_0 = {epsilon_0}"
            )));
        }
        Ok(NoiseParams {
            epsilon_r,
            epsilon_0,
        })
    }

    pub fn noiseless() -> Self {
        NoiseParams {
            epsilon_r: 0.0,
            epsilon_0: 0.0,
        }
    }
}

/// Dense Hermitian unit-trace operator over `qubit_count` qubits,
/// stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    qubit_count: usize,
    dim: usize,
    data: Vec<C64>,
}

impl DensityMatrix {
    pub fn zeros(qubit_count: usize) -> Self {
        assert!(qubit_count <= MAX_QUBITS, "register too large");
        let dim = 1usize << qubit_count;
        DensityMatrix {
            qubit_count,
            dim,
            data: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    /// |psi><psi| from a statevector of length 2^q.
    pub fn from_statevector(psi: &[C64]) -> Result<Self> {
        let dim = psi.len();
        if !dim.is_power_of_two() || dim > (1 << MAX_QUBITS) {
            return Err(Error::DimensionMismatch(format!(
                "statevector length {dim} is not a supported power of two"
            )));
        }
        let qubit_count = dim.trailing_zeros() as usize;
        let norm_sq: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "statevector not normalized: |psi|^2 = {norm_sq}"
            )));
        }
        let mut dm = DensityMatrix::zeros(qubit_count);
        for r in 0..dim {
            for c in 0..dim {
                dm.data[r * dim + c] = psi[r] * psi[c].conj();
            }
        }
        Ok(dm)
    }

    /// Computational basis state |index>.
    pub fn basis_state(qubit_count: usize, index: usize) -> Self {
        let mut dm = DensityMatrix::zeros(qubit_count);
        let dim = dm.dim;
        dm.data[index * dim + index] = C64::new(1.0, 0.0);
        dm
    }

    pub fn maximally_mixed(qubit_count: usize) -> Self {
        let mut dm = DensityMatrix::zeros(qubit_count);
        let dim = dm.dim;
        let v = C64::new(1.0 / dim as f64, 0.0);
        for i in 0..dim {
            dm.data[i * dim + i] = v;
        }
        dm
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.dim + c]
    }

    pub fn set_entry(&mut self, r: usize, c: usize, v: C64) {
        self.data[r * self.dim + c] = v;
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Tr(self * other); real-valued for Hermitian inputs (the fidelity
    /// Tr(rho sigma) when at least one operand is pure).
    pub fn overlap(&self, other: &DensityMatrix) -> Result<f64> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(format!(
                "overlap of dim {} with dim {}",
                self.dim, other.dim
            )));
        }
        let d = self.dim;
        let mut acc = C64::new(0.0, 0.0);
        for r in 0..d {
            for c in 0..d {
                acc += self.data[r * d + c] * other.data[c * d + r];
            }
        }
        Ok(acc.re)
    }

    pub fn add_assign(&mut self, other: &DensityMatrix) {
        debug_assert_eq!(self.dim, other.dim);
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += *b;
        }
    }

    pub fn scale(&mut self, s: f64) {
        for a in self.data.iter_mut() {
            *a *= s;
        }
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        let q = self.qubit_count + other.qubit_count;
        assert!(q <= MAX_QUBITS, "register too large");
        let mut out = DensityMatrix::zeros(q);
        let (d1, d2) = (self.dim, other.dim);
        for r2 in 0..d2 {
            for c2 in 0..d2 {
                let f = other.data[r2 * d2 + c2];
                if f == C64::new(0.0, 0.0) {
                    continue;
                }
                for r1 in 0..d1 {
                    for c1 in 0..d1 {
                        // `other` occupies the high bits.
                        let r = (r2 << self.qubit_count) | r1;
                        let c = (c2 << self.qubit_count) | c1;
                        out.data[r * out.dim + c] = f * self.data[r1 * d1 + c1];
                    }
                }
            }
        }
        out
    }

    /// Trace out the `count` highest qubits.
    pub fn partial_trace_high(&self, count: usize) -> DensityMatrix {
        let keep = self.qubit_count - count;
        let mut out = DensityMatrix::zeros(keep);
        let kd = out.dim;
        let env = 1usize << count;
        for e in 0..env {
            let off = e << keep;
            for r in 0..kd {
                for c in 0..kd {
                    out.data[r * kd + c] += self.data[(off | r) * self.dim + (off | c)];
                }
            }
        }
        out
    }

    /// Numerical hygiene after channel applications: (rho + rho^dag)/2 and
    /// trace renormalization. Bounds drift over long channel chains.
    pub fn hermitize_and_normalize(&mut self) -> Result<()> {
        let d = self.dim;
        for r in 0..d {
            for c in (r + 1)..d {
                let a = self.data[r * d + c];
                let b = self.data[c * d + r].conj();
                let m = (a + b) * 0.5;
                self.data[r * d + c] = m;
                self.data[c * d + r] = m.conj();
            }
            let diag = self.data[r * d + r];
            self.data[r * d + r] = C64::new(diag.re, 0.0);
        }
        let t = self.trace().re;
        if t <= 0.0 {
            return Err(Error::InternalConsistency(format!(
                "non-positive trace {t} during renormalization"
            )));
        }
        self.scale(1.0 / t);
        Ok(())
    }

    /// Max entrywise deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for r in 0..d {
            for c in 0..d {
                let defect = (self.data[r * d + c] - self.data[c * d + r].conj()).norm();
                worst = worst.max(defect);
            }
        }
        worst / 2.0
    }
}

fn check_qubit(rho: &DensityMatrix, qubit: usize) -> Result<()> {
    if qubit >= rho.qubit_count() {
        return Err(Error::InvalidArgument(format!(
            "qubit index {qubit} out of range for {} qubits",
            rho.qubit_count()
        )));
    }
    Ok(())
}

/// Single-qubit depolarizing channel:
/// (1-eps) rho + (eps/3) (X rho X + Y rho Y + Z rho Z) on `qubit`.
///
/// Implemented through the identity
/// sum_{P in {I,X,Y,Z}} P rho P / 4 = I/2 (x) Tr_qubit(rho),
/// which turns the channel into a single O(dim^2) pass.
pub fn depolarize_single(rho: &DensityMatrix, qubit: usize, eps: f64) -> Result<DensityMatrix> {
    check_qubit(rho, qubit)?;
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::InvalidArgument(format!("eps = {eps} outside [0, 1]")));
    }
    let g = 4.0 * eps / 3.0;
    let keep = 1.0 - g;
    let d = rho.dim();
    let m = 1usize << qubit;
    let mut out = DensityMatrix::zeros(rho.qubit_count());
    for r in 0..d {
        for c in 0..d {
            let mut v = keep * rho.entry(r, c);
            if (r & m) == (c & m) {
                v += g * 0.5 * (rho.entry(r, c) + rho.entry(r ^ m, c ^ m));
            }
            out.set_entry(r, c, v);
        }
    }
    Ok(out)
}

/// Two-qubit depolarizing channel:
/// (1-eps) rho + (eps/15) sum over the 15 non-identity two-qubit Paulis.
///
/// Same replacement-channel trick as `depolarize_single`, over the pair.
pub fn depolarize_two(
    rho: &DensityMatrix,
    qubits: (usize, usize),
    eps: f64,
) -> Result<DensityMatrix> {
    let (q1, q2) = qubits;
    check_qubit(rho, q1)?;
    check_qubit(rho, q2)?;
    if q1 == q2 {
        return Err(Error::InvalidArgument(format!(
            "two-qubit channel needs distinct qubits, got ({q1}, {q2})"
        )));
    }
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::InvalidArgument(format!("eps = {eps} outside [0, 1]")));
    }
    let g = 16.0 * eps / 15.0;
    let keep = 1.0 - g;
    let d = rho.dim();
    let (m1, m2) = (1usize << q1, 1usize << q2);
    let pair = m1 | m2;
    let mut out = DensityMatrix::zeros(rho.qubit_count());
    for r in 0..d {
        for c in 0..d {
            let mut v = keep * rho.entry(r, c);
            if (r & pair) == (c & pair) {
                let r0 = r & !pair;
                let c0 = c & !pair;
                let mut tr = C64::new(0.0, 0.0);
                for sub in [0usize, m1, m2, pair] {
                    tr += rho.entry(r0 | sub, c0 | sub);
                }
                v += g * 0.25 * tr;
            }
            out.set_entry(r, c, v);
        }
    }
    Ok(out)
}

/// P rho P^dag for a Pauli string P (trace preserved exactly).
pub fn pauli_apply(rho: &DensityMatrix, p: &PauliString) -> Result<DensityMatrix> {
    if p.qubit_count() != rho.qubit_count() {
        return Err(Error::DimensionMismatch(format!(
            "Pauli on {} qubits applied to {}-qubit state",
            p.qubit_count(),
            rho.qubit_count()
        )));
    }
    let x = p.x_mask() as usize;
    // Z and Y letters contribute (-1)^bit phases; the i^(#Y) global phase
    // cancels between P and P^dag.
    let zy = p.z_mask() as usize;
    let d = rho.dim();
    let mut out = DensityMatrix::zeros(rho.qubit_count());
    for r in 0..d {
        let sr = ((r & zy).count_ones() & 1) == 1;
        for c in 0..d {
            let sc = ((c & zy).count_ones() & 1) == 1;
            let v = rho.entry(r, c);
            out.set_entry(r ^ x, c ^ x, if sr != sc { -v } else { v });
        }
    }
    Ok(out)
}

/// Full phase of P|i> for a Pauli string: i^(#Y) * (-1)^popcount(i & z_mask),
/// with target index i ^ x_mask.
pub(crate) fn pauli_phase(p: &PauliString, index: usize) -> C64 {
    let y_count = (p.x_mask() & p.z_mask()).count_ones();
    let sign = if ((index as u32 & p.z_mask()).count_ones() & 1) == 1 {
        -1.0
    } else {
        1.0
    };
    let i_pow = match y_count % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    };
    i_pow * sign
}

/// P * rho (left multiplication only, no conjugation).
pub(crate) fn pauli_left_mul(rho: &DensityMatrix, p: &PauliString) -> DensityMatrix {
    let x = p.x_mask() as usize;
    let d = rho.dim();
    let mut out = DensityMatrix::zeros(rho.qubit_count());
    for r in 0..d {
        let ph = pauli_phase(p, r);
        for c in 0..d {
            out.data[(r ^ x) * d + c] = ph * rho.data[r * d + c];
        }
    }
    out
}

/// rho * P (right multiplication only).
pub(crate) fn pauli_right_mul(rho: &DensityMatrix, p: &PauliString) -> DensityMatrix {
    let x = p.x_mask() as usize;
    let d = rho.dim();
    let mut out = DensityMatrix::zeros(rho.qubit_count());
    for c in 0..d {
        // Column c of the output takes column c ^ x of rho with the phase of
        // P|c^x> -> |c>.
        let ph = pauli_phase(p, c ^ x);
        for r in 0..d {
            out.data[r * d + c] = ph * rho.data[r * d + (c ^ x)];
        }
    }
    out
}

/// Accumulated transmission error between consecutive TYPE II nodes:
/// eps_trans = 1 - (1 - eps_r)^n (1 - eps_0).
pub fn transmission_error(noise: &NoiseParams, n: u32) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "transmission_error needs n >= 1 links".into(),
        ));
    }
    Ok(1.0 - (1.0 - noise.epsilon_r).powi(n as i32) * (1.0 - noise.epsilon_0))
}

/// Depolarizing parameterizations: eps = 3(1-p)/4.
pub fn epsilon_from_p(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("p = {p} outside [0, 1]")));
    }
    Ok(0.75 * (1.0 - p))
}

/// Inverse of `epsilon_from_p`: p = 1 - 4 eps/3.
pub fn p_from_epsilon(eps: f64) -> Result<f64> {
    if !(0.0..=0.75).contains(&eps) {
        return Err(Error::InvalidArgument(format!(
            "eps = {eps} outside [0, 3/4]"
        )));
    }
    Ok(1.0 - 4.0 * eps / 3.0)
}
