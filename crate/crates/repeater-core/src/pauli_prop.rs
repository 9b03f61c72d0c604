//! Symbolic propagation of Pauli errors through controlled-Pauli Clifford
//! gates, up to global phase. Used to enumerate fault locations when building
//! the flagged correction tables and by the trajectory-sampling test oracle.
//!
//! Conjugation rules are derived numerically once from the 4x4 gate matrices
//! rather than hand-written case tables, so they cannot drift out of sync
//! with the density-matrix simulation.

use std::sync::OnceLock;

use num_complex::Complex64 as C64;

use crate::channels::Pauli;

/// An n-qubit Pauli error frame as X/Z bit masks (Y where both bits set).
/// Phases are deliberately dropped; they never affect syndromes or
/// correction decisions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub(crate) struct ErrorFrame {
    pub x: u32,
    pub z: u32,
}

impl ErrorFrame {
    pub fn xor_pauli(&mut self, x: u32, z: u32) {
        self.x ^= x;
        self.z ^= z;
    }

    pub fn bit(mask: u32, qubit: usize) -> bool {
        (mask >> qubit) & 1 == 1
    }
}

/// A controlled-Pauli gate: applies `letter` on `target` when `control` is 1.
/// A CNOT is `letter = X`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ControlledPauli {
    pub control: usize,
    pub target: usize,
    pub letter: Pauli,
}

fn pauli_matrix(p: Pauli) -> [[C64; 2]; 2] {
    let o = C64::new(0.0, 0.0);
    let l = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    match p {
        Pauli::I => [[l, o], [o, l]],
        Pauli::X => [[o, l], [l, o]],
        Pauli::Y => [[o, -i], [i, o]],
        Pauli::Z => [[l, o], [o, -l]],
    }
}

type Mat4 = [[C64; 4]; 4];

fn kron2(a: [[C64; 2]; 2], b: [[C64; 2]; 2]) -> Mat4 {
    let mut m = [[C64::new(0.0, 0.0); 4]; 4];
    for (ar, arow) in a.iter().enumerate() {
        for (ac, &av) in arow.iter().enumerate() {
            for (br, brow) in b.iter().enumerate() {
                for (bc, &bv) in brow.iter().enumerate() {
                    m[ar * 2 + br][ac * 2 + bc] = av * bv;
                }
            }
        }
    }
    m
}

fn matmul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut m = [[C64::new(0.0, 0.0); 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..4 {
                acc += a[r][k] * b[k][c];
            }
            m[r][c] = acc;
        }
    }
    m
}

fn dagger(a: &Mat4) -> Mat4 {
    let mut m = [[C64::new(0.0, 0.0); 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            m[r][c] = a[c][r].conj();
        }
    }
    m
}

const PAULIS: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

fn pauli_index(p: Pauli) -> usize {
    match p {
        Pauli::I => 0,
        Pauli::X => 1,
        Pauli::Y => 2,
        Pauli::Z => 3,
    }
}

/// Controlled-P on basis |c t> with index c*2 + t.
fn controlled_matrix(letter: Pauli) -> Mat4 {
    let p = pauli_matrix(letter);
    let mut m = [[C64::new(0.0, 0.0); 4]; 4];
    m[0][0] = C64::new(1.0, 0.0);
    m[1][1] = C64::new(1.0, 0.0);
    for t in 0..2 {
        for t2 in 0..2 {
            m[2 + t][2 + t2] = p[t][t2];
        }
    }
    m
}

/// For each input pair (A on control, B on target), the conjugated pair
/// U (A x B) U^dag, as an index pair; phases dropped.
/// Table index: pauli_index(A)*4 + pauli_index(B), value likewise.
fn build_conj_table(letter: Pauli) -> [u8; 16] {
    let u = controlled_matrix(letter);
    let ud = dagger(&u);
    let mut table = [0u8; 16];
    for (ai, &a) in PAULIS.iter().enumerate() {
        for (bi, &b) in PAULIS.iter().enumerate() {
            let input = kron2(pauli_matrix(a), pauli_matrix(b));
            let conj = matmul(&matmul(&u, &input), &ud);
            let mut found = None;
            'search: for (ci, &cc) in PAULIS.iter().enumerate() {
                for (di, &dd) in PAULIS.iter().enumerate() {
                    let cand = kron2(pauli_matrix(cc), pauli_matrix(dd));
                    for phase in [
                        C64::new(1.0, 0.0),
                        C64::new(-1.0, 0.0),
                        C64::new(0.0, 1.0),
                        C64::new(0.0, -1.0),
                    ] {
                        let mut matches = true;
                        for r in 0..4 {
                            for c in 0..4 {
                                if (conj[r][c] - phase * cand[r][c]).norm() > 1e-12 {
                                    matches = false;
                                }
                            }
                        }
                        if matches {
                            found = Some(ci * 4 + di);
                            break 'search;
                        }
                    }
                }
            }
            table[ai * 4 + bi] =
                found.expect("controlled-Pauli conjugation must map Paulis to Paulis") as u8;
        }
    }
    table
}

fn conj_tables() -> &'static [[u8; 16]; 3] {
    static TABLES: OnceLock<[[u8; 16]; 3]> = OnceLock::new();
    TABLES.get_or_init(|| {
        [
            build_conj_table(Pauli::X),
            build_conj_table(Pauli::Y),
            build_conj_table(Pauli::Z),
        ]
    })
}

/// Conjugate an error frame through a controlled-Pauli gate (in place).
pub(crate) fn conjugate(frame: &mut ErrorFrame, gate: &ControlledPauli) {
    let table = &conj_tables()[match gate.letter {
        Pauli::X => 0,
        Pauli::Y => 1,
        Pauli::Z => 2,
        Pauli::I => return,
    }];
    let a = pack(frame, gate.control);
    let b = pack(frame, gate.target);
    let out = table[(pauli_index(a) * 4 + pauli_index(b)) as usize] as usize;
    unpack(frame, gate.control, PAULIS[out / 4]);
    unpack(frame, gate.target, PAULIS[out % 4]);
}

fn pack(frame: &ErrorFrame, qubit: usize) -> Pauli {
    match (ErrorFrame::bit(frame.x, qubit), ErrorFrame::bit(frame.z, qubit)) {
        (false, false) => Pauli::I,
        (true, false) => Pauli::X,
        (true, true) => Pauli::Y,
        (false, true) => Pauli::Z,
    }
}

fn unpack(frame: &mut ErrorFrame, qubit: usize, p: Pauli) {
    let m = 1u32 << qubit;
    frame.x &= !m;
    frame.z &= !m;
    match p {
        Pauli::I => {}
        Pauli::X => frame.x |= m,
        Pauli::Y => {
            frame.x |= m;
            frame.z |= m;
        }
        Pauli::Z => frame.z |= m,
    }
}
