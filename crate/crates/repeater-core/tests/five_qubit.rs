use std::collections::HashSet;

use approx::assert_abs_diff_eq;
use num_complex::Complex64 as C64;
use repeater_core::channels::{pauli_apply, Pauli, PauliString};
use repeater_core::five_qubit::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[test]
fn generators_commute_and_match_definition() {
    let gens = generators();
    assert_eq!(gens[0].to_string(), "X1Z2Z3X4");
    assert_eq!(gens[1].to_string(), "X2Z3Z4X5");
    assert_eq!(gens[2].to_string(), "X1X3Z4Z5");
    assert_eq!(gens[3].to_string(), "Z1X2X4Z5");
    for a in &gens {
        for b in &gens {
            assert!(a.commutes_with(b));
        }
        assert!(a.commutes_with(&logical_x()));
        assert!(a.commutes_with(&logical_z()));
    }
    assert!(!logical_x().commutes_with(&logical_z()));
    assert_eq!(StabilizerSet::default().group().len(), 16);
}

#[test]
fn logical_states_are_orthonormal_codewords() {
    let (zero, one) = logical_states();
    assert_abs_diff_eq!(zero.trace().re, 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(one.trace().re, 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(zero.overlap(&one).unwrap(), 0.0, epsilon = 1e-12);
    // Stabilized: g rho g = rho for every generator.
    for state in [&zero, &one] {
        for g in &generators() {
            let conj = pauli_apply(state, g).unwrap();
            assert_abs_diff_eq!(conj.overlap(state).unwrap(), 1.0, epsilon = 1e-12);
        }
    }
    // Z_L eigenvalues.
    let z_zero = pauli_apply(&zero, &logical_z()).unwrap();
    assert_abs_diff_eq!(z_zero.overlap(&zero).unwrap(), 1.0, epsilon = 1e-12);
    // X_L maps |0_L> to |1_L>.
    let x_zero = pauli_apply(&zero, &logical_x()).unwrap();
    assert_abs_diff_eq!(x_zero.overlap(&one).unwrap(), 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(x_zero.overlap(&zero).unwrap(), 0.0, epsilon = 1e-12);
}

#[test]
fn encode_is_linear_in_bloch_vector() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let plus = encode(c(h, 0.0), c(h, 0.0)).unwrap();
    let x_plus = pauli_apply(&plus, &logical_x()).unwrap();
    assert_abs_diff_eq!(x_plus.overlap(&plus).unwrap(), 1.0, epsilon = 1e-12);
    // Reference state has equal overlap loss against each logical Pauli.
    let rho0 = reference_logical_state();
    assert_abs_diff_eq!(rho0.trace().re, 1.0, epsilon = 1e-12);
    for l in [logical_x(), logical_y(), logical_z()] {
        let conj = pauli_apply(&rho0, &l).unwrap();
        assert_abs_diff_eq!(conj.overlap(&rho0).unwrap(), 1.0 / 3.0, epsilon = 1e-9);
    }
}

#[test]
fn syndrome_packing_round_trip() {
    for idx in 0..16 {
        let s = Syndrome::from_index(idx);
        assert_eq!(s.index(), idx);
        assert_eq!(Syndrome::from_bits(s.bits()).unwrap(), s);
    }
    assert_eq!(Syndrome::trivial().index(), 0);
    assert_eq!(Syndrome::from_bits([1, 1, -1, -1]).unwrap().to_string(), "(+,+,-,-)");
    assert!(Syndrome::from_bits([0, 1, 1, 1]).is_err());
}

#[test]
fn fifteen_paulis_give_fifteen_distinct_syndromes() {
    let mut seen = HashSet::new();
    for q in 0..5 {
        for p in [Pauli::X, Pauli::Y, Pauli::Z] {
            let s = syndrome_of(&PauliString::single(5, q, p));
            assert_ne!(s.index(), 0);
            assert!(seen.insert(s.index()));
        }
    }
    assert_eq!(seen.len(), 15);
    // The logical operators are invisible to the syndrome.
    assert_eq!(syndrome_of(&logical_x()).index(), 0);
    assert_eq!(syndrome_of(&logical_z()).index(), 0);
    // Anchor one convention point: X5 flips generators 3 and 4.
    assert_eq!(
        syndrome_of(&PauliString::single(5, 4, Pauli::X)).bits(),
        [1, 1, -1, -1]
    );
}

#[test]
fn weight1_table_inverts_every_single_error() {
    let table = build_weight1_table();
    assert_eq!(table.entries().count(), 16);
    for q in 0..5 {
        for p in [Pauli::X, Pauli::Y, Pauli::Z] {
            let e = PauliString::single(5, q, p);
            let corr = table.correction(&syndrome_of(&e)).unwrap();
            assert_eq!(error_class(&corr.times(&e)), ErrorClass::Stabilizer);
        }
    }
    assert_eq!(
        table.correction(&Syndrome::trivial()).unwrap(),
        &PauliString::identity(5)
    );
}

#[test]
fn reduce_mod_stabilizer_properties() {
    // A generator reduces to identity, a generator times X1 to weight <= 2.
    let g1 = generators()[0].clone();
    assert_eq!(reduce_mod_stabilizer(&g1), PauliString::identity(5));
    let e = g1.times(&PauliString::single(5, 0, Pauli::X));
    let r = reduce_mod_stabilizer(&e);
    assert!(r.weight() <= 2);
    assert_eq!(syndrome_of(&r), syndrome_of(&e));
    // Idempotent.
    assert_eq!(reduce_mod_stabilizer(&r), r);
}

#[test]
fn error_classes() {
    assert_eq!(error_class(&PauliString::identity(5)), ErrorClass::Stabilizer);
    assert_eq!(error_class(&generators()[2]), ErrorClass::Stabilizer);
    assert_eq!(error_class(&logical_x()), ErrorClass::LogicalX);
    assert_eq!(error_class(&logical_z()), ErrorClass::LogicalZ);
    assert_eq!(
        error_class(&logical_x().times(&generators()[1])),
        ErrorClass::LogicalX
    );
    assert_eq!(
        error_class(&PauliString::single(5, 2, Pauli::Y)),
        ErrorClass::Detectable
    );
}

#[test]
fn flagged_tables_have_low_weight_and_match_flag_faults() {
    for k in 1..=4 {
        let table = build_flagged_table(k).unwrap();
        assert_eq!(table.entries().count(), 16);
        for (_, p) in table.entries() {
            assert!(p.weight() <= 2, "k={k}: correction {p} too heavy");
        }
    }
}

#[test]
fn erasure_table_lost5_matches_reference_rows() {
    let table = build_erasure_table(5).unwrap();
    let rows: Vec<(Syndrome, PauliString)> = table
        .entries()
        .map(|(s, p)| (s, p.clone()))
        .collect();
    assert_eq!(rows.len(), 4);
    let expect = [
        ([1, 1, 1, 1], "I"),
        ([1, 1, -1, -1], "X5"),
        ([1, -1, 1, 1], "Z5"),
        ([1, -1, -1, -1], "Y5"),
    ];
    for (bits, pauli) in expect {
        let s = Syndrome::from_bits(bits).unwrap();
        let got = table.correction(&s).unwrap();
        assert_eq!(got.to_string(), pauli, "syndrome {s}");
    }
    let _ = rows;
}

#[test]
fn erasure_full_table_policy_anchor() {
    // Four single-qubit extras share the syndrome (-,+,+,+) when qubit 1 is
    // lost; the collision policy picks X2.
    let table = build_erasure_table_full(1).unwrap();
    assert_eq!(table.entries().count(), 16);
    let s = Syndrome::from_bits([-1, 1, 1, 1]).unwrap();
    assert_eq!(table.correction(&s).unwrap().to_string(), "X2");
}

#[test]
fn flagged_table_rejects_bad_index() {
    assert!(build_flagged_table(0).is_err());
    assert!(build_flagged_table(5).is_err());
    assert!(build_erasure_table(0).is_err());
    assert!(build_erasure_table(6).is_err());
}
