//! Dense-matrix checks of the stabilizer group, syndrome projectors and pure errors.

use nalgebra::DMatrix;
use num_complex::Complex64;
use steanesim::code::{syndrome_phase, StabilizerCode};
use steanesim::oracle::dense_pauli_matrix;

type Dense = DMatrix<Complex64>;

fn max_abs(m: &Dense) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `Π_s = Π_j (I + (-1)^{s_j} g_j) / 2`, built from the generators alone.
fn projector(code: &StabilizerCode, s: usize) -> Dense {
    let dim = 1 << code.num_qubits();
    let id = Dense::identity(dim, dim);
    code.generators().iter().enumerate().fold(id.clone(), |acc, (j, g)| {
        let sign = if s >> j & 1 == 1 { -1.0 } else { 1.0 };
        acc * (&id + dense_pauli_matrix(g) * Complex64::new(sign, 0.0)) * Complex64::new(0.5, 0.0)
    })
}

#[test]
fn group_elements_match_dense_generator_products() {
    for code in [StabilizerCode::steane(), StabilizerCode::repetition3()] {
        let dim = 1 << code.num_qubits();
        let gens: Vec<Dense> = code.generators().iter().map(dense_pauli_matrix).collect();
        assert_eq!(code.stabilizer_group().len(), 1 << gens.len());
        for el in code.stabilizer_group() {
            let mut expected = Dense::identity(dim, dim);
            for (j, g) in gens.iter().enumerate() {
                if el.generator_mask >> j & 1 == 1 {
                    expected *= g;
                }
            }
            let got = dense_pauli_matrix(&el.op);
            assert!(max_abs(&(got - expected)) < 1e-12, "mask {:b}", el.generator_mask);
            assert!(el.op.is_hermitian());
        }
    }
}

#[test]
fn group_is_closed_under_multiplication() {
    let code = StabilizerCode::steane();
    let labels: Vec<_> = code.stabilizer_group().iter().map(|e| e.op).collect();
    for a in &labels {
        for b in &labels {
            let prod = a.multiply(b).unwrap();
            assert!(labels.contains(&prod));
        }
    }
}

#[test]
fn projectors_are_a_resolution_of_identity() {
    for code in [StabilizerCode::steane(), StabilizerCode::repetition3()] {
        let dim = 1 << code.num_qubits();
        let total = (0..code.num_syndromes()).fold(Dense::zeros(dim, dim), |acc, s| acc + projector(&code, s));
        assert!(max_abs(&(total - Dense::identity(dim, dim))) < 1e-12);
    }
}

#[test]
fn projectors_are_mutually_orthogonal() {
    let code = StabilizerCode::steane();
    let pairs = [(0, 1), (3, 40), (17, 18), (63, 0), (21, 42), (5, 6)];
    for (s, t) in pairs {
        assert!(max_abs(&(projector(&code, s) * projector(&code, t))) < 1e-12, "{s} {t}");
    }
    let p = projector(&code, 9);
    assert!(max_abs(&(&p * &p - &p)) < 1e-12);
}

#[test]
fn group_sum_with_syndrome_phases_gives_the_projector() {
    let code = StabilizerCode::steane();
    let dim = 1 << code.num_qubits();
    let norm = 1.0 / code.stabilizer_group().len() as f64;
    for s in [0, 1, 12, 33, 63] {
        let sum = code.stabilizer_group().iter().fold(Dense::zeros(dim, dim), |acc, el| {
            let phase = syndrome_phase(s, el.generator_mask) as f64;
            acc + dense_pauli_matrix(&el.op) * Complex64::new(phase * norm, 0.0)
        });
        assert!(max_abs(&(sum - projector(&code, s))) < 1e-12, "syndrome {s}");
    }
}

#[test]
fn syndrome_phase_examples() {
    for m in 0..64 {
        assert_eq!(syndrome_phase(0, m), 1);
    }
    for s in 0..64 {
        assert_eq!(syndrome_phase(s, 0), 1);
    }
    // Bits 1 and 2 set; element g1·g2 sees even parity.
    assert_eq!(syndrome_phase(0b000110, 0b000110), 1);
    assert_eq!(syndrome_phase(0b000110, 0b000010), -1);
}

#[test]
fn pure_errors_map_each_syndrome_space_to_the_code_space() {
    for code in [StabilizerCode::steane(), StabilizerCode::repetition3()] {
        let p0 = projector(&code, 0);
        for s in 0..code.num_syndromes() {
            let t = dense_pauli_matrix(code.pure_error(s));
            let mapped = &t * projector(&code, s) * t.adjoint();
            assert!(max_abs(&(mapped - &p0)) < 1e-12, "syndrome {s}");
            assert_eq!(code.syndrome_of(code.pure_error(s)), s);
        }
    }
}

#[test]
fn logical_operators_preserve_the_code_space() {
    let code = StabilizerCode::steane();
    let p0 = projector(&code, 0);
    for l in code.logicals() {
        let m = dense_pauli_matrix(l);
        assert!(max_abs(&(&m * &p0 - &p0 * &m)) < 1e-12);
    }
}
