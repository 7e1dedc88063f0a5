//! Brute-force density-matrix simulation of one error-correction round.
//!
//! The code block is held together with a reference qubit in a maximally
//! entangled state, noise is applied qubit by qubit, and every syndrome is
//! projected out explicitly. This path shares no arithmetic with
//! [`crate::qec`] and serves as its correctness oracle; it costs `O(16^n)`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::channel::{choi_to_gamma, ComplexMatrix4, RealMatrix4};
use crate::code::StabilizerCode;
use crate::pauli::PauliOperator;
use crate::qec::DECODER_TIE_TOLERANCE;

type Dense = DMatrix<Complex64>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Pauli string acting on the first `n` of `total` qubits, as a signed permutation.
/// Qubit 0 is the most significant bit of the basis index.
#[derive(Clone, Debug)]
struct PauliAction {
    flip: usize,
    coeff: Vec<Complex64>,
}

impl PauliAction {
    fn new(op: &PauliOperator, total: usize) -> Self {
        let dim = 1 << total;
        let bit = |q: usize| 1usize << (total - 1 - q);
        let mut flip = 0;
        for q in 0..op.num_qubits() {
            if (op.x_bits() >> q) & 1 == 1 {
                flip |= bit(q);
            }
        }
        let (re, im) = op.phase().to_re_im();
        let global = c(re, im);
        let coeff = (0..dim)
            .map(|j| {
                let mut a = global;
                for q in 0..op.num_qubits() {
                    let b = (j & bit(q) != 0) as i32;
                    a *= match op.component(q) {
                        0 | 1 => c(1.0, 0.0),
                        2 => c(0.0, 1.0) * (1 - 2 * b) as f64,
                        _ => c((1 - 2 * b) as f64, 0.0),
                    };
                }
                a
            })
            .collect();
        PauliAction { flip, coeff }
    }

    /// `P |ψ⟩`.
    fn apply_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![c(0.0, 0.0); v.len()];
        for (j, &a) in v.iter().enumerate() {
            out[j ^ self.flip] += self.coeff[j] * a;
        }
        out
    }

    /// `P ρ`.
    fn left(&self, rho: &Dense) -> Dense {
        let dim = rho.nrows();
        Dense::from_fn(dim, dim, |r, k| {
            let j = r ^ self.flip;
            self.coeff[j] * rho[(j, k)]
        })
    }

    /// `ρ P`.
    fn right(&self, rho: &Dense) -> Dense {
        let dim = rho.nrows();
        Dense::from_fn(dim, dim, |r, k| self.coeff[k] * rho[(r, k ^ self.flip)])
    }

    fn conjugate(&self, rho: &Dense) -> Dense {
        self.right(&self.left(rho))
    }
}

/// Dense `2^n × 2^n` matrix of a Pauli operator (qubit 0 most significant).
pub fn dense_pauli_matrix(op: &PauliOperator) -> Dense {
    let n = op.num_qubits();
    let act = PauliAction::new(op, n);
    let dim = 1 << n;
    let mut m = Dense::zeros(dim, dim);
    for j in 0..dim {
        m[(j ^ act.flip, j)] = act.coeff[j];
    }
    m
}

/// Result of the dense simulation for one syndrome.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleRecord {
    pub gamma: RealMatrix4,
    pub correction: usize,
    pub fidelity: f64,
}

#[derive(Clone, Debug)]
pub struct OracleResult {
    /// Normalised syndrome probabilities.
    pub probs: Vec<f64>,
    /// Sum of the unnormalised probabilities (one for trace-preserving noise).
    pub likelihood: f64,
    /// Decoded channel per syndrome, `None` where the probability vanishes.
    pub records: Vec<Option<OracleRecord>>,
}

/// Logical `|0̄⟩`, `|1̄⟩` as state vectors on the code qubits.
fn logical_basis(code: &StabilizerCode) -> [Vec<Complex64>; 2] {
    let n = code.num_qubits();
    let dim = 1 << n;
    let mut v = vec![c(0.0, 0.0); dim];
    v[0] = c(1.0, 0.0);
    let project = |v: &Vec<Complex64>, op: &PauliOperator| -> Vec<Complex64> {
        let pv = PauliAction::new(op, n).apply_vec(v);
        v.iter().zip(&pv).map(|(a, b)| (a + b) * 0.5).collect()
    };
    for g in code.generators() {
        v = project(&v, g);
    }
    v = project(&v, code.logical(3));
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    assert!(norm > 1e-6, "|0…0⟩ has no overlap with logical zero");
    let zero: Vec<Complex64> = v.iter().map(|z| z / norm).collect();
    let one = PauliAction::new(code.logical(1), n).apply_vec(&zero);
    [zero, one]
}

/// Applies `ℰ(|k⟩⟨l|) = ½ Σ_i ⟨l|P_i|k⟩ Σ_j Γ_ij P_j` on one qubit.
fn apply_qubit_channel(rho: &Dense, gamma: &RealMatrix4, qubit: usize, total: usize) -> Dense {
    let paulis = [
        [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]],
        [[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]],
        [[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]],
        [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]],
    ];
    // image[k][l][a][b] = ⟨a|ℰ(|k⟩⟨l|)|b⟩
    let mut image = [[[[c(0.0, 0.0); 2]; 2]; 2]; 2];
    for k in 0..2 {
        for l in 0..2 {
            for (i, pi) in paulis.iter().enumerate() {
                let w = pi[l][k] * 0.5;
                if w == c(0.0, 0.0) {
                    continue;
                }
                for (j, pj) in paulis.iter().enumerate() {
                    for a in 0..2 {
                        for b in 0..2 {
                            image[k][l][a][b] += w * gamma[(i, j)] * pj[a][b];
                        }
                    }
                }
            }
        }
    }
    let dim = rho.nrows();
    let bit = 1usize << (total - 1 - qubit);
    let mut out = Dense::zeros(dim, dim);
    for r in (0..dim).filter(|r| r & bit == 0) {
        for col in (0..dim).filter(|col| col & bit == 0) {
            for k in 0..2 {
                for l in 0..2 {
                    let v = rho[(r | (k * bit), col | (l * bit))];
                    if v == c(0.0, 0.0) {
                        continue;
                    }
                    for a in 0..2 {
                        for b in 0..2 {
                            out[(r | (a * bit), col | (b * bit))] += v * image[k][l][a][b];
                        }
                    }
                }
            }
        }
    }
    out
}

fn quad(u: &[Complex64], rho: &Dense, v: &[Complex64]) -> Complex64 {
    let mut acc = c(0.0, 0.0);
    for (r, ur) in u.iter().enumerate() {
        if *ur == c(0.0, 0.0) {
            continue;
        }
        let mut row = c(0.0, 0.0);
        for (k, vk) in v.iter().enumerate() {
            row += rho[(r, k)] * vk;
        }
        acc += ur.conj() * row;
    }
    acc
}

/// Simulates one round for per-qubit noise `gammas` on `code`.
pub fn oracle_qec_round(code: &StabilizerCode, gammas: &[RealMatrix4]) -> OracleResult {
    let n = code.num_qubits();
    assert_eq!(gammas.len(), n, "one channel per code qubit");
    let total = n + 1;
    let dim = 1 << total;
    let [zero, one] = logical_basis(code);

    // |k̄ r⟩ with the reference qubit as the least significant bit.
    let basis_vec = |k: usize, r: usize| -> Vec<Complex64> {
        let logical = if k == 0 { &zero } else { &one };
        let mut v = vec![c(0.0, 0.0); dim];
        for (j, a) in logical.iter().enumerate() {
            v[2 * j + r] = *a;
        }
        v
    };
    let kets: Vec<Vec<Complex64>> = (0..4).map(|i| basis_vec(i / 2, i % 2)).collect();
    let bell: Vec<Complex64> = kets[0]
        .iter()
        .zip(&kets[3])
        .map(|(a, b)| (a + b) * std::f64::consts::FRAC_1_SQRT_2)
        .collect();

    let mut rho = Dense::from_fn(dim, dim, |r, k| bell[r] * bell[k].conj());
    for (q, g) in gammas.iter().enumerate() {
        rho = apply_qubit_channel(&rho, g, q, total);
    }

    let extend = |op: &PauliOperator| PauliAction::new(op, total);
    let generators: Vec<PauliAction> = code.generators().iter().map(extend).collect();
    let logicals: Vec<PauliAction> = code.logicals().iter().map(extend).collect();

    // Π_s ρ Π_s for every syndrome by successive two-sided projections.
    let mut branches = vec![(0usize, rho)];
    for (j, g) in generators.iter().enumerate() {
        let mut next = Vec::with_capacity(2 * branches.len());
        for (s, r) in branches {
            let gr = g.left(&r);
            let rg = g.right(&r);
            let grg = g.right(&gr);
            for bit in 0..2 {
                let sign = if bit == 0 { 1.0 } else { -1.0 };
                let m = (&r + (&gr + &rg) * c(sign, 0.0) + &grg) * c(0.25, 0.0);
                next.push((s | bit << j, m));
            }
        }
        branches = next;
    }
    branches.sort_by_key(|(s, _)| *s);

    let unnormalized: Vec<f64> = branches.iter().map(|(_, m)| m.trace().re).collect();
    let likelihood: f64 = unnormalized.iter().sum();
    let mut records = Vec::with_capacity(branches.len());
    for (s, projected) in &branches {
        let pr = unnormalized[*s];
        if pr <= 0.0 {
            records.push(None);
            continue;
        }
        let corrected = extend(code.pure_error(*s)).conjugate(projected);
        let fidelities: Vec<f64> = logicals
            .iter()
            .map(|l| quad(&l.apply_vec(&bell), &corrected, &l.apply_vec(&bell)).re / pr)
            .collect();
        let best = fidelities.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let q = fidelities
            .iter()
            .position(|&f| f >= best - DECODER_TIE_TOLERANCE)
            .unwrap_or(0);
        let vecs: Vec<Vec<Complex64>> = kets.iter().map(|k| logicals[q].apply_vec(k)).collect();
        let choi = ComplexMatrix4::from_fn(|a, b| quad(&vecs[a], &corrected, &vecs[b]) / pr);
        let (gamma, _) = choi_to_gamma(&choi);
        records.push(Some(OracleRecord {
            gamma,
            correction: q,
            fidelity: fidelities[q],
        }));
    }
    OracleResult {
        probs: unnormalized.iter().map(|p| p / likelihood).collect(),
        likelihood,
        records,
    }
}
