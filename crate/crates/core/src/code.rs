//! Stabilizer codes used by the simulator: the [[7,1,3]] Steane code and the
//! 3-qubit repetition code that hosts the coherent-rotation fixture.
//!
//! Group elements are indexed by their generator subset: element `m` is the
//! ordered product of the generators `j` with bit `j` of `m` set. Syndromes
//! use the same bit layout (bit `j` is the outcome of generator `j`).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pauli::{PauliError, PauliOperator, Phase};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodeError {
    #[error(transparent)]
    Pauli(#[from] PauliError),
    #[error("generators {0} and {1} do not commute")]
    NonCommuting(usize, usize),
    #[error("generators are not independent")]
    Dependent,
    #[error("generator {0} is not Hermitian")]
    NonHermitian(usize),
    #[error("invalid logical operators: {0}")]
    InvalidLogical(&'static str),
    #[error("no Pauli operator produces syndrome {0:#b}")]
    MissingPureError(usize),
    #[error("{0} generators is more than the supported maximum of 16")]
    TooManyGenerators(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodeKind {
    Steane7,
    Repetition3,
}

/// A stabilizer group element tagged with the generators whose product it is.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GroupElement {
    pub op: PauliOperator,
    pub generator_mask: u32,
}

/// All `2^r` products of `r` commuting, independent generators.
pub fn enumerate_stabilizer_group(
    n: usize,
    generators: &[PauliOperator],
) -> Result<Vec<GroupElement>, CodeError> {
    let r = generators.len();
    if r > 16 {
        return Err(CodeError::TooManyGenerators(r));
    }
    for (i, g) in generators.iter().enumerate() {
        if g.num_qubits() != n {
            return Err(PauliError::DimensionMismatch(n, g.num_qubits()).into());
        }
        if !g.is_hermitian() {
            return Err(CodeError::NonHermitian(i));
        }
        for (j, h) in generators.iter().enumerate().skip(i + 1) {
            if !g.commutes_with(h) {
                return Err(CodeError::NonCommuting(i, j));
            }
        }
    }
    let mut elements = Vec::with_capacity(1 << r);
    for mask in 0u32..(1u32 << r) {
        let mut op = PauliOperator::identity(n);
        for (j, g) in generators.iter().enumerate() {
            if mask >> j & 1 == 1 {
                op = op.multiply(g)?;
            }
        }
        if mask != 0 && op.is_identity() {
            return Err(CodeError::Dependent);
        }
        elements.push(GroupElement {
            op,
            generator_mask: mask,
        });
    }
    let mut labels: Vec<_> = elements.iter().map(|e| e.op.label()).collect();
    labels.sort_unstable();
    labels.dedup();
    if labels.len() != elements.len() {
        return Err(CodeError::Dependent);
    }
    Ok(elements)
}

/// `(-1)^{Σ_j s_j}` over the generators `j` in the decomposition of element `generator_mask`.
pub fn syndrome_phase(syndrome: usize, generator_mask: u32) -> i8 {
    if (syndrome as u32 & generator_mask).count_ones().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

#[derive(Clone, Debug)]
pub struct StabilizerCode {
    kind: CodeKind,
    n: usize,
    generators: Vec<PauliOperator>,
    group: Vec<GroupElement>,
    /// Logical `I, X, Y, Z` with `Y = i X Z`.
    logicals: [PauliOperator; 4],
    pure_errors: Vec<PauliOperator>,
}

impl StabilizerCode {
    /// Builds a code with one logical qubit and validates every group invariant.
    pub fn new(
        kind: CodeKind,
        generators: Vec<PauliOperator>,
        logical_x: PauliOperator,
        logical_z: PauliOperator,
    ) -> Result<Self, CodeError> {
        let n = logical_x.num_qubits();
        let group = enumerate_stabilizer_group(n, &generators)?;
        for l in [&logical_x, &logical_z] {
            if l.num_qubits() != n {
                return Err(PauliError::DimensionMismatch(n, l.num_qubits()).into());
            }
            if !l.is_hermitian() {
                return Err(CodeError::InvalidLogical("logical operators must be Hermitian"));
            }
            if generators.iter().any(|g| !g.commutes_with(l)) {
                return Err(CodeError::InvalidLogical(
                    "logical operators must commute with the stabilizer",
                ));
            }
            if group.iter().any(|e| e.op.label() == l.label()) {
                return Err(CodeError::InvalidLogical("logical operator lies in the stabilizer"));
            }
        }
        if logical_x.commutes_with(&logical_z) {
            return Err(CodeError::InvalidLogical("logical X and Z must anticommute"));
        }
        let logical_y = logical_x.multiply(&logical_z)?.scaled(Phase::I);
        let logicals = [PauliOperator::identity(n), logical_x, logical_y, logical_z];
        let pure_errors = minimum_weight_pure_errors(n, &generators)?;
        Ok(StabilizerCode {
            kind,
            n,
            generators,
            group,
            logicals,
            pure_errors,
        })
    }

    /// Steane code from the [7,4] Hamming parity checks: generators 0..3 are
    /// X-type, 3..6 are Z-type, with `X̄ = X⊗7` and `Z̄ = Z⊗7`.
    pub fn steane() -> Self {
        let n = 7;
        let rows: Vec<u64> = (0..3)
            .map(|r| (0..n).filter(|q| ((q + 1) >> r) & 1 == 1).fold(0u64, |m, q| m | 1 << q))
            .collect();
        let mut generators = Vec::with_capacity(6);
        for &row in &rows {
            generators.push(PauliOperator::new(n, row, 0, Phase::ONE).unwrap());
        }
        for &row in &rows {
            generators.push(PauliOperator::new(n, 0, row, Phase::ONE).unwrap());
        }
        let all = (1u64 << n) - 1;
        let lx = PauliOperator::new(n, all, 0, Phase::ONE).unwrap();
        let lz = PauliOperator::new(n, 0, all, Phase::ONE).unwrap();
        StabilizerCode::new(CodeKind::Steane7, generators, lx, lz).expect("Steane code is valid")
    }

    /// Bit-flip repetition code with stabilizers `ZZI`, `IZZ`, `X̄ = XXX`, `Z̄ = ZZZ`.
    pub fn repetition3() -> Self {
        let gens = vec!["ZZI".parse().unwrap(), "IZZ".parse().unwrap()];
        StabilizerCode::new(
            CodeKind::Repetition3,
            gens,
            "XXX".parse().unwrap(),
            "ZZZ".parse().unwrap(),
        )
        .expect("repetition code is valid")
    }

    pub fn from_kind(kind: CodeKind) -> Self {
        match kind {
            CodeKind::Steane7 => Self::steane(),
            CodeKind::Repetition3 => Self::repetition3(),
        }
    }

    pub fn kind(&self) -> CodeKind {
        self.kind
    }
    pub fn num_qubits(&self) -> usize {
        self.n
    }
    pub fn num_generators(&self) -> usize {
        self.generators.len()
    }
    pub fn num_syndromes(&self) -> usize {
        1 << self.generators.len()
    }
    pub fn generators(&self) -> &[PauliOperator] {
        &self.generators
    }
    /// Stabilizer group indexed by generator mask.
    pub fn stabilizer_group(&self) -> &[GroupElement] {
        &self.group
    }
    pub fn logical(&self, index: usize) -> &PauliOperator {
        &self.logicals[index]
    }
    pub fn logicals(&self) -> &[PauliOperator; 4] {
        &self.logicals
    }
    pub fn pure_error(&self, syndrome: usize) -> &PauliOperator {
        &self.pure_errors[syndrome]
    }

    pub fn syndrome_of(&self, error: &PauliOperator) -> usize {
        self.generators
            .iter()
            .enumerate()
            .filter(|(_, g)| !g.commutes_with(error))
            .fold(0, |s, (j, _)| s | 1 << j)
    }

    /// Minimum weight over the nontrivial logical cosets `L̄·S`.
    pub fn distance(&self) -> u32 {
        self.logicals[1..]
            .iter()
            .flat_map(|l| self.group.iter().map(move |e| (*l * e.op).weight()))
            .min()
            .unwrap_or(0)
    }
}

/// For every syndrome, the minimum-weight Pauli with that anticommutation
/// pattern; ties go to the smallest `(x_bits, z_bits)`.
fn minimum_weight_pure_errors(
    n: usize,
    generators: &[PauliOperator],
) -> Result<Vec<PauliOperator>, CodeError> {
    let count = 1usize << generators.len();
    let mut best: Vec<Option<PauliOperator>> = vec![None; count];
    let limit = 1u64 << n;
    for x in 0..limit {
        for z in 0..limit {
            let cand = PauliOperator::new(n, x, z, Phase::ONE)?;
            let s = generators
                .iter()
                .enumerate()
                .filter(|(_, g)| !g.commutes_with(&cand))
                .fold(0usize, |s, (j, _)| s | 1 << j);
            let better = match &best[s] {
                None => true,
                Some(cur) => {
                    (cand.weight(), cand.x_bits(), cand.z_bits())
                        < (cur.weight(), cur.x_bits(), cur.z_bits())
                }
            };
            if better {
                best[s] = Some(cand);
            }
        }
    }
    best.into_iter()
        .enumerate()
        .map(|(s, p)| p.ok_or(CodeError::MissingPureError(s)))
        .collect()
}
