//! Exact n-qubit Pauli arithmetic in the symplectic representation.
//!
//! An operator is stored as `i^k · ⊗_q σ(x_q, z_q)` where `σ(1,0) = X`,
//! `σ(0,1) = Z` and `σ(1,1) = Y` is the Hermitian Pauli-Y matrix. Phases are
//! tracked exactly in the cyclic group `{1, i, -1, -i}`.

use std::fmt;
use std::ops::Mul;

use thiserror::Error;

/// Largest register supported by the bit-mask representation.
pub const MAX_QUBITS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PauliError {
    #[error("qubit count mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("register of {0} qubits exceeds the supported maximum of {MAX_QUBITS}")]
    TooManyQubits(usize),
    #[error("cannot parse Pauli string {0:?}")]
    Parse(String),
}

/// Element of the cyclic phase group, stored as the exponent of `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_exponent(k: i64) -> Self {
        Phase(k.rem_euclid(4) as u8)
    }

    /// Exponent `k` such that the phase equals `i^k`, with `k` in `0..4`.
    pub fn exponent(self) -> u8 {
        self.0
    }

    pub fn is_real(self) -> bool {
        self.0.is_multiple_of(2)
    }

    /// `+1` or `-1` for real phases, `None` otherwise.
    pub fn sign(self) -> Option<i8> {
        match self.0 {
            0 => Some(1),
            2 => Some(-1),
            _ => None,
        }
    }

    pub fn conj(self) -> Self {
        Phase((4 - self.0) % 4)
    }

    /// Complex value as `(re, im)`.
    pub fn to_re_im(self) -> (f64, f64) {
        match self.0 {
            0 => (1.0, 0.0),
            1 => (0.0, 1.0),
            2 => (-1.0, 0.0),
            _ => (0.0, -1.0),
        }
    }
}

impl Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self.0 {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        })
    }
}

/// Index of a single-qubit Pauli in the fixed order `I, X, Y, Z`.
///
/// This is the row/column order of every Pauli-Liouville matrix in the crate.
pub fn pauli_index(x: bool, z: bool) -> usize {
    match (x, z) {
        (false, false) => 0,
        (true, false) => 1,
        (true, true) => 2,
        (false, true) => 3,
    }
}

/// Inverse of [`pauli_index`].
pub fn pauli_bits(index: usize) -> (bool, bool) {
    match index & 3 {
        0 => (false, false),
        1 => (true, false),
        2 => (true, true),
        _ => (false, true),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PauliOperator {
    n: usize,
    x: u64,
    z: u64,
    phase: Phase,
}

impl PauliOperator {
    pub fn identity(n: usize) -> Self {
        assert!(n <= MAX_QUBITS, "register too large");
        PauliOperator {
            n,
            x: 0,
            z: 0,
            phase: Phase::ONE,
        }
    }

    pub fn new(n: usize, x_bits: u64, z_bits: u64, phase: Phase) -> Result<Self, PauliError> {
        if n > MAX_QUBITS {
            return Err(PauliError::TooManyQubits(n));
        }
        let mask = register_mask(n);
        Ok(PauliOperator {
            n,
            x: x_bits & mask,
            z: z_bits & mask,
            phase,
        })
    }

    /// Operator with `pauli_index` value `kind` on `qubit` and identity elsewhere.
    pub fn single(n: usize, qubit: usize, kind: usize) -> Self {
        assert!(qubit < n && n <= MAX_QUBITS);
        let (x, z) = pauli_bits(kind);
        PauliOperator {
            n,
            x: (x as u64) << qubit,
            z: (z as u64) << qubit,
            phase: Phase::ONE,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }
    pub fn x_bits(&self) -> u64 {
        self.x
    }
    pub fn z_bits(&self) -> u64 {
        self.z
    }
    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn with_phase(mut self, phase: Phase) -> Self {
        self.phase = phase;
        self
    }

    /// Unsigned label `(x_bits, z_bits)`; there are `4^n` distinct labels.
    pub fn label(&self) -> (u64, u64) {
        (self.x, self.z)
    }

    /// Same operator with phase `+1`.
    pub fn unsigned(&self) -> Self {
        self.with_phase(Phase::ONE)
    }

    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Hermitian operators are exactly those with a real phase.
    pub fn is_hermitian(&self) -> bool {
        self.phase.is_real()
    }

    /// Single-qubit component on `qubit` as an `I, X, Y, Z` index.
    pub fn component(&self, qubit: usize) -> usize {
        pauli_index((self.x >> qubit) & 1 == 1, (self.z >> qubit) & 1 == 1)
    }

    pub fn commutes_with(&self, other: &PauliOperator) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()).is_multiple_of(2)
    }

    pub fn multiply(&self, other: &PauliOperator) -> Result<PauliOperator, PauliError> {
        if self.n != other.n {
            return Err(PauliError::DimensionMismatch(self.n, other.n));
        }
        let mut k = self.phase.exponent() as i64 + other.phase.exponent() as i64;
        let mut support = (self.x | self.z) & (other.x | other.z);
        while support != 0 {
            let q = support.trailing_zeros();
            support &= support - 1;
            k += product_exponent(
                (self.x >> q) & 1 == 1,
                (self.z >> q) & 1 == 1,
                (other.x >> q) & 1 == 1,
                (other.z >> q) & 1 == 1,
            );
        }
        Ok(PauliOperator {
            n: self.n,
            x: self.x ^ other.x,
            z: self.z ^ other.z,
            phase: Phase::from_exponent(k),
        })
    }

    pub fn scaled(&self, phase: Phase) -> Self {
        self.with_phase(self.phase * phase)
    }

    /// Adjoint; Pauli strings are Hermitian up to their phase.
    pub fn adjoint(&self) -> Self {
        self.with_phase(self.phase.conj())
    }
}

impl Mul for PauliOperator {
    type Output = PauliOperator;
    fn mul(self, rhs: PauliOperator) -> PauliOperator {
        self.multiply(&rhs).expect("Pauli operators on different registers")
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.phase)?;
        for q in 0..self.n {
            f.write_str(["I", "X", "Y", "Z"][self.component(q)])?;
        }
        Ok(())
    }
}

impl std::str::FromStr for PauliOperator {
    type Err = PauliError;

    /// Parses strings such as `"XIZ"`, `"-YY"` or `"+iZ"`; qubit 0 is leftmost.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || PauliError::Parse(s.to_string());
        let (phase, body) = if let Some(rest) = s.strip_prefix("+i") {
            (Phase::I, rest)
        } else if let Some(rest) = s.strip_prefix("-i") {
            (Phase::MINUS_I, rest)
        } else if let Some(rest) = s.strip_prefix('-') {
            (Phase::MINUS_ONE, rest)
        } else if let Some(rest) = s.strip_prefix('+') {
            (Phase::ONE, rest)
        } else {
            (Phase::ONE, s)
        };
        if body.is_empty() || body.len() > MAX_QUBITS {
            return Err(err());
        }
        let (mut x, mut z) = (0u64, 0u64);
        for (q, c) in body.chars().enumerate() {
            let (bx, bz) = match c {
                'I' => (false, false),
                'X' => (true, false),
                'Y' => (true, true),
                'Z' => (false, true),
                _ => return Err(err()),
            };
            x |= (bx as u64) << q;
            z |= (bz as u64) << q;
        }
        PauliOperator::new(body.len(), x, z, phase)
    }
}

fn register_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Exponent `g` with `σ(x1,z1) σ(x2,z2) = i^g σ(x1⊕x2, z1⊕z2)`.
fn product_exponent(x1: bool, z1: bool, x2: bool, z2: bool) -> i64 {
    let (x2, z2) = (x2 as i64, z2 as i64);
    match (x1, z1) {
        (false, false) => 0,
        (true, true) => z2 - x2,
        (true, false) => z2 * (2 * x2 - 1),
        (false, true) => x2 * (1 - 2 * z2),
    }
}
