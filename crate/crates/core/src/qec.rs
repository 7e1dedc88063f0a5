//! One round of stabilizer measurement and correction on a block of qubits,
//! computed in the Pauli-Liouville representation.
//!
//! For input logical Pauli `a` and output logical Pauli `b`, the unnormalised
//! effective channel for syndrome `s` is
//!
//! ```text
//! raw_s[a][b] = σ(s,b) / |𝒮| · Σ_{S'} (-1)^{s·S'} Σ_S c(P̄_a S) c(P̄_b S') Γ⊗[P̄_a S, P̄_b S']
//! ```
//!
//! where `c(·)` is the sign of a stabilizer-coset element relative to the
//! canonical tensor Pauli and `σ(s,b)` accounts for conjugation by the pure
//! error `T_s`. The outer sum over `S'` is a Walsh–Hadamard transform, so one
//! pass yields every syndrome.
//!
//! Rare syndromes are the difference of many terms close to one, so the
//! product `Π_q Γ_q` is split as `I + (Π_q Γ_q - I)` and the deviation is
//! accumulated by telescoping over qubit chunks. Probabilities then keep their
//! relative precision down to roughly `ε · (noise strength)`.
//!
//! That is not enough when one input is far from the identity (a decoded
//! channel from a rare lower-level syndrome) and the requested syndrome is
//! rarer still. Such records are recomputed in double-double arithmetic.

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, OnceLock};

use rand::Rng;
use thiserror::Error;
use twofloat::TwoFloat;

use crate::channel::{Channel, CptpReport, RealMatrix4, CPTP_TOLERANCE};
use crate::code::StabilizerCode;

/// Syndrome probabilities below this (negative) value indicate a non-CP input.
pub const NEGATIVE_PROBABILITY_TOLERANCE: f64 = 1e-10;

/// Two correction candidates whose fidelities differ by less than this are tied.
pub const DECODER_TIE_TOLERANCE: f64 = 1e-12;

/// Records whose rounding bound exceeds this fraction of their probability are
/// recomputed in extended precision.
pub const REFINE_TOLERANCE: f64 = 1e-10;

const MAX_CHUNK_QUBITS: usize = 3;
const MAX_CHUNKS: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QecError {
    #[error("block has {got} channels but the code has {expected} qubits")]
    WrongQubitCount { expected: usize, got: usize },
    #[error("channel on qubit {qubit} is not a normalised CP map: {report}")]
    InvalidChannel { qubit: usize, report: CptpReport },
    #[error("syndrome {syndrome} has negative probability {value:e}")]
    NegativeProbability { syndrome: usize, value: f64 },
    #[error("syndrome {0} has zero probability")]
    ZeroProbability(usize),
    #[error("syndrome {0} is out of range")]
    SyndromeOutOfRange(usize),
    #[error("importance distribution gives zero weight to syndrome {0}, which has nonzero probability")]
    UnsupportedImportance(usize),
    #[error("importance distribution is invalid: {0}")]
    BadDistribution(&'static str),
    #[error("code with {0} qubits is too large for the chunked tables")]
    CodeTooLarge(usize),
}

/// Per-qubit noise acting on one block before syndrome extraction.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockInput {
    gammas: Vec<RealMatrix4>,
}

impl BlockInput {
    /// Validates that each map is CP with unit-trace Choi matrix.
    ///
    /// Trace preservation is deliberately not required: conditional channels
    /// from a lower level are normalised CP maps but need not preserve trace.
    pub fn new(gammas: Vec<RealMatrix4>) -> Result<Self, QecError> {
        for (qubit, g) in gammas.iter().enumerate() {
            let report = CptpReport::of_gamma(g);
            if !report.is_normalized_cp(CPTP_TOLERANCE) {
                return Err(QecError::InvalidChannel { qubit, report });
            }
        }
        Ok(BlockInput { gammas })
    }

    pub fn new_unchecked(gammas: Vec<RealMatrix4>) -> Self {
        BlockInput { gammas }
    }

    /// The same channel on each of `n` qubits.
    pub fn iid(channel: &Channel, n: usize) -> Self {
        BlockInput {
            gammas: vec![*channel.gamma(); n],
        }
    }

    pub fn gammas(&self) -> &[RealMatrix4] {
        &self.gammas
    }
}

/// Outcome of decoding one syndrome.
#[derive(Clone, Debug, PartialEq)]
pub struct SyndromeRecord {
    pub syndrome: usize,
    /// Probability of the syndrome given the block inputs.
    pub prob: f64,
    /// Importance weight `Pr(s) / Q(s)`; one for direct sampling.
    pub weight: f64,
    /// Normalisation of the block's syndrome distribution (see [`BlockAnalysis::likelihood`]).
    pub likelihood: f64,
    /// Post-correction logical channel.
    pub gamma: RealMatrix4,
    /// Logical correction as an `I, X, Y, Z` index.
    pub correction: usize,
    /// Entanglement fidelity `¼ Tr Γ` of the corrected channel.
    pub fidelity: f64,
}

/// Precomputed coset structure of a code.
#[derive(Clone, Debug)]
struct CosetTables {
    n: usize,
    num_elements: usize,
    chunks: Vec<(usize, usize)>,
    /// Chunk-local Pauli indices of `P̄_a S_m` at `[a * num_elements + m]`.
    index: Vec<[usize; MAX_CHUNKS]>,
    sign: Vec<f64>,
    /// `σ(s, b)`: `-1` when `T_s` anticommutes with `P̄_b`.
    pure_error_sign: Vec<[f64; 4]>,
}

fn chunk_layout(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    while start < n {
        let remaining = n - start;
        let len = if remaining == 4 { 2 } else { remaining.min(MAX_CHUNK_QUBITS) };
        out.push((start, len));
        start += len;
    }
    out
}

/// Arithmetic used by the block kernel.
trait Scalar: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self> {
    fn of(x: f64) -> Self;
    fn approx(self) -> f64;
}

impl Scalar for f64 {
    #[inline(always)]
    fn of(x: f64) -> Self {
        x
    }
    #[inline(always)]
    fn approx(self) -> f64 {
        self
    }
}

impl Scalar for TwoFloat {
    fn of(x: f64) -> Self {
        TwoFloat::from(x)
    }
    fn approx(self) -> f64 {
        self.hi() + self.lo()
    }
}

impl CosetTables {
    fn new(code: &StabilizerCode) -> Result<Self, QecError> {
        let n = code.num_qubits();
        let chunks = chunk_layout(n);
        if chunks.len() > MAX_CHUNKS {
            return Err(QecError::CodeTooLarge(n));
        }
        let group = code.stabilizer_group();
        let num_elements = group.len();
        let mut index = Vec::with_capacity(4 * num_elements);
        let mut sign = Vec::with_capacity(4 * num_elements);
        for a in 0..4 {
            for element in group {
                let op = *code.logical(a) * element.op;
                let mut idx = [0usize; MAX_CHUNKS];
                for (c, &(start, len)) in chunks.iter().enumerate() {
                    idx[c] = (0..len).map(|k| op.component(start + k) << (2 * k)).sum();
                }
                index.push(idx);
                sign.push(op.phase().sign().expect("coset elements are Hermitian") as f64);
            }
        }
        let pure_error_sign = (0..code.num_syndromes())
            .map(|s| {
                let t = code.pure_error(s);
                std::array::from_fn(|b| if t.commutes_with(code.logical(b)) { 1.0 } else { -1.0 })
            })
            .collect();
        Ok(CosetTables {
            n,
            num_elements,
            chunks,
            index,
            sign,
            pure_error_sign,
        })
    }
}

/// Product tables `T_c = Π_{q∈c} Γ_q` over one chunk, with `D_c = T_c - I`
/// computed without cancellation.
struct ChunkTable<S> {
    dim: usize,
    t: Vec<S>,
    d: Vec<S>,
}

impl<S: Scalar> ChunkTable<S> {
    fn new(gammas: &[RealMatrix4]) -> Self {
        let len = gammas.len();
        let dim = 1 << (2 * len);
        let mut t = vec![S::of(0.0); dim * dim];
        let mut d = vec![S::of(0.0); dim * dim];
        for u in 0..dim {
            for v in 0..dim {
                let entry = |k: usize| S::of(gammas[k][((u >> (2 * k)) & 3, (v >> (2 * k)) & 3)]);
                let prod = (1..len).fold(entry(0), |acc, k| acc * entry(k));
                // Column-major so that a fixed output label is contiguous.
                t[v * dim + u] = prod;
                d[v * dim + u] = if u == v {
                    // Π(1 + d_k) - 1 = Σ_k d_k Π_{k' > k} (1 + d_k').
                    let mut acc = S::of(0.0);
                    let mut suffix = S::of(1.0);
                    for k in (0..len).rev() {
                        let g = entry(k);
                        acc = acc + (g - S::of(1.0)) * suffix;
                        suffix = suffix * g;
                    }
                    acc
                } else {
                    prod
                };
            }
        }
        ChunkTable { dim, t, d }
    }
}

/// All syndrome probabilities and unnormalised logical channels of one block.
#[derive(Clone, Debug)]
pub struct BlockAnalysis {
    probs: Vec<f64>,
    unnormalized: Vec<f64>,
    likelihood: f64,
    raw: Vec<RealMatrix4>,
    /// Absolute rounding bound on the entries of `raw`.
    bound: f64,
    tables: Arc<CosetTables>,
    gammas: Vec<RealMatrix4>,
    refined: OnceLock<Vec<RealMatrix4>>,
}

impl BlockAnalysis {
    /// `Pr(s)` for every syndrome; sums to one.
    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    /// Total weight `Σ_s Tr(Π_s ⊗_q ℰ_q(ρ̄))` before normalisation.
    ///
    /// Exactly one for trace-preserving inputs. For conditional channels from
    /// a lower level it is the factor by which the joint probability of the
    /// lower-level syndromes differs from the product of their marginals.
    pub fn likelihood(&self) -> f64 {
        self.likelihood
    }

    pub fn num_syndromes(&self) -> usize {
        self.probs.len()
    }

    /// Optimal logical correction and corrected channel for syndrome `s`.
    pub fn record(&self, s: usize) -> Result<SyndromeRecord, QecError> {
        if s >= self.probs.len() {
            return Err(QecError::SyndromeOutOfRange(s));
        }
        if self.probs[s] <= 0.0 {
            return Err(QecError::ZeroProbability(s));
        }
        let raw = if self.bound > REFINE_TOLERANCE * self.unnormalized[s] {
            &self.refined.get_or_init(|| kernel::<TwoFloat>(&self.tables, &self.gammas).raw)[s]
        } else {
            &self.raw[s]
        };
        let (correction, gamma) = decode(&(raw / raw[(0, 0)]));
        let fidelity = gamma.trace() / 4.0;
        Ok(SyndromeRecord {
            syndrome: s,
            prob: self.probs[s],
            weight: 1.0,
            likelihood: self.likelihood,
            gamma,
            correction,
            fidelity,
        })
    }

    /// Draws a syndrome from `importance` (or from `Pr` when `None`) and decodes it.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        importance: Option<&[f64]>,
        rng: &mut R,
    ) -> Result<SyndromeRecord, QecError> {
        let q = match importance {
            Some(q) => {
                self.check_importance(q)?;
                q
            }
            None => &self.probs,
        };
        let s = draw(q, rng.random::<f64>());
        let mut record = self.record(s)?;
        record.weight = self.probs[s] / q[s];
        Ok(record)
    }

    fn check_importance(&self, q: &[f64]) -> Result<(), QecError> {
        if q.len() != self.probs.len() {
            return Err(QecError::BadDistribution("length differs from the number of syndromes"));
        }
        if q.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(QecError::BadDistribution("entries must be finite and nonnegative"));
        }
        if (q.iter().sum::<f64>() - 1.0).abs() > 1e-10 {
            return Err(QecError::BadDistribution("entries must sum to one"));
        }
        if let Some(s) = (0..q.len()).find(|&s| q[s] == 0.0 && self.probs[s] > 0.0) {
            return Err(QecError::UnsupportedImportance(s));
        }
        Ok(())
    }
}

/// Inverse-CDF draw; falls back to the last supported outcome on round-off.
fn draw(q: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (s, &p) in q.iter().enumerate() {
        acc += p;
        if u < acc && p > 0.0 {
            return s;
        }
    }
    q.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

fn commutes(a: usize, b: usize) -> bool {
    a == 0 || b == 0 || a == b
}

/// Chooses the logical Pauli `Q` maximising the fidelity `¼ Σ_a ε(Q,a) Γ_aa`
/// and returns `(Q, Γ')` with `Γ'_ab = ε(Q,b) Γ_ab`. Ties go to the lowest index.
fn decode(gamma: &RealMatrix4) -> (usize, RealMatrix4) {
    let eps = |q: usize, a: usize| if commutes(q, a) { 1.0 } else { -1.0 };
    let scores: [f64; 4] = std::array::from_fn(|q| (0..4).map(|a| eps(q, a) * gamma[(a, a)]).sum());
    let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let q = scores
        .iter()
        .position(|&f| f >= best - DECODER_TIE_TOLERANCE)
        .unwrap_or(0);
    let corrected = RealMatrix4::from_fn(|a, b| eps(q, b) * gamma[(a, b)]);
    (q, corrected)
}

/// `(Σ_m c_m f(u_m), Σ_m |c_m f(u_m)|)` over the rows of one logical coset.
#[inline(always)]
fn accumulate<S: Scalar>(
    rows: &[[usize; MAX_CHUNKS]],
    signs: &[f64],
    f: impl Fn(&[usize; MAX_CHUNKS]) -> S,
) -> (S, f64) {
    let mut acc = S::of(0.0);
    let mut mass = 0.0;
    for (u, &sign) in rows.iter().zip(signs) {
        let term = f(u);
        acc = if sign > 0.0 { acc + term } else { acc - term };
        mass += term.approx().abs();
    }
    (acc, mass)
}

fn walsh_hadamard<S: Scalar>(v: &mut [S]) {
    let mut h = 1;
    while h < v.len() {
        for i in (0..v.len()).step_by(2 * h) {
            for j in i..i + h {
                let (x, y) = (v[j], v[j + h]);
                v[j] = x + y;
                v[j + h] = x - y;
            }
        }
        h *= 2;
    }
}

/// Syndrome extraction engine for one code.
#[derive(Clone, Debug)]
pub struct QecRound {
    code: StabilizerCode,
    tables: Arc<CosetTables>,
}

impl QecRound {
    pub fn new(code: StabilizerCode) -> Result<Self, QecError> {
        let tables = Arc::new(CosetTables::new(&code)?);
        Ok(QecRound { code, tables })
    }

    /// Steane round; the tables are built once per process.
    pub fn steane() -> Self {
        static STEANE: OnceLock<QecRound> = OnceLock::new();
        STEANE
            .get_or_init(|| Self::new(StabilizerCode::steane()).expect("Steane tables fit"))
            .clone()
    }

    pub fn code(&self) -> &StabilizerCode {
        &self.code
    }

    pub fn num_qubits(&self) -> usize {
        self.tables.n
    }

    pub fn num_syndromes(&self) -> usize {
        self.tables.pure_error_sign.len()
    }

    /// Computes every syndrome probability and conditional logical channel.
    pub fn analyze(&self, input: &BlockInput) -> Result<BlockAnalysis, QecError> {
        let gammas = input.gammas();
        if gammas.len() != self.tables.n {
            return Err(QecError::WrongQubitCount {
                expected: self.tables.n,
                got: gammas.len(),
            });
        }
        let k = kernel::<f64>(&self.tables, gammas);
        let inv_g = 1.0 / self.tables.num_elements as f64;

        // Values below the round-off floor of the deviation sums carry no information.
        let floor = 64.0 * f64::EPSILON * k.trace_mass * inv_g;
        let mut unnormalized = Vec::with_capacity(k.raw.len());
        for (s, r) in k.raw.iter().enumerate() {
            let p = r[(0, 0)];
            if p < -NEGATIVE_PROBABILITY_TOLERANCE {
                return Err(QecError::NegativeProbability { syndrome: s, value: p });
            }
            unnormalized.push(if p <= floor { 0.0 } else { p });
        }
        let likelihood: f64 = unnormalized.iter().sum();
        let probs = unnormalized.iter().map(|p| p / likelihood).collect();
        Ok(BlockAnalysis {
            probs,
            unnormalized,
            likelihood,
            raw: k.raw,
            bound: 64.0 * f64::EPSILON * k.max_mass * inv_g,
            tables: Arc::clone(&self.tables),
            gammas: gammas.to_vec(),
            refined: OnceLock::new(),
        })
    }
}

struct KernelOutput {
    raw: Vec<RealMatrix4>,
    /// `Σ |terms|` behind the trace entry and the largest such sum over all entries.
    trace_mass: f64,
    max_mass: f64,
}

/// Unnormalised conditional channels for every syndrome in arithmetic `S`.
fn kernel<S: Scalar>(tb: &CosetTables, gammas: &[RealMatrix4]) -> KernelOutput {
    let chunks: Vec<ChunkTable<S>> = tb
        .chunks
        .iter()
        .map(|&(start, len)| ChunkTable::new(&gammas[start..start + len]))
        .collect();
    let g = tb.num_elements;

    // Deviation part of B_ab(S') = Σ_S c c Γ⊗[P̄_a S, P̄_b S'].
    let mut b_rest = vec![vec![S::of(0.0); g]; 16];
    let mut mass = [0.0f64; 16];
    for b in 0..4 {
        for mp in 0..g {
            let v = &tb.index[b * g + mp];
            let sv = tb.sign[b * g + mp];
            let cols: Vec<(&[S], &[S], usize)> = chunks
                .iter()
                .zip(v)
                .map(|(ct, &vc)| {
                    let span = vc * ct.dim..(vc + 1) * ct.dim;
                    (&ct.t[span.clone()], &ct.d[span], vc)
                })
                .collect();
            for a in 0..4 {
                let rows = &tb.index[a * g..(a + 1) * g];
                let signs = &tb.sign[a * g..(a + 1) * g];
                let (acc, m) = match cols.as_slice() {
                    [(_, d0, v0), (t1, d1, v1), (t2, d2, _)] => accumulate(rows, signs, |u| {
                        let tail = t1[u[1]] * t2[u[2]];
                        let mut rest = d0[u[0]] * tail;
                        if u[0] == *v0 {
                            rest = rest + d1[u[1]] * t2[u[2]];
                            if u[1] == *v1 {
                                rest = rest + d2[u[2]];
                            }
                        }
                        rest
                    }),
                    _ => accumulate(rows, signs, |u| {
                        // R_k = D_k T_{>k} + A_k R_{k+1}, built from the last chunk.
                        let mut rest = S::of(0.0);
                        let mut suffix = S::of(1.0);
                        for (c, (t, d, vc)) in cols.iter().enumerate().rev() {
                            rest = if u[c] == *vc { d[u[c]] * suffix + rest } else { d[u[c]] * suffix };
                            suffix = suffix * t[u[c]];
                        }
                        rest
                    }),
                };
                b_rest[a * 4 + b][mp] = if sv > 0.0 { acc } else { -acc };
                mass[a * 4 + b] += m;
            }
        }
    }
    for v in &mut b_rest {
        walsh_hadamard(v);
    }

    let inv_g = S::of(1.0 / g as f64);
    let raw = (0..tb.pure_error_sign.len())
        .map(|s| {
            RealMatrix4::from_fn(|a, b| {
                let dev = S::of(tb.pure_error_sign[s][b]) * inv_g * b_rest[a * 4 + b][s];
                if s == 0 && a == b {
                    (S::of(1.0) + dev).approx()
                } else {
                    dev.approx()
                }
            })
        })
        .collect();
    KernelOutput {
        raw,
        trace_mass: mass[0],
        max_mass: mass.iter().copied().fold(0.0, f64::max),
    }
}

/// `Pr(s)` for every syndrome of `input`.
pub fn syndrome_distribution(round: &QecRound, input: &BlockInput) -> Result<Vec<f64>, QecError> {
    Ok(round.analyze(input)?.probs)
}

/// Decoded record for a fixed syndrome.
pub fn decode_and_extract(round: &QecRound, input: &BlockInput, s: usize) -> Result<SyndromeRecord, QecError> {
    round.analyze(input)?.record(s)
}

/// Draws one syndrome from `importance` (or `Pr`) and decodes it.
pub fn sample_syndrome<R: Rng + ?Sized>(
    round: &QecRound,
    input: &BlockInput,
    importance: Option<&[f64]>,
    rng: &mut R,
) -> Result<SyndromeRecord, QecError> {
    round.analyze(input)?.sample(importance, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{named_channel, random_channel, NamedChannel};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn steane_iid(ch: &Channel) -> BlockAnalysis {
        QecRound::steane().analyze(&BlockInput::iid(ch, 7)).unwrap()
    }

    #[test]
    fn chunks_cover_register() {
        assert_eq!(chunk_layout(7), vec![(0, 3), (3, 2), (5, 2)]);
        assert_eq!(chunk_layout(3), vec![(0, 3)]);
        assert_eq!(chunk_layout(1), vec![(0, 1)]);
    }

    #[test]
    fn identity_noise_is_trivial() {
        let an = steane_iid(&Channel::identity());
        assert_eq!(an.probabilities()[0], 1.0);
        assert!(an.probabilities()[1..].iter().all(|&p| p == 0.0));
        let rec = an.record(0).unwrap();
        assert_eq!(rec.gamma, RealMatrix4::identity());
        assert_eq!(rec.correction, 0);
        assert!(matches!(an.record(5), Err(QecError::ZeroProbability(5))));
    }

    #[test]
    fn probabilities_sum_to_one() {
        for seed in 0..5 {
            let an = steane_iid(&random_channel(0.1, seed).unwrap());
            let total: f64 = an.probabilities().iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
            assert!((an.likelihood() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn depolarizing_single_errors_are_corrected() {
        let p = 0.01;
        let an = steane_iid(&named_channel(NamedChannel::Depolarizing { p }).unwrap());
        // Each weight-one X error on qubit q flips the Z-type checks at (q+1).
        let probs = an.probabilities();
        let s_x0 = 1 << 3;
        // Γ = diag(1, 1-p, 1-p, 1-p) applies each of X, Y, Z with probability p/4.
        assert!((probs[s_x0] - p / 4.0).abs() < 2.0 * p * p);
        let rec = an.record(0).unwrap();
        assert!(rec.fidelity > 1.0 - 100.0 * p * p);
    }

    #[test]
    fn wrong_length_rejected() {
        let round = QecRound::steane();
        let err = round.analyze(&BlockInput::iid(&Channel::identity(), 3)).unwrap_err();
        assert_eq!(err, QecError::WrongQubitCount { expected: 7, got: 3 });
    }

    #[test]
    fn direct_sampling_has_unit_weight_and_bad_importance_errors() {
        let an = steane_iid(&random_channel(0.2, 3).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let r = an.sample(None, &mut rng).unwrap();
            assert_eq!(r.weight, 1.0);
        }
        let mut q = vec![0.0; 64];
        q[0] = 1.0;
        assert!(matches!(an.sample(Some(&q), &mut rng), Err(QecError::UnsupportedImportance(_))));
        assert!(an.sample(Some(&[0.5, 0.5]), &mut rng).is_err());
    }

    #[test]
    fn decoder_tie_prefers_identity() {
        let (q, g) = decode(&RealMatrix4::from_diagonal(&nalgebra::Vector4::new(1.0, 0.0, 0.0, 0.0)));
        assert_eq!(q, 0);
        assert_eq!(g[(0, 0)], 1.0);
        let (q, g) = decode(&RealMatrix4::from_diagonal(&nalgebra::Vector4::new(1.0, 1.0, -1.0, -1.0)));
        assert_eq!(q, 1);
        assert_eq!(g, RealMatrix4::identity());
        let (q, g) = decode(&RealMatrix4::from_diagonal(&nalgebra::Vector4::new(1.0, -1.0, -1.0, 1.0)));
        assert_eq!(q, 3);
        assert_eq!(g, RealMatrix4::identity());
    }
}
