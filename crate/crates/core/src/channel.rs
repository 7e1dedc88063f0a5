//! Single-qubit CPTP channels in Pauli-Liouville, Choi and chi form.
//!
//! Conventions, fixed everywhere in the crate:
//!
//! * Paulis are ordered `I, X, Y, Z`.
//! * Pauli-Liouville: `Γ_ij = ½ Tr(ℰ(P_i) P_j)`, so `ℰ(P_i) = Σ_j Γ_ij P_j`.
//! * Choi: `J = ¼ Σ_i ℰ(P_i) ⊗ P_iᵀ` (channel output on the first factor,
//!   unit trace) and `Γ_ij = Tr(J (P_j ⊗ P_iᵀ))`.
//! * chi: `ℰ(ρ) = Σ_kl χ_kl P_k ρ P_l`, equivalently `χ_kl = ⟨v_k|J|v_l⟩`
//!   with `|v_k⟩ = (P_k ⊗ I)|Φ⁺⟩`.

use nalgebra::{Matrix2, Matrix4, SMatrix};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type RealMatrix4 = Matrix4<f64>;
pub type ComplexMatrix4 = Matrix4<Complex64>;
pub type ComplexMatrix2 = Matrix2<Complex64>;

/// Tolerance on negative Choi eigenvalues and on trace preservation.
pub const CPTP_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("noise strength must be a finite non-negative number, got {0}")]
    InvalidDelta(f64),
    #[error("invalid probability vector {0:?}")]
    InvalidProbabilities(Vec<f64>),
    #[error("matrix exponential lost unitarity (deviation {0:e})")]
    ExponentialFailure(f64),
    #[error("map is not CPTP: {0}")]
    NotCptp(CptpReport),
    #[error("expected 16 Pauli-Liouville entries, got {0}")]
    BadEntryCount(usize),
}

const fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// The four Pauli matrices in `I, X, Y, Z` order.
pub fn pauli_matrices() -> [ComplexMatrix2; 4] {
    let o = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    [
        Matrix2::new(one, o, o, one),
        Matrix2::new(o, one, one, o),
        Matrix2::new(o, c(0.0, -1.0), c(0.0, 1.0), o),
        Matrix2::new(one, o, o, -one),
    ]
}

pub fn kron2(a: &ComplexMatrix2, b: &ComplexMatrix2) -> ComplexMatrix4 {
    ComplexMatrix4::from_fn(|r, col| a[(r / 2, col / 2)] * b[(r % 2, col % 2)])
}

/// `(P_k ⊗ I)|Φ⁺⟩` for `k` in `I, X, Y, Z` order.
fn bell_basis() -> [nalgebra::Vector4<Complex64>; 4] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let phi = nalgebra::Vector4::new(c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0));
    let id = pauli_matrices()[0];
    let p = pauli_matrices();
    [0, 1, 2, 3].map(|k| kron2(&p[k], &id) * phi)
}

pub fn gamma_to_choi(gamma: &RealMatrix4) -> ComplexMatrix4 {
    let p = pauli_matrices();
    let mut j = ComplexMatrix4::zeros();
    for i in 0..4 {
        let pit = p[i].transpose();
        for k in 0..4 {
            let g = gamma[(i, k)];
            if g != 0.0 {
                j += kron2(&p[k], &pit) * c(g / 4.0, 0.0);
            }
        }
    }
    j
}

/// Returns Γ and the largest imaginary residue discarded.
pub fn choi_to_gamma(choi: &ComplexMatrix4) -> (RealMatrix4, f64) {
    let p = pauli_matrices();
    let mut g = RealMatrix4::zeros();
    let mut residue: f64 = 0.0;
    for i in 0..4 {
        let pit = p[i].transpose();
        for k in 0..4 {
            let t = (choi * kron2(&p[k], &pit)).trace();
            g[(i, k)] = t.re;
            residue = residue.max(t.im.abs());
        }
    }
    (g, residue)
}

pub fn choi_to_chi(choi: &ComplexMatrix4) -> ComplexMatrix4 {
    let v = bell_basis();
    ComplexMatrix4::from_fn(|k, l| (v[k].adjoint() * choi * v[l])[(0, 0)])
}

pub fn chi_to_choi(chi: &ComplexMatrix4) -> ComplexMatrix4 {
    let v = bell_basis();
    let mut j = ComplexMatrix4::zeros();
    for k in 0..4 {
        for l in 0..4 {
            j += v[k] * v[l].adjoint() * chi[(k, l)];
        }
    }
    j
}

/// Eigenvalues of a Hermitian matrix (the anti-Hermitian part is ignored).
pub fn hermitian_eigenvalues<const D: usize>(m: &SMatrix<Complex64, D, D>) -> SMatrix<f64, D, 1> {
    let h = (m + m.adjoint()) * c(0.5, 0.0);
    let dynamic = nalgebra::DMatrix::from_fn(D, D, |r, k| h[(r, k)]);
    SMatrix::from_iterator(dynamic.symmetric_eigenvalues().iter().copied())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CptpReport {
    /// `max_i |Γ_i0 - δ_i0|`; zero exactly when the map preserves trace.
    pub trace_deviation: f64,
    pub min_choi_eigenvalue: f64,
    pub choi_trace_deviation: f64,
    pub hermiticity_deviation: f64,
}

impl CptpReport {
    pub fn of_gamma(gamma: &RealMatrix4) -> Self {
        Self::of_choi(gamma, &gamma_to_choi(gamma))
    }

    fn of_choi(gamma: &RealMatrix4, choi: &ComplexMatrix4) -> Self {
        let trace_deviation = (0..4)
            .map(|i| (gamma[(i, 0)] - if i == 0 { 1.0 } else { 0.0 }).abs())
            .fold(0.0, f64::max);
        let hermiticity_deviation = (choi - choi.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        CptpReport {
            trace_deviation,
            min_choi_eigenvalue: hermitian_eigenvalues(choi).min(),
            choi_trace_deviation: (choi.trace().re - 1.0).abs(),
            hermiticity_deviation,
        }
    }

    pub fn is_cptp(&self, tol: f64) -> bool {
        self.trace_deviation <= tol
            && self.min_choi_eigenvalue >= -tol
            && self.choi_trace_deviation <= tol
            && self.hermiticity_deviation <= tol
    }

    /// Complete positivity with a unit-trace Choi matrix, without requiring
    /// trace preservation. Syndrome-conditioned maps satisfy this in general.
    pub fn is_normalized_cp(&self, tol: f64) -> bool {
        self.min_choi_eigenvalue >= -tol && self.choi_trace_deviation <= tol && self.hermiticity_deviation <= tol
    }
}

impl std::fmt::Display for CptpReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "trace deviation {:e}, min Choi eigenvalue {:e}",
            self.trace_deviation, self.min_choi_eigenvalue
        )
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ChannelMeta {
    pub seed: Option<u64>,
    pub delta: Option<f64>,
    pub ensemble_id: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    PauliLiouville,
    Choi,
    Chi,
}

/// Result of a representation change; `report` flags non-CPTP inputs.
#[derive(Clone, Debug)]
pub struct Converted {
    pub matrix: ComplexMatrix4,
    pub report: CptpReport,
}

/// Converts a 4×4 representation matrix between the three channel forms.
pub fn convert(source: Representation, matrix: &ComplexMatrix4, target: Representation) -> Converted {
    let choi = match source {
        Representation::PauliLiouville => gamma_to_choi(&matrix.map(|z| z.re)),
        Representation::Choi => *matrix,
        Representation::Chi => chi_to_choi(matrix),
    };
    let (gamma, _) = choi_to_gamma(&choi);
    let report = CptpReport::of_choi(&gamma, &choi);
    let out = match target {
        Representation::PauliLiouville => gamma.map(|x| c(x, 0.0)),
        Representation::Choi => choi,
        Representation::Chi => choi_to_chi(&choi),
    };
    Converted { matrix: out, report }
}

#[derive(Clone, Debug)]
pub struct Channel {
    gamma: RealMatrix4,
    choi: ComplexMatrix4,
    chi: ComplexMatrix4,
    meta: ChannelMeta,
}

impl Channel {
    pub fn identity() -> Self {
        Self::from_gamma_unchecked(RealMatrix4::identity())
    }

    /// Builds a channel and rejects maps that fail CPTP validation.
    pub fn from_gamma(gamma: RealMatrix4) -> Result<Self, ChannelError> {
        let ch = Self::from_gamma_unchecked(gamma);
        let report = ch.cptp_report();
        if report.is_cptp(CPTP_TOLERANCE) {
            Ok(ch)
        } else {
            Err(ChannelError::NotCptp(report))
        }
    }

    pub fn from_gamma_unchecked(gamma: RealMatrix4) -> Self {
        let choi = gamma_to_choi(&gamma);
        let chi = choi_to_chi(&choi);
        Channel {
            gamma,
            choi,
            chi,
            meta: ChannelMeta::default(),
        }
    }

    pub fn from_kraus(kraus: &[ComplexMatrix2]) -> Self {
        let p = pauli_matrices();
        let gamma = RealMatrix4::from_fn(|i, j| {
            kraus
                .iter()
                .map(|k| 0.5 * (k * p[i] * k.adjoint() * p[j]).trace().re)
                .sum()
        });
        Self::from_gamma_unchecked(gamma)
    }

    pub fn from_unitary(u: &ComplexMatrix2) -> Self {
        Self::from_kraus(std::slice::from_ref(u))
    }

    pub fn with_meta(mut self, meta: ChannelMeta) -> Self {
        self.meta = meta;
        self
    }

    pub fn gamma(&self) -> &RealMatrix4 {
        &self.gamma
    }
    pub fn choi(&self) -> &ComplexMatrix4 {
        &self.choi
    }
    pub fn chi(&self) -> &ComplexMatrix4 {
        &self.chi
    }
    pub fn meta(&self) -> &ChannelMeta {
        &self.meta
    }

    pub fn cptp_report(&self) -> CptpReport {
        CptpReport::of_choi(&self.gamma, &self.choi)
    }

    pub fn representation(&self, target: Representation) -> ComplexMatrix4 {
        match target {
            Representation::PauliLiouville => self.gamma.map(|x| c(x, 0.0)),
            Representation::Choi => self.choi,
            Representation::Chi => self.chi,
        }
    }

    pub fn convert(&self, target: Representation) -> Converted {
        convert(Representation::PauliLiouville, &self.representation(Representation::PauliLiouville), target)
    }

    /// `ℰ(ρ)` for a single-qubit operator.
    pub fn apply(&self, rho: &ComplexMatrix2) -> ComplexMatrix2 {
        let p = pauli_matrices();
        let mut out = ComplexMatrix2::zeros();
        for i in 0..4 {
            let coeff = (rho * p[i]).trace() * 0.5;
            for j in 0..4 {
                out += p[j] * (coeff * self.gamma[(i, j)]);
            }
        }
        out
    }

    /// The 12 entries of Γ not fixed by trace preservation (columns 1..4), row-major.
    pub fn free_parameters(&self) -> [f64; 12] {
        let mut out = [0.0; 12];
        for i in 0..4 {
            for j in 1..4 {
                out[i * 3 + j - 1] = self.gamma[(i, j)];
            }
        }
        out
    }

    pub fn to_record(&self) -> ChannelRecord {
        ChannelRecord {
            seed: self.meta.seed.unwrap_or(0),
            delta: self.meta.delta.unwrap_or(0.0),
            gamma: gamma_to_vec(&self.gamma),
        }
    }

    pub fn from_record(record: &ChannelRecord) -> Result<Self, ChannelError> {
        let gamma = gamma_from_slice(&record.gamma)?;
        Ok(Self::from_gamma(gamma)?.with_meta(ChannelMeta {
            seed: Some(record.seed),
            delta: Some(record.delta),
            ensemble_id: None,
        }))
    }
}

pub fn gamma_to_vec(gamma: &RealMatrix4) -> Vec<f64> {
    (0..16).map(|k| gamma[(k / 4, k % 4)]).collect()
}

pub fn gamma_from_slice(entries: &[f64]) -> Result<RealMatrix4, ChannelError> {
    if entries.len() != 16 {
        return Err(ChannelError::BadEntryCount(entries.len()));
    }
    Ok(RealMatrix4::from_fn(|i, j| entries[i * 4 + j]))
}

/// One line of a channel file: Γ is the canonical stored representation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelRecord {
    pub seed: u64,
    pub delta: f64,
    pub gamma: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NamedChannel {
    Depolarizing { p: f64 },
    Rotation { theta: f64 },
    Pauli { probs: [f64; 4] },
}

pub fn named_channel(kind: NamedChannel) -> Result<Channel, ChannelError> {
    match kind {
        NamedChannel::Depolarizing { p } => {
            if !(0.0..=1.0).contains(&p) {
                return Err(ChannelError::InvalidProbabilities(vec![p]));
            }
            Ok(Channel::from_gamma_unchecked(RealMatrix4::from_diagonal(
                &nalgebra::Vector4::new(1.0, 1.0 - p, 1.0 - p, 1.0 - p),
            )))
        }
        NamedChannel::Rotation { theta } => {
            let (ch, sh) = ((theta / 2.0).cos(), (theta / 2.0).sin());
            let u = Matrix2::new(c(ch, 0.0), c(0.0, sh), c(0.0, sh), c(ch, 0.0));
            Ok(Channel::from_unitary(&u))
        }
        NamedChannel::Pauli { probs } => {
            let total: f64 = probs.iter().sum();
            if probs.iter().any(|&q| !(q >= 0.0)) || (total - 1.0).abs() > 1e-12 {
                return Err(ChannelError::InvalidProbabilities(probs.to_vec()));
            }
            // Γ_jj = Σ_k p_k · (+1 if P_k commutes with P_j else -1).
            let commutes = |a: usize, b: usize| a == 0 || b == 0 || a == b;
            let diag = nalgebra::Vector4::from_fn(|j, _| {
                (0..4)
                    .map(|k| if commutes(j, k) { probs[k] } else { -probs[k] })
                    .sum()
            });
            Ok(Channel::from_gamma_unchecked(RealMatrix4::from_diagonal(&diag)))
        }
    }
}

/// Random channel `ℰ(ρ) = Tr_E[U (ρ ⊗ |00⟩⟨00|) U†]` with `U = exp(iδH)` and
/// `H` an 8×8 Gaussian Hermitian matrix: real `N(0,1)` diagonal and
/// `(a + ib)/√2` off-diagonal entries, system qubit most significant.
pub fn random_channel(delta: f64, seed: u64) -> Result<Channel, ChannelError> {
    if !delta.is_finite() || delta < 0.0 {
        return Err(ChannelError::InvalidDelta(delta));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut h = SMatrix::<Complex64, 8, 8>::zeros();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..8 {
        let d: f64 = StandardNormal.sample(&mut rng);
        h[(i, i)] = c(d, 0.0);
        for j in (i + 1)..8 {
            let a: f64 = StandardNormal.sample(&mut rng);
            let b: f64 = StandardNormal.sample(&mut rng);
            h[(i, j)] = c(a * s, b * s);
            h[(j, i)] = c(a * s, -b * s);
        }
    }
    let eig = h.symmetric_eigen();
    let phases = SMatrix::<Complex64, 8, 8>::from_diagonal(
        &eig.eigenvalues.map(|l| Complex64::from_polar(1.0, delta * l)),
    );
    let u = eig.eigenvectors * phases * eig.eigenvectors.adjoint();
    let unitarity = (u.adjoint() * u - SMatrix::<Complex64, 8, 8>::identity())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if unitarity > 1e-10 {
        return Err(ChannelError::ExponentialFailure(unitarity));
    }
    let kraus: Vec<ComplexMatrix2> = (0..4)
        .map(|e| Matrix2::from_fn(|a, b| u[(a * 4 + e, b * 4)]))
        .collect();
    Ok(Channel::from_kraus(&kraus).with_meta(ChannelMeta {
        seed: Some(seed),
        delta: Some(delta),
        ensemble_id: None,
    }))
}

/// SplitMix64 finaliser; a bijection on `u64`.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of ensemble member `index`; distinct indices give distinct seeds.
pub fn member_seed(master_seed: u64, index: u64) -> u64 {
    splitmix64(master_seed ^ splitmix64(index))
}

#[derive(Clone, Debug)]
pub struct ChannelEnsemble {
    pub channels: Vec<Channel>,
    pub delta: f64,
    pub master_seed: u64,
    pub scheme: String,
}

impl ChannelEnsemble {
    pub const SCHEME: &'static str = "gaussian-hermitian-dilation";

    pub fn generate(count: usize, delta: f64, master_seed: u64, ensemble_id: u64) -> Result<Self, ChannelError> {
        let channels = (0..count as u64)
            .map(|i| {
                let seed = member_seed(master_seed, i);
                random_channel(delta, seed).map(|ch| {
                    let mut meta = *ch.meta();
                    meta.ensemble_id = Some(ensemble_id);
                    ch.with_meta(meta)
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ChannelEnsemble {
            channels,
            delta,
            master_seed,
            scheme: Self::SCHEME.to_string(),
        })
    }
}
