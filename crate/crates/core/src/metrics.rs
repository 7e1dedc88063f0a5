//! Noise-strength functionals, each measuring distance from the identity channel.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{gamma_to_choi, hermitian_eigenvalues, Channel, ComplexMatrix4, RealMatrix4};
use crate::sdp::{self, embed_hermitian, hermitian_basis, LmiProblem, SdpError, SdpOptions};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("diamond-norm SDP failed: {0}")]
    Sdp(#[from] SdpError),
    #[error("unknown metric {0:?}")]
    UnknownMetric(String),
    #[error("Choi norm order must be 1 or 2, got {0}")]
    BadOrder(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Infidelity,
    DiamondDistance,
    TraceNormChoi,
    FrobeniusNormChoi,
    WorstCaseError,
}

impl MetricKind {
    pub const ALL: [MetricKind; 5] = [
        MetricKind::Infidelity,
        MetricKind::DiamondDistance,
        MetricKind::TraceNormChoi,
        MetricKind::FrobeniusNormChoi,
        MetricKind::WorstCaseError,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Infidelity => "infidelity",
            MetricKind::DiamondDistance => "diamond_distance",
            MetricKind::TraceNormChoi => "trace_norm_choi",
            MetricKind::FrobeniusNormChoi => "frobenius_norm_choi",
            MetricKind::WorstCaseError => "worst_case_error",
        }
    }

    pub fn evaluate(self, channel: &Channel) -> Result<f64, MetricError> {
        self.evaluate_gamma(channel.gamma())
    }

    /// Evaluates on a bare Pauli-Liouville matrix, skipping the chi conversion.
    pub fn evaluate_gamma(self, gamma: &RealMatrix4) -> Result<f64, MetricError> {
        Ok(match self {
            MetricKind::Infidelity => infidelity_gamma(gamma),
            MetricKind::DiamondDistance => diamond_distance_choi(&gamma_to_choi(gamma))?,
            MetricKind::TraceNormChoi => choi_norm_distance_choi(&gamma_to_choi(gamma), 1)?,
            MetricKind::FrobeniusNormChoi => choi_norm_distance_choi(&gamma_to_choi(gamma), 2)?,
            MetricKind::WorstCaseError => worst_case_error_choi(&gamma_to_choi(gamma)).value,
        })
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MetricKind {
    type Err = MetricError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MetricKind::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| MetricError::UnknownMetric(s.to_string()))
    }
}

/// Entanglement infidelity `1 - ¼ Tr Γ`.
pub fn infidelity(channel: &Channel) -> f64 {
    infidelity_gamma(channel.gamma())
}

fn infidelity_gamma(gamma: &RealMatrix4) -> f64 {
    // Summing the deviations keeps precision when Γ is close to the identity.
    -((gamma[(0, 0)] - 1.0) + (gamma[(1, 1)] - 1.0) + (gamma[(2, 2)] - 1.0) + (gamma[(3, 3)] - 1.0)) / 4.0
}

fn identity_choi() -> ComplexMatrix4 {
    gamma_to_choi(&RealMatrix4::identity())
}

/// Trace norm (`order = 1`) or Frobenius norm (`order = 2`) of `J - J_id`.
pub fn choi_norm_distance(channel: &Channel, order: u32) -> Result<f64, MetricError> {
    choi_norm_distance_choi(channel.choi(), order)
}

fn choi_norm_distance_choi(choi: &ComplexMatrix4, order: u32) -> Result<f64, MetricError> {
    let ev = hermitian_eigenvalues(&(choi - identity_choi()));
    match order {
        1 => Ok(ev.iter().map(|l| l.abs()).sum()),
        2 => Ok(ev.iter().map(|l| l * l).sum::<f64>().sqrt()),
        o => Err(MetricError::BadOrder(o)),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WorstCaseError {
    pub value: f64,
    /// Set when even `x = 1` is infeasible, i.e. the Choi matrix is not PSD.
    pub infeasible: bool,
}

const WORST_CASE_FEASIBILITY: f64 = 1e-13;

/// Least `x ∈ [0, 1]` with `J - (1 - x) J_id ⪰ 0`, by bisection.
pub fn worst_case_error(channel: &Channel) -> WorstCaseError {
    worst_case_error_choi(channel.choi())
}

fn worst_case_error_choi(choi: &ComplexMatrix4) -> WorstCaseError {
    let jid = identity_choi();
    let min_eig = |x: f64| hermitian_eigenvalues(&(choi - jid * Complex64::new(1.0 - x, 0.0))).min();
    let feasible = |x: f64| min_eig(x) >= -WORST_CASE_FEASIBILITY;
    if !feasible(1.0) {
        return WorstCaseError {
            value: 1.0,
            infeasible: true,
        };
    }
    if feasible(0.0) {
        return WorstCaseError {
            value: 0.0,
            infeasible: false,
        };
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    WorstCaseError {
        value: hi,
        infeasible: false,
    }
}

/// `½ ‖ℰ - id‖_⋄`, from the Watrous semidefinite program.
pub fn diamond_distance(channel: &Channel) -> Result<f64, MetricError> {
    diamond_distance_choi(channel.choi())
}

fn diamond_distance_choi(choi: &ComplexMatrix4) -> Result<f64, MetricError> {
    // Unnormalised Choi matrix of Φ = ℰ - id (trace of each Choi is the input dimension).
    let phi = (choi - identity_choi()) * Complex64::new(2.0, 0.0);
    let scale = phi.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale < 1e-300 {
        return Ok(0.0);
    }
    let phi = phi / Complex64::new(scale, 0.0);
    let value = watrous_dual(&phi)?;
    Ok(value * scale)
}

/// `min ‖Tr_out Z‖_∞ s.t. Z ⪰ J_Φ, Z ⪰ 0` over Hermitian 4×4 `Z`.
fn watrous_dual(phi: &ComplexMatrix4) -> Result<f64, SdpError> {
    let basis = hermitian_basis(4);
    let to_dyn = |m: &ComplexMatrix4| DMatrix::from_fn(4, 4, |r, c| m[(r, c)]);
    let partial_trace_out = |z: &DMatrix<Complex64>| {
        DMatrix::from_fn(2, 2, |a, b| z[(a, b)] + z[(2 + a, 2 + b)])
    };
    let zero = |n: usize| DMatrix::<f64>::zeros(n, n);

    let mut a = Vec::with_capacity(17);
    // t: block tI - Tr_out Z.
    a.push(vec![-DMatrix::identity(4, 4), zero(8), zero(8)]);
    for h in &basis {
        a.push(vec![
            embed_hermitian(&partial_trace_out(h)),
            -embed_hermitian(h),
            -embed_hermitian(h),
        ]);
    }
    let mut b = DVector::zeros(17);
    b[0] = -1.0;
    let problem = LmiProblem {
        c: vec![zero(4), -embed_hermitian(&to_dyn(phi)), zero(8)],
        a,
        b,
    };
    let options = SdpOptions {
        tolerance: 1e-9,
        ..SdpOptions::default()
    };
    let sol = sdp::solve(&problem, &options)?;
    Ok(-sol.value())
}
