//! Small dense semidefinite programs.
//!
//! Problems are posed in linear-matrix-inequality form
//!
//! ```text
//!   maximize   bᵀy
//!   subject to S = C - Σ_k y_k A_k ⪰ 0          (block diagonal, real symmetric)
//! ```
//!
//! whose conic dual is `min ⟨C, X⟩ s.t. ⟨A_k, X⟩ = b_k, X ⪰ 0`. The solver is an
//! infeasible primal-dual path-following method using the HKM search
//! direction with Mehrotra's predictor-corrector step. It targets problems
//! with a few dozen variables and blocks of order ≲ 20.
//!
//! Complex Hermitian blocks are handled through [`embed_hermitian`], which
//! preserves semidefiniteness.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SdpError {
    #[error("problem data is inconsistent: {0}")]
    Malformed(&'static str),
    #[error("no convergence after {iterations} iterations (objective bracket [{lower}, {upper}])")]
    NoConvergence {
        iterations: usize,
        lower: f64,
        upper: f64,
    },
    #[error("search direction could not be computed (singular Schur complement)")]
    Singular,
}

#[derive(Clone, Debug)]
pub struct LmiProblem {
    /// `C` per block.
    pub c: Vec<DMatrix<f64>>,
    /// `A_k` per variable, each a list of blocks.
    pub a: Vec<Vec<DMatrix<f64>>>,
    pub b: DVector<f64>,
}

#[derive(Clone, Copy, Debug)]
pub struct SdpOptions {
    pub max_iterations: usize,
    /// Relative duality gap and infeasibility target.
    pub tolerance: f64,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_fraction: f64,
}

impl Default for SdpOptions {
    fn default() -> Self {
        SdpOptions {
            max_iterations: 100,
            tolerance: 1e-10,
            step_fraction: 0.98,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub y: DVector<f64>,
    /// `bᵀy`, the LMI objective at the final dual iterate.
    pub dual_objective: f64,
    /// `⟨C, X⟩` at the final primal iterate.
    pub primal_objective: f64,
    pub iterations: usize,
}

impl SdpSolution {
    /// Optimal value, taken from the dual-feasible iterate `bᵀy`.
    pub fn value(&self) -> f64 {
        self.dual_objective
    }
}

type Blocks = Vec<DMatrix<f64>>;

const STALL_ITERATIONS: usize = 3;
const STALLED_PRIMAL_INFEASIBILITY: f64 = 1e-6;

fn inner(a: &Blocks, b: &Blocks) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn frob(a: &Blocks) -> f64 {
    a.iter().map(|m| m.norm_squared()).sum::<f64>().sqrt()
}

impl LmiProblem {
    fn validate(&self) -> Result<(), SdpError> {
        if self.a.len() != self.b.len() {
            return Err(SdpError::Malformed("one constraint matrix per variable required"));
        }
        for blocks in &self.a {
            if blocks.len() != self.c.len() {
                return Err(SdpError::Malformed("block count mismatch"));
            }
            for (m, cm) in blocks.iter().zip(&self.c) {
                if m.shape() != cm.shape() || !m.is_square() {
                    return Err(SdpError::Malformed("block shape mismatch"));
                }
            }
        }
        Ok(())
    }

    /// `Σ_k y_k A_k`.
    fn adjoint_map(&self, y: &DVector<f64>) -> Blocks {
        let mut out: Blocks = self.c.iter().map(|m| DMatrix::zeros(m.nrows(), m.ncols())).collect();
        for (k, blocks) in self.a.iter().enumerate() {
            if y[k] != 0.0 {
                for (o, m) in out.iter_mut().zip(blocks) {
                    *o += m * y[k];
                }
            }
        }
        out
    }

    /// `(⟨A_k, X⟩)_k`.
    fn forward_map(&self, x: &Blocks) -> DVector<f64> {
        DVector::from_iterator(self.a.len(), self.a.iter().map(|blocks| inner(blocks, x)))
    }
}

/// Largest `α` with `X + α D ⪰ 0`, for `X ≻ 0`.
fn max_step(x: &Blocks, d: &Blocks) -> f64 {
    let mut alpha = f64::INFINITY;
    for (xm, dm) in x.iter().zip(d) {
        let Some(chol) = xm.clone().cholesky() else {
            return 0.0;
        };
        let l = chol.l();
        let linv = l.clone().try_inverse().unwrap_or_else(|| DMatrix::zeros(l.nrows(), l.ncols()));
        let m = sym(&(&linv * dm * linv.transpose()));
        let lmin = m.symmetric_eigenvalues().min();
        if lmin < 0.0 {
            alpha = alpha.min(-1.0 / lmin);
        }
    }
    alpha
}

/// Degenerate optima make the Schur matrix numerically rank deficient near
/// convergence; a small graded ridge keeps the Newton step well defined.
fn regularized_cholesky(m: DMatrix<f64>) -> Option<nalgebra::linalg::Cholesky<f64, nalgebra::Dyn>> {
    let scale = m.diagonal().amax().max(1e-300);
    if let Some(ch) = m.clone().cholesky() {
        return Some(ch);
    }
    let mut ridge = 1e-14 * scale;
    for _ in 0..6 {
        let mut shifted = m.clone();
        for i in 0..shifted.nrows() {
            shifted[(i, i)] += ridge;
        }
        if let Some(ch) = shifted.cholesky() {
            return Some(ch);
        }
        ridge *= 100.0;
    }
    None
}

/// Solves `max bᵀy s.t. C - Σ y_k A_k ⪰ 0`.
pub fn solve(problem: &LmiProblem, options: &SdpOptions) -> Result<SdpSolution, SdpError> {
    problem.validate()?;
    let m = problem.b.len();
    let n_total: usize = problem.c.iter().map(|c| c.nrows()).sum();

    let data_scale = problem
        .c
        .iter()
        .chain(problem.a.iter().flatten())
        .map(|b| b.amax())
        .fold(problem.b.amax(), f64::max)
        .max(1.0);
    let init = 10.0 * data_scale;
    let mut x: Blocks = problem.c.iter().map(|c| DMatrix::identity(c.nrows(), c.ncols()) * init).collect();
    let mut s = x.clone();
    let mut y = DVector::zeros(m);

    let b_norm = problem.b.norm();
    let c_norm = frob(&problem.c);
    let mut pobj = inner(&problem.c, &x);
    let mut dobj = problem.b.dot(&y);

    let mut stall_count = 0;
    for iteration in 0..options.max_iterations {
        let aty = problem.adjoint_map(&y);
        let rd: Blocks = problem
            .c
            .iter()
            .zip(&s)
            .zip(&aty)
            .map(|((c, s), a)| c - s - a)
            .collect();
        let rp = &problem.b - problem.forward_map(&x);
        pobj = inner(&problem.c, &x);
        dobj = problem.b.dot(&y);
        let mu = inner(&x, &s) / n_total as f64;

        let gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        let pinf = rp.norm() / (1.0 + b_norm);
        let dinf = frob(&rd) / (1.0 + c_norm);
        let converged = gap < options.tolerance && pinf < options.tolerance && dinf < options.tolerance;
        // A stalled primal step with a feasible dual iterate still certifies bᵀy.
        let stalled = stall_count >= STALL_ITERATIONS
            && gap < options.tolerance
            && dinf < options.tolerance
            && pinf < STALLED_PRIMAL_INFEASIBILITY;
        if converged || stalled {
            return Ok(SdpSolution {
                y,
                dual_objective: dobj,
                primal_objective: pobj,
                iterations: iteration,
            });
        }

        let s_inv: Blocks = s
            .iter()
            .map(|sm| sym(&sm.clone().cholesky().map(|c| c.inverse()).unwrap_or_else(|| sm.clone().try_inverse().unwrap_or_else(|| DMatrix::identity(sm.nrows(), sm.ncols())))))
            .collect();

        // Schur complement M_ij = Tr(A_i X A_j S⁻¹).
        let g: Vec<Blocks> = problem
            .a
            .iter()
            .map(|blocks| {
                blocks
                    .iter()
                    .zip(&x)
                    .zip(&s_inv)
                    .map(|((a, xm), si)| xm * a * si)
                    .collect()
            })
            .collect();
        let mut schur = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let v = inner(&problem.a[i], &g[j]);
                schur[(i, j)] = v;
                schur[(j, i)] = v;
            }
        }
        let schur_chol = regularized_cholesky(schur).ok_or(SdpError::Singular)?;
        let solve_schur = |rhs: &DVector<f64>| -> Result<DVector<f64>, SdpError> { Ok(schur_chol.solve(rhs)) };

        // X Rd S⁻¹ enters every right-hand side.
        let x_rd_sinv: Blocks = x
            .iter()
            .zip(&rd)
            .zip(&s_inv)
            .map(|((xm, r), si)| xm * r * si)
            .collect();
        let direction = |rc: &Blocks| -> Result<(DVector<f64>, Blocks, Blocks), SdpError> {
            let rhs = &rp - problem.forward_map(rc) + problem.forward_map(&x_rd_sinv);
            let dy = solve_schur(&rhs)?;
            let atdy = problem.adjoint_map(&dy);
            let ds: Blocks = rd.iter().zip(&atdy).map(|(r, a)| r - a).collect();
            let dx: Blocks = rc
                .iter()
                .zip(&x)
                .zip(&ds)
                .zip(&s_inv)
                .map(|(((r, xm), d), si)| sym(&(r - xm * d * si)))
                .collect();
            Ok((dy, ds, dx))
        };

        // Predictor.
        let rc_aff: Blocks = x.iter().map(|xm| -xm).collect();
        let (_, ds_aff, dx_aff) = direction(&rc_aff)?;
        let ap = (options.step_fraction * max_step(&x, &dx_aff)).min(1.0);
        let ad = (options.step_fraction * max_step(&s, &ds_aff)).min(1.0);
        let x_aff: Blocks = x.iter().zip(&dx_aff).map(|(a, d)| a + d * ap).collect();
        let s_aff: Blocks = s.iter().zip(&ds_aff).map(|(a, d)| a + d * ad).collect();
        let mu_aff = inner(&x_aff, &s_aff) / n_total as f64;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // Corrector.
        let rc: Blocks = x
            .iter()
            .zip(&s_inv)
            .zip(dx_aff.iter().zip(&ds_aff))
            .map(|((xm, si), (dx, ds))| si * (sigma * mu) - xm - dx * ds * si)
            .collect();
        let (dy, ds, dx) = direction(&rc)?;
        let ap = (options.step_fraction * max_step(&x, &dx)).min(1.0);
        let ad = (options.step_fraction * max_step(&s, &ds)).min(1.0);
        if ap < 1e-6 {
            stall_count += 1;
        } else {
            stall_count = 0;
        }
        for (xm, d) in x.iter_mut().zip(&dx) {
            *xm += d * ap;
        }
        for (sm, d) in s.iter_mut().zip(&ds) {
            *sm += d * ad;
        }
        y += dy * ad;
    }
    Err(SdpError::NoConvergence {
        iterations: options.max_iterations,
        lower: dobj.min(pobj),
        upper: dobj.max(pobj),
    })
}

/// Real symmetric embedding `[[Re H, -Im H], [Im H, Re H]]` of a Hermitian matrix.
pub fn embed_hermitian(h: &DMatrix<Complex64>) -> DMatrix<f64> {
    let n = h.nrows();
    DMatrix::from_fn(2 * n, 2 * n, |r, c| {
        let z = h[(r % n, c % n)];
        match (r < n, c < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// A real basis of the `d×d` Hermitian matrices (`d²` elements).
pub fn hermitian_basis(d: usize) -> Vec<DMatrix<Complex64>> {
    let mut out = Vec::with_capacity(d * d);
    for p in 0..d {
        let mut m = DMatrix::zeros(d, d);
        m[(p, p)] = Complex64::new(1.0, 0.0);
        out.push(m);
    }
    for p in 0..d {
        for q in (p + 1)..d {
            let mut re = DMatrix::zeros(d, d);
            re[(p, q)] = Complex64::new(1.0, 0.0);
            re[(q, p)] = Complex64::new(1.0, 0.0);
            out.push(re);
            let mut im = DMatrix::zeros(d, d);
            im[(p, q)] = Complex64::new(0.0, 1.0);
            im[(q, p)] = Complex64::new(0.0, -1.0);
            out.push(im);
        }
    }
    out
}
