//! Brute-force references shared by the metric tests and the acceptance run.

use nalgebra::Matrix2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use steanesim::channel::{hermitian_eigenvalues, Channel, ComplexMatrix4};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `½ ‖(ℰ⊗id)(ψ) - ψ‖₁` for `ψ = (V⊗I)(cos a|00⟩ + sin a|11⟩)`, `V = Rz(φ)Ry(θ)Rz(χ)`.
pub fn pure_input_distance(ch: &Channel, params: [f64; 4]) -> f64 {
    let [a, theta, phi, chi] = params;
    let rz = |t: f64| Matrix2::new(c(0.0, -t / 2.0).exp(), c(0.0, 0.0), c(0.0, 0.0), c(0.0, t / 2.0).exp());
    let ry = Matrix2::new(
        c((theta / 2.0).cos(), 0.0),
        c(-(theta / 2.0).sin(), 0.0),
        c((theta / 2.0).sin(), 0.0),
        c((theta / 2.0).cos(), 0.0),
    );
    let v = rz(phi) * ry * rz(chi);
    // ψ = Σ_{s,r} m[(s, r)] |s⟩|r⟩ with the system first.
    let m = v * Matrix2::new(c(a.cos(), 0.0), c(0.0, 0.0), c(0.0, 0.0), c(a.sin(), 0.0));
    let mut out = ComplexMatrix4::zeros();
    let mut input = ComplexMatrix4::zeros();
    for r in 0..2 {
        for rp in 0..2 {
            let block = m.column(r) * m.column(rp).adjoint();
            let mapped = ch.apply(&block);
            for s in 0..2 {
                for sp in 0..2 {
                    out[(2 * s + r, 2 * sp + rp)] = mapped[(s, sp)];
                    input[(2 * s + r, 2 * sp + rp)] = block[(s, sp)];
                }
            }
        }
    }
    0.5 * hermitian_eigenvalues(&(out - input)).iter().map(|l| l.abs()).sum::<f64>()
}

/// Grid search over pure inputs followed by a shrinking random local search.
pub fn maximize_over_pure_inputs(ch: &Channel) -> f64 {
    use std::f64::consts::PI;
    let steps = 9;
    let mut starts: Vec<(f64, [f64; 4])> = Vec::new();
    for i in 0..steps {
        for j in 0..steps {
            for k in 0..steps {
                for l in 0..steps {
                    let p = [
                        PI / 4.0 * i as f64 / (steps - 1) as f64,
                        PI * j as f64 / (steps - 1) as f64,
                        2.0 * PI * k as f64 / steps as f64,
                        2.0 * PI * l as f64 / steps as f64,
                    ];
                    starts.push((pure_input_distance(ch, p), p));
                }
            }
        }
    }
    starts.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut best = 0.0f64;
    for &(v0, p0) in starts.iter().take(8) {
        let (mut v, mut p) = (v0, p0);
        let mut step = 0.2;
        while step > 1e-7 {
            let mut improved = false;
            for _ in 0..40 {
                let mut q = p;
                for x in q.iter_mut() {
                    *x += step * (2.0 * rng.random::<f64>() - 1.0);
                }
                let w = pure_input_distance(ch, q);
                if w > v {
                    v = w;
                    p = q;
                    improved = true;
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        best = best.max(v);
    }
    best
}

pub fn random_pauli_probs(rng: &mut ChaCha8Rng) -> [f64; 4] {
    let raw: [f64; 4] = std::array::from_fn(|k| if k == 0 { 2.0 + 8.0 * rng.random::<f64>() } else { rng.random() });
    let total: f64 = raw.iter().sum();
    raw.map(|x| x / total)
}
