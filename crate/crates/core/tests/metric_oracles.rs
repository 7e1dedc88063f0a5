mod common;

use common::{c, maximize_over_pure_inputs, pure_input_distance, random_pauli_probs};
use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use steanesim::channel::{
    gamma_to_choi, hermitian_eigenvalues, member_seed, named_channel, random_channel, Channel, NamedChannel,
    RealMatrix4,
};
use steanesim::metrics::{choi_norm_distance, diamond_distance, infidelity, worst_case_error, MetricKind};

#[test]
fn diamond_matches_pure_input_maximisation() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut channels = vec![
        named_channel(NamedChannel::Depolarizing { p: 0.1 }).unwrap(),
        named_channel(NamedChannel::Pauli {
            probs: random_pauli_probs(&mut rng),
        })
        .unwrap(),
        named_channel(NamedChannel::Rotation { theta: 0.3 }).unwrap(),
    ];
    for i in 0..4 {
        channels.push(random_channel(0.1 + 0.1 * i as f64, member_seed(40, i)).unwrap());
    }
    for ch in &channels {
        let sdp = diamond_distance(ch).unwrap();
        let direct = maximize_over_pure_inputs(ch);
        assert!((sdp - direct).abs() < 1e-4, "sdp {sdp} direct {direct}");
    }
}

#[test]
fn diamond_bounds_every_sampled_input() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..30 {
        let ch = random_channel(0.2, member_seed(41, i)).unwrap();
        let d = diamond_distance(&ch).unwrap();
        for _ in 0..50 {
            let p: [f64; 4] = std::array::from_fn(|_| 7.0 * rng.random::<f64>());
            assert!(pure_input_distance(&ch, p) <= d + 1e-7);
        }
    }
}

#[test]
fn identity_is_zero_for_every_metric() {
    let id = Channel::identity();
    for m in MetricKind::ALL {
        assert!(m.evaluate(&id).unwrap().abs() < 1e-8, "{m}");
    }
}

#[test]
fn worst_case_error_of_pauli_channels_is_non_identity_mass() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..300 {
        let probs = random_pauli_probs(&mut rng);
        let ch = named_channel(NamedChannel::Pauli { probs }).unwrap();
        let w = worst_case_error(&ch);
        assert!(!w.infeasible);
        assert!((w.value - (1.0 - probs[0])).abs() < 1e-8);
    }
}

/// Bell vector `(|00⟩ + |11⟩)/√2`, the range of the identity Choi matrix.
fn bell() -> Vector4<Complex64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Vector4::new(c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0))
}

#[test]
fn worst_case_error_matches_rank_one_closed_form() {
    // J - t|Φ⟩⟨Φ| ⪰ 0 for full-rank J exactly when t ≤ 1/⟨Φ|J⁻¹|Φ⟩.
    let phi = bell();
    for i in 0..200 {
        let ch = random_channel(0.05 + 0.002 * i as f64, member_seed(42, i)).unwrap();
        let inv: Matrix4<Complex64> = ch.choi().try_inverse().unwrap();
        let t = 1.0 / (phi.adjoint() * inv * phi)[(0, 0)].re;
        let w = worst_case_error(&ch);
        assert!((w.value - (1.0 - t)).abs() < 1e-6, "{} vs {}", w.value, 1.0 - t);
    }
}

#[test]
fn worst_case_feasibility_is_monotone() {
    let jid = gamma_to_choi(&RealMatrix4::identity());
    for i in 0..1000 {
        let ch = random_channel(0.1, member_seed(43, i)).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for k in 0..=20 {
            let x = k as f64 / 20.0;
            let m = hermitian_eigenvalues(&(ch.choi() - jid * c(1.0 - x, 0.0))).min();
            assert!(m >= prev - 1e-12);
            prev = m;
        }
    }
}

#[test]
fn infidelity_matches_bell_overlap() {
    let phi = bell();
    for i in 0..50 {
        let ch = random_channel(0.3, member_seed(44, i)).unwrap();
        let overlap = (phi.adjoint() * ch.choi() * phi)[(0, 0)].re;
        assert!((infidelity(&ch) - (1.0 - overlap)).abs() < 1e-12);
    }
    let theta: f64 = 0.7;
    let rot = named_channel(NamedChannel::Rotation { theta }).unwrap();
    assert!((infidelity(&rot) - (theta / 2.0).sin().powi(2)).abs() < 1e-14);
}

#[test]
fn depolarizing_closed_forms() {
    // J - J_id = p(I/4 - |Φ⟩⟨Φ|): eigenvalues -3p/4 once and p/4 three times.
    for p in [0.01, 0.1, 0.3] {
        let ch = named_channel(NamedChannel::Depolarizing { p }).unwrap();
        assert!((infidelity(&ch) - 0.75 * p).abs() < 1e-15);
        assert!((choi_norm_distance(&ch, 1).unwrap() - 1.5 * p).abs() < 1e-12);
        assert!((choi_norm_distance(&ch, 2).unwrap() - p * 3f64.sqrt() / 2.0).abs() < 1e-12);
        assert!((worst_case_error(&ch).value - 0.75 * p).abs() < 1e-8);
    }
}

#[test]
fn frobenius_never_exceeds_trace_norm() {
    for i in 0..200 {
        let ch = random_channel(0.25, member_seed(45, i)).unwrap();
        assert!(choi_norm_distance(&ch, 2).unwrap() <= choi_norm_distance(&ch, 1).unwrap() + 1e-15);
    }
}

#[test]
fn metrics_are_monotone_along_depolarizing_family() {
    for m in MetricKind::ALL {
        let mut prev = -1.0;
        for k in 0..=30 {
            let ch = named_channel(NamedChannel::Depolarizing { p: 0.01 * k as f64 }).unwrap();
            let v = m.evaluate(&ch).unwrap();
            assert!(v >= prev - 1e-9, "{m} at p = {}", 0.01 * k as f64);
            assert!(v >= -1e-12);
            prev = v;
        }
    }
}

#[test]
fn metrics_are_nonnegative_on_random_channels() {
    for i in 0..100 {
        let ch = random_channel(0.15, member_seed(46, i)).unwrap();
        for m in MetricKind::ALL {
            assert!(m.evaluate(&ch).unwrap() >= -1e-10, "{m}");
        }
    }
}
