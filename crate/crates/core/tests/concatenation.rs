use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use steanesim::channel::{named_channel, random_channel, Channel, NamedChannel, RealMatrix4};
use steanesim::concat::{
    blocks_per_history, enumerate_level1, estimate, estimate_all, exact_level1, outlier_histogram, sample_histories,
    sample_rng, simulate_level, summarize, ConcatSimulator, EstimateConfig,
};
use steanesim::metrics::MetricKind;
use steanesim::qec::{BlockInput, QecRound};
use steanesim::sampling::{HistogramConfig, ImportanceConfig};

/// Qubit permutations that map the Steane stabilizer group onto itself.
fn steane_automorphisms() -> Vec<[usize; 7]> {
    let rows: Vec<u32> = (0..3)
        .map(|r| (0..7).filter(|q| (q + 1) >> r & 1 == 1).fold(0, |m, q| m | 1 << q))
        .collect();
    let span: Vec<u32> = (1..8u32)
        .map(|c| (0..3).filter(|r| c >> r & 1 == 1).fold(0, |m, r| m ^ rows[r]))
        .collect();
    let mut out = Vec::new();
    let mut perm = [0, 1, 2, 3, 4, 5, 6];
    permutations(&mut perm, 0, &mut |p| {
        let maps = |m: u32| (0..7).filter(|q| m >> q & 1 == 1).fold(0u32, |acc, q| acc | 1 << p[q]);
        if rows.iter().all(|&r| span.contains(&maps(r))) {
            out.push(*p);
        }
    });
    out
}

fn permutations(p: &mut [usize; 7], k: usize, f: &mut impl FnMut(&[usize; 7])) {
    if k == p.len() {
        f(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permutations(p, k + 1, f);
        p.swap(k, i);
    }
}

/// Exact level-2 average infidelity for a Pauli physical channel.
///
/// Level-1 conditional channels are grouped into types with identical Γ;
/// every assignment of types to the seven level-2 inputs is enumerated up to
/// code automorphisms, and each representative is solved exactly.
fn semi_exact_level2_infidelity(channel: &Channel) -> f64 {
    let round = QecRound::steane();
    let level1 = round.analyze(&BlockInput::iid(channel, 7)).unwrap();
    let mut types: Vec<(RealMatrix4, f64)> = Vec::new();
    for (s, &p) in level1.probabilities().iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let g = level1.record(s).unwrap().gamma;
        match types.iter_mut().find(|t| (t.0 - g).amax() < 1e-12) {
            Some(t) => t.1 += p,
            None => types.push((g, p)),
        }
    }
    let t = types.len();
    let autos = steane_automorphisms();
    assert_eq!(autos.len(), 168);
    let mut orbits: HashMap<[u8; 7], f64> = HashMap::new();
    for code in 0..t.pow(7) {
        let mut tuple = [0u8; 7];
        let mut rest = code;
        let mut weight = 1.0;
        for slot in tuple.iter_mut() {
            *slot = (rest % t) as u8;
            rest /= t;
            weight *= types[*slot as usize].1;
        }
        let canonical = autos
            .iter()
            .map(|pi| {
                let mut image = [0u8; 7];
                for q in 0..7 {
                    image[pi[q]] = tuple[q];
                }
                image
            })
            .min()
            .unwrap();
        *orbits.entry(canonical).or_insert(0.0) += weight;
    }
    let mut total = 0.0;
    for (tuple, weight) in orbits {
        let input = BlockInput::new_unchecked(tuple.iter().map(|&k| types[k as usize].0).collect());
        let a = round.analyze(&input).unwrap();
        let mut infid = 0.0;
        for (s, &p) in a.probabilities().iter().enumerate() {
            if p > 0.0 {
                infid += p * (1.0 - a.record(s).unwrap().fidelity);
            }
        }
        total += weight * infid;
    }
    total
}

#[test]
fn level_two_depolarizing_matches_semi_exact_enumeration() {
    let ch = named_channel(NamedChannel::Depolarizing { p: 0.05 }).unwrap();
    let exact = semi_exact_level2_infidelity(&ch);
    let est = estimate(&ch, 2, MetricKind::Infidelity, 100_000, ImportanceConfig::direct(), 17).unwrap();
    assert!(
        (est.avg_of_metric - exact).abs() < 3.0 * est.std_error,
        "sampled {} ± {} vs exact {exact}",
        est.avg_of_metric,
        est.std_error
    );
}

#[test]
fn level_one_reduces_to_a_single_block() {
    let ch = random_channel(0.2, 70).unwrap();
    let a = QecRound::steane().analyze(&BlockInput::iid(&ch, 7)).unwrap();
    for j in 0..50 {
        let r = simulate_level(&ch, 1, ImportanceConfig::direct(), &mut sample_rng(3, j)).unwrap();
        let rec = a.sample(None, &mut sample_rng(3, j)).unwrap();
        assert_eq!(r.syndrome_history, vec![rec.syndrome as u8]);
        assert_eq!(r.gamma, rec.gamma);
        assert_eq!(r.trace, vec![rec.prob]);
    }
}

#[test]
fn identity_channel_is_exact_at_every_level() {
    let id = Channel::identity();
    for level in 1..=4 {
        let r = simulate_level(&id, level, ImportanceConfig::direct(), &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(r.gamma, RealMatrix4::identity());
        assert_eq!(r.syndrome_history.len(), blocks_per_history(level));
        assert!(r.syndrome_history.iter().all(|&s| s == 0));
        let ests = estimate_all(&id, &EstimateConfig::new(level.min(2), 20, MetricKind::ALL.to_vec(), 1)).unwrap();
        for e in ests {
            assert!(e.avg_of_metric.abs() < 1e-8 && e.metric_of_avg.abs() < 1e-8, "{:?}", e.metric);
        }
    }
}

#[test]
fn history_has_forty_eight_bits_at_level_two() {
    let ch = random_channel(0.1, 71).unwrap();
    let r = simulate_level(&ch, 2, ImportanceConfig::direct(), &mut sample_rng(0, 0)).unwrap();
    assert_eq!(r.history_bits().len(), 48);
    let r3 = simulate_level(&ch, 3, ImportanceConfig::direct(), &mut sample_rng(0, 0)).unwrap();
    assert_eq!(r3.history_bits().len(), 6 * 57);
}

#[test]
fn level_one_enumeration_and_sampling_agree() {
    for (k, delta) in [0.05, 0.2].into_iter().enumerate() {
        let ch = random_channel(delta, 72 + k as u64).unwrap();
        for metric in [MetricKind::Infidelity, MetricKind::DiamondDistance] {
            let (avg, of_avg) = exact_level1(&ch, metric).unwrap();
            let samples = enumerate_level1(&ch).unwrap();
            let config = EstimateConfig::new(1, samples.len(), vec![metric], 0);
            let enumerated = summarize(&samples, &config).unwrap().remove(0);
            assert!((enumerated.avg_of_metric - avg).abs() < 1e-13 * avg.max(1e-3));
            assert!((enumerated.metric_of_avg - of_avg).abs() < 1e-9);

            let mc = estimate(&ch, 1, metric, 10_000, ImportanceConfig::direct(), 5).unwrap();
            assert!((mc.avg_of_metric - avg).abs() < 3.0 * mc.std_error, "{metric} {delta}");
        }
    }
}

#[test]
fn weighted_enumeration_under_power_law_is_exact() {
    let ch = random_channel(0.05, 74).unwrap();
    let a = QecRound::steane().analyze(&BlockInput::iid(&ch, 7)).unwrap();
    let q = ImportanceConfig::power_law().proposal(a.probabilities()).unwrap();
    let (mut weighted, mut exact) = (0.0, 0.0);
    for s in 0..64 {
        let p = a.probabilities()[s];
        if p > 0.0 {
            let infid = 1.0 - a.record(s).unwrap().fidelity;
            weighted += q[s] * (p / q[s]) * infid;
            exact += p * infid;
        }
    }
    assert!((weighted - exact).abs() <= 1e-15 * exact.max(1e-300) * 64.0);
}

#[test]
fn metric_ordering_holds_per_run() {
    let ch = random_channel(0.1, 75).unwrap();
    let config = EstimateConfig::new(2, 300, vec![MetricKind::Infidelity, MetricKind::DiamondDistance], 6);
    let ests = estimate_all(&ch, &config).unwrap();
    let infid = &ests[0];
    assert!((infid.avg_of_metric - infid.metric_of_avg).abs() <= 1e-12 * infid.avg_of_metric.max(1e-300) + 1e-15);
    let diamond = &ests[1];
    assert!(diamond.metric_of_avg <= diamond.avg_of_metric + 1e-9);
    for e in &ests {
        assert!(e.avg_of_metric >= 0.0 && e.metric_of_avg >= 0.0);
    }
}

#[test]
fn level_two_estimates_reproduce_bit_exactly() {
    let ch = random_channel(0.02, 76).unwrap();
    let run = || estimate(&ch, 2, MetricKind::Infidelity, 10_000, ImportanceConfig::direct(), 99).unwrap();
    let (a, b) = (run(), run());
    assert_eq!(a.avg_of_metric.to_bits(), b.avg_of_metric.to_bits());
    assert_eq!(a.metric_of_avg.to_bits(), b.metric_of_avg.to_bits());
    assert_eq!(a.convergence_trace, b.convergence_trace);
}

#[test]
fn cached_and_plain_recursion_draw_identical_histories() {
    let ch = random_channel(0.08, 77).unwrap();
    let cached = ConcatSimulator::new(&ch, ImportanceConfig::power_law()).unwrap();
    let plain = ConcatSimulator::uncached(&ch, ImportanceConfig::power_law()).unwrap();
    for j in 0..3 {
        let a = cached.sample(3, &mut sample_rng(1, j)).unwrap();
        let b = plain.sample(3, &mut sample_rng(1, j)).unwrap();
        assert_eq!(a.syndrome_history, b.syndrome_history);
        assert_eq!(a.gamma, b.gamma);
        assert_eq!(a.weight.to_bits(), b.weight.to_bits());
    }
}

#[test]
fn importance_and_direct_agree_at_level_two() {
    let ch = random_channel(0.1, 78).unwrap();
    let direct = estimate(&ch, 2, MetricKind::Infidelity, 20_000, ImportanceConfig::direct(), 1).unwrap();
    let importance = estimate(&ch, 2, MetricKind::Infidelity, 20_000, ImportanceConfig::power_law(), 2).unwrap();
    let sigma = (direct.std_error.powi(2) + importance.std_error.powi(2)).sqrt();
    assert!(
        (direct.avg_of_metric - importance.avg_of_metric).abs() < 3.0 * sigma,
        "{} vs {} (σ = {sigma})",
        direct.avg_of_metric,
        importance.avg_of_metric
    );
}

#[test]
fn sampled_weights_and_probabilities_are_consistent() {
    let ch = random_channel(0.1, 79).unwrap();
    let sim = ConcatSimulator::new(&ch, ImportanceConfig::direct()).unwrap();
    for r in sample_histories(&sim, 2, 200, 4).unwrap() {
        assert!((r.weight - r.likelihood).abs() <= 1e-15 * r.likelihood);
        let p = r.history_probability();
        assert!(p > 0.0 && p <= 1.0 + 1e-12);
        assert_eq!(r.trace.len(), 8);
    }
}

#[test]
fn identity_histogram_is_a_single_cell() {
    let h = outlier_histogram(&Channel::identity(), 1, MetricKind::Infidelity, 1, 1, HistogramConfig::default(), 0)
        .unwrap();
    assert_eq!(h.total, 1);
    assert!(h.exhaustive);
    assert_eq!(h.counts[49][0], 1);
}

#[test]
fn level_one_depolarizing_histogram_is_exact() {
    let p = 0.01;
    let ch = named_channel(NamedChannel::Depolarizing { p }).unwrap();
    let h = outlier_histogram(&ch, 1, MetricKind::Infidelity, 1, 1, HistogramConfig::default(), 0).unwrap();
    assert_eq!(h.total, 64);
    let a = QecRound::steane().analyze(&BlockInput::iid(&ch, 7)).unwrap();
    // The trivial syndrome carries most of the mass and the smallest logical noise.
    let p0 = a.probabilities()[0];
    assert!(p0 > (1.0 - p).powi(7));
    let axis = HistogramConfig::default();
    let i0 = axis.probability.bin(p0);
    let n0 = axis.noise.bin(1.0 - a.record(0).unwrap().fidelity);
    assert_eq!(h.counts[i0][n0], 1);
    for s in 1..64 {
        assert!(a.probabilities()[s] < p0);
        assert!(a.record(s).unwrap().fidelity < a.record(0).unwrap().fidelity);
    }
}

#[test]
fn level_two_histogram_respects_budget() {
    let ch = random_channel(0.02, 80).unwrap();
    let h = outlier_histogram(&ch, 2, MetricKind::Infidelity, 500, 200, HistogramConfig::default(), 1).unwrap();
    assert_eq!(h.total, 200);
    assert!(h.truncated);
    assert!(!h.exhaustive);
}
