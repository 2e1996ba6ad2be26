//! Integration checks for the sample distances: metric axioms on random data,
//! closed-form term bounds, and agreement with independently written
//! brute-force reference implementations.

use approx::assert_abs_diff_eq;
use momenta_metrics::{
    cmd, cmd_term_bound, cmd_terms, coral, default_weights, l1_moment_distance, mmd_squared,
    mmd_squared_naive, CmdOptions, CmdWeights, KernelSpec, Sample,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_sample(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Sample {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| rng.random::<f64>()).collect())
        .collect();
    Sample::from_rows(&rows).unwrap()
}

/// Literal transcription of the discrepancy definition, kept deliberately
/// naive (explicit loops, no shared code with the library) to serve as an
/// independent oracle.
fn brute_force_cmd(xp: &[Vec<f64>], xq: &[Vec<f64>], m: usize, a: &[f64]) -> f64 {
    let d = xp[0].len();
    let moment = |x: &[Vec<f64>], j: usize| -> Vec<f64> {
        let n = x.len() as f64;
        let mean: Vec<f64> = (0..d)
            .map(|i| x.iter().map(|row| row[i]).sum::<f64>() / n)
            .collect();
        if j == 1 {
            return mean;
        }
        (0..d)
            .map(|i| {
                x.iter()
                    .map(|row| (row[i] - mean[i]).powi(j as i32))
                    .sum::<f64>()
                    / n
            })
            .collect()
    };
    (1..=m)
        .map(|j| {
            let cp = moment(xp, j);
            let cq = moment(xq, j);
            let norm = cp
                .iter()
                .zip(cq.iter())
                .map(|(u, v)| (u - v) * (u - v))
                .sum::<f64>()
                .sqrt();
            a[j - 1] * norm
        })
        .sum()
}

#[test]
fn agrees_with_brute_force_on_small_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let weights = default_weights(0.0, 1.0, 5).unwrap();
    for _ in 0..50 {
        let rows_p: Vec<Vec<f64>> = (0..5)
            .map(|_| (0..3).map(|_| rng.random::<f64>()).collect())
            .collect();
        let rows_q: Vec<Vec<f64>> = (0..5)
            .map(|_| (0..3).map(|_| rng.random::<f64>()).collect())
            .collect();
        let xp = Sample::from_rows(&rows_p).unwrap();
        let xq = Sample::from_rows(&rows_q).unwrap();
        let lib = cmd(&xp, &xq, 5, &weights).unwrap();
        let oracle = brute_force_cmd(&rows_p, &rows_q, 5, weights.as_slice());
        assert_abs_diff_eq!(lib, oracle, epsilon = 1e-12);
    }
}

#[test]
fn symmetry_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let weights = default_weights(0.0, 1.0, 5).unwrap();
    for _ in 0..100 {
        let xp = random_sample(&mut rng, 8, 2);
        let xq = random_sample(&mut rng, 6, 2);
        let ab = cmd(&xp, &xq, 5, &weights).unwrap();
        let ba = cmd(&xq, &xp, 5, &weights).unwrap();
        assert_abs_diff_eq!(ab, ba, epsilon = 1e-12);
    }
}

#[test]
fn triangle_inequality_on_random_triples() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let weights = default_weights(0.0, 1.0, 5).unwrap();
    for _ in 0..100 {
        let x = random_sample(&mut rng, 7, 3);
        let y = random_sample(&mut rng, 9, 3);
        let z = random_sample(&mut rng, 5, 3);
        let xy = cmd(&x, &y, 5, &weights).unwrap();
        let yz = cmd(&y, &z, 5, &weights).unwrap();
        let xz = cmd(&x, &z, 5, &weights).unwrap();
        assert!(
            xz <= xy + yz + 1e-12,
            "triangle inequality violated: {xz} > {xy} + {yz}"
        );
    }
}

#[test]
fn identity_of_indiscernible_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let weights = default_weights(0.0, 1.0, 5).unwrap();
    for _ in 0..20 {
        let x = random_sample(&mut rng, 10, 3);
        assert_eq!(cmd(&x, &x, 5, &weights).unwrap(), 0.0);
        // A row permutation leaves all moments unchanged.
        let mut rows: Vec<Vec<f64>> = x
            .view()
            .rows()
            .into_iter()
            .map(|r| r.to_vec())
            .collect();
        rows.reverse();
        let permuted = Sample::from_rows(&rows).unwrap();
        assert_abs_diff_eq!(cmd(&x, &permuted, 5, &weights).unwrap(), 0.0, epsilon = 1e-12);
    }
}

#[test]
fn weighted_terms_respect_closed_form_bounds() {
    // For samples on [0, 1]^d with the default weighting, the order-j term is
    // bounded by 2·√d·((1/(j+1))(j/(j+1))^j + 2^{−1−j}).
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for &d in &[1usize, 3] {
        let weights = default_weights(0.0, 1.0, 7).unwrap();
        for _ in 0..50 {
            let xp = random_sample(&mut rng, 12, d);
            let xq = random_sample(&mut rng, 9, d);
            let terms = cmd_terms(&xp, &xq, 7, CmdOptions::default()).unwrap();
            for (j, (term, a)) in terms.iter().zip(weights.as_slice()).enumerate() {
                let bound = cmd_term_bound(j + 1, d).unwrap();
                assert!(
                    a * term <= bound + 1e-10,
                    "order {} term {} exceeds bound {}",
                    j + 1,
                    a * term,
                    bound
                );
            }
        }
    }
}

#[test]
fn term_bounds_decrease_in_order() {
    for d in [1usize, 2, 5] {
        let mut prev = f64::INFINITY;
        for j in 1..=10 {
            let b = cmd_term_bound(j, d).unwrap();
            assert!(b < prev, "bound must decrease: j={j}, d={d}");
            prev = b;
        }
    }
}

#[test]
fn terms_beyond_first_are_translation_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let xp = random_sample(&mut rng, 10, 2);
    let xq = random_sample(&mut rng, 8, 2);
    let shift = |s: &Sample, delta: f64| {
        let rows: Vec<Vec<f64>> = s
            .view()
            .rows()
            .into_iter()
            .map(|r| r.iter().map(|v| v + delta).collect())
            .collect();
        Sample::from_rows(&rows).unwrap()
    };
    let base = cmd_terms(&xp, &xq, 5, CmdOptions::default()).unwrap();
    // Translating both samples by the same offset keeps every term.
    let both = cmd_terms(&shift(&xp, 3.5), &shift(&xq, 3.5), 5, CmdOptions::default()).unwrap();
    for (a, b) in base.iter().zip(both.iter()) {
        assert_abs_diff_eq!(a, b, epsilon = 1e-12);
    }
    // Translating only one sample moves the mean term, not the central ones.
    let one = cmd_terms(&shift(&xp, 3.5), &xq, 5, CmdOptions::default()).unwrap();
    assert!((one[0] - base[0]).abs() > 1.0);
    for (a, b) in base[1..].iter().zip(one[1..].iter()) {
        assert_abs_diff_eq!(a, b, epsilon = 1e-12);
    }
}

#[test]
fn cross_second_order_dominates_marginal_term() {
    // The marginal order-2 vector is the diagonal of the cross-moment vector,
    // so the cross variant's order-2 norm can never be smaller.
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..50 {
        let xp = random_sample(&mut rng, 10, 4);
        let xq = random_sample(&mut rng, 10, 4);
        let marginal = cmd_terms(&xp, &xq, 2, CmdOptions::default()).unwrap()[1];
        let cross = cmd_terms(
            &xp,
            &xq,
            2,
            CmdOptions {
                cross_second_order: true,
            },
        )
        .unwrap()[1];
        assert!(cross >= marginal - 1e-12);
    }
}

#[test]
fn cross_option_changes_only_order_two() {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    let xp = random_sample(&mut rng, 10, 3);
    let xq = random_sample(&mut rng, 10, 3);
    let plain = cmd_terms(&xp, &xq, 4, CmdOptions::default()).unwrap();
    let cross = cmd_terms(
        &xp,
        &xq,
        4,
        CmdOptions {
            cross_second_order: true,
        },
    )
    .unwrap();
    assert_abs_diff_eq!(plain[0], cross[0], epsilon = 1e-15);
    assert_abs_diff_eq!(plain[2], cross[2], epsilon = 1e-15);
    assert_abs_diff_eq!(plain[3], cross[3], epsilon = 1e-15);
}

#[test]
fn mmd_fast_paths_match_naive_on_random_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for _ in 0..20 {
        let d = rng.random_range(1..=4);
        let np = rng.random_range(2..=15);
        let nq = rng.random_range(2..=15);
        let xp = random_sample(&mut rng, np, d);
        let xq = random_sample(&mut rng, nq, d);
        for kernel in [
            KernelSpec::Linear { bias: rng.random_range(-2.0..2.0) },
            KernelSpec::Polynomial { degree: 2, bias: rng.random_range(0.0..2.0) },
        ] {
            let fast = mmd_squared(&xp, &xq, kernel).unwrap();
            let slow = mmd_squared_naive(&xp, &xq, kernel).unwrap();
            assert_abs_diff_eq!(fast, slow, epsilon = 1e-12);
        }
    }
}

#[test]
fn dimension_mismatch_is_rejected_everywhere() {
    let xp = Sample::from_rows(&[vec![0.0, 1.0]]).unwrap();
    let xq = Sample::from_column(&[0.0, 1.0]).unwrap();
    let w = default_weights(0.0, 1.0, 2).unwrap();
    assert!(cmd(&xp, &xq, 2, &w).is_err());
    assert!(mmd_squared(&xp, &xq, KernelSpec::Linear { bias: 0.0 }).is_err());
    assert!(coral(&xp, &xq).is_err());
    assert!(l1_moment_distance(&xp, &xq, 2).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cmd_is_nonnegative_and_symmetric(
        rows_p in prop::collection::vec(prop::collection::vec(0.0..1.0f64, 3), 2..12),
        rows_q in prop::collection::vec(prop::collection::vec(0.0..1.0f64, 3), 2..12),
        m in 1usize..6,
    ) {
        let xp = Sample::from_rows(&rows_p).unwrap();
        let xq = Sample::from_rows(&rows_q).unwrap();
        let w = default_weights(0.0, 1.0, m).unwrap();
        let ab = cmd(&xp, &xq, m, &w).unwrap();
        let ba = cmd(&xq, &xp, m, &w).unwrap();
        prop_assert!(ab >= 0.0);
        prop_assert!((ab - ba).abs() <= 1e-12);
    }

    #[test]
    fn scaling_weights_scales_cmd(
        rows_p in prop::collection::vec(prop::collection::vec(0.0..1.0f64, 2), 2..8),
        rows_q in prop::collection::vec(prop::collection::vec(0.0..1.0f64, 2), 2..8),
        factor in 0.1..10.0f64,
    ) {
        let xp = Sample::from_rows(&rows_p).unwrap();
        let xq = Sample::from_rows(&rows_q).unwrap();
        let base = CmdWeights::new(vec![1.0, 1.0, 1.0]).unwrap();
        let scaled = CmdWeights::new(vec![factor, factor, factor]).unwrap();
        let a = cmd(&xp, &xq, 3, &base).unwrap();
        let b = cmd(&xp, &xq, 3, &scaled).unwrap();
        prop_assert!((b - factor * a).abs() <= 1e-10 * (1.0 + b.abs()));
    }

    #[test]
    fn mmd_squared_is_nonnegative(
        rows_p in prop::collection::vec(prop::collection::vec(-1.0..1.0f64, 2), 2..10),
        rows_q in prop::collection::vec(prop::collection::vec(-1.0..1.0f64, 2), 2..10),
        sigma in 0.2..3.0f64,
    ) {
        let xp = Sample::from_rows(&rows_p).unwrap();
        let xq = Sample::from_rows(&rows_q).unwrap();
        for kernel in [
            KernelSpec::Linear { bias: 0.5 },
            KernelSpec::Polynomial { degree: 2, bias: 1.0 },
            KernelSpec::Gaussian { sigma },
        ] {
            prop_assert!(mmd_squared(&xp, &xq, kernel).unwrap() >= -1e-10);
        }
    }

    #[test]
    fn coral_is_a_pseudometric(
        rows_p in prop::collection::vec(prop::collection::vec(-1.0..1.0f64, 2), 2..10),
        rows_q in prop::collection::vec(prop::collection::vec(-1.0..1.0f64, 2), 2..10),
        rows_r in prop::collection::vec(prop::collection::vec(-1.0..1.0f64, 2), 2..10),
    ) {
        let x = Sample::from_rows(&rows_p).unwrap();
        let y = Sample::from_rows(&rows_q).unwrap();
        let z = Sample::from_rows(&rows_r).unwrap();
        let xy = coral(&x, &y).unwrap();
        let yx = coral(&y, &x).unwrap();
        let yz = coral(&y, &z).unwrap();
        let xz = coral(&x, &z).unwrap();
        prop_assert!(xy >= 0.0);
        prop_assert!((xy - yx).abs() <= 1e-12);
        prop_assert!(xz <= xy + yz + 1e-12);
        prop_assert!(coral(&x, &x).unwrap() <= 1e-15);
    }
}
