use std::f64::consts::{FRAC_1_SQRT_2, PI};

use proptest::prelude::*;

use super::*;
use crate::diophantine::moment_exact;
use crate::sequences::{gen_geometric, permute_interleave};

fn cos1() -> TrigPolynomial {
    TrigPolynomial::cos1()
}

fn next_prime_above(n: u64) -> u64 {
    let is_prime = |m: u64| m >= 2 && (2..).take_while(|d| d * d <= m).all(|d| m % d != 0);
    (n + 1..).find(|&m| is_prime(m)).unwrap()
}

#[test]
fn four_point_grid() {
    let seq = IntegerSequence::from_u64s(&[1]).unwrap();
    let s = sample_sums(&cos1(), &seq, None, 1, &SampleSpec::Grid { m: 4, offset: (1, 2) }).unwrap();
    let want = [FRAC_1_SQRT_2, -FRAC_1_SQRT_2, -FRAC_1_SQRT_2, FRAC_1_SQRT_2];
    for (a, b) in s.values().iter().zip(want) {
        assert!((a - b).abs() < 1e-15);
    }
    assert_eq!(s.n(), 1);
    assert_eq!(s.sequence_fingerprint(), seq.fingerprint());
    assert_eq!(s.permutation_fingerprint(), None);
}

#[test]
fn empty_sum_is_zero() {
    let seq = gen_geometric(2, 4).unwrap();
    let s = sample_sums(&cos1(), &seq, None, 0, &SampleSpec::grid(11)).unwrap();
    assert!(s.values().iter().all(|&v| v == 0.0));
    assert_eq!(s.len(), 11);
}

#[test]
fn resonant_grid_is_rejected() {
    let seq = gen_geometric(2, 6).unwrap();
    let err = sample_sums(&cos1(), &seq, None, 6, &SampleSpec::grid(8)).unwrap_err();
    assert!(err.to_string().contains("n_k = 8"), "{err}");
    // a composite grid without resonance is accepted
    assert!(sample_sums(&cos1(), &seq, None, 6, &SampleSpec::grid(9)).is_ok());
    let f = TrigPolynomial::new(vec![1.0, 0.0, 0.5], vec![]).unwrap();
    let seq = IntegerSequence::from_u64s(&[1, 5]).unwrap();
    assert!(sample_sums(&f, &seq, None, 2, &SampleSpec::grid(15)).is_err());
}

#[test]
fn bad_specs() {
    let seq = gen_geometric(2, 4).unwrap();
    let f = cos1();
    assert!(sample_sums(&f, &seq, None, 5, &SampleSpec::grid(11)).is_err());
    assert!(sample_sums(&f, &seq, None, 4, &SampleSpec::Grid { m: 11, offset: (2, 2) }).is_err());
    let low = SampleSpec::Random { m: 4, precision_bits: 64, seed: 1 };
    assert!(sample_sums(&f, &seq, None, 4, &low).is_err());
    assert!(random_point(1, 0, 100).is_err());
}

#[test]
fn interleaved_permutation_matches_partial_sums() {
    let seq = gen_geometric(3, 40).unwrap();
    let perm = permute_interleave(&[2, 4, 6, 8, 10, 12, 14, 16], 8).unwrap();
    let spec = SampleSpec::grid(101);
    let s = sample_sums(&cos1(), &seq, Some(&perm), 8, &spec).unwrap();
    let re = seq.permuted(&perm).unwrap();
    for i in [0u64, 17, 50, 100] {
        let x = RationalPoint::from_u64(2 * i + 1, 202).unwrap();
        let direct = cos1().partial_sum(&re, 8, &x).unwrap() / 8f64.sqrt();
        assert!((s.values()[i as usize] - direct).abs() < 1e-12);
    }
    assert!(s.permutation_fingerprint().is_some());
}

#[test]
fn random_mode_agrees_with_exact_points() {
    let seq = gen_geometric(2, 200).unwrap();
    let f = TrigPolynomial::new(vec![1.0, 0.5], vec![0.0, 0.25]).unwrap();
    let spec = SampleSpec::random_for(&seq, 20, 7);
    let SampleSpec::Random { precision_bits, .. } = spec else { unreachable!() };
    assert_eq!(precision_bits % 64, 0);
    let s = sample_sums(&f, &seq, None, 200, &spec).unwrap();
    for i in 0..20 {
        let x = random_point(7, i, precision_bits).unwrap();
        let direct = f.partial_sum(&seq, 200, &x).unwrap() / 200f64.sqrt();
        assert!((s.values()[i as usize] - direct).abs() < 1e-12);
    }
}

#[test]
fn doubling_precision_is_harmless() {
    let seq = gen_geometric(2, 300).unwrap();
    let spec = SampleSpec::random_for(&seq, 100, 99);
    let SampleSpec::Random { precision_bits, .. } = spec else { unreachable!() };
    let a = sample_sums(&cos1(), &seq, None, 300, &spec).unwrap();
    let doubled = SampleSpec::Random { m: 100, precision_bits: 2 * precision_bits, seed: 99 };
    let b = sample_sums(&cos1(), &seq, None, 300, &doubled).unwrap();
    for (x, y) in a.values().iter().zip(b.values()) {
        assert!((x - y).abs() <= (-40f64).exp2());
    }
}

#[test]
fn thread_count_does_not_change_samples() {
    let seq = gen_geometric(2, 64).unwrap();
    let spec = SampleSpec::random_for(&seq, 64, 3);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| sample_sums(&cos1(), &seq, None, 64, &spec).unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn ks_examples() {
    let d = ks_distance(&[-1.0, 0.0, 1.0], normal_cdf(0.0, 1.0).unwrap()).unwrap();
    // attained at v = 1: Phi(1) - 2/3 with Phi(1) = 0.8413447461
    assert!((d - (0.8413447461 - 2.0 / 3.0)).abs() < 1e-9);
    assert_eq!(ks_distance(&[0.0], normal_cdf(0.0, 1.0).unwrap()).unwrap(), 0.5);
    let m = 50;
    let q: Vec<f64> = (1..=m).map(|i| (i as f64 - 0.5) / m as f64).collect();
    let d = ks_distance(&q, |x: f64| x.clamp(0.0, 1.0)).unwrap();
    assert!(d <= 0.5 / m as f64 + 1e-15);
    assert!(ks_distance(&[], |x| x).is_err());
}

#[test]
fn estimator_examples() {
    assert_eq!(empirical_moment(&[-1.0, 1.0], 1).unwrap(), 0.0);
    assert_eq!(empirical_moment(&[-1.0, 1.0], 2).unwrap(), 1.0);
    assert_eq!(excess_kurtosis(&[-1.0, -1.0, 1.0, 1.0]).unwrap(), -2.0);
    assert!(excess_kurtosis(&[2.0, 2.0]).is_err());
    let c = empirical_cf(&[0.0, PI], 1.0).unwrap();
    assert!(c.norm() < 1e-15);
    let (m, v) = mean_and_variance(&[1.0, 3.0]).unwrap();
    assert_eq!((m, v), (2.0, 1.0));
}

#[test]
fn variance_ratio_examples() {
    let seq = IntegerSequence::from_u64s(&[1, 3, 7, 10, 22]).unwrap();
    assert!((variance_ratio(&cos1(), &seq, 5).unwrap() - 1.0).abs() < 1e-15);
    let f = TrigPolynomial::new(vec![1.0, 1.0], vec![]).unwrap();
    let seq = IntegerSequence::from_u64s(&[1, 2]).unwrap();
    assert!((variance_ratio(&f, &seq, 2).unwrap() - 1.5).abs() < 1e-14);
    assert!((variance_ratio(&f, &seq, 1).unwrap() - 1.0).abs() < 1e-14);
    assert!(variance_ratio(&f, &seq, 0).is_err());
}

#[test]
fn lil_examples() {
    let seq = IntegerSequence::from_u64s(&[1, 2, 4]).unwrap();
    let pts = [RationalPoint::from_u64(0, 1).unwrap(), RationalPoint::from_u64(1, 4).unwrap()];
    let scan = lil_scan(&cos1(), &seq, None, &pts, &[3]).unwrap();
    let want = 3.0 / (6.0 * 3f64.ln().ln()).sqrt();
    assert!((scan.ratios[0][0] - want).abs() < 1e-12);
    assert!((want - 3.99).abs() < 0.01);
    assert!(scan.ratios[1][0].abs() < 1e-12);
    assert!(lil_scan(&cos1(), &seq, None, &pts, &[2]).is_err());
    assert!(lil_scan(&cos1(), &seq, None, &pts, &[3, 3]).is_err());
    assert!(lil_scan(&cos1(), &seq, None, &pts, &[]).is_err());
    assert!(lil_ratio(1.0, 2).is_err());
}

#[test]
fn lil_checkpoints_match_partial_sums() {
    let seq = gen_geometric(2, 300).unwrap();
    let x = random_point(5, 0, 448).unwrap();
    let y = RationalPoint::from_u64(12345, 100_003).unwrap();
    let cps = [3, 10, 64, 65, 299];
    let scan = lil_scan(&cos1(), &seq, None, &[x.clone(), y.clone()], &cps).unwrap();
    for (i, p) in [x, y].iter().enumerate() {
        for (c, &n) in cps.iter().enumerate() {
            let want = lil_ratio(cos1().partial_sum(&seq, n, p).unwrap(), n).unwrap();
            assert!((scan.ratios[i][c] - want).abs() < 1e-12);
        }
        let rm = scan.running_max(i);
        assert!(rm.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(*rm.last().unwrap(), scan.maxima()[i]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn grid_moments_are_exact(
        raw in proptest::collection::btree_set(1u64..60, 1..6),
        coeffs in proptest::collection::vec(-2i32..=2, 1..4),
        p in 1u32..5,
    ) {
        let mut cos: Vec<f64> = coeffs.iter().map(|&c| c as f64 / 2.0).collect();
        if cos.iter().all(|&c| c == 0.0) {
            cos[0] = 1.0;
        }
        let f = TrigPolynomial::new(cos, vec![]).unwrap();
        let terms: Vec<u64> = raw.into_iter().collect();
        let seq = IntegerSequence::from_u64s(&terms).unwrap();
        let n = terms.len();
        let m = next_prime_above(p as u64 * f.degree() as u64 * terms[n - 1]);
        let s = sample_sums(&f, &seq, None, n, &SampleSpec::grid(m)).unwrap();
        let grid = empirical_moment(s.values(), p).unwrap() * (n as f64).powf(p as f64 / 2.0);
        let exact = moment_exact(&f, &seq, n, p).unwrap();
        let scale = exact.abs().max(f.l2_norm().powi(p as i32) * (n as f64).powf(p as f64 / 2.0));
        prop_assert!((grid - exact).abs() <= 1e-9 * scale, "{} vs {}", grid, exact);
    }

    #[test]
    fn permuted_sample_equals_sample_of_permuted_prefix(seed in any::<u64>(), n in 1usize..12) {
        let seq = gen_geometric(3, 12).unwrap();
        let mut perm: Vec<usize> = (1..=12).collect();
        // Fisher-Yates from the seed
        let mut s = seed;
        for i in (1..perm.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let spec = SampleSpec::grid(97);
        let a = sample_sums(&cos1(), &seq, Some(&perm), n, &spec).unwrap();
        let b = sample_sums(&cos1(), &seq.permuted(&perm[..n]).unwrap(), None, n, &spec).unwrap();
        prop_assert_eq!(a.values(), b.values());
    }

    #[test]
    fn ks_is_a_distance_and_robust_to_a_median_point(values in proptest::collection::vec(-3.0f64..3.0, 1..40)) {
        let cdf = normal_cdf(0.0, 1.0).unwrap();
        let d = ks_distance(&values, &cdf).unwrap();
        prop_assert!((0.0..=1.0).contains(&d));
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        let med = sorted[sorted.len() / 2];
        let mut more = values.clone();
        more.push(med);
        let d2 = ks_distance(&more, &cdf).unwrap();
        prop_assert!(d2 <= d + 1.0 / values.len() as f64 + 1e-12);
    }

    #[test]
    fn empirical_cf_is_bounded(values in proptest::collection::vec(-10.0f64..10.0, 1..30), t in -20.0f64..20.0) {
        prop_assert!(empirical_cf(&values, t).unwrap().norm() <= 1.0 + 1e-12);
    }
}
