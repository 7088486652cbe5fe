mod common;

use common::{b_oracle, p_oracle, random_simplex};
use num_rational::Ratio;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use twoway_qkd::belldiag::{
    b_step_map, find_threshold, iterate_schedule, p_step_map, schedule_search, BellDiagonal,
    Family, IterateOptions, ThresholdOptions, Verdict,
};
use twoway_qkd::distill::{Step, StepPattern};
use twoway_qkd::BellDiagonalF32;

#[test]
fn closed_forms_match_enumeration_on_random_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let q = random_simplex(&mut rng);
        let s = BellDiagonal::from_array(q).unwrap();
        let (b, pass) = b_step_map(&s).unwrap();
        let (want, want_pass) = b_oracle(q);
        assert!((pass - want_pass).abs() < 1e-12);
        let p = p_step_map(&s);
        let p_want = p_oracle(q);
        for i in 0..4 {
            assert!((b.as_array()[i] - want[i]).abs() < 1e-12, "{q:?}");
            assert!((p.as_array()[i] - p_want[i]).abs() < 1e-12, "{q:?}");
        }
    }
}

#[test]
fn normalization_and_sign_hold_on_many_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..100_000 {
        let s = BellDiagonal::from_array(random_simplex(&mut rng)).unwrap();
        let (b, _) = b_step_map(&s).unwrap();
        for out in [b, p_step_map(&s)] {
            assert!(out.as_array().iter().all(|&x| x >= 0.0));
            assert!((out.total() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn b_step_on_independent_tenth() {
    let q = BellDiagonal::independent(0.1f64).unwrap();
    let (out, pass) = b_step_map(&q).unwrap();
    assert!((pass - 0.82).abs() < 1e-12);
    let want = [0.81, 0.01, 0.002195, 0.177805];
    for (got, want) in out.as_array().iter().zip(want) {
        assert!((got - want).abs() < 5e-7, "{got} vs {want}");
    }
    assert!((out.bit_error() - 0.012195).abs() < 5e-7);
}

#[test]
fn deterministic_phase_errors_cancel_pairwise() {
    let r = |n: i64| Ratio::new(n, 1);
    let q = BellDiagonal::new(r(0), r(0), r(0), r(1)).unwrap();
    let (out, pass) = b_step_map(&q).unwrap();
    assert_eq!(pass, r(1));
    assert_eq!(out.as_array(), &[r(1), r(0), r(0), r(0)]);
}

#[test]
fn p_step_matches_oracle_in_exact_arithmetic() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    use rand::Rng;
    for _ in 0..200 {
        let w: [i64; 4] = std::array::from_fn(|_| rng.gen_range(0..20));
        let total: i64 = w.iter().sum::<i64>().max(1);
        let w = if w.iter().all(|&x| x == 0) {
            [1, 0, 0, 0]
        } else {
            w
        };
        let q = w.map(|x| Ratio::new(x, total));
        let out = p_step_map(&BellDiagonal::from_array(q).unwrap());
        let want = p_oracle(w.map(|x| x as f64 / total as f64));
        for i in 0..4 {
            let got = *out.as_array()[i].numer() as f64 / *out.as_array()[i].denom() as f64;
            assert!((got - want[i]).abs() < 1e-12);
        }
    }
}

#[test]
fn single_precision_alias_tracks_double() {
    let q32 = BellDiagonalF32::independent(0.1).unwrap();
    let q64 = BellDiagonal::independent(0.1f64).unwrap();
    let (a, _) = b_step_map(&q32).unwrap();
    let (b, _) = b_step_map(&q64).unwrap();
    for i in 0..4 {
        assert!((f64::from(a.as_array()[i]) - b.as_array()[i]).abs() < 1e-6);
    }
}

#[test]
fn alternating_verdicts() {
    let opts = IterateOptions::default();
    let alt = StepPattern::alternating();
    let it = iterate_schedule(&BellDiagonal::independent(0.15f64).unwrap(), &alt, &opts).unwrap();
    assert_eq!(it.verdict, Verdict::Converges);
    let it = iterate_schedule(&BellDiagonal::independent(0.25f64).unwrap(), &alt, &opts).unwrap();
    assert_eq!(it.verdict, Verdict::Diverges);
}

#[test]
fn p_only_never_helps_bit_errors() {
    let rep = find_threshold(
        &StepPattern::new(vec![Step::P]).unwrap(),
        Family::IndependentBitPhase,
        &ThresholdOptions::<f64>::default(),
    )
    .unwrap();
    assert_eq!(rep.threshold, Some(0.0));
}

#[test]
fn threshold_is_deterministic_and_search_dominates_alternating() {
    let opts = ThresholdOptions::<f64> {
        grid_step: 0.005,
        ..Default::default()
    };
    let a = find_threshold(
        &StepPattern::alternating(),
        Family::WorstCaseGivenMarginals,
        &opts,
    )
    .unwrap();
    let b = find_threshold(
        &StepPattern::alternating(),
        Family::WorstCaseGivenMarginals,
        &opts,
    )
    .unwrap();
    assert_eq!(a.threshold, b.threshold);
    let search = schedule_search(4, Family::WorstCaseGivenMarginals, &opts).unwrap();
    assert!(search.threshold >= a.threshold.unwrap());
    assert_eq!(search.best.steps()[0], Step::B);
}

proptest! {
    #[test]
    fn b_step_strictly_reduces_bit_errors(p in 0.001f64..0.499) {
        let q = BellDiagonal::independent(p).unwrap();
        let (out, _) = b_step_map(&q).unwrap();
        prop_assert!(out.bit_error() < q.bit_error());
    }

    #[test]
    fn p_step_strictly_reduces_phase_errors(
        bit in 0.0f64..0.5, phase in 0.001f64..0.499, frac in 0.0f64..1.0,
    ) {
        let q = BellDiagonal::with_marginals(bit, phase, frac * bit.min(phase)).unwrap();
        let out = p_step_map(&q);
        prop_assert!(out.phase_error() < q.phase_error());
    }

    #[test]
    fn p_step_worsens_independent_bit_errors(p in 0.001f64..0.499) {
        let q = BellDiagonal::independent(p).unwrap();
        prop_assert!(p_step_map(&q).bit_error() > p);
    }

    #[test]
    fn worst_case_family_keeps_marginals(p in 0.0f64..0.5, frac in 0.0f64..1.0) {
        let q = BellDiagonal::with_marginals(p, p, frac * p).unwrap();
        prop_assert!((q.bit_error() - p).abs() < 1e-12);
        prop_assert!((q.phase_error() - p).abs() < 1e-12);
    }
}
