mod common;

use std::sync::{Arc, Mutex};

use common::noisy_pair;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use twoway_qkd::distill::{
    run_schedule, BitObservations, PairedBits, Policy, Schedule, ScheduleContext, ScheduleStatus,
    Step, StepPattern,
};
use twoway_qkd::gf2::BitVector;

fn material(len: usize, p: f64, seed: u64) -> (PairedBits, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a, b) = noisy_pair(len, p, &mut rng);
    (PairedBits::new(a, b).unwrap(), rng)
}

#[test]
fn clean_input_hands_off_after_first_estimate() {
    let bits = PairedBits::new(BitVector::zeros(4000), BitVector::zeros(4000)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for schedule in [
        Schedule::alternating(),
        Schedule::new(Policy::Fixed("BBP".parse().unwrap())),
        Schedule::new(Policy::adaptive_bit_level(0.01)),
    ] {
        let run = run_schedule(
            bits.clone(),
            &schedule,
            &ScheduleContext::default(),
            &mut rng,
        )
        .unwrap();
        assert_eq!(run.status, ScheduleStatus::Handoff { estimate: 0.0 });
        assert_eq!(run.rounds, 0);
        assert_eq!(run.records.len(), 1);
    }
}

#[test]
fn fifteen_percent_is_distilled() {
    let (bits, mut rng) = material(1 << 20, 0.15, 2);
    let run = run_schedule(
        bits,
        &Schedule::alternating(),
        &ScheduleContext::default(),
        &mut rng,
    )
    .unwrap();
    match run.status {
        ScheduleStatus::Handoff { estimate } => assert!(estimate < 0.11),
        s => panic!("{s:?}"),
    }
    assert!(run.bits.error_rate() < 0.11);
    assert!(!run.bits.is_empty());
}

#[test]
fn thirty_percent_exhausts() {
    let (bits, mut rng) = material(1 << 18, 0.30, 3);
    let run = run_schedule(
        bits,
        &Schedule::alternating(),
        &ScheduleContext::default(),
        &mut rng,
    )
    .unwrap();
    assert_eq!(run.status, ScheduleStatus::Exhausted);
}

#[test]
fn deterministic_given_seed() {
    let go = || {
        let (bits, mut rng) = material(50_000, 0.08, 4);
        let run = run_schedule(
            bits,
            &Schedule::alternating().with_min_rounds(2),
            &ScheduleContext::default(),
            &mut rng,
        )
        .unwrap();
        (run.messages, run.records, run.bits)
    };
    assert_eq!(go(), go());
}

#[test]
fn adaptive_policy_sees_only_bit_evidence() {
    let seen: Arc<Mutex<Vec<BitObservations>>> = Arc::default();
    let log = seen.clone();
    let policy = Policy::Adaptive(Arc::new(move |obs: &BitObservations| {
        log.lock().unwrap().push(obs.clone());
        if obs.history.len().is_multiple_of(2) {
            Step::B
        } else {
            Step::P
        }
    }));
    let (bits, mut rng) = material(200_000, 0.12, 5);
    let run = run_schedule(
        bits,
        &Schedule::new(policy),
        &ScheduleContext::default(),
        &mut rng,
    )
    .unwrap();
    assert!(run.succeeded());
    let seen = seen.lock().unwrap();
    assert!(!seen.is_empty());
    // Each B step leaves a pass count for the next decision.
    let last = seen.last().unwrap();
    let bs = last.history.iter().filter(|s| **s == Step::B).count();
    assert_eq!(last.b_outcomes.len(), bs);
}

#[test]
fn round_records_serialize() {
    let (bits, mut rng) = material(20_000, 0.05, 6);
    let schedule = Schedule::new(Policy::Fixed(StepPattern::alternating())).with_min_rounds(1);
    let run = run_schedule(bits, &schedule, &ScheduleContext::default(), &mut rng).unwrap();
    let rows: Vec<String> = run.records.iter().map(|r| r.csv_row()).collect();
    // With a forced round there is no round-0 estimate.
    assert!(rows[0].starts_with("1,B,20000,"), "{}", rows[0]);
    assert!(rows[1].starts_with("1,P,"), "{}", rows[1]);
    assert!(rows[2].starts_with("1,E,"), "{}", rows[2]);
    assert!(
        rows[2].ends_with(|c: char| c.is_ascii_digit()),
        "{}",
        rows[2]
    );
}
