use proptest::prelude::*;
use twoway_qkd::belldiag::{key_rate_accounting, Baseline};
use twoway_qkd::channel::{Adversary, PauliChannel};
use twoway_qkd::distill::Schedule;
use twoway_qkd::session::{
    run_session, transcript_eve_view, AbortReason, MessageKind, Party, Payload, SessionParams,
    SessionStatus, Transcript,
};

fn depolarized(qber: f64, n: usize, seed: u64) -> SessionParams {
    SessionParams::new(
        n,
        Adversary::Pauli(PauliChannel::depolarizing_with_qber(qber).unwrap()),
        seed,
    )
}

#[test]
fn noiseless_session_agrees() {
    let out = run_session(&SessionParams::new(64, Adversary::None, 1)).unwrap();
    assert_eq!(out.status, SessionStatus::Completed);
    assert_eq!(out.observed_qber, 0.0);
    assert!(out.keys_match());
    assert_eq!(out.alice_key.len(), 64 / 7);
    assert_eq!(out.consumed_secret_bits, 128);
}

#[test]
fn minimal_transcript_covers_every_public_step_in_order() {
    let mut params = SessionParams::new(64, Adversary::None, 2);
    params.schedule = Schedule::alternating().with_min_rounds(1);
    let out = run_session(&params).unwrap();
    assert!(out.keys_match());
    let kinds: Vec<(Party, MessageKind)> = out
        .transcript
        .messages()
        .iter()
        .map(|m| (m.sender, m.kind))
        .collect();
    use MessageKind::*;
    use Party::*;
    assert_eq!(
        kinds,
        vec![
            (Bob, ReceiptAck),
            (Alice, CheckPositions),
            (Alice, CheckValues),
            (Bob, CheckValues),
            (Alice, PairingPermutation),
            (Alice, PairParities),
            (Bob, PairParities),
            (Alice, TripleGrouping),
            (Alice, SacrificePositions),
            (Alice, SacrificeValues),
            (Bob, SacrificeValues),
            (Alice, ErrorEstimate),
            (Alice, CodeAnnouncement),
        ]
    );
}

#[test]
fn check_data_precedes_distillation() {
    let out = run_session(&depolarized(0.05, 1024, 3)).unwrap();
    let kinds: Vec<MessageKind> = out.transcript.kinds().collect();
    let last_check = kinds
        .iter()
        .rposition(|k| *k == MessageKind::CheckValues)
        .unwrap();
    let first_distill = kinds
        .iter()
        .position(|k| {
            matches!(
                k,
                MessageKind::PairingPermutation
                    | MessageKind::TripleGrouping
                    | MessageKind::SacrificePositions
            )
        })
        .unwrap();
    assert!(last_check < first_distill);
}

#[test]
fn no_basis_information_is_ever_announced() {
    // The only payloads are counts, positions, bit values and rates; none
    // carries the basis seed. Positions announced are always a subset of the
    // current string, never a basis string.
    let out = run_session(&depolarized(0.05, 1024, 4)).unwrap();
    let view = transcript_eve_view(&out);
    for m in &view.messages {
        assert!(!matches!(m.payload, Payload::Text(_)) || m.kind == MessageKind::Abort);
    }
    let rates = key_rate_accounting(&out, Baseline::NoPab);
    assert_eq!(rates.sifted_fraction, 1.0);
    assert_eq!(out.counts.usable, out.counts.transmitted);
}

#[test]
fn aborted_session_ends_with_abort() {
    let out = run_session(&SessionParams::new(4096, Adversary::InterceptResend, 5)).unwrap();
    match &out.status {
        SessionStatus::Aborted(AbortReason::CheckQber { observed, .. }) => {
            assert!((observed - 0.25).abs() < 0.013)
        }
        other => panic!("{other:?}"),
    }
    let last = out.transcript.last().unwrap();
    assert_eq!(last.kind, MessageKind::Abort);
    assert!(out.alice_key.is_empty() && out.bob_key.is_empty());
    match &last.payload {
        Payload::Text(t) => assert!(t.starts_with("qber 0.2"), "{t}"),
        p => panic!("{p:?}"),
    }
}

#[test]
fn parity_announcements_count_two_bits_per_pair() {
    let mut params = depolarized(0.05, 512, 6);
    params.schedule = Schedule::alternating().with_min_rounds(1);
    let out = run_session(&params).unwrap();
    let view = transcript_eve_view(&out);
    let pairs: usize = out
        .records
        .iter()
        .filter(|r| r.pass_count.is_some())
        .map(|r| r.in_len / 2)
        .sum();
    let parity_bits = view
        .bits_by_kind
        .iter()
        .find(|(k, _)| *k == MessageKind::PairParities)
        .map(|(_, c)| *c)
        .unwrap();
    assert_eq!(parity_bits, 2 * pairs);
}

#[test]
fn transcript_text_roundtrips() {
    let out = run_session(&depolarized(0.05, 256, 7)).unwrap();
    let text = out.transcript.to_text();
    assert_eq!(Transcript::parse(&text).unwrap(), out.transcript);
    let first = text.lines().next().unwrap();
    assert_eq!(first, "0 B RECEIPT_ACK 0000000000000200");
}

#[test]
fn five_percent_channel_keeps_agreeing() {
    let mut agreed = 0;
    for seed in 100..130 {
        let out = run_session(&depolarized(0.05, 4096, seed)).unwrap();
        assert_eq!(out.alice_key.len(), out.bob_key.len());
        if out.keys_match() {
            agreed += 1;
            assert_eq!(out.alice_key.len(), out.counts.reconciled_blocks);
        }
    }
    assert!(agreed >= 29, "{agreed}/30");
}

#[test]
fn repetition_must_divide_the_qubit_count() {
    let mut params = SessionParams::new(10, Adversary::None, 0);
    params.r = 3;
    assert!(run_session(&params).is_err());
    params.r = 20;
    let out = run_session(&params).unwrap();
    assert_eq!(out.consumed_secret_bits, 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn sessions_are_deterministic(seed in any::<u64>(), qber in 0.0f64..0.12, n in 16usize..600) {
        let params = depolarized(qber, n, seed);
        let a = run_session(&params).unwrap();
        let b = run_session(&params).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.alice_key.len(), a.bob_key.len());
    }
}
