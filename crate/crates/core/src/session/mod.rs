//! A full prepare-and-measure session between Alice and Bob.
//!
//! Both parties share a secret basis sequence up front, so nothing about
//! bases is ever said in public and every transmitted position is usable.
//! The session runs: basis expansion, Alice's encoding, transmission, Bob's
//! receipt, check-bit selection and comparison, two-way distillation, and
//! blockwise coset reconciliation.

mod transcript;

pub use transcript::{Message, MessageKind, Party, Payload, Transcript};

use std::fmt;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{expand_basis, Adversary, QubitRecord};
use crate::distill::{
    run_schedule, PairedBits, ReconcileTarget, RoundRecord, Schedule, ScheduleContext,
    ScheduleStatus, DEFAULT_MAX_RECONCILE_FAILURE,
};
use crate::error::{Error, Result};
use crate::gf2::{BitVector, CssPair};

pub const DEFAULT_ABORT_THRESHOLD: f64 = 0.20;

#[derive(Debug, Clone)]
pub struct SessionParams {
    /// Check-block size; `2n` qubits are sent.
    pub n: usize,
    /// Basis seed repetition count; must divide `2n`.
    pub r: usize,
    pub adversary: Adversary,
    /// Largest check-bit error rate that does not abort.
    pub abort_threshold: f64,
    pub schedule: Schedule,
    pub css: CssPair,
    /// Bound on the predicted chance that some reconciliation block fails,
    /// used to decide when distillation has gone far enough.
    pub max_reconcile_failure: f64,
    pub seed: u64,
}

impl SessionParams {
    pub fn new(n: usize, adversary: Adversary, seed: u64) -> Self {
        Self {
            n,
            r: 1,
            adversary,
            abort_threshold: DEFAULT_ABORT_THRESHOLD,
            schedule: Schedule::alternating(),
            css: CssPair::steane(),
            max_reconcile_failure: DEFAULT_MAX_RECONCILE_FAILURE,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        if self.r == 0 || !(2 * self.n).is_multiple_of(self.r) {
            return Err(Error::Repetition {
                seed: if self.r == 0 { 0 } else { 2 * self.n / self.r },
                r: self.r,
                total: 2 * self.n,
            });
        }
        if !(0.0..=0.5).contains(&self.abort_threshold) {
            return Err(Error::InvalidParameter(format!(
                "abort threshold {} outside [0, 0.5]",
                self.abort_threshold
            )));
        }
        if !(0.0..=1.0).contains(&self.max_reconcile_failure) {
            return Err(Error::InvalidParameter(format!(
                "reconciliation failure bound {} outside [0, 1]",
                self.max_reconcile_failure
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AbortReason {
    CheckQber { observed: f64, threshold: f64 },
    DistillationExhausted,
    ReconciliationFailed(String),
}

impl fmt::Display for AbortReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AbortReason::CheckQber {
                observed,
                threshold,
            } => write!(f, "qber {observed:.4} exceeds threshold {threshold:.4}"),
            AbortReason::DistillationExhausted => {
                f.write_str("distillation exhausted the key material")
            }
            AbortReason::ReconciliationFailed(why) => write!(f, "reconciliation failed: {why}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SessionStatus {
    Completed,
    Aborted(AbortReason),
}

/// Bit counts at each stage, for rate accounting.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StageCounts {
    pub transmitted: usize,
    /// Positions usable after sifting; every position without public bases.
    pub usable: usize,
    pub check: usize,
    pub into_distillation: usize,
    pub after_distillation: usize,
    pub reconciled_blocks: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionOutcome {
    pub status: SessionStatus,
    pub alice_key: BitVector,
    pub bob_key: BitVector,
    pub transcript: Transcript,
    pub consumed_secret_bits: usize,
    pub observed_qber: f64,
    pub rounds_executed: usize,
    pub records: Vec<RoundRecord>,
    pub counts: StageCounts,
}

impl SessionOutcome {
    pub fn completed(&self) -> bool {
        self.status == SessionStatus::Completed
    }

    pub fn keys_match(&self) -> bool {
        self.completed() && self.alice_key == self.bob_key
    }
}

/// Chooses `total / 2` distinct positions uniformly, sorted ascending.
pub fn select_check_bits<R: Rng + ?Sized>(rng: &mut R, total: usize) -> Vec<usize> {
    let mut v = index::sample(rng, total, total / 2).into_vec();
    v.sort_unstable();
    v
}

/// Fraction of positions where the two strings disagree.
pub fn estimate_check_qber(alice: &BitVector, bob: &BitVector) -> Result<f64> {
    if alice.is_empty() {
        return Err(Error::NotEnoughBits { need: 1, have: 0 });
    }
    Ok(alice.hamming_distance(bob)? as f64 / alice.len() as f64)
}

pub fn run_session(params: &SessionParams) -> Result<SessionOutcome> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let total = 2 * params.n;

    // Basis sequence from the pre-shared seed; its cost is the seed length.
    let seed = BitVector::random(total / params.r, &mut rng);
    let bases = expand_basis(&seed, params.r, total)?;

    // Alice's random string, encoded in the shared bases.
    let alice_raw = BitVector::random(total, &mut rng);
    let sent: Vec<QubitRecord> = (0..total)
        .map(|i| QubitRecord {
            bit: alice_raw.get(i),
            basis: bases.basis(i),
        })
        .collect();

    let bob_raw: BitVector = params
        .adversary
        .transmit(&sent, &mut rng)
        .into_iter()
        .collect();

    let mut out = SessionOutcome {
        status: SessionStatus::Completed,
        alice_key: BitVector::zeros(0),
        bob_key: BitVector::zeros(0),
        transcript: Transcript::new(),
        consumed_secret_bits: bases.consumed_secret_bits(),
        observed_qber: 0.0,
        rounds_executed: 0,
        records: Vec::new(),
        counts: StageCounts {
            transmitted: total,
            usable: total,
            ..Default::default()
        },
    };
    let t = &mut out.transcript;
    t.send(
        Party::Bob,
        MessageKind::ReceiptAck,
        Payload::Count(total as u64),
    );

    let check = select_check_bits(&mut rng, total);
    t.send(
        Party::Alice,
        MessageKind::CheckPositions,
        Payload::Indices(check.clone()),
    );
    let alice_check = alice_raw.select(&check);
    let bob_check = bob_raw.select(&check);
    t.send(
        Party::Alice,
        MessageKind::CheckValues,
        Payload::Bits(alice_check.clone()),
    );
    t.send(
        Party::Bob,
        MessageKind::CheckValues,
        Payload::Bits(bob_check.clone()),
    );
    out.counts.check = check.len();
    out.observed_qber = estimate_check_qber(&alice_check, &bob_check)?;
    if out.observed_qber > params.abort_threshold {
        let reason = AbortReason::CheckQber {
            observed: out.observed_qber,
            threshold: params.abort_threshold,
        };
        return Ok(abort(out, reason));
    }

    // Revealed check bits are discarded; the rest is key material.
    let mut is_check = vec![false; total];
    for &c in &check {
        is_check[c] = true;
    }
    let key_pos: Vec<usize> = (0..total).filter(|&i| !is_check[i]).collect();
    let material = PairedBits::new(alice_raw.select(&key_pos), bob_raw.select(&key_pos))?;
    out.counts.into_distillation = material.len();

    let ctx = ScheduleContext {
        prior_estimate: Some(out.observed_qber),
        reconcile: Some(ReconcileTarget {
            block_len: params.css.n(),
            correctable: params.css.c1().t(),
            max_failure: params.max_reconcile_failure,
        }),
    };
    let run = run_schedule(material, &params.schedule, &ctx, &mut rng)?;
    for m in run.messages {
        out.transcript.push(m);
    }
    out.records = run.records;
    out.rounds_executed = run.rounds;
    out.counts.after_distillation = run.bits.len();
    if run.status == ScheduleStatus::Exhausted {
        return Ok(abort(out, AbortReason::DistillationExhausted));
    }

    let (alice_bits, bob_bits) = run.bits.into_parts();
    if alice_bits.len() < params.css.n() {
        let why = format!(
            "{} bits left, code block needs {}",
            alice_bits.len(),
            params.css.n()
        );
        return Ok(abort(out, AbortReason::ReconciliationFailed(why)));
    }
    match params
        .css
        .reconcile_blocks(&alice_bits, &bob_bits, &mut rng)
    {
        Ok(rec) => {
            out.transcript.send(
                Party::Alice,
                MessageKind::CodeAnnouncement,
                Payload::Bits(rec.announcement),
            );
            out.counts.reconciled_blocks = alice_bits.len() / params.css.n();
            out.alice_key = rec.alice_key;
            out.bob_key = rec.bob_key;
            Ok(out)
        }
        Err(e @ Error::Undecodable { .. }) => {
            Ok(abort(out, AbortReason::ReconciliationFailed(e.to_string())))
        }
        Err(e) => Err(e),
    }
}

fn abort(mut out: SessionOutcome, reason: AbortReason) -> SessionOutcome {
    out.transcript.send(
        Party::Alice,
        MessageKind::Abort,
        Payload::Text(reason.to_string()),
    );
    out.alice_key = BitVector::zeros(0);
    out.bob_key = BitVector::zeros(0);
    out.status = SessionStatus::Aborted(reason);
    out
}

/// Everything an eavesdropper learns from the public channel.
#[derive(Debug, Clone, PartialEq)]
pub struct EveView {
    pub messages: Vec<Message>,
    /// Bits of key-correlated data made public: check values, parities,
    /// sacrificed values and code announcements.
    pub announced_bits: usize,
    /// Positions and orderings announced (not correlated with key values).
    pub announced_indices: usize,
    /// Announced bits broken down by message kind.
    pub bits_by_kind: Vec<(MessageKind, usize)>,
}

pub fn transcript_eve_view(outcome: &SessionOutcome) -> EveView {
    let mut bits_by_kind: Vec<(MessageKind, usize)> = Vec::new();
    let mut announced_bits = 0;
    let mut announced_indices = 0;
    for m in outcome.transcript.messages() {
        match &m.payload {
            Payload::Bits(b) => {
                announced_bits += b.len();
                match bits_by_kind.iter_mut().find(|(k, _)| *k == m.kind) {
                    Some((_, c)) => *c += b.len(),
                    None => bits_by_kind.push((m.kind, b.len())),
                }
            }
            Payload::Indices(ix) => announced_indices += ix.len(),
            _ => {}
        }
    }
    EveView {
        messages: outcome.transcript.messages().to_vec(),
        announced_bits,
        announced_indices,
        bits_by_kind,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::PauliChannel;

    #[test]
    fn check_selection_size_and_reproducibility() {
        let a = select_check_bits(&mut ChaCha8Rng::seed_from_u64(1), 8);
        let b = select_check_bits(&mut ChaCha8Rng::seed_from_u64(1), 8);
        assert_eq!(a.len(), 4);
        assert_eq!(a, b);
        assert!(a.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn total_two_picks_one() {
        let mut zeros = 0;
        for s in 0..2000 {
            let v = select_check_bits(&mut ChaCha8Rng::seed_from_u64(s), 2);
            assert_eq!(v.len(), 1);
            zeros += usize::from(v[0] == 0);
        }
        // 3σ for Binomial(2000, 1/2) is about 67.
        assert!((zeros as i64 - 1000).abs() < 67, "{zeros}");
    }

    #[test]
    fn qber_examples() {
        let z: BitVector = "0000".parse().unwrap();
        let alt: BitVector = "0101".parse().unwrap();
        let ones: BitVector = "1111".parse().unwrap();
        assert_eq!(estimate_check_qber(&z, &z).unwrap(), 0.0);
        assert_eq!(estimate_check_qber(&z, &ones).unwrap(), 1.0);
        assert_eq!(estimate_check_qber(&alt, &z).unwrap(), 0.5);
        assert!(estimate_check_qber(&BitVector::zeros(0), &BitVector::zeros(0)).is_err());
    }

    #[test]
    fn params_validation() {
        let mut p = SessionParams::new(4, Adversary::None, 0);
        assert!(p.validate().is_ok());
        p.r = 3;
        assert!(p.validate().is_err());
        p.r = 1;
        p.abort_threshold = 0.6;
        assert!(p.validate().is_err());
        p.abort_threshold = 0.2;
        p.n = 0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn noiseless_session_completes() {
        let out = run_session(&SessionParams::new(64, Adversary::None, 3)).unwrap();
        assert!(out.keys_match());
        assert_eq!(out.observed_qber, 0.0);
        assert_eq!(out.alice_key.len(), 64 / 7);
        assert_eq!(out.consumed_secret_bits, 128);
    }

    #[test]
    fn too_little_material_aborts_in_reconciliation() {
        let out = run_session(&SessionParams::new(3, Adversary::None, 3)).unwrap();
        assert!(matches!(
            out.status,
            SessionStatus::Aborted(AbortReason::ReconciliationFailed(_))
        ));
        assert_eq!(out.transcript.last().unwrap().kind, MessageKind::Abort);
    }

    #[test]
    fn aborted_on_high_qber() {
        let ch = PauliChannel::depolarizing_with_qber(0.4).unwrap();
        let out = run_session(&SessionParams::new(512, Adversary::Pauli(ch), 5)).unwrap();
        assert!(matches!(
            out.status,
            SessionStatus::Aborted(AbortReason::CheckQber { .. })
        ));
        assert!(out.alice_key.is_empty());
    }

    #[test]
    fn eve_view_counts_parities_twice_per_pair() {
        let mut p = SessionParams::new(256, Adversary::None, 8);
        p.schedule = Schedule::alternating().with_min_rounds(1);
        let out = run_session(&p).unwrap();
        let view = transcript_eve_view(&out);
        let parity_bits = view
            .bits_by_kind
            .iter()
            .find(|(k, _)| *k == MessageKind::PairParities)
            .unwrap()
            .1;
        let pairs = out.records[0].in_len / 2;
        assert_eq!(parity_bits, 2 * pairs);
    }
}
