//! Two-way classical post-processing on the parties' actual bit strings:
//! B steps, P steps, public error estimates, and the schedule that strings
//! them together until the error rate is low enough for one-way correction.

mod schedule;

pub use schedule::{
    BitObservations, Decider, Policy, Schedule, Step, StepPattern, DEFAULT_ADAPTIVE_LEVEL,
    DEFAULT_HANDOFF_THRESHOLD, DEFAULT_MAX_RECONCILE_FAILURE,
};

use std::fmt;

use rand::seq::{index, SliceRandom};
use rand::Rng;

use crate::belldiag::{b_step_bit_error, p_step_bit_error};
use crate::error::{Error, Result};
use crate::gf2::BitVector;
use crate::session::{Message, MessageKind, Party, Payload};

/// Alice's and Bob's strings, position-aligned.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairedBits {
    alice: BitVector,
    bob: BitVector,
}

impl PairedBits {
    pub fn new(alice: BitVector, bob: BitVector) -> Result<Self> {
        if alice.len() != bob.len() {
            return Err(Error::DimensionMismatch {
                expected: alice.len(),
                got: bob.len(),
            });
        }
        Ok(Self { alice, bob })
    }

    pub fn alice(&self) -> &BitVector {
        &self.alice
    }

    pub fn bob(&self) -> &BitVector {
        &self.bob
    }

    pub fn len(&self) -> usize {
        self.alice.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alice.is_empty()
    }

    pub fn errors(&self) -> usize {
        self.alice
            .hamming_distance(&self.bob)
            .expect("lengths match")
    }

    pub fn error_rate(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.errors() as f64 / self.len() as f64
        }
    }

    pub fn into_parts(self) -> (BitVector, BitVector) {
        (self.alice, self.bob)
    }
}

/// Uniform permutation of `0..len`, as announced by Alice for pairings and groupings.
pub fn random_permutation<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<usize> {
    let mut p: Vec<usize> = (0..len).collect();
    p.shuffle(rng);
    p
}

fn check_permutation(perm: &[usize], len: usize) -> Result<()> {
    if perm.len() != len {
        return Err(Error::DimensionMismatch {
            expected: len,
            got: perm.len(),
        });
    }
    let mut seen = vec![false; len];
    for &i in perm {
        if i >= len || std::mem::replace(&mut seen[i], true) {
            return Err(Error::InvalidParameter(format!(
                "announced ordering is not a permutation of 0..{len}"
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BStepOutput {
    pub kept: PairedBits,
    pub alice_parities: BitVector,
    pub bob_parities: BitVector,
    pub pass_count: usize,
}

/// B step: pair positions `(perm[2i], perm[2i+1])`, both parties announce
/// each pair's parity, and agreeing pairs keep their first bit. An odd
/// leftover is dropped.
pub fn b_step(bits: &PairedBits, pairing: &[usize]) -> Result<BStepOutput> {
    if bits.len() < 2 {
        return Err(Error::NotEnoughBits {
            need: 2,
            have: bits.len(),
        });
    }
    check_permutation(pairing, bits.len())?;
    let mut out = BStepOutput {
        kept: PairedBits::new(BitVector::zeros(0), BitVector::zeros(0))?,
        alice_parities: BitVector::zeros(0),
        bob_parities: BitVector::zeros(0),
        pass_count: 0,
    };
    for pair in pairing.chunks_exact(2) {
        let (i, j) = (pair[0], pair[1]);
        let pa = bits.alice.get(i) ^ bits.alice.get(j);
        let pb = bits.bob.get(i) ^ bits.bob.get(j);
        out.alice_parities.push(pa);
        out.bob_parities.push(pb);
        if pa == pb {
            out.kept.alice.push(bits.alice.get(i));
            out.kept.bob.push(bits.bob.get(i));
            out.pass_count += 1;
        }
    }
    Ok(out)
}

/// P step: group positions `perm[3i..3i+3]` and replace each triple by its
/// parity on both sides. Up to two leftover positions are dropped.
pub fn p_step(bits: &PairedBits, grouping: &[usize]) -> Result<PairedBits> {
    if bits.len() < 3 {
        return Err(Error::NotEnoughBits {
            need: 3,
            have: bits.len(),
        });
    }
    check_permutation(grouping, bits.len())?;
    let parity = |v: &BitVector, t: &[usize]| t.iter().fold(false, |acc, &i| acc ^ v.get(i));
    let (alice, bob) = grouping
        .chunks_exact(3)
        .map(|t| (parity(&bits.alice, t), parity(&bits.bob, t)))
        .unzip::<_, _, BitVector, BitVector>();
    PairedBits::new(alice, bob)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub estimate: f64,
    pub remaining: PairedBits,
    /// Sorted sacrificed positions (indices into the input).
    pub positions: Vec<usize>,
    pub alice_values: BitVector,
    pub bob_values: BitVector,
}

/// Publicly compares `m` uniformly chosen positions and removes them.
pub fn refined_estimate<R: Rng + ?Sized>(
    bits: &PairedBits,
    m: usize,
    rng: &mut R,
) -> Result<Estimate> {
    if m == 0 || m > bits.len() {
        return Err(Error::NotEnoughBits {
            need: m.max(1),
            have: bits.len(),
        });
    }
    let mut positions = index::sample(rng, bits.len(), m).into_vec();
    positions.sort_unstable();
    let alice_values = bits.alice.select(&positions);
    let bob_values = bits.bob.select(&positions);
    let disagreements = alice_values.hamming_distance(&bob_values)?;
    let mut drop = vec![false; bits.len()];
    for &p in &positions {
        drop[p] = true;
    }
    let keep: Vec<usize> = (0..bits.len()).filter(|&i| !drop[i]).collect();
    Ok(Estimate {
        estimate: disagreements as f64 / m as f64,
        remaining: PairedBits::new(bits.alice.select(&keep), bits.bob.select(&keep))?,
        positions,
        alice_values,
        bob_values,
    })
}

/// Requirement the one-way stage places on the residual error rate: with
/// blocks of `block_len` bits correcting up to `correctable` errors each,
/// the predicted chance that any block fails must stay below `max_failure`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconcileTarget {
    pub block_len: usize,
    pub correctable: usize,
    pub max_failure: f64,
}

impl ReconcileTarget {
    /// Predicted probability that at least one block of a `len`-bit string at
    /// i.i.d. bit-error rate `p` carries more than `correctable` errors.
    pub fn predicted_failure(&self, p: f64, len: usize) -> f64 {
        let n = self.block_len;
        let blocks = len / n;
        if blocks == 0 {
            return 0.0;
        }
        let ok: f64 = (0..=self.correctable.min(n))
            .map(|w| binomial(n, w) * p.powi(w as i32) * (1.0 - p).powi((n - w) as i32))
            .sum();
        let block_fail = (1.0 - ok).clamp(0.0, 1.0);
        1.0 - (1.0 - block_fail).powi(blocks as i32)
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordKind {
    B,
    P,
    Estimate,
}

impl fmt::Display for RecordKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RecordKind::B => "B",
            RecordKind::P => "P",
            RecordKind::Estimate => "E",
        })
    }
}

/// One line of the round log.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub round: usize,
    pub kind: RecordKind,
    pub in_len: usize,
    pub out_len: usize,
    pub pass_count: Option<usize>,
    pub estimate: Option<f64>,
}

pub const ROUND_CSV_HEADER: &str = "round,step_kind,in_len,out_len,pass_count,estimate";

impl RoundRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.round,
            self.kind,
            self.in_len,
            self.out_len,
            self.pass_count.map(|c| c.to_string()).unwrap_or_default(),
            self.estimate.map(|e| format!("{e:.6}")).unwrap_or_default()
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScheduleStatus {
    /// Estimate fell below the handoff criteria.
    Handoff { estimate: f64 },
    /// Ran out of bits or rounds before the criteria were met.
    Exhausted,
}

#[derive(Debug, Clone)]
pub struct ScheduleRun {
    pub status: ScheduleStatus,
    pub bits: PairedBits,
    pub records: Vec<RoundRecord>,
    /// Rounds fully executed (each round is a policy pass plus an estimate).
    pub rounds: usize,
    /// Public messages, in order, without sequence numbers.
    pub messages: Vec<Message>,
}

impl ScheduleRun {
    pub fn succeeded(&self) -> bool {
        matches!(self.status, ScheduleStatus::Handoff { .. })
    }
}

/// Optional inputs to [`run_schedule`] supplied by the surrounding session.
#[derive(Debug, Clone, Copy, Default)]
pub struct ScheduleContext {
    /// Error estimate already made public (the check-bit comparison). When
    /// present it is used for the round-0 decision instead of sacrificing bits.
    pub prior_estimate: Option<f64>,
    pub reconcile: Option<ReconcileTarget>,
}

/// Executes `schedule` on `bits`.
///
/// Each round runs the policy's steps and then a public estimate. Handoff
/// requires at least `min_rounds` rounds, a tracked bit-error rate below the
/// handoff threshold, and, when a [`ReconcileTarget`] is given, a predicted
/// reconciliation failure below its bound. The tracked rate is the larger of
/// the latest estimate and the prediction carried through the i.i.d. bit
/// recurrences from earlier estimates and B-step pass rates.
pub fn run_schedule<R: Rng + ?Sized>(
    bits: PairedBits,
    schedule: &Schedule,
    ctx: &ScheduleContext,
    rng: &mut R,
) -> Result<ScheduleRun> {
    if bits.is_empty() {
        return Err(Error::NotEnoughBits { need: 1, have: 0 });
    }
    let mut run = ScheduleRun {
        status: ScheduleStatus::Exhausted,
        bits,
        records: Vec::new(),
        rounds: 0,
        messages: Vec::new(),
    };
    let mut obs = BitObservations {
        remaining: run.bits.len(),
        ..Default::default()
    };

    let ready = |b: f64, len: usize| -> bool {
        len > 0
            && b < schedule.handoff_threshold
            && ctx
                .reconcile
                .is_none_or(|t| t.predicted_failure(b, len) <= t.max_failure)
    };

    if schedule.min_rounds == 0 {
        let b = match ctx.prior_estimate {
            Some(e) => e,
            None => match estimate_into(&mut run, 0, schedule, rng)? {
                Some(e) => e,
                None => return Ok(run),
            },
        };
        obs.last_estimate = Some(b);
        obs.tracked_bit_error = Some(b);
        obs.remaining = run.bits.len();
        if ready(b, run.bits.len()) {
            run.status = ScheduleStatus::Handoff { estimate: b };
            return Ok(run);
        }
    } else if let Some(e) = ctx.prior_estimate {
        obs.last_estimate = Some(e);
        obs.tracked_bit_error = Some(e);
    }

    for round in 1..=schedule.max_rounds {
        for step in schedule.policy.next_round(&obs) {
            let in_len = run.bits.len();
            match step {
                Step::B => {
                    if in_len < 2 {
                        return Ok(run);
                    }
                    let pairing = random_permutation(in_len, rng);
                    let out = b_step(&run.bits, &pairing)?;
                    run.messages.push(Message::new(
                        Party::Alice,
                        MessageKind::PairingPermutation,
                        Payload::Indices(pairing),
                    ));
                    run.messages.push(Message::new(
                        Party::Alice,
                        MessageKind::PairParities,
                        Payload::Bits(out.alice_parities.clone()),
                    ));
                    run.messages.push(Message::new(
                        Party::Bob,
                        MessageKind::PairParities,
                        Payload::Bits(out.bob_parities.clone()),
                    ));
                    let pairs = out.alice_parities.len();
                    obs.b_outcomes.push((pairs, out.pass_count));
                    let inferred = infer_rate_from_pass(pairs, out.pass_count);
                    let carried = obs.tracked_bit_error.unwrap_or(inferred);
                    obs.tracked_bit_error = Some(b_step_bit_error(inferred.max(carried)));
                    run.records.push(RoundRecord {
                        round,
                        kind: RecordKind::B,
                        in_len,
                        out_len: out.kept.len(),
                        pass_count: Some(out.pass_count),
                        estimate: None,
                    });
                    run.bits = out.kept;
                }
                Step::P => {
                    if in_len < 3 {
                        return Ok(run);
                    }
                    let grouping = random_permutation(in_len, rng);
                    let out = p_step(&run.bits, &grouping)?;
                    run.messages.push(Message::new(
                        Party::Alice,
                        MessageKind::TripleGrouping,
                        Payload::Indices(grouping),
                    ));
                    obs.tracked_bit_error = obs.tracked_bit_error.map(p_step_bit_error);
                    run.records.push(RoundRecord {
                        round,
                        kind: RecordKind::P,
                        in_len,
                        out_len: out.len(),
                        pass_count: None,
                        estimate: None,
                    });
                    run.bits = out;
                }
            }
            obs.history.push(step);
            obs.remaining = run.bits.len();
        }

        let est = estimate_into(&mut run, round, schedule, rng)?;
        run.rounds = round;
        obs.remaining = run.bits.len();
        if let Some(e) = est {
            obs.last_estimate = Some(e);
        }
        let tracked = match (est, obs.tracked_bit_error) {
            (Some(e), Some(t)) => e.max(t),
            (Some(e), None) => e,
            (None, Some(t)) => t,
            (None, None) => return Ok(run),
        };
        obs.tracked_bit_error = Some(tracked);
        if round >= schedule.min_rounds && ready(tracked, run.bits.len()) {
            run.status = ScheduleStatus::Handoff { estimate: tracked };
            return Ok(run);
        }
        if run.bits.is_empty() {
            return Ok(run);
        }
    }
    Ok(run)
}

/// Sacrifices bits for a public estimate, logging messages and a record.
/// Returns `None` when too few bits remain to sacrifice any.
fn estimate_into<R: Rng + ?Sized>(
    run: &mut ScheduleRun,
    round: usize,
    schedule: &Schedule,
    rng: &mut R,
) -> Result<Option<f64>> {
    let in_len = run.bits.len();
    let m = schedule.sacrifice_for(in_len);
    if m == 0 {
        return Ok(None);
    }
    let est = refined_estimate(&run.bits, m, rng)?;
    run.messages.push(Message::new(
        Party::Alice,
        MessageKind::SacrificePositions,
        Payload::Indices(est.positions.clone()),
    ));
    run.messages.push(Message::new(
        Party::Alice,
        MessageKind::SacrificeValues,
        Payload::Bits(est.alice_values.clone()),
    ));
    run.messages.push(Message::new(
        Party::Bob,
        MessageKind::SacrificeValues,
        Payload::Bits(est.bob_values.clone()),
    ));
    run.messages.push(Message::new(
        Party::Alice,
        MessageKind::ErrorEstimate,
        Payload::Rate(est.estimate),
    ));
    run.records.push(RoundRecord {
        round,
        kind: RecordKind::Estimate,
        in_len,
        out_len: est.remaining.len(),
        pass_count: None,
        estimate: Some(est.estimate),
    });
    run.bits = est.remaining;
    Ok(Some(est.estimate))
}

/// Input bit-error rate implied by a B-step pass fraction `f = p² + (1−p)²`.
pub fn infer_rate_from_pass(pairs: usize, passed: usize) -> f64 {
    if pairs == 0 {
        return 0.0;
    }
    let f = passed as f64 / pairs as f64;
    (1.0 - (2.0 * f - 1.0).max(0.0).sqrt()) / 2.0
}
