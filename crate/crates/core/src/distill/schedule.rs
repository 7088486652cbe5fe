use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};

/// One distillation step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Step {
    /// Pairwise parity comparison, discarding disagreeing pairs.
    B,
    /// Triple parity, the classical shadow of the 3-qubit phase code.
    P,
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Step::B => "B",
            Step::P => "P",
        })
    }
}

/// A nonempty sequence of steps run as one round and repeated until handoff.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StepPattern(Vec<Step>);

impl StepPattern {
    pub fn new(steps: Vec<Step>) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::InvalidParameter("empty step pattern".into()));
        }
        Ok(Self(steps))
    }

    pub fn alternating() -> Self {
        Self(vec![Step::B, Step::P])
    }

    pub fn steps(&self) -> &[Step] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Every pattern of exactly `len` steps, `B` before `P` in lexicographic order.
    pub fn all_of_len(len: usize) -> Vec<Self> {
        (0..1u32 << len)
            .map(|m| {
                Self(
                    (0..len)
                        .map(|i| {
                            if (m >> (len - 1 - i)) & 1 == 0 {
                                Step::B
                            } else {
                                Step::P
                            }
                        })
                        .collect(),
                )
            })
            .collect()
    }
}

impl fmt::Display for StepPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl FromStr for StepPattern {
    type Err = Error;

    /// Accepts `alternating` or a string over `{B, P}` such as `BBPBP`.
    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("alternating") {
            return Ok(Self::alternating());
        }
        let steps = s
            .chars()
            .map(|c| match c.to_ascii_uppercase() {
                'B' => Ok(Step::B),
                'P' => Ok(Step::P),
                other => Err(Error::InvalidParameter(format!(
                    "unknown step {other:?} in pattern {s:?}"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(steps)
    }
}

/// What an adaptive policy is allowed to see: bit-error evidence only.
///
/// There is deliberately no phase information here; choosing the next
/// measurement may depend on bit-flip syndromes but never on phase outcomes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BitObservations {
    /// Steps executed so far in this run.
    pub history: Vec<Step>,
    /// `(pairs compared, pairs passed)` for each B step so far.
    pub b_outcomes: Vec<(usize, usize)>,
    /// Latest bit-error estimate (sacrificed bits, or the check bits before any round).
    pub last_estimate: Option<f64>,
    /// Bit-error rate predicted for the current string from the estimates and
    /// B-step pass rates seen so far.
    pub tracked_bit_error: Option<f64>,
    /// Current string length.
    pub remaining: usize,
}

/// Decision function for adaptive schedules.
pub type Decider = Arc<dyn Fn(&BitObservations) -> Step + Send + Sync>;

#[derive(Clone)]
pub enum Policy {
    /// `BP` each round.
    Alternating,
    /// The given pattern each round.
    Fixed(StepPattern),
    /// One step per round, chosen from bit-error observations.
    Adaptive(Decider),
}

impl Policy {
    /// Adaptive rule: run a B step while the tracked bit error is at least
    /// `level`, otherwise a P step.
    pub fn adaptive_bit_level(level: f64) -> Self {
        Policy::Adaptive(Arc::new(move |obs: &BitObservations| {
            match obs.tracked_bit_error.or(obs.last_estimate) {
                Some(b) if b < level => Step::P,
                _ => Step::B,
            }
        }))
    }

    /// Steps for the next round.
    pub fn next_round(&self, obs: &BitObservations) -> Vec<Step> {
        match self {
            Policy::Alternating => StepPattern::alternating().0,
            Policy::Fixed(p) => p.0.clone(),
            Policy::Adaptive(f) => vec![f(obs)],
        }
    }

    /// The repeated pattern for non-adaptive policies.
    pub fn pattern(&self) -> Option<StepPattern> {
        match self {
            Policy::Alternating => Some(StepPattern::alternating()),
            Policy::Fixed(p) => Some(p.clone()),
            Policy::Adaptive(_) => None,
        }
    }
}

impl fmt::Debug for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Policy::Alternating => f.write_str("Alternating"),
            Policy::Fixed(p) => write!(f, "Fixed({p})"),
            Policy::Adaptive(_) => f.write_str("Adaptive(..)"),
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Policy::Alternating => f.write_str("alternating"),
            Policy::Fixed(p) => write!(f, "fixed:{p}"),
            Policy::Adaptive(_) => f.write_str("adaptive"),
        }
    }
}

impl FromStr for Policy {
    type Err = Error;

    /// `alternating`, `adaptive`, or `fixed:BPBP…`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alternating" => Ok(Policy::Alternating),
            "adaptive" => Ok(Policy::adaptive_bit_level(DEFAULT_ADAPTIVE_LEVEL)),
            _ => match s.strip_prefix("fixed:") {
                Some(p) => Ok(Policy::Fixed(p.parse()?)),
                None => Err(Error::InvalidParameter(format!(
                    "unknown schedule {s:?}; expected alternating, adaptive or fixed:<BP...>"
                ))),
            },
        }
    }
}

pub const DEFAULT_ADAPTIVE_LEVEL: f64 = 0.01;
pub const DEFAULT_HANDOFF_THRESHOLD: f64 = 0.10;
pub const DEFAULT_MAX_RECONCILE_FAILURE: f64 = 1e-3;

/// A distillation schedule for the protocol engine.
#[derive(Debug, Clone)]
pub struct Schedule {
    pub policy: Policy,
    /// Bits sacrificed per estimate; `None` means `min(1024, 25%)` of what remains.
    pub sacrifice_m: Option<usize>,
    /// Bit-error rate below which the string is handed to one-way reconciliation.
    pub handoff_threshold: f64,
    /// Rounds to run before handoff is considered, even if the incoming
    /// estimate is already low.
    pub min_rounds: usize,
    /// Round limit, as a guard against policies that never hand off.
    pub max_rounds: usize,
}

impl Schedule {
    pub fn new(policy: Policy) -> Self {
        Self {
            policy,
            sacrifice_m: None,
            handoff_threshold: DEFAULT_HANDOFF_THRESHOLD,
            min_rounds: 0,
            max_rounds: 64,
        }
    }

    pub fn alternating() -> Self {
        Self::new(Policy::Alternating)
    }

    pub fn with_handoff(mut self, threshold: f64) -> Result<Self> {
        if !(0.0..0.11).contains(&threshold) {
            return Err(Error::InvalidParameter(format!(
                "handoff threshold {threshold} must lie in [0, 0.11)"
            )));
        }
        self.handoff_threshold = threshold;
        Ok(self)
    }

    pub fn with_sacrifice(mut self, m: usize) -> Self {
        self.sacrifice_m = Some(m);
        self
    }

    pub fn with_min_rounds(mut self, rounds: usize) -> Self {
        self.min_rounds = rounds;
        self
    }

    /// Number of bits to sacrifice from a string of length `remaining`.
    pub fn sacrifice_for(&self, remaining: usize) -> usize {
        match self.sacrifice_m {
            Some(m) => m.min(remaining),
            None => (remaining / 4).min(1024),
        }
    }
}
