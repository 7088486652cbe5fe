use crate::belldiag::maps::{b_step_map, p_step_map};
use crate::belldiag::BellDiagonal;
use crate::distill::{Step, StepPattern};
use crate::error::Result;
use crate::scalar::RealProb;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Converges,
    Diverges,
    Undecided,
}

/// When the two-way stage may stop and hand over to one-way post-processing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HandoffCriterion<T> {
    /// The state is inside the one-way region (`1 − h(bit) − h(phase) > 0`)
    /// and the last round increased that rate.
    OneWayRate,
    /// Both marginals below `bound` and both strictly decreasing over the
    /// last `sustain` rounds.
    MarginalsBelow { bound: T, sustain: usize },
}

#[derive(Debug, Clone, Copy)]
pub struct IterateOptions<T> {
    pub max_rounds: usize,
    pub criterion: HandoffCriterion<T>,
    /// Both marginals below this count as converged under any criterion.
    pub negligible: T,
    /// A marginal at or above this counts as saturated (divergent).
    pub saturation: T,
}

impl<T: RealProb> Default for IterateOptions<T> {
    fn default() -> Self {
        Self {
            max_rounds: 200,
            criterion: HandoffCriterion::OneWayRate,
            negligible: T::lit(1e-6),
            saturation: T::lit(0.5 - 1e-9),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RoundState<T> {
    pub round: usize,
    pub state: BellDiagonal<T>,
    /// Product of the B-step pass probabilities within this round.
    pub pass_prob: T,
    /// Fraction of the original pairs still alive after this round.
    pub survival: T,
}

#[derive(Debug, Clone)]
pub struct Iteration<T> {
    pub verdict: Verdict,
    /// Rounds executed before the verdict; `0` when the initial state already qualifies.
    pub rounds: usize,
    /// Round 0 is the initial state.
    pub trajectory: Vec<RoundState<T>>,
}

impl<T: RealProb> Iteration<T> {
    pub fn final_state(&self) -> &BellDiagonal<T> {
        &self
            .trajectory
            .last()
            .expect("trajectory holds the initial state")
            .state
    }
}

/// Applies one step to a state, renormalizing. Returns the pass probability
/// for B and `1` for P.
pub fn apply_step<T: RealProb>(q: &BellDiagonal<T>, step: Step) -> Result<(BellDiagonal<T>, T)> {
    Ok(match step {
        Step::B => {
            let (s, pass) = b_step_map(q)?;
            (s.renormalized(), pass)
        }
        Step::P => (p_step_map(q).renormalized(), T::one()),
    })
}

/// Runs `pattern` round after round from `q0`, checking the handoff
/// criterion after every full round.
pub fn iterate_schedule<T: RealProb>(
    q0: &BellDiagonal<T>,
    pattern: &StepPattern,
    opts: &IterateOptions<T>,
) -> Result<Iteration<T>> {
    let mut trajectory = vec![RoundState {
        round: 0,
        state: q0.clone(),
        pass_prob: T::one(),
        survival: T::one(),
    }];
    let negligible =
        |q: &BellDiagonal<T>| q.bit_error() < opts.negligible && q.phase_error() < opts.negligible;
    if negligible(q0) {
        return Ok(Iteration {
            verdict: Verdict::Converges,
            rounds: 0,
            trajectory,
        });
    }

    let mut q = q0.clone();
    let mut survival = T::one();
    for round in 1..=opts.max_rounds {
        let prev = q.clone();
        let mut pass_prob = T::one();
        for &step in pattern.steps() {
            let (next, pass) = apply_step(&q, step)?;
            q = next;
            pass_prob = pass_prob * pass;
            survival = survival
                * match step {
                    Step::B => pass / T::lit(2.0),
                    Step::P => T::one() / T::lit(3.0),
                };
        }
        trajectory.push(RoundState {
            round,
            state: q.clone(),
            pass_prob,
            survival,
        });

        let done = |verdict| Iteration {
            verdict,
            rounds: round,
            trajectory: trajectory.clone(),
        };
        if negligible(&q) || handoff(&trajectory, &opts.criterion) {
            return Ok(done(Verdict::Converges));
        }
        if q.bit_error() >= opts.saturation
            || q.phase_error() >= opts.saturation
            || q.max_abs_diff(&prev) < T::lit(1e-15)
        {
            return Ok(done(Verdict::Diverges));
        }
    }
    Ok(Iteration {
        verdict: Verdict::Undecided,
        rounds: opts.max_rounds,
        trajectory,
    })
}

fn handoff<T: RealProb>(traj: &[RoundState<T>], criterion: &HandoffCriterion<T>) -> bool {
    let cur = &traj[traj.len() - 1].state;
    match *criterion {
        HandoffCriterion::OneWayRate => {
            let prev = &traj[traj.len() - 2].state;
            let rate = cur.one_way_rate();
            rate > T::zero() && rate > prev.one_way_rate()
        }
        HandoffCriterion::MarginalsBelow { bound, sustain } => {
            if traj.len() <= sustain {
                return false;
            }
            let window = &traj[traj.len() - 1 - sustain..];
            window[1..]
                .iter()
                .all(|r| r.state.bit_error() < bound && r.state.phase_error() < bound)
                && window.windows(2).all(|w| {
                    w[1].state.bit_error() < w[0].state.bit_error()
                        && w[1].state.phase_error() < w[0].state.phase_error()
                })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_state_converges_immediately() {
        let it = iterate_schedule(
            &BellDiagonal::<f64>::perfect(),
            &StepPattern::alternating(),
            &IterateOptions::default(),
        )
        .unwrap();
        assert_eq!(it.verdict, Verdict::Converges);
        assert!(it.rounds <= 1);
    }

    #[test]
    fn alternating_fifteen_percent_converges() {
        let q = BellDiagonal::independent(0.15f64).unwrap();
        let it =
            iterate_schedule(&q, &StepPattern::alternating(), &IterateOptions::default()).unwrap();
        assert_eq!(it.verdict, Verdict::Converges);
        let f = it.final_state();
        assert!(f.one_way_rate() > 0.0);
    }

    #[test]
    fn alternating_quarter_diverges() {
        let q = BellDiagonal::independent(0.25f64).unwrap();
        let it =
            iterate_schedule(&q, &StepPattern::alternating(), &IterateOptions::default()).unwrap();
        assert_eq!(it.verdict, Verdict::Diverges);
    }

    #[test]
    fn p_only_never_hands_off_on_bit_errors() {
        let q = BellDiagonal::independent(0.02f64).unwrap();
        let it = iterate_schedule(&q, &"P".parse().unwrap(), &IterateOptions::default()).unwrap();
        assert_eq!(it.verdict, Verdict::Diverges);
    }

    #[test]
    fn marginal_criterion_on_small_errors() {
        let opts = IterateOptions {
            criterion: HandoffCriterion::MarginalsBelow {
                bound: 0.10,
                sustain: 3,
            },
            ..IterateOptions::default()
        };
        let q = BellDiagonal::independent(0.05f64).unwrap();
        let it = iterate_schedule(&q, &StepPattern::alternating(), &opts).unwrap();
        assert_eq!(it.verdict, Verdict::Converges);
    }

    #[test]
    fn round_limit_gives_undecided() {
        let opts = IterateOptions {
            max_rounds: 1,
            ..IterateOptions::default()
        };
        // One B step cannot fix a state this far out.
        let q = BellDiagonal::with_marginals(0.17f64, 0.17, 0.0).unwrap();
        let it = iterate_schedule(&q, &"B".parse().unwrap(), &opts).unwrap();
        assert_eq!(it.verdict, Verdict::Undecided);
    }

    #[test]
    fn survival_accounts_for_discards() {
        let q = BellDiagonal::independent(0.1f64).unwrap();
        let opts = IterateOptions {
            max_rounds: 1,
            ..IterateOptions::default()
        };
        let it = iterate_schedule(&q, &StepPattern::alternating(), &opts).unwrap();
        let r1 = &it.trajectory[1];
        assert!((r1.survival - 0.82 / 6.0).abs() < 1e-12);
        assert!((r1.pass_prob - 0.82).abs() < 1e-12);
    }
}
