//! Tolerable-error-rate bisection and schedule search over the recurrences.

use rayon::prelude::*;

use crate::belldiag::iterate::{iterate_schedule, IterateOptions, Verdict};
use crate::belldiag::{Family, InitialCondition};
use crate::distill::StepPattern;
use crate::error::{Error, Result};
use crate::scalar::RealProb;

#[derive(Debug, Clone, Copy)]
pub struct ThresholdOptions<T> {
    /// Bisection stops once the bracket is narrower than this.
    pub tol: T,
    /// `q_y` spacing for the worst-case family.
    pub grid_step: T,
    /// Spacing of the monotonicity scan over `p ∈ [0, 0.5]`; `None` skips the scan.
    pub scan_step: Option<T>,
    pub iterate: IterateOptions<T>,
}

impl<T: RealProb> Default for ThresholdOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-4),
            grid_step: T::lit(1e-3),
            scan_step: Some(T::lit(0.005)),
            iterate: IterateOptions::default(),
        }
    }
}

/// Outcome at a single error rate.
#[derive(Debug, Clone, PartialEq)]
pub struct PointResult<T> {
    pub p: T,
    pub converges: bool,
    /// For the worst-case family, the first `q_y` that failed.
    pub failing_q_y: Option<T>,
    /// Most rounds any state needed.
    pub rounds: usize,
    /// Bit and phase marginals at the end of the run that decided the point
    /// (the failing state, or the slowest converging one).
    pub final_bit: T,
    pub final_phase: T,
    pub verdict: Verdict,
}

#[derive(Debug, Clone)]
pub struct ThresholdReport<T> {
    pub pattern: StepPattern,
    pub family: Family,
    /// `sup { p : converges }` to within `tol`; `None` when the scan found a
    /// non-monotone convergence region.
    pub threshold: Option<T>,
    pub monotone: bool,
    pub scan: Vec<PointResult<T>>,
    pub bisection: Vec<PointResult<T>>,
}

/// Runs every state of the family at rate `p` and reports whether all converge.
pub fn evaluate_point<T: RealProb>(
    pattern: &StepPattern,
    family: Family,
    p: T,
    opts: &ThresholdOptions<T>,
) -> Result<PointResult<T>> {
    let states = InitialCondition::for_family(family, p).states(opts.grid_step)?;
    let mut worst = PointResult {
        p,
        converges: true,
        failing_q_y: None,
        rounds: 0,
        final_bit: T::zero(),
        final_phase: T::zero(),
        verdict: Verdict::Converges,
    };
    for q in &states {
        let it = iterate_schedule(q, pattern, &opts.iterate)?;
        let f = it.final_state();
        if it.verdict != Verdict::Converges {
            return Ok(PointResult {
                p,
                converges: false,
                failing_q_y: (family == Family::WorstCaseGivenMarginals).then(|| *q.q_y()),
                rounds: it.rounds,
                final_bit: f.bit_error(),
                final_phase: f.phase_error(),
                verdict: it.verdict,
            });
        }
        if it.rounds >= worst.rounds {
            worst.rounds = it.rounds;
            worst.final_bit = f.bit_error();
            worst.final_phase = f.phase_error();
        }
    }
    Ok(worst)
}

/// Largest initial error rate for which `pattern` drives every state of
/// `family` into the one-way region.
///
/// A coarse scan over `[0, 0.5]` checks that the convergent set is an
/// interval starting at zero; bisection then refines its upper end.
pub fn find_threshold<T: RealProb>(
    pattern: &StepPattern,
    family: Family,
    opts: &ThresholdOptions<T>,
) -> Result<ThresholdReport<T>> {
    let half = T::lit(0.5);
    let mut report = ThresholdReport {
        pattern: pattern.clone(),
        family,
        threshold: None,
        monotone: true,
        scan: Vec::new(),
        bisection: Vec::new(),
    };

    let (mut lo, mut hi) = (T::zero(), half);
    if let Some(step) = opts.scan_step {
        if step <= T::zero() {
            return Err(Error::InvalidParameter("scan step must be positive".into()));
        }
        let n = (half / step).round().to_usize().unwrap_or(0);
        let ps: Vec<T> = (0..=n)
            .map(|i| (T::from_usize(i).expect("fits") * step).min(half))
            .collect();
        report.scan = ps
            .par_iter()
            .map(|&p| evaluate_point(pattern, family, p, opts))
            .collect::<Result<Vec<_>>>()?;
        let first_fail = report.scan.iter().position(|r| !r.converges);
        if let Some(ff) = first_fail {
            if report.scan[ff..].iter().any(|r| r.converges) {
                report.monotone = false;
                return Ok(report);
            }
            if ff == 0 {
                report.threshold = Some(T::zero());
                return Ok(report);
            }
            lo = report.scan[ff - 1].p;
            hi = report.scan[ff].p;
        } else {
            report.threshold = Some(half);
            return Ok(report);
        }
    } else {
        let at_zero = evaluate_point(pattern, family, T::zero(), opts)?;
        let converges = at_zero.converges;
        report.bisection.push(at_zero);
        if !converges {
            report.threshold = Some(T::zero());
            return Ok(report);
        }
    }

    while hi - lo > opts.tol {
        let mid = (lo + hi) / T::lit(2.0);
        let r = evaluate_point(pattern, family, mid, opts)?;
        if r.converges {
            lo = mid;
        } else {
            hi = mid;
        }
        report.bisection.push(r);
    }
    report.threshold = Some(lo);
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct SearchReport<T> {
    pub best: StepPattern,
    pub threshold: T,
    /// Threshold of every pattern that was bisected, best first. Bisection
    /// alone assumes monotonicity; see `non_monotone`.
    pub ranked: Vec<(StepPattern, T)>,
    /// Higher-ranked patterns passed over because the full scan found their
    /// convergent set is not an interval.
    pub non_monotone: Vec<StepPattern>,
    pub evaluated: usize,
}

/// Exhaustive search over patterns of length `1..=max_len`.
///
/// Candidates that fail just above the incumbent threshold are pruned
/// without bisection. `ranked` lists the surviving candidates. The winner is
/// the best-ranked pattern whose scan confirms a monotone convergence region.
pub fn schedule_search<T: RealProb>(
    max_len: usize,
    family: Family,
    opts: &ThresholdOptions<T>,
) -> Result<SearchReport<T>> {
    if max_len == 0 || max_len > 20 {
        return Err(Error::InvalidParameter(format!(
            "max_len {max_len} outside 1..=20"
        )));
    }
    let bisect_only = ThresholdOptions {
        scan_step: None,
        ..*opts
    };
    let mut best: Option<(StepPattern, T)> = None;
    let mut ranked = Vec::new();
    let mut evaluated = 0;
    for len in 1..=max_len {
        let candidates = StepPattern::all_of_len(len);
        evaluated += candidates.len();
        let incumbent = best.as_ref().map(|b| b.1);
        let results = candidates
            .par_iter()
            .map(|pat| -> Result<Option<(StepPattern, T)>> {
                if let Some(b) = incumbent {
                    if !evaluate_point(pat, family, b + opts.tol, opts)?.converges {
                        return Ok(None);
                    }
                }
                let rep = find_threshold(pat, family, &bisect_only)?;
                Ok(rep.threshold.map(|t| (pat.clone(), t)))
            })
            .collect::<Result<Vec<_>>>()?;
        for (pat, t) in results.into_iter().flatten() {
            if best.as_ref().is_none_or(|b| t > b.1) {
                best = Some((pat.clone(), t));
            }
            // Pruning compares against the bisected value; the winner is
            // confirmed with a full scan afterwards.
            ranked.push((pat, t));
        }
    }
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("thresholds are finite"));
    let mut non_monotone = Vec::new();
    for (pat, _) in &ranked {
        let full = find_threshold(pat, family, opts)?;
        match full.threshold {
            Some(threshold) if full.monotone => {
                return Ok(SearchReport {
                    best: pat.clone(),
                    threshold,
                    ranked,
                    non_monotone,
                    evaluated,
                })
            }
            _ => non_monotone.push(pat.clone()),
        }
    }
    Err(Error::Degenerate(
        "no searched pattern has a monotone convergence region".into(),
    ))
}
