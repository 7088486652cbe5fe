//! Bell-diagonal analysis of the two-way distillation steps: exact
//! recurrences, convergence classification, tolerable-error-rate bisection,
//! schedule search, the information bound and key-rate bookkeeping.

mod iterate;
mod keyrate;
mod maps;
mod security;
mod state;
mod threshold;

pub use iterate::{
    apply_step, iterate_schedule, HandoffCriterion, IterateOptions, Iteration, RoundState, Verdict,
};
pub use keyrate::{key_rate_accounting, standard_sifting, Baseline, KeyRateReport};
pub use maps::{b_step_bit_error, b_step_map, b_step_pass, p_step_bit_error, p_step_map};
pub use security::{eve_info_bound, EveBound};
pub use state::{BellDiagonal, Family, InitialCondition};
pub use threshold::{
    evaluate_point, find_threshold, schedule_search, PointResult, SearchReport, ThresholdOptions,
    ThresholdReport,
};
