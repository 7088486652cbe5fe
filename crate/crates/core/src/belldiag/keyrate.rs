use std::fmt;

use rand::Rng;

use crate::channel::Basis;
use crate::session::SessionOutcome;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Baseline {
    /// Bases are pre-shared; no position is lost to sifting.
    NoPab,
    /// Bases chosen independently and announced afterwards; on average half
    /// of the positions survive sifting and no pre-shared secret is spent.
    StandardBb84,
}

impl fmt::Display for Baseline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Baseline::NoPab => "no_pab",
            Baseline::StandardBb84 => "standard_bb84",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KeyRateReport {
    pub baseline: Baseline,
    pub transmitted: usize,
    /// Fraction of transmitted positions that survive sifting.
    pub sifted_fraction: f64,
    pub usable_positions: f64,
    pub check_cost: f64,
    /// Fraction of post-check key material that leaves distillation.
    pub distill_survival: f64,
    pub final_key_bits: f64,
    pub consumed_secret_bits: f64,
    pub net_secret_bits: f64,
}

/// Rate bookkeeping for a session, either as run or rescaled to what the
/// same pipeline yields after standard sifting.
pub fn key_rate_accounting(outcome: &SessionOutcome, baseline: Baseline) -> KeyRateReport {
    let c = &outcome.counts;
    let sifted_fraction = match baseline {
        Baseline::NoPab => c.usable as f64 / c.transmitted.max(1) as f64,
        Baseline::StandardBb84 => 0.5,
    };
    let scale = match baseline {
        Baseline::NoPab => 1.0,
        Baseline::StandardBb84 => 0.5,
    };
    let distill_survival = if c.into_distillation == 0 {
        0.0
    } else {
        c.after_distillation as f64 / c.into_distillation as f64
    };
    let final_key_bits = scale * outcome.alice_key.len() as f64;
    let consumed = match baseline {
        Baseline::NoPab => outcome.consumed_secret_bits as f64,
        Baseline::StandardBb84 => 0.0,
    };
    KeyRateReport {
        baseline,
        transmitted: c.transmitted,
        sifted_fraction,
        usable_positions: sifted_fraction * c.transmitted as f64,
        check_cost: scale * c.check as f64,
        distill_survival,
        final_key_bits,
        consumed_secret_bits: consumed,
        net_secret_bits: final_key_bits - consumed,
    }
}

/// Standard BB84 sifting: counts positions where independently chosen bases agree.
pub fn standard_sifting<R: Rng + ?Sized>(total: usize, rng: &mut R) -> usize {
    (0..total)
        .filter(|_| Basis::random(rng) == Basis::random(rng))
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn standard_sifting_keeps_about_half() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let n = 100_000;
        let kept = standard_sifting(n, &mut rng) as f64 / n as f64;
        // 3σ = 3 * sqrt(0.25 / n)
        assert!((kept - 0.5).abs() < 0.00475, "{kept}");
    }
}
