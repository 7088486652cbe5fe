//! Scalar abstractions for probability arithmetic.
//!
//! The Bell-diagonal recurrences only need field operations, so they are
//! written against [`Prob`] and can be evaluated exactly over rationals.
//! Anything involving entropies, logarithms or bisection needs [`RealProb`].

use core::fmt::Debug;
use num_traits::{Float, FromPrimitive, Num, ToPrimitive};

/// A probability-valued field element: `f32`, `f64`, or an exact rational.
pub trait Prob: Clone + Debug + PartialOrd + Num {
    fn two() -> Self {
        Self::one() + Self::one()
    }

    fn three() -> Self {
        Self::two() + Self::one()
    }
}

impl<T: Clone + Debug + PartialOrd + Num> Prob for T {}

/// Floating point probabilities.
pub trait RealProb: Prob + Float + FromPrimitive + ToPrimitive + Send + Sync {
    /// Converts an `f64` literal; panics only if the target cannot hold any finite value.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("finite literal")
    }

    /// Binary entropy `h(p)` in bits, with `h(0) = h(1) = 0`.
    fn binary_entropy(self) -> Self {
        if self <= Self::zero() || self >= Self::one() {
            return Self::zero();
        }
        let q = Self::one() - self;
        -(self * self.log2()) - q * (-self).ln_1p() / Self::lit(std::f64::consts::LN_2)
    }

    /// `1 − h(p)`, accurate near `p = 1/2` where the difference is tiny.
    fn entropy_deficit(self) -> Self {
        let half = Self::lit(0.5);
        let delta = half - self;
        if delta.abs() > Self::lit(0.25) {
            return Self::one() - self.binary_entropy();
        }
        let two_d = Self::lit(2.0) * delta;
        let one = Self::one();
        ((one + two_d) * two_d.ln_1p() + (one - two_d) * (-two_d).ln_1p())
            / (Self::lit(2.0) * Self::lit(std::f64::consts::LN_2))
    }
}

impl<T: Prob + Float + FromPrimitive + ToPrimitive + Send + Sync> RealProb for T {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_endpoints_and_midpoint() {
        assert_eq!(0.0f64.binary_entropy(), 0.0);
        assert_eq!(1.0f64.binary_entropy(), 0.0);
        assert!((0.5f64.binary_entropy() - 1.0).abs() < 1e-15);
        assert!((0.5f32.binary_entropy() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn deficit_matches_direct_form_and_stays_accurate() {
        for p in [0.0, 0.1, 0.3, 0.45, 0.5, 0.6, 0.9, 1.0f64] {
            assert!(
                (p.entropy_deficit() - (1.0 - p.binary_entropy())).abs() < 1e-14,
                "{p}"
            );
        }
        // 1 - h(1/2 - d) = 2d²/ln 2 + O(d⁴)
        let d = 1e-8f64;
        let want = 2.0 * d * d / std::f64::consts::LN_2;
        assert!(((0.5 - d).entropy_deficit() - want).abs() < 1e-3 * want);
    }

    #[test]
    fn one_way_bound_near_eleven_percent() {
        // 1 - 2h(p) crosses zero just above 0.11
        assert!(1.0 - 2.0 * 0.11f64.binary_entropy() > 0.0);
        assert!(1.0 - 2.0 * 0.111f64.binary_entropy() < 0.0);
    }
}
