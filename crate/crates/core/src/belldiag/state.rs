use std::fmt;

use crate::channel::{Pauli, PauliChannel};
use crate::error::{Error, Result};
use crate::scalar::{Prob, RealProb};

/// Probability vector over the Pauli error `(I, X, Y, Z)` carried by one
/// Bell-diagonal pair.
///
/// Bit errors are `X` and `Y`, phase errors are `Z` and `Y`.
#[derive(Clone, PartialEq)]
pub struct BellDiagonal<T> {
    q: [T; 4],
}

impl<T: Prob> BellDiagonal<T> {
    /// Validates non-negativity and normalization to within `1e-12`, or a
    /// few ulps for scalars too coarse for that.
    pub fn new(q_i: T, q_x: T, q_y: T, q_z: T) -> Result<Self> {
        let s = Self::from_array_unchecked([q_i, q_x, q_y, q_z]);
        s.validate()?;
        Ok(s)
    }

    pub fn from_array(q: [T; 4]) -> Result<Self> {
        let [i, x, y, z] = q;
        Self::new(i, x, y, z)
    }

    pub(crate) fn from_array_unchecked(q: [T; 4]) -> Self {
        Self { q }
    }

    pub fn perfect() -> Self {
        Self {
            q: [T::one(), T::zero(), T::zero(), T::zero()],
        }
    }

    /// `((1−p)², p(1−p), p², p(1−p))`: bit and phase errors independent, each at rate `p`.
    pub fn independent(p: T) -> Result<Self> {
        let q = T::one() - p.clone();
        Self::new(
            q.clone() * q.clone(),
            p.clone() * q.clone(),
            p.clone() * p.clone(),
            p * q,
        )
    }

    /// Depolarized pair with bit-error marginal `p`: `q_x = q_y = q_z = p/2`.
    pub fn depolarizing(p: T) -> Result<Self> {
        let half = p.clone() / T::two();
        Self::new(
            T::one() - T::three() * half.clone(),
            half.clone(),
            half.clone(),
            half,
        )
    }

    /// The distribution with the given bit and phase marginals and `Y` mass `q_y`;
    /// requires `0 ≤ q_y ≤ min(p_bit, p_phase)`.
    pub fn with_marginals(p_bit: T, p_phase: T, q_y: T) -> Result<Self> {
        if q_y < T::zero() || q_y > p_bit || q_y > p_phase {
            return Err(Error::InvalidDistribution(format!(
                "q_y = {q_y:?} outside [0, min({p_bit:?}, {p_phase:?})]"
            )));
        }
        let q_x = p_bit.clone() - q_y.clone();
        let q_z = p_phase.clone() - q_y.clone();
        Self::new(T::one() - p_bit - q_z.clone(), q_x, q_y, q_z)
    }

    pub fn q_i(&self) -> &T {
        &self.q[0]
    }

    pub fn q_x(&self) -> &T {
        &self.q[1]
    }

    pub fn q_y(&self) -> &T {
        &self.q[2]
    }

    pub fn q_z(&self) -> &T {
        &self.q[3]
    }

    pub fn get(&self, e: Pauli) -> &T {
        &self.q[e.index()]
    }

    pub fn as_array(&self) -> &[T; 4] {
        &self.q
    }

    pub fn into_array(self) -> [T; 4] {
        self.q
    }

    pub fn bit_error(&self) -> T {
        self.q[1].clone() + self.q[2].clone()
    }

    pub fn phase_error(&self) -> T {
        self.q[2].clone() + self.q[3].clone()
    }

    pub fn total(&self) -> T {
        self.q.iter().cloned().fold(T::zero(), |a, b| a + b)
    }

    fn validate(&self) -> Result<()> {
        if self.q.iter().any(|v| *v < T::zero()) {
            return Err(Error::InvalidDistribution(format!(
                "negative entry in {:?}",
                self.q
            )));
        }
        let tol = tolerance::<T>();
        let sum = self.total();
        if sum > T::one() + tol.clone() || sum < T::one() - tol {
            return Err(Error::InvalidDistribution(format!(
                "entries sum to {sum:?}"
            )));
        }
        Ok(())
    }
}

impl<T: RealProb> BellDiagonal<T> {
    /// Clamps tiny negatives from rounding and rescales to sum exactly to one.
    pub fn renormalized(self) -> Self {
        let q = self.q.map(|v| v.max(T::zero()));
        let s = q.iter().fold(T::zero(), |a, &b| a + b);
        Self {
            q: q.map(|v| v / s),
        }
    }

    /// Secret-key yield of one-way CSS post-processing on this state,
    /// `1 − h(bit) − h(phase)`; positive means the one-way step can finish.
    pub fn one_way_rate(&self) -> T {
        let (b, p) = (self.bit_error(), self.phase_error());
        // Whichever marginal is nearer 1/2 carries the deficit.
        let (near, far) = if (b - T::lit(0.5)).abs() < (p - T::lit(0.5)).abs() {
            (b, p)
        } else {
            (p, b)
        };
        near.entropy_deficit() - far.binary_entropy()
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.q
            .iter()
            .zip(&other.q)
            .fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()))
    }

    /// The Bell-diagonal state a Pauli channel leaves on one half of a perfect pair.
    pub fn from_channel(ch: &PauliChannel<T>) -> Self {
        Self {
            q: ch.probabilities(),
        }
    }
}

fn tolerance<T: Prob>() -> T {
    // 1e-12 expressed in field operations, so rationals get an exact bound too.
    let ten = (0..10).fold(T::zero(), |a, _| a + T::one());
    let mut t = T::one();
    for _ in 0..12 {
        t = t / ten.clone();
    }
    // Coarser types (f32) cannot resolve 1e-12; allow a few ulps of one instead.
    let mut eps = T::one();
    for _ in 0..40 {
        let half = eps.clone() / T::two();
        if T::one() + half.clone() == T::one() {
            let ulps = eps * T::two() * T::two() * T::two();
            return if ulps > t { ulps } else { t };
        }
        eps = half;
    }
    t
}

impl<T: fmt::Debug> fmt::Debug for BellDiagonal<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [i, x, y, z] = &self.q;
        write!(f, "BellDiagonal(I={i:?}, X={x:?}, Y={y:?}, Z={z:?})")
    }
}

/// One-parameter families of initial states, swept by threshold searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// [`BellDiagonal::independent`].
    IndependentBitPhase,
    /// [`BellDiagonal::depolarizing`].
    Depolarizing,
    /// Equal bit and phase marginals `p`, every `q_y ∈ [0, p]` must succeed.
    WorstCaseGivenMarginals,
}

/// A concrete initial condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialCondition<T> {
    IndependentBitPhase(T),
    Depolarizing(T),
    WorstCaseGivenMarginals { p_bit: T, p_phase: T },
}

impl<T: RealProb> InitialCondition<T> {
    pub fn for_family(family: Family, p: T) -> Self {
        match family {
            Family::IndependentBitPhase => Self::IndependentBitPhase(p),
            Family::Depolarizing => Self::Depolarizing(p),
            Family::WorstCaseGivenMarginals => Self::WorstCaseGivenMarginals {
                p_bit: p,
                p_phase: p,
            },
        }
    }

    /// Every state the condition stands for. The worst-case family is
    /// discretized in `q_y` with spacing `grid_step`, always including both
    /// endpoints of `[0, min(p_bit, p_phase)]`.
    pub fn states(&self, grid_step: T) -> Result<Vec<BellDiagonal<T>>> {
        match *self {
            Self::IndependentBitPhase(p) => Ok(vec![BellDiagonal::independent(p)?]),
            Self::Depolarizing(p) => Ok(vec![BellDiagonal::depolarizing(p)?]),
            Self::WorstCaseGivenMarginals { p_bit, p_phase } => {
                let hi = p_bit.min(p_phase);
                if grid_step <= T::zero() {
                    return Err(Error::InvalidParameter("grid step must be positive".into()));
                }
                let steps = (hi / grid_step).ceil().to_usize().unwrap_or(0);
                (0..=steps)
                    .map(|k| {
                        let y = (T::from_usize(k).expect("index fits") * grid_step).min(hi);
                        BellDiagonal::with_marginals(p_bit, p_phase, y)
                    })
                    .collect()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    #[test]
    fn independent_family_layout() {
        let s = BellDiagonal::independent(0.1f64).unwrap();
        let [i, x, y, z] = *s.as_array();
        assert!((i - 0.81).abs() < 1e-15);
        assert!((x - 0.09).abs() < 1e-15);
        assert!((y - 0.01).abs() < 1e-15);
        assert!((z - 0.09).abs() < 1e-15);
        assert!((s.bit_error() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn depolarizing_bit_marginal_is_p() {
        let s = BellDiagonal::depolarizing(Ratio::new(1i64, 5)).unwrap();
        assert_eq!(s.bit_error(), Ratio::new(1, 5));
        assert_eq!(s.phase_error(), Ratio::new(1, 5));
        assert_eq!(*s.q_i(), Ratio::new(7, 10));
    }

    #[test]
    fn marginals_constructor_bounds() {
        assert!(BellDiagonal::with_marginals(0.1, 0.2, 0.15).is_err());
        let s = BellDiagonal::with_marginals(0.1, 0.2, 0.05).unwrap();
        assert!((s.bit_error() - 0.1f64).abs() < 1e-15);
        assert!((s.phase_error() - 0.2f64).abs() < 1e-15);
    }

    #[test]
    fn rejects_invalid() {
        assert!(BellDiagonal::new(0.5, 0.5, 0.1, 0.0).is_err());
        assert!(BellDiagonal::new(1.2, -0.2, 0.0, 0.0).is_err());
        assert!(BellDiagonal::new(
            Ratio::new(1i64, 2),
            Ratio::new(1, 2),
            Ratio::new(1, 1_000_000),
            Ratio::new(0, 1)
        )
        .is_err());
    }

    #[test]
    fn worst_case_grid_includes_endpoints() {
        let c = InitialCondition::for_family(Family::WorstCaseGivenMarginals, 0.0125f64);
        let states = c.states(0.001).unwrap();
        assert_eq!(states.len(), 14);
        assert_eq!(*states[0].q_y(), 0.0);
        assert!((states[13].q_y() - 0.0125).abs() < 1e-15);
    }

    #[test]
    fn one_way_rate_matches_eleven_percent_bound() {
        let inside = BellDiagonal::with_marginals(0.109, 0.109, 0.0).unwrap();
        let outside = BellDiagonal::with_marginals(0.111, 0.111, 0.0).unwrap();
        assert!(inside.one_way_rate() > 0.0);
        assert!(outside.one_way_rate() < 0.0);
    }
}
