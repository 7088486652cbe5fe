//! Classical model of the quantum channel for a prepare-and-measure session.
//!
//! Each transmitted qubit is a `(bit, basis)` record. Both parties use the
//! same pre-shared basis sequence, so the only thing a channel can do is flip
//! Bob's outcome: `X` flips Z-basis outcomes, `Z` flips X-basis outcomes and
//! `Y` flips both.

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::gf2::BitVector;
use crate::scalar::RealProb;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    /// Whether this error flips an outcome recorded in `basis`.
    pub fn flips(self, basis: Basis) -> bool {
        match basis {
            Basis::Z => matches!(self, Pauli::X | Pauli::Y),
            Basis::X => matches!(self, Pauli::Z | Pauli::Y),
        }
    }

    /// Bit-flip component (flips Z-basis outcomes).
    pub fn has_bit_error(self) -> bool {
        self.flips(Basis::Z)
    }

    /// Phase-flip component (flips X-basis outcomes).
    pub fn has_phase_error(self) -> bool {
        self.flips(Basis::X)
    }

    pub fn from_components(bit: bool, phase: bool) -> Self {
        match (bit, phase) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    /// Index into `(I, X, Y, Z)` ordered arrays.
    pub fn index(self) -> usize {
        match self {
            Pauli::I => 0,
            Pauli::X => 1,
            Pauli::Y => 2,
            Pauli::Z => 3,
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Pauli::I => "I",
            Pauli::X => "X",
            Pauli::Y => "Y",
            Pauli::Z => "Z",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    Z,
    X,
}

impl Basis {
    /// `0 ⇒ Z`, `1 ⇒ X`.
    pub fn from_bit(b: bool) -> Self {
        if b {
            Basis::X
        } else {
            Basis::Z
        }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self::from_bit(rng.gen())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QubitRecord {
    pub bit: bool,
    pub basis: Basis,
}

/// Outcome Bob records for `q` after error `e`; the basis never changes.
pub fn apply_pauli(q: QubitRecord, e: Pauli) -> QubitRecord {
    QubitRecord {
        bit: q.bit ^ e.flips(q.basis),
        basis: q.basis,
    }
}

/// A single-qubit Pauli channel with probabilities over `(I, X, Y, Z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliChannel<T> {
    p_i: T,
    p_x: T,
    p_y: T,
    p_z: T,
}

impl<T: RealProb> PauliChannel<T> {
    pub fn new(p_i: T, p_x: T, p_y: T, p_z: T) -> Result<Self> {
        let ps = [p_i, p_x, p_y, p_z];
        if ps.iter().any(|p| !p.is_finite() || *p < T::zero()) {
            return Err(Error::InvalidDistribution(format!(
                "negative or non-finite Pauli probability in {ps:?}"
            )));
        }
        let sum = p_i + p_x + p_y + p_z;
        let tol = T::lit(1e-12).max(T::epsilon() * T::lit(8.0));
        if (sum - T::one()).abs() > tol {
            return Err(Error::InvalidDistribution(format!(
                "Pauli probabilities sum to {sum:?}"
            )));
        }
        Ok(Self { p_i, p_x, p_y, p_z })
    }

    /// Builds a channel from the three error probabilities; `p_i` is the remainder.
    pub fn from_errors(p_x: T, p_y: T, p_z: T) -> Result<Self> {
        Self::new(T::one() - p_x - p_y - p_z, p_x, p_y, p_z)
    }

    pub fn identity() -> Self {
        Self {
            p_i: T::one(),
            p_x: T::zero(),
            p_y: T::zero(),
            p_z: T::zero(),
        }
    }

    /// Standard depolarizing channel: each of X, Y, Z with probability `delta / 3`.
    pub fn depolarizing(delta: T) -> Result<Self> {
        let third = delta / T::lit(3.0);
        Self::from_errors(third, third, third)
    }

    /// Depolarizing channel parameterized by the flip rate it induces in
    /// either basis: X, Y, Z each with probability `qber / 2`.
    pub fn depolarizing_with_qber(qber: T) -> Result<Self> {
        let half = qber / T::lit(2.0);
        Self::from_errors(half, half, half)
    }

    pub fn probabilities(&self) -> [T; 4] {
        [self.p_i, self.p_x, self.p_y, self.p_z]
    }

    pub fn p_i(&self) -> T {
        self.p_i
    }

    pub fn p_x(&self) -> T {
        self.p_x
    }

    pub fn p_y(&self) -> T {
        self.p_y
    }

    pub fn p_z(&self) -> T {
        self.p_z
    }

    /// Marginal flip rate of outcomes recorded in `basis`.
    pub fn effective_qber(&self, basis: Basis) -> T {
        match basis {
            Basis::Z => self.p_x + self.p_y,
            Basis::X => self.p_z + self.p_y,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Pauli {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (p, label) in self.probabilities().iter().zip(Pauli::ALL) {
            acc += p.to_f64().unwrap_or(0.0);
            if u < acc {
                return label;
            }
        }
        // u landed in the rounding slack above the cumulative sum; fall back
        // to the last label with nonzero mass.
        Pauli::ALL
            .into_iter()
            .rev()
            .find(|l| self.probabilities()[l.index()] > T::zero())
            .unwrap_or(Pauli::I)
    }
}

pub fn sample_pauli<T: RealProb, R: Rng + ?Sized>(ch: &PauliChannel<T>, rng: &mut R) -> Pauli {
    ch.sample(rng)
}

/// Pre-shared basis string: a secret seed repeated `r` times.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisSequence {
    seed: BitVector,
    r: usize,
    expanded: BitVector,
}

impl BasisSequence {
    pub fn seed(&self) -> &BitVector {
        &self.seed
    }

    pub fn repetitions(&self) -> usize {
        self.r
    }

    pub fn expanded(&self) -> &BitVector {
        &self.expanded
    }

    pub fn len(&self) -> usize {
        self.expanded.len()
    }

    pub fn is_empty(&self) -> bool {
        self.expanded.is_empty()
    }

    pub fn basis(&self, i: usize) -> Basis {
        Basis::from_bit(self.expanded.get(i))
    }

    /// Secret bits spent on this sequence.
    pub fn consumed_secret_bits(&self) -> usize {
        self.seed.len()
    }
}

pub fn expand_basis(seed: &BitVector, r: usize, total_len: usize) -> Result<BasisSequence> {
    if r == 0 || seed.len() * r != total_len {
        return Err(Error::Repetition {
            seed: seed.len(),
            r,
            total: total_len,
        });
    }
    let mut expanded = BitVector::zeros(0);
    for _ in 0..r {
        expanded.extend_from(seed);
    }
    Ok(BasisSequence {
        seed: seed.clone(),
        r,
        expanded,
    })
}

/// What sits between Alice and Bob.
#[derive(Debug, Clone, PartialEq)]
pub enum Adversary {
    /// Noiseless link.
    None,
    /// Independent Pauli noise on every qubit.
    Pauli(PauliChannel<f64>),
    /// Eve measures each qubit in a uniformly random basis and resends her outcome.
    InterceptResend,
    /// Intercept-resend by an Eve who knows the basis sequence. Test oracle only.
    InformedInterceptResend,
}

impl Adversary {
    /// Delivers Alice's records to Bob, who measures in the record's basis.
    pub fn transmit<R: Rng + ?Sized>(&self, sent: &[QubitRecord], rng: &mut R) -> Vec<bool> {
        sent.iter().map(|&q| self.deliver(q, rng)).collect()
    }

    fn deliver<R: Rng + ?Sized>(&self, q: QubitRecord, rng: &mut R) -> bool {
        match self {
            Adversary::None => q.bit,
            Adversary::Pauli(ch) => apply_pauli(q, ch.sample(rng)).bit,
            Adversary::InterceptResend => intercept_resend(q, Basis::random(rng), rng),
            Adversary::InformedInterceptResend => intercept_resend(q, q.basis, rng),
        }
    }
}

/// Eve measures in `eve_basis` and resends; Bob measures in `q.basis`.
/// Measuring in the conjugate basis yields a uniformly random outcome.
fn intercept_resend<R: Rng + ?Sized>(q: QubitRecord, eve_basis: Basis, rng: &mut R) -> bool {
    if eve_basis == q.basis {
        q.bit
    } else {
        let _eve_outcome: bool = rng.gen();
        rng.gen()
    }
}

/// Error rate intercept-resend induces on Bob's outcomes, by enumerating
/// Alice's basis and bit, Eve's basis and outcome, and Bob's outcome.
pub fn intercept_resend_qber() -> f64 {
    let mut err = 0.0;
    for alice_basis in [Basis::Z, Basis::X] {
        for alice_bit in [false, true] {
            for eve_basis in [Basis::Z, Basis::X] {
                let p_prefix = 0.5 * 0.5 * 0.5;
                for eve_bit in [false, true] {
                    let p_eve = if eve_basis == alice_basis {
                        f64::from(u8::from(eve_bit == alice_bit))
                    } else {
                        0.5
                    };
                    for bob_bit in [false, true] {
                        // Bob measures in Alice's basis a state prepared in Eve's.
                        let p_bob = if eve_basis == alice_basis {
                            f64::from(u8::from(bob_bit == eve_bit))
                        } else {
                            0.5
                        };
                        if bob_bit != alice_bit {
                            err += p_prefix * p_eve * p_bob;
                        }
                    }
                }
            }
        }
    }
    err
}

/// Empirical intercept-resend error rate over `n` random qubits.
pub fn simulate_intercept_resend<R: Rng + ?Sized>(n: usize, rng: &mut R) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let sent: Vec<QubitRecord> = (0..n)
        .map(|_| QubitRecord {
            bit: rng.gen(),
            basis: Basis::random(rng),
        })
        .collect();
    let got = Adversary::InterceptResend.transmit(&sent, rng);
    let errors = sent.iter().zip(&got).filter(|(s, g)| s.bit != **g).count();
    errors as f64 / n as f64
}
