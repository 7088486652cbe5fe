//! Brute-force oracles shared by the integration and acceptance targets.
//! They enumerate error patterns directly and share no code with the
//! closed-form maps under test.

#![allow(dead_code)]

use rand::Rng;
use twoway_qkd::gf2::BitVector;

/// Index order I, X, Y, Z; `(bit flip, phase flip)` for each label.
const COMPONENTS: [(bool, bool); 4] = [(false, false), (true, false), (true, true), (false, true)];

fn label(bit: bool, phase: bool) -> usize {
    COMPONENTS.iter().position(|&c| c == (bit, phase)).unwrap()
}

/// Enumerates all 16 ordered error pairs. A pair survives when the two bit
/// flips agree; the kept pair carries the first bit flip and the XOR of
/// the phase flips. Returns the normalized output and the pass probability.
pub fn b_oracle(q: [f64; 4]) -> ([f64; 4], f64) {
    let mut out = [0.0; 4];
    for a in 0..4 {
        for b in 0..4 {
            let (ba, pa) = COMPONENTS[a];
            let (bb, pb) = COMPONENTS[b];
            if ba == bb {
                out[label(ba, pa ^ pb)] += q[a] * q[b];
            }
        }
    }
    let pass: f64 = out.iter().sum();
    (out.map(|x| x / pass), pass)
}

/// Enumerates all 64 error triples. The output carries the XOR of the bit
/// flips and the majority of the phase flips.
pub fn p_oracle(q: [f64; 4]) -> [f64; 4] {
    let mut out = [0.0; 4];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                let t = [COMPONENTS[a], COMPONENTS[b], COMPONENTS[c]];
                let bit = t.iter().fold(false, |x, e| x ^ e.0);
                let phase = t.iter().filter(|e| e.1).count() >= 2;
                out[label(bit, phase)] += q[a] * q[b] * q[c];
            }
        }
    }
    out
}

/// Uniform point on the probability simplex.
pub fn random_simplex<R: Rng>(rng: &mut R) -> [f64; 4] {
    let e: [f64; 4] = std::array::from_fn(|_| -(1.0 - rng.gen::<f64>()).ln());
    let s: f64 = e.iter().sum();
    e.map(|x| x / s)
}

/// Alice's uniform string and Bob's copy with i.i.d. flips at rate `p`.
pub fn noisy_pair<R: Rng>(len: usize, p: f64, rng: &mut R) -> (BitVector, BitVector) {
    let alice = BitVector::random(len, rng);
    let bob = (0..len).map(|i| alice.get(i) ^ rng.gen_bool(p)).collect();
    (alice, bob)
}

/// Binomial standard deviation of an empirical frequency.
pub fn sigma(p: f64, trials: usize) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

/// All 2^n vectors of length `n`.
pub fn all_words(n: usize) -> Vec<BitVector> {
    (0..1u32 << n)
        .map(|x| (0..n).map(|i| (x >> (n - 1 - i)) & 1 == 1).collect())
        .collect()
}
