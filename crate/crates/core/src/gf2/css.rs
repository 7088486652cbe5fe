use rand::Rng;

use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVector, Echelon, LinearCode};

/// Nested codes `C2 ⊂ C1` used for the final one-way correction; the key is the
/// coset `u + C2` of Alice's random codeword `u ∈ C1`.
#[derive(Debug, Clone)]
pub struct CssPair {
    c1: LinearCode,
    c2: LinearCode,
    c2_echelon: Echelon,
    complement: Echelon,
}

/// Result of reconciling one or more code blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reconciliation {
    pub alice_key: BitVector,
    pub bob_key: BitVector,
    /// `u ⊕ v`, concatenated over blocks.
    pub announcement: BitVector,
}

/// True iff every generator row of `c2` has zero syndrome under `c1`.
pub fn verify_nested(c1: &LinearCode, c2: &LinearCode) -> bool {
    c1.n() == c2.n()
        && c2
            .generator()
            .rows()
            .iter()
            .all(|r| c1.contains(r).unwrap_or(false))
}

impl CssPair {
    pub fn new(c1: LinearCode, c2: LinearCode) -> Result<Self> {
        if c1.n() != c2.n() {
            return Err(Error::DimensionMismatch {
                expected: c1.n(),
                got: c2.n(),
            });
        }
        if !verify_nested(&c1, &c2) {
            return Err(Error::InvalidCode("C2 is not contained in C1".into()));
        }
        if c1.k() <= c2.k() {
            return Err(Error::InvalidCode(format!(
                "key length dim C1 - dim C2 = {} - {} must be at least 1",
                c1.k(),
                c2.k()
            )));
        }
        let c2_echelon = c2.generator().echelon();
        // Reduce C1's generators modulo C2; what survives spans a complement.
        let reduced = c1
            .generator()
            .rows()
            .iter()
            .map(|r| c2_echelon.reduce(r))
            .collect();
        let complement = BitMatrix::from_rows(reduced, c1.n())?.echelon();
        debug_assert_eq!(complement.pivots.len(), c1.k() - c2.k());
        Ok(Self {
            c1,
            c2,
            c2_echelon,
            complement,
        })
    }

    /// Hamming `[7,4]` over its dual `[7,3]`: one key bit per 7-bit block, `t = 1`.
    pub fn steane() -> Self {
        Self::new(LinearCode::hamming_7_4(), LinearCode::simplex_7_3())
            .expect("Hamming/simplex pair is nested")
    }

    pub fn c1(&self) -> &LinearCode {
        &self.c1
    }

    pub fn c2(&self) -> &LinearCode {
        &self.c2
    }

    pub fn n(&self) -> usize {
        self.c1.n()
    }

    pub fn key_len(&self) -> usize {
        self.c1.k() - self.c2.k()
    }

    pub fn is_nested(&self) -> bool {
        verify_nested(&self.c1, &self.c2)
    }

    /// Label of the coset `u + C2`.
    ///
    /// `u` is first reduced against the echelon basis of `C2`, which picks the
    /// unique coset member vanishing on C2's pivot columns; the label is that
    /// representative read off at the complement basis' pivot columns.
    pub fn coset_label(&self, u: &BitVector) -> Result<BitVector> {
        if u.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: u.len(),
            });
        }
        if !self.c1.contains(u)? {
            return Err(Error::NotInCode);
        }
        Ok(self.coset_label_unchecked(u))
    }

    fn coset_label_unchecked(&self, u: &BitVector) -> BitVector {
        let rep = self.c2_echelon.reduce(u);
        self.complement.pivots.iter().map(|&p| rep.get(p)).collect()
    }

    /// Canonical coset representative of `u + C2`.
    pub fn coset_representative(&self, u: &BitVector) -> Result<BitVector> {
        if !self.c1.contains(u)? {
            return Err(Error::NotInCode);
        }
        Ok(self.c2_echelon.reduce(u))
    }

    /// Uniformly random codeword of `C1`.
    pub fn random_codeword<R: Rng + ?Sized>(&self, rng: &mut R) -> BitVector {
        let msg = BitVector::random(self.c1.k(), rng);
        self.c1.encode(&msg).expect("message has k bits")
    }

    /// One block of one-way reconciliation.
    ///
    /// Alice holds `v`, Bob holds `v ⊕ ε`. Alice picks `u ∈ C1`, announces
    /// `u ⊕ v` and keeps the coset label of `u`. Bob strips the announcement to
    /// get `u ⊕ ε`, decodes it to `w`, and keeps the coset label of `w`.
    pub fn one_way_reconcile<R: Rng + ?Sized>(
        &self,
        alice_bits: &BitVector,
        bob_bits: &BitVector,
        rng: &mut R,
    ) -> Result<Reconciliation> {
        let u = self.random_codeword(rng);
        self.reconcile_with_codeword(&u, alice_bits, bob_bits)
    }

    /// Deterministic core of [`CssPair::one_way_reconcile`] with Alice's codeword given.
    pub fn reconcile_with_codeword(
        &self,
        u: &BitVector,
        alice_bits: &BitVector,
        bob_bits: &BitVector,
    ) -> Result<Reconciliation> {
        for v in [alice_bits, bob_bits] {
            if v.len() != self.n() {
                return Err(Error::DimensionMismatch {
                    expected: self.n(),
                    got: v.len(),
                });
            }
        }
        let announcement = u.xor(alice_bits)?;
        let alice_key = self.coset_label(u)?;
        let noisy = announcement.xor(bob_bits)?;
        let w = self.c1.syndrome_decode(&noisy)?;
        let bob_key = self.coset_label_unchecked(&w);
        Ok(Reconciliation {
            alice_key,
            bob_key,
            announcement,
        })
    }

    /// Splits both strings into `n`-bit blocks (dropping the tail) and
    /// reconciles each block independently, concatenating keys and announcements.
    pub fn reconcile_blocks<R: Rng + ?Sized>(
        &self,
        alice_bits: &BitVector,
        bob_bits: &BitVector,
        rng: &mut R,
    ) -> Result<Reconciliation> {
        if alice_bits.len() != bob_bits.len() {
            return Err(Error::DimensionMismatch {
                expected: alice_bits.len(),
                got: bob_bits.len(),
            });
        }
        let n = self.n();
        let mut out = Reconciliation {
            alice_key: BitVector::zeros(0),
            bob_key: BitVector::zeros(0),
            announcement: BitVector::zeros(0),
        };
        for b in 0..alice_bits.len() / n {
            let block = self.one_way_reconcile(
                &alice_bits.slice(b * n, n),
                &bob_bits.slice(b * n, n),
                rng,
            )?;
            out.alice_key.extend_from(&block.alice_key);
            out.bob_key.extend_from(&block.bob_key);
            out.announcement.extend_from(&block.announcement);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn steane_pair_is_nested() {
        let p = CssPair::steane();
        assert!(p.is_nested());
        assert_eq!(p.key_len(), 1);
    }

    #[test]
    fn equal_codes_nested_but_rejected_as_pair() {
        let h = LinearCode::hamming_7_4();
        assert!(verify_nested(&h, &h));
        assert!(CssPair::new(h.clone(), h).is_err());
    }

    #[test]
    fn full_space_not_inside_hamming() {
        assert!(!verify_nested(
            &LinearCode::hamming_7_4(),
            &LinearCode::full_space(7)
        ));
    }

    #[test]
    fn zero_and_c2_words_have_zero_label() {
        let p = CssPair::steane();
        assert!(p.coset_label(&BitVector::zeros(7)).unwrap().is_zero());
        for w in p.c2().codewords() {
            assert!(p.coset_label(&w).unwrap().is_zero());
        }
    }

    #[test]
    fn label_rejects_non_codeword() {
        let p = CssPair::steane();
        assert_eq!(p.coset_label(&BitVector::unit(7, 0)), Err(Error::NotInCode));
    }

    #[test]
    fn noiseless_reconcile_agrees() {
        let p = CssPair::steane();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v = BitVector::random(7, &mut rng);
        let r = p.one_way_reconcile(&v, &v, &mut rng).unwrap();
        assert_eq!(r.alice_key, r.bob_key);
    }

    #[test]
    fn blocks_drop_tail() {
        let p = CssPair::steane();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let v = BitVector::random(30, &mut rng);
        let r = p.reconcile_blocks(&v, &v, &mut rng).unwrap();
        assert_eq!(r.alice_key.len(), 4);
        assert_eq!(r.announcement.len(), 28);
        assert_eq!(r.alice_key, r.bob_key);
    }
}
