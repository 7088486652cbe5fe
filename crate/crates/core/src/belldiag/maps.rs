//! Exact recurrences for the B and P steps on Bell-diagonal pairs.

use crate::belldiag::BellDiagonal;
use crate::error::{Error, Result};
use crate::scalar::Prob;

/// B step on two i.i.d. pairs: compare bit parities, keep the first pair when
/// they agree.
///
/// A pass means both pairs carry the same bit error. The survivor keeps that
/// bit error and picks up the XOR of both phase errors. Returns the
/// post-selected state and the pass probability `(q_i+q_z)² + (q_x+q_y)²`.
pub fn b_step_map<T: Prob>(q: &BellDiagonal<T>) -> Result<(BellDiagonal<T>, T)> {
    let [i, x, y, z] = q.as_array().clone();
    let no_bit = i.clone() + z.clone();
    let bit = x.clone() + y.clone();
    let pass = no_bit.clone() * no_bit + bit.clone() * bit;
    if pass == T::zero() {
        return Err(Error::Degenerate("B step pass probability is zero".into()));
    }
    let two = T::two();
    let out = [
        i.clone() * i.clone() + z.clone() * z.clone(),
        x.clone() * x.clone() + y.clone() * y.clone(),
        two.clone() * x * y,
        two * i * z,
    ]
    .map(|v| v / pass.clone());
    Ok((BellDiagonal::from_array_unchecked(out), pass))
}

/// P step on three i.i.d. pairs: the output bit error is the parity of the
/// three bit errors, the output phase error is the majority of the three
/// phase errors.
///
/// Each phase class is an (even, odd) bit-parity pair, `(q_i, q_x)` without a
/// phase error and `(q_z, q_y)` with one. `k` phase errors contribute
/// `C(3,k)` times the parity product of `3−k` copies of the first and `k` of
/// the second. Only sums and products appear, so tiny odd-parity mass is not
/// lost to cancellation.
pub fn p_step_map<T: Prob>(q: &BellDiagonal<T>) -> BellDiagonal<T> {
    let [i, x, y, z] = q.as_array().clone();
    let mul = |(ae, ao): (T, T), (be, bo): (T, T)| {
        (
            ae.clone() * be.clone() + ao.clone() * bo.clone(),
            ae * bo + ao * be,
        )
    };
    let clean = (i, x);
    let flipped = (z, y);
    let scale = |(e, o): (T, T), c: T| (c.clone() * e, c * o);

    let mut classes = Vec::with_capacity(4);
    for k in 0..4usize {
        let mut acc = (T::one(), T::zero());
        for slot in 0..3 {
            let factor = if slot < k {
                flipped.clone()
            } else {
                clean.clone()
            };
            acc = mul(acc, factor);
        }
        let c = if k == 0 || k == 3 {
            T::one()
        } else {
            T::three()
        };
        classes.push(scale(acc, c));
    }
    let (e0, o0) = classes[0].clone();
    let (e1, o1) = classes[1].clone();
    let (e2, o2) = classes[2].clone();
    let (e3, o3) = classes[3].clone();
    BellDiagonal::from_array_unchecked([e0 + e1, o0 + o1, o2 + o3, e2 + e3])
}

/// Bit-error rate after a B step on i.i.d. bits at rate `p`: `p² / (p² + (1−p)²)`.
pub fn b_step_bit_error<T: Prob>(p: T) -> T {
    let q = T::one() - p.clone();
    let pp = p.clone() * p;
    pp.clone() / (pp + q.clone() * q)
}

/// Bit-error rate after a P step on i.i.d. bits at rate `p`: `3p(1−p)² + p³`.
pub fn p_step_bit_error<T: Prob>(p: T) -> T {
    let q = T::one() - p.clone();
    T::three() * p.clone() * q.clone() * q + p.clone() * p.clone() * p
}

/// Pass probability of a B step on i.i.d. bits at rate `p`.
pub fn b_step_pass<T: Prob>(p: T) -> T {
    let q = T::one() - p.clone();
    p.clone() * p + q.clone() * q
}
