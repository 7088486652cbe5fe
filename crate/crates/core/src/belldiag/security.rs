use crate::error::{Error, Result};
use crate::scalar::RealProb;

/// Leading term of the bound on Eve's mutual information with an `m`-bit
/// key when the purified state has fidelity `1 − 2^−s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EveBound<T> {
    /// `c = s − log2(2m + s + 1/ln 2)`.
    pub c: T,
    /// `2^−c`. The companion `2^{O(−2s)}` term has no explicit constant and
    /// is not included.
    pub leading: T,
}

pub fn eve_info_bound<T: RealProb>(s: u32, m: u64) -> Result<EveBound<T>> {
    if s == 0 || m == 0 {
        return Err(Error::InvalidParameter("s and m must be at least 1".into()));
    }
    let s_t = T::from_u32(s).expect("u32 fits");
    let m_t = T::from_u64(m).expect("u64 fits");
    let arg = T::lit(2.0) * m_t + s_t + T::one() / T::lit(std::f64::consts::LN_2);
    let c = s_t - arg.log2();
    if c <= T::zero() {
        return Err(Error::InvalidParameter(format!(
            "2m + s + 1/ln2 >= 2^s for s = {s}, m = {m}: bound is vacuous"
        )));
    }
    Ok(EveBound {
        c,
        leading: T::lit(2.0).powf(-c),
    })
}
