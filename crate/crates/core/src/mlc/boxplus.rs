use crate::channel::{clamp_llr, LLR_MAX};
use crate::error::{Error, Result};

/// LLR of the XOR of two bits: 2 atanh(tanh(a/2) tanh(b/2)).
///
/// Evaluated through the equivalent identity
/// `sign(a) sign(b) min(|a|,|b|) + ln(1 + e^-|a+b|) - ln(1 + e^-|a-b|)`,
/// which stays accurate where tanh saturates. Inputs and output are
/// clamped to `[-LLR_MAX, LLR_MAX]`.
#[inline]
pub fn boxplus(a: f64, b: f64) -> f64 {
    let a = clamp_llr(a);
    let b = clamp_llr(b);
    let (ma, mb) = (a.abs(), b.abs());
    let mag = ma.min(mb) + (-(ma + mb)).exp().ln_1p() - (-(ma - mb).abs()).exp().ln_1p();
    let mag = mag.clamp(0.0, LLR_MAX);
    if (a < 0.0) != (b < 0.0) {
        -mag
    } else {
        mag
    }
}

/// Left fold of `boxplus` over a non-empty slice.
pub fn boxplus_reduce(l: &[f64]) -> Result<f64> {
    let (&first, rest) = l.split_first().ok_or(Error::Empty)?;
    Ok(rest.iter().fold(clamp_llr(first), |acc, &x| boxplus(acc, x)))
}
