//! `exp` for binary32 in 64-bit fixed point.
//!
//! `x = n*ln2 + r` with `|r| <= ln2/2`, `exp(r)` from a degree-5 polynomial
//! minimizing relative error on the reduced interval (max 7.5e-8), then a
//! single rounding of `p(r) * 2^n`. The polynomial's equioscillating error
//! gives `p(ln2/2) = 2*p(-ln2/2)`, so the approximation is continuous across
//! reduction intervals and the result is monotone in `x`.

use super::{round_pack, F32Bits};

/// ln(2) * 2^64, rounded.
const LN2_Q64: i128 = 12_786_308_645_202_655_660;

/// Polynomial coefficients c0..c5 scaled by 2^62.
const POLY_Q62: [i128; 6] = [
    4_611_686_348_876_295_999,
    4_611_684_597_989_148_826,
    2_305_792_043_221_184_605,
    768_656_213_370_795_838,
    193_300_581_093_024_072,
    38_266_179_957_579_176,
];

/// Below this magnitude exp(x) rounds to 1.0.
const TINY: u32 = 0x3300_0000; // 2^-25
/// exp(x) rounds to zero for x below -150*ln2 ~ -103.97.
const UNDERFLOW: f32 = -104.0;
/// exp(x) exceeds f32::MAX for x above ~88.7228.
const OVERFLOW: f32 = 89.0;

pub fn sf_exp(x: F32Bits) -> F32Bits {
    if x.is_nan() {
        return F32Bits::QNAN;
    }
    if x.is_infinite() {
        return if x.sign() { F32Bits::ZERO } else { F32Bits::INFINITY };
    }
    if x.0 & 0x7FFF_FFFF <= TINY {
        return F32Bits::ONE;
    }
    // Finite, so comparing order keys through the soft comparator is exact.
    if super::sf_lt(x, F32Bits::from_f32(UNDERFLOW)) {
        return F32Bits::ZERO;
    }
    if super::sf_lt(F32Bits::from_f32(OVERFLOW), x) {
        return F32Bits::INFINITY;
    }

    // |x| >= 2^-25 with a 24-bit significand, so x * 2^64 is an integer.
    let (sig, e) = x.unpack_finite();
    let magnitude = i128::from(sig) << (e + 64) as u32;
    let fixed = if x.sign() { -magnitude } else { magnitude };

    let n = (fixed + LN2_Q64 / 2).div_euclid(LN2_Q64);
    let r = fixed - n * LN2_Q64; // r * 2^64, |r| <= ln2/2

    let mut acc = POLY_Q62[5];
    for &c in POLY_Q62[..5].iter().rev() {
        acc = ((acc * r) >> 64) + c;
    }
    debug_assert!(acc > 0);
    round_pack(false, n as i32 - 62, acc as u64)
}
