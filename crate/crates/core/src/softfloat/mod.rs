//! IEEE-754 binary32 arithmetic over integer operations only.
//!
//! Every routine is total over all 2^32 input patterns and rounds to nearest,
//! ties to even. Subnormals are handled in full (no flush-to-zero). Any NaN
//! produced is the canonical quiet pattern [`F32Bits::QNAN`]; input payloads
//! are not propagated.

mod backend;
pub mod conformance;
mod exp;

pub use backend::{Backend, Mode};
pub use exp::sf_exp;

use std::fmt;

/// A binary32 value carried as its raw bit pattern.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct F32Bits(pub u32);

impl F32Bits {
    pub const SIGN_MASK: u32 = 0x8000_0000;
    pub const EXP_MASK: u32 = 0x7F80_0000;
    pub const FRAC_MASK: u32 = 0x007F_FFFF;

    pub const ZERO: F32Bits = F32Bits(0);
    pub const NEG_ZERO: F32Bits = F32Bits(0x8000_0000);
    pub const ONE: F32Bits = F32Bits(0x3F80_0000);
    pub const INFINITY: F32Bits = F32Bits(0x7F80_0000);
    pub const NEG_INFINITY: F32Bits = F32Bits(0xFF80_0000);
    /// Canonical quiet NaN returned by every operation that yields NaN.
    pub const QNAN: F32Bits = F32Bits(0x7FC0_0000);

    #[inline]
    pub fn from_f32(x: f32) -> Self {
        F32Bits(x.to_bits())
    }

    #[inline]
    pub fn to_f32(self) -> f32 {
        f32::from_bits(self.0)
    }

    #[inline]
    pub fn sign(self) -> bool {
        self.0 & Self::SIGN_MASK != 0
    }

    /// Biased exponent field.
    #[inline]
    pub fn exp_field(self) -> u32 {
        (self.0 & Self::EXP_MASK) >> 23
    }

    #[inline]
    pub fn frac(self) -> u32 {
        self.0 & Self::FRAC_MASK
    }

    #[inline]
    pub fn is_nan(self) -> bool {
        self.0 & 0x7FFF_FFFF > Self::EXP_MASK
    }

    #[inline]
    pub fn is_infinite(self) -> bool {
        self.0 & 0x7FFF_FFFF == Self::EXP_MASK
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 & 0x7FFF_FFFF == 0
    }

    #[inline]
    pub fn negate(self) -> Self {
        F32Bits(self.0 ^ Self::SIGN_MASK)
    }

    #[inline]
    fn abs_bits(self) -> u32 {
        self.0 & 0x7FFF_FFFF
    }

    /// Significand with the implicit bit and the exponent of its unit bit,
    /// so that `|self| = sig * 2^exp`. Only meaningful for finite values.
    #[inline]
    fn unpack_finite(self) -> (u32, i32) {
        let e = self.exp_field();
        if e == 0 {
            (self.frac(), -149)
        } else {
            (self.frac() | 0x0080_0000, e as i32 - 150)
        }
    }
}

impl fmt::Debug for F32Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F32Bits({:#010x} = {:e})", self.0, self.to_f32())
    }
}

impl From<f32> for F32Bits {
    fn from(x: f32) -> Self {
        F32Bits::from_f32(x)
    }
}

impl From<F32Bits> for f32 {
    fn from(x: F32Bits) -> Self {
        x.to_f32()
    }
}

#[inline]
fn signed_zero(sign: bool) -> F32Bits {
    if sign {
        F32Bits::NEG_ZERO
    } else {
        F32Bits::ZERO
    }
}

#[inline]
fn signed_inf(sign: bool) -> F32Bits {
    if sign {
        F32Bits::NEG_INFINITY
    } else {
        F32Bits::INFINITY
    }
}

/// Shift right, OR-ing every shifted-out bit into the result's LSB.
#[inline]
fn shift_right_jam(sig: u64, dist: u32) -> u64 {
    if dist == 0 {
        sig
    } else if dist < 64 {
        (sig >> dist) | u64::from(sig << (64 - dist) != 0)
    } else {
        u64::from(sig != 0)
    }
}

/// Rounds `(-1)^sign * sig * 2^exp` to binary32.
///
/// `sig` must be exact, or carry a sticky bit in its LSB that lies strictly
/// below the final rounding position.
pub(crate) fn round_pack(sign: bool, exp: i32, sig: u64) -> F32Bits {
    if sig == 0 {
        return signed_zero(sign);
    }
    let msb = 63 - sig.leading_zeros() as i32;
    // Unbiased exponent of the leading bit.
    let lead = msb + exp;
    if lead > 127 {
        return signed_inf(sign);
    }
    let normal = lead >= -126;
    // Number of low bits of `sig` that fall below the unit of the result.
    let shift = if normal { msb - 23 } else { -149 - exp };
    let mant: u64 = if shift <= 0 {
        sig << (-shift) as u32
    } else {
        let s = shift as u32;
        let wide = u128::from(sig);
        let kept = if s >= 128 { 0 } else { (wide >> s) as u64 };
        let rem = if s >= 128 { wide } else { wide & ((1u128 << s) - 1) };
        let half = if s > 128 { u128::MAX } else { 1u128 << (s - 1) };
        let up = rem > half || (rem == half && kept & 1 == 1);
        kept + u64::from(up)
    };
    let bits = if normal {
        // mant is in [2^23, 2^24]; a carry to 2^24 bumps the exponent field.
        (((lead + 126) as u64) << 23) + mant
    } else {
        // A carry to 2^23 yields the smallest normal, which this encodes.
        mant
    };
    if bits >= u64::from(F32Bits::EXP_MASK) {
        return signed_inf(sign);
    }
    F32Bits(bits as u32 | if sign { F32Bits::SIGN_MASK } else { 0 })
}

pub fn sf_add(a: F32Bits, b: F32Bits) -> F32Bits {
    if a.is_nan() || b.is_nan() {
        return F32Bits::QNAN;
    }
    if a.is_infinite() || b.is_infinite() {
        if a.is_infinite() && b.is_infinite() && a.sign() != b.sign() {
            return F32Bits::QNAN;
        }
        return if a.is_infinite() { a } else { b };
    }
    if a.is_zero() && b.is_zero() {
        return signed_zero(a.sign() && b.sign());
    }
    if a.is_zero() {
        return b;
    }
    if b.is_zero() {
        return a;
    }

    // Order by magnitude so that `big` carries the larger exponent.
    let (big, small) = if a.abs_bits() >= b.abs_bits() { (a, b) } else { (b, a) };
    let (sig_big, exp_big) = big.unpack_finite();
    let (sig_small, exp_small) = small.unpack_finite();

    const GUARD: u32 = 30;
    let wide_big = u64::from(sig_big) << GUARD;
    let wide_small = shift_right_jam(u64::from(sig_small) << GUARD, (exp_big - exp_small) as u32);
    let exp = exp_big - GUARD as i32;

    if big.sign() == small.sign() {
        round_pack(big.sign(), exp, wide_big + wide_small)
    } else {
        let diff = wide_big - wide_small;
        if diff == 0 {
            // Exact cancellation yields +0 under round-to-nearest.
            return F32Bits::ZERO;
        }
        round_pack(big.sign(), exp, diff)
    }
}

pub fn sf_sub(a: F32Bits, b: F32Bits) -> F32Bits {
    sf_add(a, b.negate())
}

pub fn sf_mul(a: F32Bits, b: F32Bits) -> F32Bits {
    let sign = a.sign() != b.sign();
    if a.is_nan() || b.is_nan() {
        return F32Bits::QNAN;
    }
    if a.is_infinite() || b.is_infinite() {
        if a.is_zero() || b.is_zero() {
            return F32Bits::QNAN;
        }
        return signed_inf(sign);
    }
    if a.is_zero() || b.is_zero() {
        return signed_zero(sign);
    }
    let (sa, ea) = a.unpack_finite();
    let (sb, eb) = b.unpack_finite();
    round_pack(sign, ea + eb, u64::from(sa) * u64::from(sb))
}

/// Normalizes a nonzero finite significand so its leading bit sits at bit 23.
#[inline]
fn normalize(sig: u32, exp: i32) -> (u32, i32) {
    let shift = sig.leading_zeros() as i32 - 8;
    (sig << shift, exp - shift)
}

pub fn sf_div(a: F32Bits, b: F32Bits) -> F32Bits {
    let sign = a.sign() != b.sign();
    if a.is_nan() || b.is_nan() {
        return F32Bits::QNAN;
    }
    if a.is_infinite() {
        return if b.is_infinite() { F32Bits::QNAN } else { signed_inf(sign) };
    }
    if b.is_infinite() {
        return signed_zero(sign);
    }
    if b.is_zero() {
        return if a.is_zero() { F32Bits::QNAN } else { signed_inf(sign) };
    }
    if a.is_zero() {
        return signed_zero(sign);
    }
    let (sa, ea) = a.unpack_finite();
    let (sb, eb) = b.unpack_finite();
    let (sa, ea) = normalize(sa, ea);
    let (sb, eb) = normalize(sb, eb);
    // Quotient lands in (2^59, 2^61): at least 35 bits below the kept 24.
    let num = u128::from(sa) << 60;
    let den = u128::from(sb);
    let q = (num / den) as u64;
    let sticky = u64::from(num % den != 0);
    round_pack(sign, ea - eb - 60, q | sticky)
}

/// Maps a non-NaN pattern onto a key whose unsigned order is IEEE order,
/// with both zeros collapsed to the same key.
#[inline]
fn order_key(x: F32Bits) -> u32 {
    if x.is_zero() {
        0x8000_0000
    } else if x.sign() {
        !x.0
    } else {
        x.0 | 0x8000_0000
    }
}

pub fn sf_le(a: F32Bits, b: F32Bits) -> bool {
    if a.is_nan() || b.is_nan() {
        return false;
    }
    order_key(a) <= order_key(b)
}

pub fn sf_lt(a: F32Bits, b: F32Bits) -> bool {
    if a.is_nan() || b.is_nan() {
        return false;
    }
    order_key(a) < order_key(b)
}

pub fn sf_eq(a: F32Bits, b: F32Bits) -> bool {
    if a.is_nan() || b.is_nan() {
        return false;
    }
    order_key(a) == order_key(b)
}

pub fn sf_from_i32(n: i32) -> F32Bits {
    round_pack(n < 0, 0, u64::from(n.unsigned_abs()))
}
