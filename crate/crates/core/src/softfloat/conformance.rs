//! Differential check of the soft-float routines against the host FPU.
//!
//! The host is assumed to run binary32 in round-to-nearest-even without
//! flush-to-zero (the default for x86-64 SSE and AArch64). NaN results are
//! compared after canonicalization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{sf_add, sf_div, sf_eq, sf_from_i32, sf_le, sf_lt, sf_mul, sf_sub, F32Bits};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Le,
    Lt,
    Eq,
}

impl Op {
    pub const ALL: [Op; 7] = [Op::Add, Op::Sub, Op::Mul, Op::Div, Op::Le, Op::Lt, Op::Eq];

    pub fn name(self) -> &'static str {
        match self {
            Op::Add => "add",
            Op::Sub => "sub",
            Op::Mul => "mul",
            Op::Div => "div",
            Op::Le => "le",
            Op::Lt => "lt",
            Op::Eq => "eq",
        }
    }

    /// (emulated, native) outputs as bit patterns; comparisons map to 0/1.
    fn eval(self, a: F32Bits, b: F32Bits) -> (u32, u32) {
        let (x, y) = (a.to_f32(), b.to_f32());
        let canon = |v: f32| if v.is_nan() { F32Bits::QNAN.0 } else { v.to_bits() };
        match self {
            Op::Add => (sf_add(a, b).0, canon(x + y)),
            Op::Sub => (sf_sub(a, b).0, canon(x - y)),
            Op::Mul => (sf_mul(a, b).0, canon(x * y)),
            Op::Div => (sf_div(a, b).0, canon(x / y)),
            Op::Le => (u32::from(sf_le(a, b)), u32::from(x <= y)),
            Op::Lt => (u32::from(sf_lt(a, b)), u32::from(x < y)),
            Op::Eq => (u32::from(sf_eq(a, b)), u32::from(x == y)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub a: u32,
    pub b: u32,
    pub emulated: u32,
    pub native: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct OpResult {
    pub op: Op,
    pub checked: u64,
    pub mismatches: u64,
    pub first_mismatch: Option<Mismatch>,
}

impl OpResult {
    pub fn passed(&self) -> bool {
        self.mismatches == 0
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConformanceReport {
    pub seed: u64,
    pub random_pairs: u64,
    pub ops: Vec<OpResult>,
    /// Integer-to-float conversions checked, and mismatches among them.
    pub conversions_checked: u64,
    pub conversion_mismatches: u64,
}

impl ConformanceReport {
    pub fn passed(&self) -> bool {
        self.conversion_mismatches == 0 && self.ops.iter().all(OpResult::passed)
    }
}

/// Directed special patterns: both signs of zero, extreme subnormals and
/// normals, infinities, quiet and signaling NaNs, plus a few ordinary values
/// around 1 and rounding-sensitive mantissas.
pub fn special_patterns() -> Vec<F32Bits> {
    let magnitudes: [u32; 16] = [
        0x0000_0000, // zero
        0x0000_0001, // min subnormal
        0x0000_0002,
        0x0040_0000, // mid subnormal
        0x007F_FFFF, // max subnormal
        0x0080_0000, // min normal
        0x0080_0001,
        0x3F7F_FFFF, // 1 - ulp
        0x3F80_0000, // 1
        0x3F80_0001, // 1 + ulp
        0x4B80_0000, // 2^24
        0x7F7F_FFFF, // max finite
        0x7F80_0000, // inf
        0x7FC0_0000, // quiet NaN
        0x7F80_0001, // signaling NaN
        0x7FFF_FFFF, // quiet NaN, full payload
    ];
    magnitudes.iter().flat_map(|&m| [F32Bits(m), F32Bits(m | F32Bits::SIGN_MASK)]).collect()
}

/// Random operand: mostly uniform bit patterns, with a share of values drawn
/// near `anchor` so that cancellation and near-tie rounding are exercised.
fn random_operand(rng: &mut ChaCha8Rng, anchor: u32) -> F32Bits {
    match rng.gen_range(0..4) {
        0 | 1 => F32Bits(rng.gen()),
        2 => {
            let delta: i32 = rng.gen_range(-64..=64);
            F32Bits(anchor.wrapping_add(delta as u32) ^ (rng.gen::<u32>() & F32Bits::SIGN_MASK))
        }
        _ => {
            // Same exponent neighborhood, random mantissa.
            let exp = (anchor & F32Bits::EXP_MASK) as i64 + (i64::from(rng.gen_range(-3..=3)) << 23);
            let exp = exp.clamp(0, 0x7F00_0000) as u32;
            F32Bits(exp | (rng.gen::<u32>() & (F32Bits::FRAC_MASK | F32Bits::SIGN_MASK)))
        }
    }
}

fn check(op: Op, a: F32Bits, b: F32Bits, result: &mut OpResult) {
    let (emulated, native) = op.eval(a, b);
    result.checked += 1;
    if emulated != native {
        result.mismatches += 1;
        result.first_mismatch.get_or_insert(Mismatch { a: a.0, b: b.0, emulated, native });
    }
}

/// Runs every operation on all ordered pairs of [`special_patterns`] and on
/// `random_pairs` seeded random pairs.
pub fn run(random_pairs: u64, seed: u64) -> ConformanceReport {
    let specials = special_patterns();
    let mut ops = Vec::with_capacity(Op::ALL.len());
    for (i, &op) in Op::ALL.iter().enumerate() {
        let mut result = OpResult { op, checked: 0, mismatches: 0, first_mismatch: None };
        for &a in &specials {
            for &b in &specials {
                check(op, a, b, &mut result);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
        for _ in 0..random_pairs {
            let anchor = rng.gen();
            let a = random_operand(&mut rng, anchor);
            let b = random_operand(&mut rng, a.0);
            check(op, a, b, &mut result);
        }
        ops.push(result);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xC0DE);
    let mut conversions_checked = 0;
    let mut conversion_mismatches = 0;
    let edge_ints = [0, 1, -1, i32::MAX, i32::MIN, 16_777_216, 16_777_217, -16_777_219];
    let randoms = (0..random_pairs.min(1 << 20)).map(|_| rng.gen::<i32>() >> rng.gen_range(0..31));
    for n in edge_ints.into_iter().chain(randoms) {
        conversions_checked += 1;
        if sf_from_i32(n).0 != (n as f32).to_bits() {
            conversion_mismatches += 1;
        }
    }

    ConformanceReport { seed, random_pairs, ops, conversions_checked, conversion_mismatches }
}
