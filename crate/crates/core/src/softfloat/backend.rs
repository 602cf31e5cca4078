use serde::{Deserialize, Serialize};

use super::{sf_add, sf_div, sf_eq, sf_exp, sf_from_i32, sf_le, sf_lt, sf_mul, sf_sub, F32Bits};
use crate::perf::OpCounters;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Host FPU for arithmetic, compare and conversion.
    Native,
    /// Integer-only soft-float routines.
    Emulated,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Native => "native",
            Mode::Emulated => "emulated",
        })
    }
}

/// Numeric backend every kernel routes its floating-point work through.
///
/// Native and emulated modes are bit-identical: native results that are NaN
/// are replaced by the canonical quiet NaN, and `exp` is always the library
/// routine [`sf_exp`] since no FPU provides it.
///
/// When counting is enabled, each FP call bumps exactly one tally and
/// [`Backend::other`] records non-FP kernel work.
#[derive(Clone, Debug)]
pub struct Backend {
    mode: Mode,
    counters: Option<OpCounters>,
}

#[inline]
fn canon(x: f32) -> f32 {
    if x.is_nan() {
        F32Bits::QNAN.to_f32()
    } else {
        x
    }
}

macro_rules! binary_op {
    ($name:ident, $field:ident, $soft:ident, $native:tt) => {
        #[inline]
        pub fn $name(&mut self, a: f32, b: f32) -> f32 {
            if let Some(c) = self.counters.as_mut() {
                c.$field += 1;
            }
            match self.mode {
                Mode::Native => canon(a $native b),
                Mode::Emulated => $soft(F32Bits::from_f32(a), F32Bits::from_f32(b)).to_f32(),
            }
        }
    };
}

macro_rules! compare_op {
    ($name:ident, $soft:ident, $native:tt) => {
        #[inline]
        pub fn $name(&mut self, a: f32, b: f32) -> bool {
            if let Some(c) = self.counters.as_mut() {
                c.fp_cmp += 1;
            }
            match self.mode {
                Mode::Native => a $native b,
                Mode::Emulated => $soft(F32Bits::from_f32(a), F32Bits::from_f32(b)),
            }
        }
    };
}

impl Backend {
    pub fn new(mode: Mode) -> Self {
        Backend { mode, counters: None }
    }

    pub fn native() -> Self {
        Self::new(Mode::Native)
    }

    pub fn emulated() -> Self {
        Self::new(Mode::Emulated)
    }

    /// Same backend with a fresh, zeroed counter sink attached.
    pub fn counting(mut self) -> Self {
        self.counters = Some(OpCounters::default());
        self
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn is_counting(&self) -> bool {
        self.counters.is_some()
    }

    pub fn counters(&self) -> Option<&OpCounters> {
        self.counters.as_ref()
    }

    /// Returns the accumulated tallies and resets them (zero if not counting).
    pub fn take_counters(&mut self) -> OpCounters {
        match self.counters.as_mut() {
            Some(c) => std::mem::take(c),
            None => OpCounters::default(),
        }
    }

    /// A backend for another worker: same mode, own zeroed sink if counting.
    pub fn fork(&self) -> Self {
        Backend { mode: self.mode, counters: self.counters.as_ref().map(|_| OpCounters::default()) }
    }

    /// Adds tallies gathered elsewhere (e.g. by forked workers).
    pub fn absorb(&mut self, other: &OpCounters) {
        if let Some(c) = self.counters.as_mut() {
            c.merge(other);
        }
    }

    /// Records `n` non-FP kernel operations (integer compares, index updates).
    #[inline]
    pub fn other(&mut self, n: u64) {
        if let Some(c) = self.counters.as_mut() {
            c.other_ops += n;
        }
    }

    binary_op!(add, fp_add, sf_add, +);
    binary_op!(sub, fp_sub, sf_sub, -);
    binary_op!(mul, fp_mul, sf_mul, *);
    binary_op!(div, fp_div, sf_div, /);
    compare_op!(le, sf_le, <=);
    compare_op!(lt, sf_lt, <);
    compare_op!(eq, sf_eq, ==);

    #[inline]
    pub fn exp(&mut self, x: f32) -> f32 {
        if let Some(c) = self.counters.as_mut() {
            c.fp_exp += 1;
        }
        sf_exp(F32Bits::from_f32(x)).to_f32()
    }

    #[inline]
    pub fn from_i32(&mut self, n: i32) -> f32 {
        if let Some(c) = self.counters.as_mut() {
            c.fp_cvt += 1;
        }
        match self.mode {
            Mode::Native => n as f32,
            Mode::Emulated => sf_from_i32(n).to_f32(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn each_call_bumps_one_tally() {
        let mut be = Backend::emulated().counting();
        be.add(1.0, 2.0);
        be.sub(1.0, 2.0);
        be.mul(1.0, 2.0);
        be.div(1.0, 2.0);
        be.le(1.0, 2.0);
        be.lt(1.0, 2.0);
        be.eq(1.0, 2.0);
        be.exp(1.0);
        be.from_i32(3);
        be.other(4);
        let c = be.take_counters();
        assert_eq!(
            (c.fp_add, c.fp_sub, c.fp_mul, c.fp_div, c.fp_cmp, c.fp_exp, c.fp_cvt, c.other_ops),
            (1, 1, 1, 1, 3, 1, 1, 4)
        );
        assert_eq!(be.take_counters(), OpCounters::default());
    }

    #[test]
    fn fork_keeps_mode_and_resets_counts() {
        let mut be = Backend::native().counting();
        be.add(1.0, 1.0);
        let f = be.fork();
        assert_eq!(f.mode(), Mode::Native);
        assert_eq!(f.counters(), Some(&OpCounters::default()));
        assert!(Backend::native().fork().counters().is_none());
    }

    #[test]
    fn native_nan_is_canonical() {
        let mut n = Backend::native();
        let mut e = Backend::emulated();
        let nan = f32::from_bits(0x7FC0_1234);
        assert_eq!(n.add(nan, 1.0).to_bits(), e.add(nan, 1.0).to_bits());
        assert_eq!(n.mul(f32::INFINITY, 0.0).to_bits(), F32Bits::QNAN.0);
    }
}
