//! Operation accounting and speedup analysis.
//!
//! Cycle counts are replaced by operation counts: every kernel routes its
//! floating-point work through a counting [`Backend`](crate::softfloat::Backend)
//! and tallies the integer bookkeeping it does alongside.

mod advisor;
mod amdahl;
mod measure;
mod report;

pub use advisor::{sort_advisor, SortChoice, SortStrategy};
pub use amdahl::{amdahl, amdahl_fraction};
pub use measure::{measure, speedup_report, Measurement, PhaseProfile, SpeedupReport, Workload};
pub use report::{emit_report, RunReport};

use serde::{Deserialize, Serialize};
use std::ops::{Add, AddAssign};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PerfError {
    #[error("parallel fraction {0} outside [0, 1]")]
    BadFraction(f64),
    #[error("core count must be at least 1")]
    BadCores,
    #[error("invalid sort advisor arguments: n={n}, cores={cores}, k={k}")]
    BadArgs { n: u64, cores: u64, k: u64 },
    #[error("operation counters are empty")]
    EmptyCounters,
    #[error(transparent)]
    Kernel(#[from] crate::kernels::KernelError),
}

/// Per-worker operation tallies.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpCounters {
    pub fp_add: u64,
    pub fp_sub: u64,
    pub fp_mul: u64,
    pub fp_div: u64,
    pub fp_cmp: u64,
    pub fp_exp: u64,
    /// Integer-to-float conversions.
    pub fp_cvt: u64,
    /// Counted non-FP kernel operations: integer compares, index updates,
    /// vote increments.
    pub other_ops: u64,
}

impl OpCounters {
    pub fn fp_total(&self) -> u64 {
        self.fp_add + self.fp_sub + self.fp_mul + self.fp_div + self.fp_cmp + self.fp_exp + self.fp_cvt
    }

    pub fn total(&self) -> u64 {
        self.fp_total() + self.other_ops
    }

    pub fn merge(&mut self, other: &OpCounters) {
        self.fp_add += other.fp_add;
        self.fp_sub += other.fp_sub;
        self.fp_mul += other.fp_mul;
        self.fp_div += other.fp_div;
        self.fp_cmp += other.fp_cmp;
        self.fp_exp += other.fp_exp;
        self.fp_cvt += other.fp_cvt;
        self.other_ops += other.other_ops;
    }
}

impl Add for OpCounters {
    type Output = OpCounters;
    fn add(mut self, rhs: OpCounters) -> OpCounters {
        self.merge(&rhs);
        self
    }
}

impl AddAssign for OpCounters {
    fn add_assign(&mut self, rhs: OpCounters) {
        self.merge(&rhs);
    }
}

impl std::iter::Sum for OpCounters {
    fn sum<I: Iterator<Item = OpCounters>>(iter: I) -> Self {
        iter.fold(OpCounters::default(), Add::add)
    }
}

/// Percentage of counted operations that are floating-point.
pub fn flop_intensity(c: &OpCounters) -> Result<f64, PerfError> {
    let total = c.total();
    if total == 0 {
        return Err(PerfError::EmptyCounters);
    }
    Ok(100.0 * c.fp_total() as f64 / total as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn counters() -> impl Strategy<Value = OpCounters> {
        prop::array::uniform8(0u64..1 << 40).prop_map(|v| OpCounters {
            fp_add: v[0],
            fp_sub: v[1],
            fp_mul: v[2],
            fp_div: v[3],
            fp_cmp: v[4],
            fp_exp: v[5],
            fp_cvt: v[6],
            other_ops: v[7],
        })
    }

    proptest! {
        #[test]
        fn merge_is_associative_and_commutative(a in counters(), b in counters(), c in counters()) {
            prop_assert_eq!(a + b, b + a);
            prop_assert_eq!((a + b) + c, a + (b + c));
            prop_assert_eq!((a + b).total(), a.total() + b.total());
        }
    }

    #[test]
    fn intensity_extremes() {
        let none = OpCounters { other_ops: 5, ..Default::default() };
        assert_eq!(flop_intensity(&none).unwrap(), 0.0);
        let all = OpCounters { fp_mul: 3, fp_add: 1, ..Default::default() };
        assert_eq!(flop_intensity(&all).unwrap(), 100.0);
        assert_eq!(flop_intensity(&OpCounters::default()), Err(PerfError::EmptyCounters));
    }
}
