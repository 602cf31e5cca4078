use serde::Serialize;
use std::fmt;

use super::PerfError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SortStrategy {
    /// Partial selection sort, O(n k).
    SS,
    /// Quick sort of the whole array, O(n log n).
    QS,
}

impl fmt::Display for SortStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SortStrategy::SS => "SS",
            SortStrategy::QS => "QS",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SortChoice {
    pub choice: SortStrategy,
    pub ss_cost: f64,
    pub qs_cost: f64,
}

/// Picks the cheaper way to extract the `k` smallest of `n` candidates split
/// over `cores` workers, by comparison-count estimate.
///
/// Per worker, selection costs `(n/c) k` and quick sort `(n/c) log2(n/c)`;
/// both pay `c k` to merge the local results. Ties go to selection sort.
pub fn sort_advisor(n: u64, cores: u64, k: u64) -> Result<SortChoice, PerfError> {
    if n == 0 || cores == 0 || k == 0 {
        return Err(PerfError::BadArgs { n, cores, k });
    }
    let per_core = n as f64 / cores as f64;
    let merge = (cores * k) as f64;
    let ss_cost = per_core * k as f64 + merge;
    let qs_cost = per_core * per_core.log2() + merge;
    let choice = if ss_cost <= qs_cost { SortStrategy::SS } else { SortStrategy::QS };
    Ok(SortChoice { choice, ss_cost, qs_cost })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossover_at_thousand_instances() {
        for k in 1..=6 {
            assert_eq!(sort_advisor(1000, 8, k).unwrap().choice, SortStrategy::SS, "k={k}");
        }
        for k in 7..=20 {
            assert_eq!(sort_advisor(1000, 8, k).unwrap().choice, SortStrategy::QS, "k={k}");
        }
        for k in 1..=9 {
            assert_eq!(sort_advisor(1000, 1, k).unwrap().choice, SortStrategy::SS, "k={k}");
        }
        assert_eq!(sort_advisor(1000, 1, 10).unwrap().choice, SortStrategy::QS);
    }

    #[test]
    fn zero_arguments_rejected() {
        assert!(matches!(sort_advisor(0, 8, 4), Err(PerfError::BadArgs { .. })));
        assert!(sort_advisor(10, 0, 4).is_err());
        assert!(sort_advisor(10, 8, 0).is_err());
    }

    #[test]
    fn exact_tie_prefers_selection() {
        // n/c = 16 -> log2 = 4 exactly.
        let c = sort_advisor(128, 8, 4).unwrap();
        assert_eq!(c.ss_cost, c.qs_cost);
        assert_eq!(c.choice, SortStrategy::SS);
    }
}
