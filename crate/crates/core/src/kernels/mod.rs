//! Sequential reference kernels.
//!
//! Every floating-point operation goes through a [`Backend`], in a fixed
//! left-to-right order; that order is the reference for bit-exactness. All
//! tie-breaks pick the lowest index.

mod forest;
mod gnb;
mod kmeans;
mod linear;
mod metric;

pub use forest::{dt_infer, rf_infer, rf_votes};
pub use gnb::{gnb_infer, gnb_product_scores, gnb_scores};
pub use kmeans::{kmeans_assign, kmeans_run, kmeans_run_observed, kmeans_update, KMeansRun};
pub use linear::{gemv_bias, linear_infer, lr_infer, sigmoid, softmax, svm_infer};
pub use metric::{knn_infer, knn_neighbors, partial_select_k, sq_euclidean};

pub(crate) use forest::{vote_argmax, walk_tree};
pub(crate) use gnb::gnb_partial;
pub(crate) use kmeans::{accumulate, assign_sample, centroid_shift, finish_centroid, init_centroids};
pub(crate) use linear::{decide_linear, dot};
pub(crate) use metric::{majority_vote, neighbor_list, sq_euclidean_unchecked};

use crate::softfloat::Backend;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KernelError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("k = {k} exceeds the {n} available candidates")]
    KTooLarge { k: usize, n: usize },
    #[error("k = {k} exceeds the per-worker chunk of {chunk} samples")]
    KTooLargeForChunk { k: usize, chunk: usize },
    #[error("malformed tree: {0}")]
    MalformedTree(String),
    #[error("core id {core_id} not below {n_cores} cores")]
    BadCoreId { core_id: usize, n_cores: usize },
    #[error("core count {0} outside [1, 64]")]
    BadCoreCount(usize),
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<(), KernelError> {
    if expected != found {
        return Err(KernelError::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// One score per class (or per weight row).
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ScoreVector(pub Vec<f32>);

impl ScoreVector {
    pub fn as_slice(&self) -> &[f32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Bitwise equality, distinguishing -0/+0 and NaN patterns.
    pub fn bit_eq(&self, other: &ScoreVector) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a.to_bits() == b.to_bits())
    }

    /// Gap between the best and second-best score (infinite for one score).
    pub fn margin(&self) -> f32 {
        let mut best = f32::NEG_INFINITY;
        let mut second = f32::NEG_INFINITY;
        for &s in &self.0 {
            if s > best {
                second = best;
                best = s;
            } else if s > second {
                second = s;
            }
        }
        best - second
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Neighbor {
    pub distance: f32,
    pub index: u32,
    pub label: u16,
}

/// Up to k neighbors, ascending by distance, ties by lower sample index.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct NeighborList(pub Vec<Neighbor>);

impl NeighborList {
    pub fn bit_eq(&self, other: &NeighborList) -> bool {
        self.0.len() == other.0.len()
            && self
                .0
                .iter()
                .zip(&other.0)
                .all(|(a, b)| a.distance.to_bits() == b.distance.to_bits() && a.index == b.index && a.label == b.label)
    }
}

/// What a kernel looked at to reach its decision.
#[derive(Clone, Debug, PartialEq)]
pub enum Evidence {
    /// Raw linear or log-likelihood scores; `probs` holds softmax/sigmoid
    /// outputs when the kernel computes them.
    Scores {
        raw: ScoreVector,
        probs: Option<ScoreVector>,
    },
    Neighbors(NeighborList),
    Votes(Vec<u32>),
}

impl Evidence {
    pub fn bit_eq(&self, other: &Evidence) -> bool {
        match (self, other) {
            (Evidence::Scores { raw: a, probs: pa }, Evidence::Scores { raw: b, probs: pb }) => {
                a.bit_eq(b)
                    && match (pa, pb) {
                        (Some(x), Some(y)) => x.bit_eq(y),
                        (None, None) => true,
                        _ => false,
                    }
            }
            (Evidence::Neighbors(a), Evidence::Neighbors(b)) => a.bit_eq(b),
            (Evidence::Votes(a), Evidence::Votes(b)) => a == b,
            _ => false,
        }
    }

    /// Winning margin of the raw scores, when the decision is score based.
    pub fn score_margin(&self) -> Option<f32> {
        match self {
            Evidence::Scores { raw, .. } if raw.len() == 1 => Some(raw.0[0].abs()),
            Evidence::Scores { raw, .. } => Some(raw.margin()),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub class: usize,
    pub evidence: Evidence,
}

impl Prediction {
    pub fn bit_eq(&self, other: &Prediction) -> bool {
        self.class == other.class && self.evidence.bit_eq(&other.evidence)
    }
}

/// Index of the largest score; ties and NaNs resolve to the lowest index.
pub fn argmax(v: &[f32], be: &mut Backend) -> usize {
    let mut best = 0;
    for i in 1..v.len() {
        be.other(1);
        if be.lt(v[best], v[i]) {
            best = i;
        }
    }
    best
}
