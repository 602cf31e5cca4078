//! Fork-join SPMD engine and the parallel kernel schemes.
//!
//! A run forks `n_cores` workers that execute the same phase body with
//! their own `core_id`. Each worker writes only its own region; the join at
//! the end of a phase is the barrier, and cross-worker combination happens
//! afterwards in fixed core order. Results are therefore deterministic and
//! do not depend on thread scheduling.

mod engine;
mod kernels;

pub use engine::Cluster;
pub use kernels::{par_gnb_infer, par_kmeans_run, par_knn_infer, par_linear_infer, par_rf_infer};

use serde::{Deserialize, Serialize};

use crate::kernels::KernelError;
use crate::perf::PhaseProfile;

pub const MAX_CORES: usize = 64;

/// How worker phases execute.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Exec {
    /// One scoped OS thread per worker.
    #[default]
    Threads,
    /// All workers on the calling thread, round-robin in core order.
    Virtual,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterConfig {
    n_cores: usize,
    exec: Exec,
}

impl ClusterConfig {
    pub fn new(n_cores: usize) -> Result<Self, KernelError> {
        if !(1..=MAX_CORES).contains(&n_cores) {
            return Err(KernelError::BadCoreCount(n_cores));
        }
        Ok(ClusterConfig { n_cores, exec: Exec::Threads })
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn n_cores(&self) -> usize {
        self.n_cores
    }

    pub fn exec(&self) -> Exec {
        self.exec
    }
}

impl Default for ClusterConfig {
    fn default() -> Self {
        ClusterConfig { n_cores: 8, exec: Exec::Threads }
    }
}

/// Decomposition direction. It does not change the index arithmetic, only
/// which dimension (samples or features) the indices refer to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    Rows,
    Columns,
}

/// Half-open index range `[lb, ub)` of one worker.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Partition {
    pub chunk: usize,
    pub lb: usize,
    pub ub: usize,
}

impl Partition {
    pub fn len(&self) -> usize {
        self.ub - self.lb
    }

    pub fn is_empty(&self) -> bool {
        self.lb == self.ub
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.lb..self.ub
    }
}

/// Worker `core_id`'s share of `total` items: `chunk = total / n_cores`
/// items each, with the last worker also taking the remainder.
pub fn partition(total: usize, n_cores: usize, core_id: usize, _axis: Axis) -> Result<Partition, KernelError> {
    if n_cores == 0 || n_cores > MAX_CORES {
        return Err(KernelError::BadCoreCount(n_cores));
    }
    if core_id >= n_cores {
        return Err(KernelError::BadCoreId { core_id, n_cores });
    }
    let chunk = total / n_cores;
    let lb = core_id * chunk;
    let ub = if core_id == n_cores - 1 { total } else { lb + chunk };
    Ok(Partition { chunk, lb, ub })
}

/// Partitions of every worker, in core order.
pub fn partitions(total: usize, n_cores: usize, axis: Axis) -> Result<Vec<Partition>, KernelError> {
    (0..n_cores).map(|c| partition(total, n_cores, c, axis)).collect()
}

/// Splits `buf` into the disjoint per-worker regions described by `parts`.
pub(crate) fn split_regions<'a, T>(mut buf: &'a mut [T], parts: &[Partition]) -> Vec<&'a mut [T]> {
    let mut out = Vec::with_capacity(parts.len());
    let mut offset = 0;
    for p in parts {
        let (head, tail) = std::mem::take(&mut buf).split_at_mut(p.ub - offset);
        out.push(&mut head[p.lb - offset..]);
        buf = tail;
        offset = p.ub;
    }
    out
}

/// A parallel kernel's result with the op counts of every phase.
#[derive(Clone, Debug, PartialEq)]
pub struct ParOutput<T> {
    pub value: T,
    pub profile: PhaseProfile,
}
