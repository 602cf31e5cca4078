use super::{check_dim, sq_euclidean_unchecked, KernelError};
use crate::model::{Dataset, KMeansState};
use crate::softfloat::Backend;

/// Outcome of a k-means run.
#[derive(Clone, Debug, PartialEq)]
pub struct KMeansRun {
    pub centroids: Vec<f32>,
    pub assignments: Vec<u32>,
    pub iterations: u32,
    pub converged: bool,
}

impl KMeansRun {
    pub fn bit_eq(&self, other: &KMeansRun) -> bool {
        self.assignments == other.assignments
            && self.iterations == other.iterations
            && self.converged == other.converged
            && self.centroids.len() == other.centroids.len()
            && self.centroids.iter().zip(&other.centroids).all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

fn check_shapes(state: &KMeansState, data: &Dataset) -> Result<(), KernelError> {
    check_dim(state.d(), data.d())?;
    if state.k() > data.n_samples() {
        return Err(KernelError::KTooLarge { k: state.k(), n: data.n_samples() });
    }
    Ok(())
}

/// The first `k` samples, row-major.
pub(crate) fn init_centroids(data: &Dataset, k: usize) -> Vec<f32> {
    data.features()[..k * data.d()].to_vec()
}

/// Writes the `k` distances from `x` into `e` and returns the nearest
/// centroid, ties to the lower index.
pub(crate) fn assign_sample(centroids: &[f32], d: usize, x: &[f32], e: &mut [f32], be: &mut Backend) -> u32 {
    for (j, c) in centroids.chunks_exact(d).enumerate() {
        e[j] = sq_euclidean_unchecked(x, c, be);
    }
    let mut best = 0;
    for j in 1..e.len() {
        be.other(1);
        if be.lt(e[j], e[best]) {
            best = j;
        }
    }
    best as u32
}

/// Adds the samples `lo..hi` into per-cluster `sums` (k x d) and `counts`,
/// in sample order.
pub(crate) fn accumulate(
    data: &Dataset,
    assignments: &[u32],
    lo: usize,
    hi: usize,
    sums: &mut [f32],
    counts: &mut [u32],
    be: &mut Backend,
) {
    let d = data.d();
    for i in lo..hi {
        be.other(1);
        let a = assignments[i] as usize;
        counts[a] += 1;
        let acc = &mut sums[a * d..(a + 1) * d];
        for (s, &x) in acc.iter_mut().zip(data.row(i)) {
            *s = be.add(*s, x);
        }
    }
}

/// Mean of one cluster from its sum and count; an empty cluster keeps `old`.
pub(crate) fn finish_centroid(sum: &[f32], count: u32, old: &[f32], out: &mut [f32], be: &mut Backend) {
    if count == 0 {
        out.copy_from_slice(old);
        return;
    }
    let c = be.from_i32(count as i32);
    for (o, &s) in out.iter_mut().zip(sum) {
        *o = be.div(s, c);
    }
}

/// Largest squared displacement of any centroid.
pub(crate) fn centroid_shift(old: &[f32], new: &[f32], d: usize, be: &mut Backend) -> f32 {
    let mut max = 0.0f32;
    for (o, n) in old.chunks_exact(d).zip(new.chunks_exact(d)) {
        let s = sq_euclidean_unchecked(o, n, be);
        be.other(1);
        if be.lt(max, s) {
            max = s;
        }
    }
    max
}

/// Assigns every sample to its nearest centroid. Returns how many
/// assignments changed (all of them on a fresh state).
pub fn kmeans_assign(state: &mut KMeansState, data: &Dataset, be: &mut Backend) -> Result<usize, KernelError> {
    check_shapes(state, data)?;
    let (k, d) = (state.k(), state.d());
    let mut e = vec![0.0f32; k];
    let fresh = state.assignments.len() != data.n_samples();
    let mut next = Vec::with_capacity(data.n_samples());
    for x in data.rows() {
        next.push(assign_sample(&state.centroids, d, x, &mut e, be));
    }
    let changed = if fresh { next.len() } else { next.iter().zip(&state.assignments).filter(|(a, b)| a != b).count() };
    state.assignments = next;
    Ok(changed)
}

/// Moves every centroid to the mean of its samples. Returns the largest
/// squared centroid displacement.
pub fn kmeans_update(state: &mut KMeansState, data: &Dataset, be: &mut Backend) -> Result<f32, KernelError> {
    check_shapes(state, data)?;
    if state.assignments.len() != data.n_samples() {
        return Err(KernelError::DimensionMismatch { expected: data.n_samples(), found: state.assignments.len() });
    }
    let (k, d) = (state.k(), state.d());
    let mut sums = vec![0.0f32; k * d];
    let mut counts = vec![0u32; k];
    accumulate(data, &state.assignments, 0, data.n_samples(), &mut sums, &mut counts, be);
    let mut next = vec![0.0f32; k * d];
    for j in 0..k {
        let r = j * d..(j + 1) * d;
        finish_centroid(&sums[r.clone()], counts[j], &state.centroids[r.clone()], &mut next[r], be);
    }
    let shift = centroid_shift(&state.centroids, &next, d, be);
    state.centroids = next;
    Ok(shift)
}

/// Lloyd iterations from the first `k` samples until the largest squared
/// centroid shift drops below epsilon or `max_iters` is reached.
pub fn kmeans_run(state: &mut KMeansState, data: &Dataset, be: &mut Backend) -> Result<KMeansRun, KernelError> {
    kmeans_run_observed(state, data, be, |_, _| {})
}

/// [`kmeans_run`] calling `observe(state, iteration)` after every update.
pub fn kmeans_run_observed<F>(
    state: &mut KMeansState,
    data: &Dataset,
    be: &mut Backend,
    mut observe: F,
) -> Result<KMeansRun, KernelError>
where
    F: FnMut(&KMeansState, u32),
{
    check_shapes(state, data)?;
    state.centroids = init_centroids(data, state.k());
    state.assignments.clear();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < state.max_iters() {
        iterations += 1;
        kmeans_assign(state, data, be)?;
        let shift = kmeans_update(state, data, be)?;
        observe(state, iterations);
        if be.lt(shift, state.epsilon()) {
            converged = true;
            break;
        }
    }
    Ok(KMeansRun { centroids: state.centroids.clone(), assignments: state.assignments.clone(), iterations, converged })
}
