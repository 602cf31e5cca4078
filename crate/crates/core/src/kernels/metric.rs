use super::{check_dim, Evidence, KernelError, Neighbor, NeighborList, Prediction};
use crate::model::KnnModel;
use crate::softfloat::Backend;

/// Squared Euclidean distance, accumulated left to right from zero.
pub fn sq_euclidean(p: &[f32], q: &[f32], be: &mut Backend) -> Result<f32, KernelError> {
    check_dim(p.len(), q.len())?;
    Ok(sq_euclidean_unchecked(p, q, be))
}

pub(crate) fn sq_euclidean_unchecked(p: &[f32], q: &[f32], be: &mut Backend) -> f32 {
    let mut acc = 0.0f32;
    for (&a, &b) in p.iter().zip(q) {
        be.other(1);
        let diff = be.sub(a, b);
        let sq = be.mul(diff, diff);
        acc = be.add(acc, sq);
    }
    acc
}

/// Is `(da, ia)` ordered strictly before `(db, ib)`? Distance first, then
/// lower id. Always costs two FP compares and one integer compare, so the
/// op count of a selection depends only on its shape, not on the data.
#[inline]
pub(crate) fn key_less(da: f32, ia: u32, db: f32, ib: u32, be: &mut Backend) -> bool {
    let lt = be.lt(da, db);
    let le = be.le(da, db);
    be.other(1);
    lt || (le && ia < ib)
}

/// Partial selection sort: moves the `k` smallest `(distance, id)` pairs to
/// the front of the arrays in ascending order (ties by lower id), leaving the
/// remaining `n - k` in unspecified order. Returns the number of key
/// comparisons, which is at most `n * k`.
pub fn partial_select_k(dists: &mut [f32], ids: &mut [u32], k: usize, be: &mut Backend) -> Result<u64, KernelError> {
    check_dim(dists.len(), ids.len())?;
    let n = dists.len();
    if k > n {
        return Err(KernelError::KTooLarge { k, n });
    }
    let mut comparisons = 0u64;
    for i in 0..k {
        let mut min = i;
        for j in i + 1..n {
            comparisons += 1;
            be.other(1);
            if key_less(dists[j], ids[j], dists[min], ids[min], be) {
                min = j;
            }
        }
        be.other(1);
        if min != i {
            dists.swap(i, min);
            ids.swap(i, min);
        }
    }
    Ok(comparisons)
}

/// Majority vote over the neighbors' labels; ties go to the lowest class.
/// Returns `(class, votes)`.
pub(crate) fn majority_vote(neighbors: &NeighborList, n_class: usize, be: &mut Backend) -> (usize, Vec<u32>) {
    let mut votes = vec![0u32; n_class];
    for nb in &neighbors.0 {
        be.other(1);
        votes[usize::from(nb.label)] += 1;
    }
    (super::vote_argmax(&votes, be), votes)
}

pub(crate) fn neighbor_list(dists: &[f32], ids: &[u32], labels: &[u16]) -> NeighborList {
    NeighborList(
        dists
            .iter()
            .zip(ids)
            .map(|(&distance, &index)| Neighbor { distance, index, label: labels[index as usize] })
            .collect(),
    )
}

/// The `k` nearest training samples to `x`.
pub fn knn_neighbors(m: &KnnModel, x: &[f32], be: &mut Backend) -> Result<NeighborList, KernelError> {
    check_dim(m.d(), x.len())?;
    let train = m.train();
    let mut dists: Vec<f32> = train.rows().map(|row| sq_euclidean_unchecked(row, x, be)).collect();
    let mut ids: Vec<u32> = (0..train.n_samples() as u32).collect();
    partial_select_k(&mut dists, &mut ids, m.k(), be)?;
    Ok(neighbor_list(&dists[..m.k()], &ids[..m.k()], m.train_labels()))
}

/// Most frequent label among the `k` nearest neighbors.
pub fn knn_infer(m: &KnnModel, x: &[f32], be: &mut Backend) -> Result<Prediction, KernelError> {
    let neighbors = knn_neighbors(m, x, be)?;
    let (class, _) = majority_vote(&neighbors, m.n_class(), be);
    Ok(Prediction { class, evidence: Evidence::Neighbors(neighbors) })
}
