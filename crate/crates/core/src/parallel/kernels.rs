use std::sync::Mutex;

use super::{partitions, split_regions, Axis, Cluster, ClusterConfig, ParOutput};
use crate::kernels::{
    accumulate, argmax, assign_sample, centroid_shift, check_dim, decide_linear, dot, finish_centroid, gnb_partial,
    init_centroids, majority_vote, neighbor_list, partial_select_k, sq_euclidean_unchecked, vote_argmax, walk_tree,
    Evidence, KMeansRun, KernelError, Prediction, ScoreVector,
};
use crate::model::{Dataset, GnbModel, KMeansState, KnnModel, LinearModel, RfModel};
use crate::softfloat::Backend;

/// `R[row][0] + R[row][1] + ... + R[row][n-1] + tail`, in core order.
fn combine(r: &[Vec<f32>], row: usize, tail: f32, be: &mut Backend) -> f32 {
    let mut acc = r[0][row];
    for col in &r[1..] {
        be.other(1);
        acc = be.add(acc, col[row]);
    }
    be.add(acc, tail)
}

/// Column-partitioned partial scores into R, then row-partitioned
/// combination with `tail[row]`. Returns the combined score vector.
fn column_scores<F>(
    cl: &mut Cluster<'_>,
    d: usize,
    rows: usize,
    tail: &[f32],
    partial: F,
) -> Result<ScoreVector, KernelError>
where
    F: Fn(usize, usize, usize, &mut Backend) -> f32 + Sync,
{
    let n = cl.n_cores();
    let cols = partitions(d, n, Axis::Columns)?;
    let mut r = vec![vec![0.0f32; rows]; n];
    cl.phase(&mut r, |id, col, be| {
        let p = cols[id];
        for (row, slot) in col.iter_mut().enumerate() {
            *slot = partial(row, p.lb, p.ub, be);
        }
    });
    let row_parts = partitions(rows, n, Axis::Rows)?;
    let mut scores = vec![0.0f32; rows];
    let mut regions = split_regions(&mut scores, &row_parts);
    let r = &r;
    cl.phase(&mut regions, |id, out, be| {
        let lb = row_parts[id].lb;
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = combine(r, lb + i, tail[lb + i], be);
        }
    });
    Ok(ScoreVector(scores))
}

/// LR/SVM: partial dot products over feature chunks, row-wise combination
/// with the bias, then activation and argmax on the master.
pub fn par_linear_infer(
    m: &LinearModel,
    x: &[f32],
    cfg: &ClusterConfig,
    be: &mut Backend,
) -> Result<ParOutput<Prediction>, KernelError> {
    check_dim(m.d(), x.len())?;
    let mut cl = Cluster::new(*cfg, be);
    let raw = column_scores(&mut cl, m.d(), m.rows(), m.bias(), |row, lb, ub, be| {
        dot(&m.weight_row(row)[lb..ub], &x[lb..ub], be)
    })?;
    let value = cl.serial(|be| decide_linear(m.kind(), raw, be));
    Ok(ParOutput { value, profile: cl.finish() })
}

/// GNB: partial log-likelihood sums over feature chunks, row-wise addition
/// of the log priors, then argmax on the master.
pub fn par_gnb_infer(
    m: &GnbModel,
    x: &[f32],
    cfg: &ClusterConfig,
    be: &mut Backend,
) -> Result<ParOutput<Prediction>, KernelError> {
    check_dim(m.d(), x.len())?;
    let mut cl = Cluster::new(*cfg, be);
    let raw = column_scores(&mut cl, m.d(), m.n_class(), m.log_prior(), |class, lb, ub, be| {
        gnb_partial(m, class, x, lb, ub, be)
    })?;
    let value = cl.serial(|be| {
        let class = argmax(raw.as_slice(), be);
        Prediction { class, evidence: Evidence::Scores { raw, probs: None } }
    });
    Ok(ParOutput { value, profile: cl.finish() })
}

struct LocalNeighbors<'a> {
    e: &'a mut [f32],
    ids: &'a mut [u32],
}

/// kNN: each worker computes the distances to its slice of the training set
/// and selects its local k nearest; the master then selects the global k
/// from the `n_cores * k` candidates and votes.
pub fn par_knn_infer(
    m: &KnnModel,
    x: &[f32],
    cfg: &ClusterConfig,
    be: &mut Backend,
) -> Result<ParOutput<Prediction>, KernelError> {
    check_dim(m.d(), x.len())?;
    let n = cfg.n_cores();
    let train = m.train();
    let total = train.n_samples();
    let k = m.k();
    let parts = partitions(total, n, Axis::Rows)?;
    let chunk = parts.iter().map(|p| p.len()).min().unwrap_or(0);
    if k > chunk {
        return Err(if n == 1 {
            KernelError::KTooLarge { k, n: total }
        } else {
            KernelError::KTooLargeForChunk { k, chunk }
        });
    }

    let mut e = vec![0.0f32; total];
    let mut ids: Vec<u32> = (0..total as u32).collect();
    let mut locals: Vec<LocalNeighbors<'_>> = split_regions(&mut e, &parts)
        .into_iter()
        .zip(split_regions(&mut ids, &parts))
        .map(|(e, ids)| LocalNeighbors { e, ids })
        .collect();

    let mut cl = Cluster::new(*cfg, be);
    cl.phase(&mut locals, |id, l, be| {
        let lb = parts[id].lb;
        for (i, slot) in l.e.iter_mut().enumerate() {
            *slot = sq_euclidean_unchecked(train.row(lb + i), x, be);
        }
        partial_select_k(l.e, l.ids, k, be).expect("k fits every chunk");
    });
    let value = cl.serial(|be| {
        let (dists, ids) = if n == 1 {
            (locals[0].e[..k].to_vec(), locals[0].ids[..k].to_vec())
        } else {
            let mut cd: Vec<f32> = locals.iter().flat_map(|l| l.e[..k].iter().copied()).collect();
            let mut ci: Vec<u32> = locals.iter().flat_map(|l| l.ids[..k].iter().copied()).collect();
            partial_select_k(&mut cd, &mut ci, k, be).expect("n_cores * k candidates");
            cd.truncate(k);
            ci.truncate(k);
            (cd, ci)
        };
        let neighbors = neighbor_list(&dists, &ids, m.train_labels());
        let (class, _) = majority_vote(&neighbors, m.n_class(), be);
        Prediction { class, evidence: Evidence::Neighbors(neighbors) }
    });
    Ok(ParOutput { value, profile: cl.finish() })
}

struct LocalCentroids {
    sums: Vec<f32>,
    counts: Vec<u32>,
}

/// k-means: per iteration, row-partitioned assignment, per-worker centroid
/// accumulators, then each worker reduces the clusters it owns (cluster `j`
/// belongs to worker `j mod n_cores`) across all accumulators. The master
/// tests convergence.
pub fn par_kmeans_run(
    state: &mut KMeansState,
    data: &Dataset,
    cfg: &ClusterConfig,
    be: &mut Backend,
) -> Result<ParOutput<KMeansRun>, KernelError> {
    check_dim(state.d(), data.d())?;
    let (k, d, total) = (state.k(), state.d(), data.n_samples());
    if k > total {
        return Err(KernelError::KTooLarge { k, n: total });
    }
    let n = cfg.n_cores();
    let parts = partitions(total, n, Axis::Rows)?;
    state.centroids = init_centroids(data, k);
    state.assignments = vec![0; total];

    let mut e: Vec<Vec<f32>> = vec![vec![0.0; k]; n];
    let mut local: Vec<LocalCentroids> =
        (0..n).map(|_| LocalCentroids { sums: vec![0.0; k * d], counts: vec![0; k] }).collect();
    let mut owned: Vec<Vec<f32>> = vec![Vec::new(); n];

    let mut cl = Cluster::new(*cfg, be);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < state.max_iters() {
        iterations += 1;

        let centroids = &state.centroids;
        let mut assign: Vec<(&mut [u32], &mut Vec<f32>)> =
            split_regions(&mut state.assignments, &parts).into_iter().zip(e.iter_mut()).collect();
        cl.phase(&mut assign, |id, (a, e), be| {
            let lb = parts[id].lb;
            for (i, slot) in a.iter_mut().enumerate() {
                *slot = assign_sample(centroids, d, data.row(lb + i), e, be);
            }
        });

        let assignments = &state.assignments;
        cl.phase(&mut local, |id, u, be| {
            u.sums.fill(0.0);
            u.counts.fill(0);
            accumulate(data, assignments, parts[id].lb, parts[id].ub, &mut u.sums, &mut u.counts, be);
        });

        let local_ref = &local;
        cl.phase(&mut owned, |id, out, be| {
            out.clear();
            for j in (id..k).step_by(n) {
                let r = j * d..(j + 1) * d;
                let mut sum = local_ref[0].sums[r.clone()].to_vec();
                let mut count = local_ref[0].counts[j];
                for u in &local_ref[1..] {
                    be.other(1);
                    count += u.counts[j];
                    for (s, &v) in sum.iter_mut().zip(&u.sums[r.clone()]) {
                        *s = be.add(*s, v);
                    }
                }
                let mut c = vec![0.0f32; d];
                finish_centroid(&sum, count, &centroids[r], &mut c, be);
                out.extend_from_slice(&c);
            }
        });

        let mut next = vec![0.0f32; k * d];
        for (id, out) in owned.iter().enumerate() {
            for (slot, j) in (id..k).step_by(n).enumerate() {
                next[j * d..(j + 1) * d].copy_from_slice(&out[slot * d..(slot + 1) * d]);
            }
        }
        let eps = state.epsilon();
        let done = cl.serial(|be| {
            let shift = centroid_shift(&state.centroids, &next, d, be);
            be.lt(shift, eps)
        });
        state.centroids = next;
        if done {
            converged = true;
            break;
        }
    }
    let value =
        KMeansRun { centroids: state.centroids.clone(), assignments: state.assignments.clone(), iterations, converged };
    Ok(ParOutput { value, profile: cl.finish() })
}

/// RF: trees statically partitioned across workers; every vote goes through
/// a mutex-guarded shared tally; the master takes the argmax.
pub fn par_rf_infer(
    m: &RfModel,
    x: &[f32],
    cfg: &ClusterConfig,
    be: &mut Backend,
) -> Result<ParOutput<Prediction>, KernelError> {
    check_dim(m.d(), x.len())?;
    let n = cfg.n_cores();
    let parts = partitions(m.n_trees(), n, Axis::Rows)?;
    let votes = Mutex::new(vec![0u32; m.n_class()]);
    let mut status: Vec<Result<(), KernelError>> = vec![Ok(()); n];

    let mut cl = Cluster::new(*cfg, be);
    cl.phase(&mut status, |id, status, be| {
        for t in &m.trees()[parts[id].range()] {
            match walk_tree(t, x, be) {
                Ok(class) => {
                    let mut v = votes.lock().unwrap_or_else(|p| p.into_inner());
                    be.other(1);
                    v[class] += 1;
                }
                Err(err) => {
                    *status = Err(err);
                    return;
                }
            }
        }
    });
    status.into_iter().collect::<Result<(), _>>()?;
    let votes = votes.into_inner().unwrap_or_else(|p| p.into_inner());
    let value = cl.serial(|be| {
        let class = vote_argmax(&votes, be);
        Prediction { class, evidence: Evidence::Votes(votes) }
    });
    Ok(ParOutput { value, profile: cl.finish() })
}
