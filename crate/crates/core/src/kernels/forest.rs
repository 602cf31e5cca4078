use super::{check_dim, Evidence, KernelError, Prediction};
use crate::model::{leaf_class, RfModel, Tree};
use crate::softfloat::Backend;

/// Follows `x` from the root to a leaf and returns the leaf's class.
///
/// Guards against trees that never passed validation: an out-of-range
/// child, a bad feature index, or more steps than there are nodes.
pub(crate) fn walk_tree(t: &Tree, x: &[f32], be: &mut Backend) -> Result<usize, KernelError> {
    let n = t.n_nodes();
    if n == 0 || t.threshold.len() != n || t.left.len() != n || t.right.len() != n {
        return Err(KernelError::MalformedTree("node arrays are empty or of unequal length".into()));
    }
    let mut node = 0usize;
    for _ in 0..=n {
        be.other(1);
        let f = t.feature[node];
        if f < 0 {
            return Ok(leaf_class(f));
        }
        let xf = *x
            .get(f as usize)
            .ok_or_else(|| KernelError::MalformedTree(format!("node {node} tests feature {f} of {}", x.len())))?;
        let child = if be.le(xf, t.threshold[node]) { t.left[node] } else { t.right[node] };
        if child < 0 || child as usize >= n {
            return Err(KernelError::MalformedTree(format!("node {node} has child {child} out of range")));
        }
        node = child as usize;
    }
    Err(KernelError::MalformedTree(format!("walk exceeded {n} steps")))
}

/// Single decision tree prediction.
pub fn dt_infer(t: &Tree, x: &[f32], be: &mut Backend) -> Result<usize, KernelError> {
    walk_tree(t, x, be)
}

/// Per-class vote counts over all trees.
pub fn rf_votes(m: &RfModel, x: &[f32], be: &mut Backend) -> Result<Vec<u32>, KernelError> {
    check_dim(m.d(), x.len())?;
    let mut votes = vec![0u32; m.n_class()];
    for t in m.trees() {
        let class = walk_tree(t, x, be)?;
        be.other(1);
        votes[class] += 1;
    }
    Ok(votes)
}

/// Index of the largest vote count; ties go to the lowest class.
pub(crate) fn vote_argmax(votes: &[u32], be: &mut Backend) -> usize {
    let mut best = 0;
    for i in 1..votes.len() {
        be.other(1);
        if votes[i] > votes[best] {
            best = i;
        }
    }
    best
}

/// Majority vote of the forest.
pub fn rf_infer(m: &RfModel, x: &[f32], be: &mut Backend) -> Result<Prediction, KernelError> {
    let votes = rf_votes(m, x, be)?;
    let class = vote_argmax(&votes, be);
    Ok(Prediction { class, evidence: Evidence::Votes(votes) })
}
