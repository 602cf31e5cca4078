//! Model and dataset containers for the six kernels, plus their binary
//! encodings (`NML1` models, `NDS1` datasets; see `docs/FORMAT.md`).
//!
//! Every constructor validates its invariants, so a value of any of these
//! types is well-formed. All types are immutable after construction except
//! [`KMeansState`], which the k-means driver owning it updates in place.

mod codec;

pub use codec::{load_dataset, load_model, save_dataset, save_model, DATASET_MAGIC, FORMAT_VERSION, MODEL_MAGIC};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("bad magic {0:?}")]
    BadMagic([u8; 4]),
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u8),
    #[error("unknown kernel id {0}")]
    UnknownKernel(u8),
    #[error("length mismatch: expected {expected} bytes, found {actual}")]
    LengthMismatch { expected: u64, actual: u64 },
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
}

fn violation(msg: impl Into<String>) -> ModelError {
    ModelError::InvariantViolation(msg.into())
}

fn check_len(name: &str, len: usize, expected: usize) -> Result<(), ModelError> {
    if len != expected {
        return Err(violation(format!("{name} has {len} entries, expected {expected}")));
    }
    Ok(())
}

/// Kernel identifiers as stored in the model file header.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum KernelKind {
    Lr = 0,
    Svm = 1,
    Gnb = 2,
    Knn = 3,
    KMeans = 4,
    Rf = 5,
}

impl KernelKind {
    pub const ALL: [KernelKind; 6] =
        [KernelKind::Lr, KernelKind::Svm, KernelKind::Gnb, KernelKind::Knn, KernelKind::KMeans, KernelKind::Rf];

    pub fn from_id(id: u8) -> Result<Self, ModelError> {
        Self::ALL.get(usize::from(id)).copied().ok_or(ModelError::UnknownKernel(id))
    }

    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Lr => "lr",
            KernelKind::Svm => "svm",
            KernelKind::Gnb => "gnb",
            KernelKind::Knn => "knn",
            KernelKind::KMeans => "kmeans",
            KernelKind::Rf => "rf",
        }
    }
}

impl std::str::FromStr for KernelKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|k| k.name().eq_ignore_ascii_case(s)).ok_or_else(|| format!("unknown kernel {s:?}"))
    }
}

impl std::fmt::Display for KernelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// `n_samples` row-major `d`-dimensional samples, optionally labeled.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    n_samples: usize,
    d: usize,
    n_class: usize,
    features: Vec<f32>,
    labels: Option<Vec<u16>>,
}

impl Dataset {
    /// `n_class` bounds the labels; it may be 0 for an unlabeled dataset.
    pub fn new(
        n_samples: usize,
        d: usize,
        n_class: usize,
        features: Vec<f32>,
        labels: Option<Vec<u16>>,
    ) -> Result<Self, ModelError> {
        if n_samples == 0 {
            return Err(violation("n_samples must be at least 1"));
        }
        if d == 0 {
            return Err(violation("d must be at least 1"));
        }
        check_len("features", features.len(), n_samples * d)?;
        if let Some(labels) = &labels {
            check_len("labels", labels.len(), n_samples)?;
            if let Some(bad) = labels.iter().find(|&&l| usize::from(l) >= n_class) {
                return Err(violation(format!("label {bad} not below n_class {n_class}")));
            }
        }
        Ok(Dataset { n_samples, d, n_class, features, labels })
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n_class(&self) -> usize {
        self.n_class
    }

    pub fn features(&self) -> &[f32] {
        &self.features
    }

    pub fn labels(&self) -> Option<&[u16]> {
        self.labels.as_deref()
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.features[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f32> {
        self.features.chunks_exact(self.d)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinearKind {
    Lr,
    Svm,
}

/// One-vs-all linear classifier: `rows x d` weights and `rows` biases.
///
/// `rows == 1` encodes a binary classifier deciding on the sign of its single
/// score (class 1 when positive); otherwise each row scores one class.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearModel {
    kind: LinearKind,
    rows: usize,
    d: usize,
    weights: Vec<f32>,
    bias: Vec<f32>,
}

impl LinearModel {
    pub fn new(kind: LinearKind, rows: usize, d: usize, weights: Vec<f32>, bias: Vec<f32>) -> Result<Self, ModelError> {
        if rows == 0 || d == 0 {
            return Err(violation("linear model needs at least one row and one feature"));
        }
        check_len("W", weights.len(), rows * d)?;
        check_len("b", bias.len(), rows)?;
        Ok(LinearModel { kind, rows, d, weights, bias })
    }

    pub fn kind(&self) -> LinearKind {
        self.kind
    }

    /// Number of weight rows (scores computed per query).
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of classes the model decides between.
    pub fn n_class(&self) -> usize {
        self.rows.max(2)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn weights(&self) -> &[f32] {
        &self.weights
    }

    pub fn bias(&self) -> &[f32] {
        &self.bias
    }

    pub fn weight_row(&self, i: usize) -> &[f32] {
        &self.weights[i * self.d..(i + 1) * self.d]
    }
}

/// Gaussian naive Bayes parameters in log form.
///
/// `log_norm[i, k] = -0.5 * ln(2 pi sigma2[i, k])` is precomputed offline so
/// that inference needs no logarithm.
#[derive(Clone, Debug, PartialEq)]
pub struct GnbModel {
    n_class: usize,
    d: usize,
    mu: Vec<f32>,
    sigma2: Vec<f32>,
    log_prior: Vec<f32>,
    log_norm: Vec<f32>,
}

impl GnbModel {
    pub fn new(
        n_class: usize,
        d: usize,
        mu: Vec<f32>,
        sigma2: Vec<f32>,
        log_prior: Vec<f32>,
        log_norm: Vec<f32>,
    ) -> Result<Self, ModelError> {
        if n_class == 0 || d == 0 {
            return Err(violation("GNB needs at least one class and one feature"));
        }
        check_len("mu", mu.len(), n_class * d)?;
        check_len("sigma2", sigma2.len(), n_class * d)?;
        check_len("log_norm", log_norm.len(), n_class * d)?;
        check_len("log_prior", log_prior.len(), n_class)?;
        // Written so that NaN fails too.
        if let Some(i) = sigma2.iter().position(|&s| !(s > 0.0)) {
            return Err(violation(format!("sigma2[{i}] = {} is not positive", sigma2[i])));
        }
        Ok(GnbModel { n_class, d, mu, sigma2, log_prior, log_norm })
    }

    /// Builds the model from means and variances, computing the log terms in
    /// double precision and rounding each once.
    pub fn from_moments(
        n_class: usize,
        d: usize,
        mu: Vec<f32>,
        sigma2: Vec<f32>,
        priors: &[f64],
    ) -> Result<Self, ModelError> {
        let log_norm =
            sigma2.iter().map(|&s| (-0.5 * (2.0 * std::f64::consts::PI * f64::from(s)).ln()) as f32).collect();
        let log_prior = priors.iter().map(|&p| p.ln() as f32).collect();
        Self::new(n_class, d, mu, sigma2, log_prior, log_norm)
    }

    pub fn n_class(&self) -> usize {
        self.n_class
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn mu(&self) -> &[f32] {
        &self.mu
    }

    pub fn sigma2(&self) -> &[f32] {
        &self.sigma2
    }

    pub fn log_prior(&self) -> &[f32] {
        &self.log_prior
    }

    pub fn log_norm(&self) -> &[f32] {
        &self.log_norm
    }
}

/// A stored, labeled training set queried by k-nearest-neighbors.
#[derive(Clone, Debug, PartialEq)]
pub struct KnnModel {
    train: Dataset,
    k: usize,
}

impl KnnModel {
    pub fn new(train: Dataset, k: usize) -> Result<Self, ModelError> {
        if train.labels().is_none() {
            return Err(violation("kNN training set must be labeled"));
        }
        if train.n_class() == 0 {
            return Err(violation("kNN n_class must be at least 1"));
        }
        if k == 0 || k > train.n_samples() {
            return Err(violation(format!("k = {k} outside [1, {}]", train.n_samples())));
        }
        Ok(KnnModel { train, k })
    }

    pub fn train(&self) -> &Dataset {
        &self.train
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_class(&self) -> usize {
        self.train.n_class()
    }

    pub fn d(&self) -> usize {
        self.train.d()
    }

    /// Same training set with a different neighbor count.
    pub fn with_k(&self, k: usize) -> Result<Self, ModelError> {
        KnnModel::new(self.train.clone(), k)
    }

    pub(crate) fn train_labels(&self) -> &[u16] {
        self.train.labels().expect("validated at construction")
    }
}

/// Mutable k-means state: centroids, per-sample cluster ids and the
/// stopping rule (squared centroid displacement below `epsilon`, or
/// `max_iters` iterations).
#[derive(Clone, Debug, PartialEq)]
pub struct KMeansState {
    k: usize,
    d: usize,
    pub(crate) centroids: Vec<f32>,
    pub(crate) assignments: Vec<u32>,
    epsilon: f32,
    max_iters: u32,
}

impl KMeansState {
    pub fn new(
        k: usize,
        d: usize,
        centroids: Vec<f32>,
        assignments: Vec<u32>,
        epsilon: f32,
        max_iters: u32,
    ) -> Result<Self, ModelError> {
        if k == 0 || d == 0 {
            return Err(violation("k-means needs k >= 1 and d >= 1"));
        }
        check_len("centroids", centroids.len(), k * d)?;
        if let Some(bad) = assignments.iter().find(|&&a| a as usize >= k) {
            return Err(violation(format!("assignment {bad} not below k = {k}")));
        }
        if !(epsilon > 0.0) {
            return Err(violation(format!("epsilon {epsilon} is not positive")));
        }
        if max_iters == 0 {
            return Err(violation("max_iters must be at least 1"));
        }
        Ok(KMeansState { k, d, centroids, assignments, epsilon, max_iters })
    }

    /// Fresh state with zero centroids and no assignments.
    pub fn fresh(k: usize, d: usize, epsilon: f32, max_iters: u32) -> Result<Self, ModelError> {
        Self::new(k, d, vec![0.0; k * d], Vec::new(), epsilon, max_iters)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn centroids(&self) -> &[f32] {
        &self.centroids
    }

    pub fn centroid(&self, j: usize) -> &[f32] {
        &self.centroids[j * self.d..(j + 1) * self.d]
    }

    pub fn assignments(&self) -> &[u32] {
        &self.assignments
    }

    pub fn epsilon(&self) -> f32 {
        self.epsilon
    }

    pub fn max_iters(&self) -> u32 {
        self.max_iters
    }

    pub fn with_epsilon(mut self, epsilon: f32) -> Result<Self, ModelError> {
        if !(epsilon > 0.0) {
            return Err(violation(format!("epsilon {epsilon} is not positive")));
        }
        self.epsilon = epsilon;
        Ok(self)
    }

    pub fn with_max_iters(mut self, max_iters: u32) -> Result<Self, ModelError> {
        if max_iters == 0 {
            return Err(violation("max_iters must be at least 1"));
        }
        self.max_iters = max_iters;
        Ok(self)
    }

    pub fn with_k(&self, k: usize) -> Result<Self, ModelError> {
        Self::fresh(k, self.d, self.epsilon, self.max_iters)
    }
}

/// One decision tree in four parallel node arrays.
///
/// A node is a leaf when `feature[node] < 0`; its class is
/// `-feature[node] - 1`. Internal nodes send `x[feature] <= threshold` to
/// `left`, everything else to `right`. Leaf child entries are ignored.
#[derive(Clone, Debug, PartialEq)]
pub struct Tree {
    pub(crate) feature: Vec<i32>,
    pub(crate) threshold: Vec<f32>,
    pub(crate) left: Vec<i32>,
    pub(crate) right: Vec<i32>,
}

impl Tree {
    /// Unvalidated; validation happens when the tree joins an [`RfModel`].
    pub fn new(feature: Vec<i32>, threshold: Vec<f32>, left: Vec<i32>, right: Vec<i32>) -> Self {
        Tree { feature, threshold, left, right }
    }

    /// A single-leaf tree predicting `class`.
    pub fn leaf(class: u32) -> Self {
        Tree::new(vec![leaf_code(class)], vec![0.0], vec![-1], vec![-1])
    }

    pub fn n_nodes(&self) -> usize {
        self.feature.len()
    }

    pub fn feature(&self) -> &[i32] {
        &self.feature
    }

    pub fn threshold(&self) -> &[f32] {
        &self.threshold
    }

    pub fn left(&self) -> &[i32] {
        &self.left
    }

    pub fn right(&self) -> &[i32] {
        &self.right
    }

    /// Checks array shapes, index ranges, leaf classes and acyclicity.
    pub fn validate(&self, d: usize, n_class: usize) -> Result<(), ModelError> {
        let n = self.feature.len();
        if n == 0 {
            return Err(violation("tree has no nodes"));
        }
        check_len("threshold", self.threshold.len(), n)?;
        check_len("left", self.left.len(), n)?;
        check_len("right", self.right.len(), n)?;
        for node in 0..n {
            let f = self.feature[node];
            if f < 0 {
                let class = leaf_class(f);
                if class >= n_class {
                    return Err(violation(format!("leaf {node} has class {class} >= n_class {n_class}")));
                }
                continue;
            }
            if f as usize >= d {
                return Err(violation(format!("node {node} tests feature {f} >= d {d}")));
            }
            for child in [self.left[node], self.right[node]] {
                if child < 0 || child as usize >= n {
                    return Err(violation(format!("node {node} has child {child} out of range")));
                }
            }
        }
        // Depth-first walk from the root; reaching a node already on the
        // current path means a cycle.
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            New,
            OnPath,
            Done,
        }
        let mut mark = vec![Mark::New; n];
        let mut stack: Vec<(usize, u8)> = vec![(0, 0)];
        mark[0] = Mark::OnPath;
        while let Some(top) = stack.last_mut() {
            let (node, next) = *top;
            if self.feature[node] < 0 || next == 2 {
                mark[node] = Mark::Done;
                stack.pop();
                continue;
            }
            top.1 += 1;
            let child = if next == 0 { self.left[node] } else { self.right[node] } as usize;
            match mark[child] {
                Mark::OnPath => return Err(violation(format!("tree has a cycle through node {child}"))),
                Mark::Done => {}
                Mark::New => {
                    mark[child] = Mark::OnPath;
                    stack.push((child, 0));
                }
            }
        }
        Ok(())
    }
}

/// Feature-array code of a leaf predicting `class`.
pub fn leaf_code(class: u32) -> i32 {
    -(class as i32) - 1
}

/// Class of a leaf given its (negative) feature-array code.
pub fn leaf_class(code: i32) -> usize {
    (-(code as i64) - 1) as usize
}

/// Random forest of array-encoded decision trees.
#[derive(Clone, Debug, PartialEq)]
pub struct RfModel {
    n_class: usize,
    d: usize,
    trees: Vec<Tree>,
}

impl RfModel {
    pub fn new(n_class: usize, d: usize, trees: Vec<Tree>) -> Result<Self, ModelError> {
        if n_class == 0 || d == 0 {
            return Err(violation("forest needs n_class >= 1 and d >= 1"));
        }
        if trees.is_empty() {
            return Err(violation("forest has no trees"));
        }
        for (i, t) in trees.iter().enumerate() {
            t.validate(d, n_class).map_err(|e| {
                violation(format!("tree {i}: {}", e.to_string().trim_start_matches("invariant violated: ")))
            })?;
        }
        Ok(RfModel { n_class, d, trees })
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    pub fn n_class(&self) -> usize {
        self.n_class
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }
}

/// Any of the five model containers, as stored in an `NML1` file.
#[derive(Clone, Debug, PartialEq)]
pub enum Model {
    Linear(LinearModel),
    Gnb(GnbModel),
    Knn(KnnModel),
    KMeans(KMeansState),
    Rf(RfModel),
}

impl Model {
    pub fn kind(&self) -> KernelKind {
        match self {
            Model::Linear(m) => match m.kind() {
                LinearKind::Lr => KernelKind::Lr,
                LinearKind::Svm => KernelKind::Svm,
            },
            Model::Gnb(_) => KernelKind::Gnb,
            Model::Knn(_) => KernelKind::Knn,
            Model::KMeans(_) => KernelKind::KMeans,
            Model::Rf(_) => KernelKind::Rf,
        }
    }

    pub fn d(&self) -> usize {
        match self {
            Model::Linear(m) => m.d(),
            Model::Gnb(m) => m.d(),
            Model::Knn(m) => m.d(),
            Model::KMeans(m) => m.d(),
            Model::Rf(m) => m.d(),
        }
    }

    /// Classes (or clusters, for k-means) the model outputs.
    pub fn n_class(&self) -> usize {
        match self {
            Model::Linear(m) => m.n_class(),
            Model::Gnb(m) => m.n_class(),
            Model::Knn(m) => m.n_class(),
            Model::KMeans(m) => m.k(),
            Model::Rf(m) => m.n_class(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stump() -> Tree {
        Tree::new(vec![0, leaf_code(0), leaf_code(1)], vec![0.5, 0.0, 0.0], vec![1, -1, -1], vec![2, -1, -1])
    }

    #[test]
    fn dataset_invariants() {
        assert!(Dataset::new(2, 2, 2, vec![0.0; 4], Some(vec![0, 1])).is_ok());
        assert!(matches!(Dataset::new(0, 2, 2, vec![], None), Err(ModelError::InvariantViolation(_))));
        assert!(Dataset::new(2, 2, 2, vec![0.0; 3], None).is_err());
        assert!(Dataset::new(2, 2, 2, vec![0.0; 4], Some(vec![0, 2])).is_err());
    }

    #[test]
    fn gnb_rejects_nonpositive_variance() {
        let ok = GnbModel::new(1, 1, vec![0.0], vec![1.0], vec![0.0], vec![0.0]);
        assert!(ok.is_ok());
        for bad in [0.0, -1.0, f32::NAN] {
            assert!(GnbModel::new(1, 1, vec![0.0], vec![bad], vec![0.0], vec![0.0]).is_err());
        }
    }

    #[test]
    fn leaf_encoding_round_trips() {
        for c in [0u32, 1, 2, 9, 1000] {
            assert_eq!(leaf_class(leaf_code(c)), c as usize);
            assert!(leaf_code(c) < 0);
        }
        assert_eq!(leaf_class(-3), 2);
    }

    #[test]
    fn tree_validation() {
        assert!(stump().validate(1, 2).is_ok());
        assert!(stump().validate(1, 1).is_err(), "leaf class out of range");
        assert!(stump().validate(0, 2).is_err(), "feature out of range");

        let mut cyclic = stump();
        cyclic.right[0] = 0;
        assert!(cyclic.validate(1, 2).unwrap_err().to_string().contains("cycle"));

        let mut out_of_range = stump();
        out_of_range.left[0] = 7;
        assert!(out_of_range.validate(1, 2).is_err());

        // Longer cycle: 0 -> 1 -> 2 -> 1.
        let deep = Tree::new(vec![0, 0, 0, leaf_code(0)], vec![0.0; 4], vec![1, 2, 1, -1], vec![3, 3, 3, -1]);
        assert!(deep.validate(1, 1).is_err());

        // Shared subtree is a DAG, not a cycle.
        let shared = Tree::new(vec![0, 0, leaf_code(0)], vec![0.0; 3], vec![1, 2, -1], vec![2, 2, -1]);
        assert!(shared.validate(1, 1).is_ok());
    }

    #[test]
    fn kernel_ids() {
        for k in KernelKind::ALL {
            assert_eq!(KernelKind::from_id(k.id()).unwrap(), k);
            assert_eq!(k.name().parse::<KernelKind>().unwrap(), k);
        }
        assert_eq!(KernelKind::from_id(6), Err(ModelError::UnknownKernel(6)));
    }

    #[test]
    fn knn_k_bounds() {
        let ds = Dataset::new(3, 1, 2, vec![0.0, 1.0, 2.0], Some(vec![0, 1, 1])).unwrap();
        assert!(KnnModel::new(ds.clone(), 3).is_ok());
        assert!(KnnModel::new(ds.clone(), 4).is_err());
        assert!(KnnModel::new(ds, 0).is_err());
        let unlabeled = Dataset::new(3, 1, 0, vec![0.0; 3], None).unwrap();
        assert!(KnnModel::new(unlabeled, 1).is_err());
    }
}
