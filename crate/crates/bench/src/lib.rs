//! Seeded synthetic models and query sets for the benchmarks.
//!
//! Shapes follow the small-device workloads the kernels target: 64 features
//! and 10 classes for the classifiers, 21 binary-ish features for kNN and
//! k-means.

use nml_core::model::{leaf_code, KernelKind, LinearKind, LinearModel, Tree};
use nml_core::{Dataset, GnbModel, KMeansState, KnnModel, Model, RfModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const D: usize = 64;
pub const N_CLASS: usize = 10;
pub const ASD_D: usize = 21;

fn uniform(rng: &mut ChaCha8Rng, n: usize, lo: f32, hi: f32) -> Vec<f32> {
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}

fn binary(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<f32> {
    (0..n * d).map(|_| if rng.gen_bool(0.5) { 1.0 } else { 0.0 }).collect()
}

/// Random tree of the given depth; every internal node splits a random
/// feature at a random threshold.
fn random_tree(rng: &mut ChaCha8Rng, depth: u32, d: usize) -> Tree {
    let (mut feature, mut threshold, mut left, mut right) = (vec![], vec![], vec![], vec![]);
    fn grow(
        rng: &mut ChaCha8Rng,
        depth: u32,
        d: usize,
        nodes: &mut (&mut Vec<i32>, &mut Vec<f32>, &mut Vec<i32>, &mut Vec<i32>),
    ) -> i32 {
        let id = nodes.0.len();
        if depth == 0 {
            nodes.0.push(leaf_code(rng.gen_range(0..N_CLASS as u32)));
            nodes.1.push(0.0);
            nodes.2.push(-1);
            nodes.3.push(-1);
            return id as i32;
        }
        nodes.0.push(rng.gen_range(0..d as i32));
        nodes.1.push(rng.gen_range(0.0..16.0));
        nodes.2.push(-1);
        nodes.3.push(-1);
        let l = grow(rng, depth - 1, d, nodes);
        let r = grow(rng, depth - 1, d, nodes);
        nodes.2[id] = l;
        nodes.3[id] = r;
        id as i32
    }
    grow(rng, depth, d, &mut (&mut feature, &mut threshold, &mut left, &mut right));
    Tree::new(feature, threshold, left, right)
}

/// A model of the given kind plus `n_queries` rows to run it on.
pub fn workload(kind: KernelKind, n_queries: usize, seed: u64) -> (Model, Dataset) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let digits =
        |rng: &mut ChaCha8Rng| Dataset::new(n_queries, D, 0, uniform(rng, n_queries * D, 0.0, 16.0), None).unwrap();
    match kind {
        KernelKind::Lr | KernelKind::Svm => {
            let lk = if kind == KernelKind::Lr { LinearKind::Lr } else { LinearKind::Svm };
            let w = uniform(&mut rng, N_CLASS * D, -0.1, 0.1);
            let b = uniform(&mut rng, N_CLASS, -1.0, 1.0);
            let m = LinearModel::new(lk, N_CLASS, D, w, b).unwrap();
            (Model::Linear(m), digits(&mut rng))
        }
        KernelKind::Gnb => {
            let mu = uniform(&mut rng, N_CLASS * D, 0.0, 16.0);
            let var = uniform(&mut rng, N_CLASS * D, 1.0, 20.0);
            let m = GnbModel::from_moments(N_CLASS, D, mu, var, &[0.1; N_CLASS]).unwrap();
            (Model::Gnb(m), digits(&mut rng))
        }
        KernelKind::Knn => {
            let n_train = 900;
            let labels = (0..n_train).map(|_| rng.gen_range(0..2)).collect();
            let train = Dataset::new(n_train, ASD_D, 2, binary(&mut rng, n_train, ASD_D), Some(labels)).unwrap();
            let queries = Dataset::new(n_queries, ASD_D, 0, binary(&mut rng, n_queries, ASD_D), None).unwrap();
            (Model::Knn(KnnModel::new(train, 4).unwrap()), queries)
        }
        KernelKind::KMeans => {
            let data = Dataset::new(n_queries, ASD_D, 0, binary(&mut rng, n_queries, ASD_D), None).unwrap();
            (Model::KMeans(KMeansState::fresh(2, ASD_D, 1e-6, 100).unwrap()), data)
        }
        KernelKind::Rf => {
            let trees = (0..64).map(|_| random_tree(&mut rng, 8, D)).collect();
            (Model::Rf(RfModel::new(N_CLASS, D, trees).unwrap()), digits(&mut rng))
        }
    }
}
