//! Regenerates the committed test fixtures.
//!
//! Builds three synthetic datasets (8x8 "digits", 28x28 "mnist", and a
//! 21-feature binary screening set), trains reference models in double
//! precision, rounds parameters to binary32 once at write time, and writes
//! golden labels computed by the double-precision predict paths.
//!
//!     cargo run --release -p nml-core --example gen_fixtures -- [OUT_DIR] [SEED]

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nml_core::model::{leaf_code, save_dataset, save_model};
use nml_core::{Dataset, GnbModel, KMeansState, KnnModel, LinearKind, LinearModel, Model, RfModel, Tree};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Rows of f64 features plus labels, before rounding.
struct Raw {
    x: Vec<Vec<f64>>,
    y: Vec<usize>,
    n_class: usize,
}

impl Raw {
    fn d(&self) -> usize {
        self.x[0].len()
    }

    fn to_dataset(&self) -> Dataset {
        let feats = self.x.iter().flatten().map(|&v| v as f32).collect();
        let labels = self.y.iter().map(|&c| c as u16).collect();
        Dataset::new(self.x.len(), self.d(), self.n_class, feats, Some(labels)).unwrap()
    }

    /// Features as the kernels will see them (rounded to binary32).
    fn rounded(&self) -> Vec<Vec<f64>> {
        self.x.iter().map(|r| r.iter().map(|&v| f64::from(v as f32)).collect()).collect()
    }
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller.
    let u: f64 = rng.gen_range(f64::EPSILON..1.0);
    let v: f64 = rng.gen();
    (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
}

/// Class prototypes on a `side x side` grid built from a few random strokes.
fn prototypes(rng: &mut ChaCha8Rng, side: usize, n_class: usize, strokes: usize) -> Vec<Vec<f64>> {
    (0..n_class)
        .map(|_| {
            let mut img = vec![0.0; side * side];
            for _ in 0..strokes {
                let (mut r, mut c) = (rng.gen_range(0.0..side as f64), rng.gen_range(0.0..side as f64));
                let angle: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                let len = rng.gen_range(side as f64 * 0.3..side as f64 * 0.8);
                let steps = (len * 2.0) as usize;
                for _ in 0..steps {
                    for (dr, dc) in [(0i64, 0i64), (0, 1), (1, 0)] {
                        let (rr, cc) = (r as i64 + dr, c as i64 + dc);
                        if (0..side as i64).contains(&rr) && (0..side as i64).contains(&cc) {
                            img[rr as usize * side + cc as usize] = 1.0;
                        }
                    }
                    r = (r + angle.sin() * 0.5).clamp(0.0, side as f64 - 1.0);
                    c = (c + angle.cos() * 0.5).clamp(0.0, side as f64 - 1.0);
                }
            }
            img
        })
        .collect()
}

/// Integer-valued 8x8 images in [0, 16].
fn digits(rng: &mut ChaCha8Rng, protos: &[Vec<f64>], n: usize) -> Raw {
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % protos.len();
        let row = protos[c].iter().map(|&p| (p * 12.0 + 2.0 + gauss(rng) * 7.0).round().clamp(0.0, 16.0)).collect();
        x.push(row);
        y.push(c);
    }
    Raw { x, y, n_class: protos.len() }
}

/// 28x28 images in [0, 1], quantized to 1/255.
fn mnist(rng: &mut ChaCha8Rng, protos: &[Vec<f64>], n: usize) -> Raw {
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let c = rng.gen_range(0..protos.len());
        let row = protos[c]
            .iter()
            .map(|&p| ((p * 0.6 + 0.2 + gauss(rng) * 0.9).clamp(0.0, 1.0) * 255.0).round() / 255.0)
            .collect();
        x.push(row);
        y.push(c);
    }
    Raw { x, y, n_class: protos.len() }
}

/// Binary 21-feature screening answers; two classes with different
/// per-question positive rates.
fn screening(rng: &mut ChaCha8Rng, rates: &[[f64; 21]; 2], n: usize) -> Raw {
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let c = usize::from(rng.gen_bool(0.4));
        x.push(rates[c].iter().map(|&p| if rng.gen_bool(p) { 1.0 } else { 0.0 }).collect());
        y.push(c);
    }
    Raw { x, y, n_class: 2 }
}

fn argmax(v: &[f64]) -> usize {
    (1..v.len()).fold(0, |best, i| if v[i] > v[best] { i } else { best })
}

struct Linear {
    w: Vec<Vec<f64>>,
    b: Vec<f64>,
}

impl Linear {
    fn scores(&self, x: &[f64]) -> Vec<f64> {
        self.w.iter().zip(&self.b).map(|(w, b)| w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + b).collect()
    }

    fn to_model(&self, kind: LinearKind) -> LinearModel {
        let d = self.w[0].len();
        let w = self.w.iter().flatten().map(|&v| v as f32).collect();
        let b = self.b.iter().map(|&v| v as f32).collect();
        LinearModel::new(kind, self.w.len(), d, w, b).unwrap()
    }
}

/// Multinomial logistic regression by full-batch gradient descent.
fn train_lr(data: &Raw, lr: f64, l2: f64, epochs: usize) -> Linear {
    let (c, d, n) = (data.n_class, data.d(), data.x.len() as f64);
    let mut m = Linear { w: vec![vec![0.0; d]; c], b: vec![0.0; c] };
    for _ in 0..epochs {
        let mut gw = vec![vec![0.0; d]; c];
        let mut gb = vec![0.0; c];
        for (x, &y) in data.x.iter().zip(&data.y) {
            let s = m.scores(x);
            let max = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let e: Vec<f64> = s.iter().map(|v| (v - max).exp()).collect();
            let z: f64 = e.iter().sum();
            for k in 0..c {
                let g = e[k] / z - if k == y { 1.0 } else { 0.0 };
                gb[k] += g;
                for (gj, xj) in gw[k].iter_mut().zip(x) {
                    *gj += g * xj;
                }
            }
        }
        for k in 0..c {
            m.b[k] -= lr * gb[k] / n;
            for (wj, gj) in m.w[k].iter_mut().zip(&gw[k]) {
                *wj -= lr * (gj / n + l2 * *wj);
            }
        }
    }
    m
}

/// One-vs-all linear SVM: squared-hinge loss, full-batch gradient descent.
fn train_svm(data: &Raw, lr: f64, l2: f64, epochs: usize) -> Linear {
    let (c, d, n) = (data.n_class, data.d(), data.x.len() as f64);
    let mut m = Linear { w: vec![vec![0.0; d]; c], b: vec![0.0; c] };
    for k in 0..c {
        for _ in 0..epochs {
            let mut gw = vec![0.0; d];
            let mut gb = 0.0;
            for (x, &y) in data.x.iter().zip(&data.y) {
                let t = if y == k { 1.0 } else { -1.0 };
                let s: f64 = m.w[k].iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + m.b[k];
                let slack = 1.0 - t * s;
                if slack > 0.0 {
                    gb -= 2.0 * slack * t;
                    for (gj, xj) in gw.iter_mut().zip(x) {
                        *gj -= 2.0 * slack * t * xj;
                    }
                }
            }
            m.b[k] -= lr * gb / n;
            for (wj, gj) in m.w[k].iter_mut().zip(&gw) {
                *wj -= lr * (gj / n + l2 * *wj);
            }
        }
    }
    m
}

struct Gnb {
    mu: Vec<Vec<f64>>,
    var: Vec<Vec<f64>>,
    prior: Vec<f64>,
}

impl Gnb {
    fn fit(data: &Raw) -> Gnb {
        let (c, d) = (data.n_class, data.d());
        let mut mu = vec![vec![0.0; d]; c];
        let mut var = vec![vec![0.0; d]; c];
        let mut count = vec![0.0; c];
        for (x, &y) in data.x.iter().zip(&data.y) {
            count[y] += 1.0;
            for (m, v) in mu[y].iter_mut().zip(x) {
                *m += v;
            }
        }
        for k in 0..c {
            mu[k].iter_mut().for_each(|m| *m /= count[k]);
        }
        for (x, &y) in data.x.iter().zip(&data.y) {
            for j in 0..d {
                var[y][j] += (x[j] - mu[y][j]).powi(2);
            }
        }
        // Smoothing proportional to the largest feature variance, floored.
        let max_var = (0..d)
            .map(|j| {
                let mean = data.x.iter().map(|x| x[j]).sum::<f64>() / data.x.len() as f64;
                data.x.iter().map(|x| (x[j] - mean).powi(2)).sum::<f64>() / data.x.len() as f64
            })
            .fold(0.0, f64::max);
        let eps = (1e-9 * max_var).max(1e-9);
        for k in 0..c {
            var[k].iter_mut().for_each(|v| *v = *v / count[k] + eps);
        }
        let total: f64 = count.iter().sum();
        Gnb { mu, var, prior: count.iter().map(|n| n / total).collect() }
    }

    fn scores(&self, x: &[f64]) -> Vec<f64> {
        (0..self.prior.len())
            .map(|k| {
                self.prior[k].ln()
                    + x.iter()
                        .enumerate()
                        .map(|(j, &v)| {
                            let s2 = self.var[k][j];
                            -0.5 * (2.0 * std::f64::consts::PI * s2).ln() - (v - self.mu[k][j]).powi(2) / (2.0 * s2)
                        })
                        .sum::<f64>()
            })
            .collect()
    }

    fn to_model(&self) -> GnbModel {
        let (c, d) = (self.prior.len(), self.mu[0].len());
        let mu = self.mu.iter().flatten().map(|&v| v as f32).collect();
        let var = self.var.iter().flatten().map(|&v| v as f32).collect();
        GnbModel::from_moments(c, d, mu, var, &self.prior).unwrap()
    }
}

#[derive(Default)]
struct TreeBuf {
    feature: Vec<i32>,
    threshold: Vec<f64>,
    left: Vec<i32>,
    right: Vec<i32>,
}

impl TreeBuf {
    fn push(&mut self) -> usize {
        self.feature.push(0);
        self.threshold.push(0.0);
        self.left.push(-1);
        self.right.push(-1);
        self.feature.len() - 1
    }

    fn predict(&self, x: &[f64]) -> usize {
        let mut node = 0;
        while self.feature[node] >= 0 {
            node =
                if x[self.feature[node] as usize] <= self.threshold[node] { self.left[node] } else { self.right[node] }
                    as usize;
        }
        (-self.feature[node] - 1) as usize
    }

    fn to_tree(&self) -> Tree {
        Tree::new(
            self.feature.clone(),
            self.threshold.iter().map(|&t| t as f32).collect(),
            self.left.clone(),
            self.right.clone(),
        )
    }
}

fn gini(counts: &[usize], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    1.0 - counts.iter().map(|&c| (c as f64 / n as f64).powi(2)).sum::<f64>()
}

fn majority(idx: &[usize], y: &[usize], n_class: usize) -> usize {
    let mut counts = vec![0; n_class];
    idx.iter().for_each(|&i| counts[y[i]] += 1);
    (1..n_class).fold(0, |best, c| if counts[c] > counts[best] { c } else { best })
}

/// Gini-split CART grown depth first; each node tries `mtry` random features.
#[allow(clippy::too_many_arguments)]
fn grow(
    t: &mut TreeBuf,
    node: usize,
    idx: &[usize],
    data: &Raw,
    depth: usize,
    max_depth: usize,
    mtry: usize,
    rng: &mut ChaCha8Rng,
) {
    let (x, y, nc) = (&data.x, &data.y, data.n_class);
    let pure = idx.iter().all(|&i| y[i] == y[idx[0]]);
    if pure || depth == max_depth || idx.len() < 4 {
        t.feature[node] = leaf_code(majority(idx, y, nc) as u32);
        return;
    }
    let mut feats: Vec<usize> = (0..data.d()).collect();
    feats.shuffle(rng);
    let mut best: Option<(f64, usize, f64)> = None;
    for &f in &feats[..mtry] {
        let mut order = idx.to_vec();
        order.sort_by(|&a, &b| x[a][f].partial_cmp(&x[b][f]).unwrap());
        let mut left = vec![0usize; nc];
        let mut right = vec![0usize; nc];
        order.iter().for_each(|&i| right[y[i]] += 1);
        for s in 0..order.len() - 1 {
            let i = order[s];
            left[y[i]] += 1;
            right[y[i]] -= 1;
            let (a, b) = (x[i][f], x[order[s + 1]][f]);
            if a == b {
                continue;
            }
            let (nl, nr) = (s + 1, order.len() - s - 1);
            let score = (nl as f64 * gini(&left, nl) + nr as f64 * gini(&right, nr)) / order.len() as f64;
            // Midpoint, rounded to binary32 so that both predict paths agree.
            let thr = f64::from(((a + b) / 2.0) as f32);
            if best.map_or(true, |(s0, _, _)| score < s0) && a <= thr && thr < b {
                best = Some((score, f, thr));
            }
        }
    }
    let Some((_, f, thr)) = best else {
        t.feature[node] = leaf_code(majority(idx, y, nc) as u32);
        return;
    };
    let (li, ri): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| x[i][f] <= thr);
    t.feature[node] = f as i32;
    t.threshold[node] = thr;
    let l = t.push();
    let r = t.push();
    t.left[node] = l as i32;
    t.right[node] = r as i32;
    grow(t, l, &li, data, depth + 1, max_depth, mtry, rng);
    grow(t, r, &ri, data, depth + 1, max_depth, mtry, rng);
}

fn train_forest(data: &Raw, n_trees: usize, max_depth: usize, rng: &mut ChaCha8Rng) -> Vec<TreeBuf> {
    let n = data.x.len();
    let mtry = (data.d() as f64).sqrt().round() as usize;
    (0..n_trees)
        .map(|_| {
            let idx: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
            let mut t = TreeBuf::default();
            t.push();
            grow(&mut t, 0, &idx, data, 0, max_depth, mtry, rng);
            t
        })
        .collect()
}

fn forest_predict(trees: &[TreeBuf], n_class: usize, x: &[f64]) -> usize {
    let mut votes = vec![0u32; n_class];
    trees.iter().for_each(|t| votes[t.predict(x)] += 1);
    (1..n_class).fold(0, |best, c| if votes[c] > votes[best] { c } else { best })
}

fn knn_predict(train: &[Vec<f64>], labels: &[usize], n_class: usize, k: usize, x: &[f64]) -> usize {
    let mut d: Vec<(f64, usize)> =
        train.iter().enumerate().map(|(i, t)| (t.iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum(), i)).collect();
    d.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut votes = vec![0; n_class];
    d[..k].iter().for_each(|&(_, i)| votes[labels[i]] += 1);
    (1..n_class).fold(0, |best, c| if votes[c] > votes[best] { c } else { best })
}

/// Lloyd's algorithm from the first k points; returns final assignments.
fn kmeans_assignments(x: &[Vec<f64>], k: usize, eps: f64, max_iters: usize) -> Vec<usize> {
    let d = x[0].len();
    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum::<f64>();
    let mut c: Vec<Vec<f64>> = x[..k].to_vec();
    let mut assign = vec![0; x.len()];
    for _ in 0..max_iters {
        for (a, xi) in assign.iter_mut().zip(x) {
            *a = (1..k).fold(0, |best, j| if dist(xi, &c[j]) < dist(xi, &c[best]) { j } else { best });
        }
        let mut next = c.clone();
        for (j, cj) in next.iter_mut().enumerate() {
            let members: Vec<&Vec<f64>> = x.iter().zip(&assign).filter(|(_, &a)| a == j).map(|(p, _)| p).collect();
            if !members.is_empty() {
                *cj = (0..d).map(|f| members.iter().map(|m| m[f]).sum::<f64>() / members.len() as f64).collect();
            }
        }
        let shift = c.iter().zip(&next).map(|(a, b)| dist(a, b)).fold(0.0, f64::max);
        c = next;
        if shift < eps {
            break;
        }
    }
    assign
}

fn write_labels(path: &Path, labels: impl IntoIterator<Item = usize>) {
    let mut s = String::new();
    for l in labels {
        writeln!(s, "{l}").unwrap();
    }
    fs::write(path, s).unwrap();
}

fn accuracy(pred: &[usize], truth: &[usize]) -> f64 {
    pred.iter().zip(truth).filter(|(a, b)| a == b).count() as f64 / truth.len() as f64
}

fn main() {
    let mut args = std::env::args().skip(1);
    let out: PathBuf = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures"));
    let seed: u64 = args.next().map(|s| s.parse().expect("seed must be an integer")).unwrap_or(0);
    fs::create_dir_all(&out).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut manifest = String::from("# model dataset golden_labels\n");

    let mut save = |name: &str, model: Model, dataset: &str, labels: Vec<usize>, truth: &[usize]| {
        fs::write(out.join(format!("{name}.nml")), save_model(&model)).unwrap();
        println!("{name:12} accuracy {:.3}", accuracy(&labels, truth));
        write_labels(&out.join(format!("{name}.labels")), labels);
        writeln!(manifest, "{name}.nml {dataset} {name}.labels").unwrap();
    };

    // 8x8 digits.
    let protos = prototypes(&mut rng, 8, 10, 3);
    let train = digits(&mut rng, &protos, 600);
    let test = digits(&mut rng, &protos, 100);
    fs::write(out.join("digits_test.nds"), save_dataset(&test.to_dataset())).unwrap();
    let xt = test.rounded();

    let lr = train_lr(&train, 0.01, 1e-4, 300);
    let pred = xt.iter().map(|x| argmax(&lr.scores(x))).collect();
    save("lr_digits", Model::Linear(lr.to_model(LinearKind::Lr)), "digits_test.nds", pred, &test.y);

    let svm = train_svm(&train, 1e-4, 1e-4, 300);
    let pred = xt.iter().map(|x| argmax(&svm.scores(x))).collect();
    save("svm_digits", Model::Linear(svm.to_model(LinearKind::Svm)), "digits_test.nds", pred, &test.y);

    let gnb = Gnb::fit(&train);
    let pred = xt.iter().map(|x| argmax(&gnb.scores(x))).collect();
    save("gnb_digits", Model::Gnb(gnb.to_model()), "digits_test.nds", pred, &test.y);

    let forest = train_forest(&train, 64, 8, &mut rng);
    let pred = xt.iter().map(|x| forest_predict(&forest, 10, x)).collect();
    let rf = RfModel::new(10, 64, forest.iter().map(TreeBuf::to_tree).collect()).unwrap();
    save("rf_digits", Model::Rf(rf), "digits_test.nds", pred, &test.y);

    // 28x28 images.
    let protos = prototypes(&mut rng, 28, 10, 4);
    let train = mnist(&mut rng, &protos, 500);
    let test = mnist(&mut rng, &protos, 100);
    fs::write(out.join("mnist_test.nds"), save_dataset(&test.to_dataset())).unwrap();
    let xt = test.rounded();

    let lr = train_lr(&train, 0.1, 1e-4, 150);
    let pred = xt.iter().map(|x| argmax(&lr.scores(x))).collect();
    save("lr_mnist", Model::Linear(lr.to_model(LinearKind::Lr)), "mnist_test.nds", pred, &test.y);

    let svm = train_svm(&train, 0.002, 1e-4, 150);
    let pred = xt.iter().map(|x| argmax(&svm.scores(x))).collect();
    save("svm_mnist", Model::Linear(svm.to_model(LinearKind::Svm)), "mnist_test.nds", pred, &test.y);

    let gnb = Gnb::fit(&train);
    let pred = xt.iter().map(|x| argmax(&gnb.scores(x))).collect();
    save("gnb_mnist", Model::Gnb(gnb.to_model()), "mnist_test.nds", pred, &test.y);

    // 21-question binary screening set.
    let mut rates = [[0.0; 21]; 2];
    for f in 0..21 {
        let base: f64 = rng.gen_range(0.1..0.5);
        rates[0][f] = base;
        rates[1][f] = (base + rng.gen_range(0.0..0.4)).min(0.95);
    }
    let train = screening(&mut rng, &rates, 1000);
    let test = screening(&mut rng, &rates, 100);
    let train_ds = train.to_dataset();
    fs::write(out.join("asd_train.nds"), save_dataset(&train_ds)).unwrap();
    fs::write(out.join("asd_test.nds"), save_dataset(&test.to_dataset())).unwrap();

    let pred = test.x.iter().map(|x| knn_predict(&train.x, &train.y, 2, 4, x)).collect();
    save("knn_asd", Model::Knn(KnnModel::new(train_ds, 4).unwrap()), "asd_test.nds", pred, &test.y);

    let (eps, max_iters) = (1e-6, 100);
    let assign = kmeans_assignments(&train.x, 2, f64::from(eps as f32), max_iters);
    let state = KMeansState::fresh(2, 21, eps as f32, max_iters as u32).unwrap();
    let truth = assign.clone();
    save("kmeans_asd", Model::KMeans(state), "asd_train.nds", assign, &truth);

    fs::write(out.join("MANIFEST"), manifest).unwrap();
    println!("fixtures written to {}", out.display());
}
