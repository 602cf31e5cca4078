//! Fixture loading and oracles shared by the integration tests.
#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use nml_core::kernels::{self, KMeansRun, Prediction};
use nml_core::model::{load_dataset, load_model};
use nml_core::parallel::{self, ClusterConfig};
use nml_core::{Backend, Dataset, KMeansState, KernelError, Model};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures")
}

pub struct Fixture {
    pub name: String,
    pub model_file: String,
    pub data_file: String,
    pub model: Model,
    pub data: Dataset,
    pub golden: Vec<u32>,
}

/// Every (model, dataset, golden labels) triple listed in the manifest.
pub fn load_fixtures() -> Vec<Fixture> {
    let dir = fixtures_dir();
    let manifest = fs::read_to_string(dir.join("MANIFEST")).expect("fixture manifest");
    manifest
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|line| {
            let parts: Vec<&str> = line.split_whitespace().collect();
            let [model_file, data_file, labels_file] = parts[..] else { panic!("bad manifest line {line:?}") };
            let model = load_model(&fs::read(dir.join(model_file)).unwrap()).unwrap();
            let data = load_dataset(&fs::read(dir.join(data_file)).unwrap()).unwrap();
            let golden =
                fs::read_to_string(dir.join(labels_file)).unwrap().lines().map(|l| l.trim().parse().unwrap()).collect();
            Fixture {
                name: model_file.trim_end_matches(".nml").to_string(),
                model_file: model_file.to_string(),
                data_file: data_file.to_string(),
                model,
                data,
                golden,
            }
        })
        .collect()
}

pub fn fixture(name: &str) -> Fixture {
    load_fixtures().into_iter().find(|f| f.name == name).unwrap_or_else(|| panic!("no fixture {name}"))
}

/// What one kernel invocation produced.
pub enum Output {
    /// One prediction per query row.
    Predictions(Vec<Prediction>),
    KMeans(KMeansRun),
}

impl Output {
    pub fn labels(&self) -> Vec<u32> {
        match self {
            Output::Predictions(p) => p.iter().map(|p| p.class as u32).collect(),
            Output::KMeans(r) => r.assignments.clone(),
        }
    }

    pub fn bit_eq(&self, other: &Output) -> bool {
        match (self, other) {
            (Output::Predictions(a), Output::Predictions(b)) => {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.bit_eq(y))
            }
            (Output::KMeans(a), Output::KMeans(b)) => a.bit_eq(b),
            _ => false,
        }
    }

    /// Winning score margin per query, for score-based kernels.
    pub fn margins(&self) -> Vec<Option<f32>> {
        match self {
            Output::Predictions(p) => p.iter().map(|p| p.evidence.score_margin()).collect(),
            Output::KMeans(r) => vec![None; r.assignments.len()],
        }
    }
}

fn kmeans_state(model: &Model) -> KMeansState {
    match model {
        Model::KMeans(s) => s.clone(),
        _ => unreachable!(),
    }
}

pub fn run_sequential(model: &Model, data: &Dataset, be: &mut Backend) -> Result<Output, KernelError> {
    let per_row = |f: &mut dyn FnMut(&[f32], &mut Backend) -> Result<Prediction, KernelError>, be: &mut Backend| {
        data.rows().map(|x| f(x, be)).collect::<Result<Vec<_>, _>>().map(Output::Predictions)
    };
    match model {
        Model::Linear(m) => per_row(&mut |x, be| kernels::linear_infer(m, x, be), be),
        Model::Gnb(m) => per_row(&mut |x, be| kernels::gnb_infer(m, x, be), be),
        Model::Knn(m) => per_row(&mut |x, be| kernels::knn_infer(m, x, be), be),
        Model::Rf(m) => per_row(&mut |x, be| kernels::rf_infer(m, x, be), be),
        Model::KMeans(_) => kernels::kmeans_run(&mut kmeans_state(model), data, be).map(Output::KMeans),
    }
}

pub fn run_parallel(
    model: &Model,
    data: &Dataset,
    cfg: &ClusterConfig,
    be: &mut Backend,
) -> Result<Output, KernelError> {
    type ParFn<'a> = dyn FnMut(&[f32], &mut Backend) -> Result<parallel::ParOutput<Prediction>, KernelError> + 'a;
    let per_row = |f: &mut ParFn<'_>, be: &mut Backend| {
        data.rows().map(|x| f(x, be).map(|o| o.value)).collect::<Result<Vec<_>, _>>().map(Output::Predictions)
    };
    match model {
        Model::Linear(m) => per_row(&mut |x, be| parallel::par_linear_infer(m, x, cfg, be), be),
        Model::Gnb(m) => per_row(&mut |x, be| parallel::par_gnb_infer(m, x, cfg, be), be),
        Model::Knn(m) => per_row(&mut |x, be| parallel::par_knn_infer(m, x, cfg, be), be),
        Model::Rf(m) => per_row(&mut |x, be| parallel::par_rf_infer(m, x, cfg, be), be),
        Model::KMeans(_) => {
            parallel::par_kmeans_run(&mut kmeans_state(model), data, cfg, be).map(|o| Output::KMeans(o.value))
        }
    }
}

pub fn rational(x: f32) -> BigRational {
    BigRational::from_float(f64::from(x)).expect("finite")
}

/// Within-cluster sum of squared distances, in exact arithmetic.
pub fn exact_distortion(data: &Dataset, centroids: &[f32], assignments: &[u32]) -> BigRational {
    let d = data.d();
    let mut total = BigRational::zero();
    for (x, &a) in data.rows().zip(assignments) {
        let c = &centroids[a as usize * d..(a as usize + 1) * d];
        for (&xi, &ci) in x.iter().zip(c) {
            let diff = rational(xi) - rational(ci);
            total += &diff * &diff;
        }
    }
    total
}

pub fn big(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}
