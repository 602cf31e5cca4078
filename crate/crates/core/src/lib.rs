//! Sequential and fork-join parallel inference kernels for small ML models
//! (logistic regression, linear SVM, Gaussian naive Bayes, kNN, k-means and
//! random forests) over a bit-exact soft-float binary32 backend, with
//! operation counting and Amdahl-style speedup analysis.

pub mod kernels;
pub mod model;
pub mod parallel;
pub mod perf;
pub mod softfloat;

pub use kernels::{KernelError, Prediction};
pub use model::{
    Dataset, GnbModel, KMeansState, KernelKind, KnnModel, LinearKind, LinearModel, Model, ModelError, RfModel, Tree,
};
pub use parallel::{ClusterConfig, Exec};
pub use perf::{OpCounters, PerfError, SpeedupReport};
pub use softfloat::{Backend, Mode};
