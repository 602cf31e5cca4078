use serde::{Deserialize, Serialize};

use super::{amdahl, flop_intensity, OpCounters, PerfError};
use crate::kernels::{self, KMeansRun, Prediction};
use crate::model::{Dataset, GnbModel, KMeansState, KnnModel, LinearModel, Model, RfModel};
use crate::parallel::{self, ClusterConfig};
use crate::softfloat::{Backend, Mode};

/// Operation tallies of one parallel run: for every fork-join phase, one
/// entry per worker; plus everything executed by the master alone.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseProfile {
    pub parallel: Vec<Vec<OpCounters>>,
    pub serial: OpCounters,
}

impl PhaseProfile {
    /// Appends another run's phases (e.g. the next query of a batch).
    pub fn extend(&mut self, other: PhaseProfile) {
        self.parallel.extend(other.parallel);
        self.serial += other.serial;
    }

    /// Busiest worker's total over all phases, plus the serial part.
    pub fn critical_path(&self) -> u64 {
        self.per_worker().iter().map(OpCounters::total).max().unwrap_or(0) + self.serial.total()
    }

    /// Total work per worker over all phases.
    pub fn per_worker(&self) -> Vec<OpCounters> {
        let n = self.parallel.iter().map(Vec::len).max().unwrap_or(0);
        let mut out = vec![OpCounters::default(); n];
        for phase in &self.parallel {
            for (acc, c) in out.iter_mut().zip(phase) {
                *acc += *c;
            }
        }
        out
    }

    /// All work, parallel and serial.
    pub fn total(&self) -> OpCounters {
        self.parallel.iter().flatten().copied().sum::<OpCounters>() + self.serial
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpeedupReport {
    pub n_cores: usize,
    pub seq_ops: OpCounters,
    pub per_worker_ops: Vec<OpCounters>,
    pub serial_ops: OpCounters,
    pub critical_path_ops: u64,
    /// Share of the sequential op count that the parallel run distributes.
    pub parallel_fraction: f64,
    pub theoretical: f64,
    pub achieved: f64,
    /// Percentage of sequential ops that are floating point.
    pub flop_intensity: f64,
}

/// Amdahl and achieved speedup of a parallel run against its sequential
/// counterpart, both measured in counted operations.
pub fn speedup_report(seq: &OpCounters, profile: &PhaseProfile, n_cores: usize) -> Result<SpeedupReport, PerfError> {
    let seq_total = seq.total();
    if seq_total == 0 {
        return Err(PerfError::EmptyCounters);
    }
    let cores = u32::try_from(n_cores).map_err(|_| PerfError::BadCores)?;
    let serial = profile.serial.total();
    let p = (seq_total.saturating_sub(serial)) as f64 / seq_total as f64;
    let critical = profile.critical_path();
    if critical == 0 {
        return Err(PerfError::EmptyCounters);
    }
    Ok(SpeedupReport {
        n_cores,
        seq_ops: *seq,
        per_worker_ops: profile.per_worker(),
        serial_ops: profile.serial,
        critical_path_ops: critical,
        parallel_fraction: p,
        theoretical: amdahl(p, cores)?,
        achieved: seq_total as f64 / critical as f64,
        flop_intensity: flop_intensity(seq)?,
    })
}

type SeqFn<'f> = dyn FnMut(&[f32], &mut Backend) -> Result<Prediction, kernels::KernelError> + 'f;
type ParFn<'f> = dyn FnMut(&[f32], &mut Backend) -> Result<parallel::ParOutput<Prediction>, kernels::KernelError> + 'f;

/// A kernel plus its inputs. Inference kernels run once per query row.
#[derive(Clone, Copy, Debug)]
pub enum Workload<'a> {
    Linear { model: &'a LinearModel, queries: &'a Dataset },
    Gnb { model: &'a GnbModel, queries: &'a Dataset },
    Knn { model: &'a KnnModel, queries: &'a Dataset },
    KMeans { state: &'a KMeansState, data: &'a Dataset },
    Rf { model: &'a RfModel, queries: &'a Dataset },
}

impl<'a> Workload<'a> {
    /// The workload a model file describes, run over `data`.
    pub fn new(model: &'a Model, data: &'a Dataset) -> Self {
        match model {
            Model::Linear(model) => Workload::Linear { model, queries: data },
            Model::Gnb(model) => Workload::Gnb { model, queries: data },
            Model::Knn(model) => Workload::Knn { model, queries: data },
            Model::KMeans(state) => Workload::KMeans { state, data },
            Model::Rf(model) => Workload::Rf { model, queries: data },
        }
    }

    pub fn kernel_name(&self) -> &'static str {
        match self {
            Workload::Linear { model, .. } => match model.kind() {
                crate::model::LinearKind::Lr => "lr",
                crate::model::LinearKind::Svm => "svm",
            },
            Workload::Gnb { .. } => "gnb",
            Workload::Knn { .. } => "knn",
            Workload::KMeans { .. } => "kmeans",
            Workload::Rf { .. } => "rf",
        }
    }

    fn queries(&self) -> &Dataset {
        match *self {
            Workload::Linear { queries, .. }
            | Workload::Gnb { queries, .. }
            | Workload::Knn { queries, .. }
            | Workload::Rf { queries, .. } => queries,
            Workload::KMeans { data, .. } => data,
        }
    }

    /// Sequential labels (cluster ids for k-means).
    pub fn run_sequential(&self, be: &mut Backend) -> Result<Vec<u32>, PerfError> {
        let per_query = |f: &mut SeqFn<'_>, be: &mut Backend| -> Result<Vec<u32>, PerfError> {
            self.queries().rows().map(|x| Ok(f(x, be)?.class as u32)).collect()
        };
        match *self {
            Workload::Linear { model, .. } => per_query(&mut |x, be| kernels::linear_infer(model, x, be), be),
            Workload::Gnb { model, .. } => per_query(&mut |x, be| kernels::gnb_infer(model, x, be), be),
            Workload::Knn { model, .. } => per_query(&mut |x, be| kernels::knn_infer(model, x, be), be),
            Workload::Rf { model, .. } => per_query(&mut |x, be| kernels::rf_infer(model, x, be), be),
            Workload::KMeans { state, data } => {
                let run: KMeansRun = kernels::kmeans_run(&mut state.clone(), data, be)?;
                Ok(run.assignments)
            }
        }
    }

    /// Parallel labels and the phase profile of the whole batch.
    pub fn run_parallel(&self, cfg: &ClusterConfig, be: &mut Backend) -> Result<(Vec<u32>, PhaseProfile), PerfError> {
        let mut profile = PhaseProfile::default();
        let mut labels = Vec::new();
        let mut each = |f: &mut ParFn<'_>, be: &mut Backend| -> Result<(), PerfError> {
            for x in self.queries().rows() {
                let out = f(x, be)?;
                labels.push(out.value.class as u32);
                profile.extend(out.profile);
            }
            Ok(())
        };
        match *self {
            Workload::Linear { model, .. } => each(&mut |x, be| parallel::par_linear_infer(model, x, cfg, be), be)?,
            Workload::Gnb { model, .. } => each(&mut |x, be| parallel::par_gnb_infer(model, x, cfg, be), be)?,
            Workload::Knn { model, .. } => each(&mut |x, be| parallel::par_knn_infer(model, x, cfg, be), be)?,
            Workload::Rf { model, .. } => each(&mut |x, be| parallel::par_rf_infer(model, x, cfg, be), be)?,
            Workload::KMeans { state, data } => {
                let out = parallel::par_kmeans_run(&mut state.clone(), data, cfg, be)?;
                labels = out.value.assignments;
                profile = out.profile;
            }
        }
        Ok((labels, profile))
    }
}

/// Result of [`measure`]: the speedup analysis plus both label vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct Measurement {
    pub report: SpeedupReport,
    pub seq_labels: Vec<u32>,
    pub par_labels: Vec<u32>,
}

/// Runs a workload sequentially and in parallel with counting backends of
/// the given mode, and compares the op counts.
pub fn measure(w: &Workload<'_>, cfg: &ClusterConfig, mode: Mode) -> Result<Measurement, PerfError> {
    let mut seq_be = Backend::new(mode).counting();
    let seq_labels = w.run_sequential(&mut seq_be)?;
    let seq = seq_be.take_counters();
    let mut par_be = Backend::new(mode).counting();
    let (par_labels, profile) = w.run_parallel(cfg, &mut par_be)?;
    let report = speedup_report(&seq, &profile, cfg.n_cores())?;
    Ok(Measurement { report, seq_labels, par_labels })
}
