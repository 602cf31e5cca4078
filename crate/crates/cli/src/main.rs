//! `nml`: inference, op-count benchmarking, soft-float conformance and the
//! partial-sort advisor.
//!
//! Exit status: 0 on success, 1 on a domain error (bad file contents, kernel
//! failure, failed conformance), 2 on a usage error. Report files are written
//! only after everything else succeeded.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use nml_core::model::{load_dataset, load_model, KernelKind, LinearKind, LinearModel};
use nml_core::parallel::MAX_CORES;
use nml_core::perf::{emit_report, measure, sort_advisor, RunReport, Workload};
use nml_core::softfloat::conformance;
use nml_core::{Backend, ClusterConfig, Dataset, Mode, Model};

#[derive(Parser, Debug)]
#[command(name = "nml", version, about = "Non-neural ML inference kernels on a fork-join cluster model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print one predicted label (or cluster id) per dataset row.
    Infer {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run sequentially and in parallel with op counters and emit a JSON report.
    Bench {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Check the soft-float routines bit-for-bit against the host FPU.
    Conformance {
        /// Random operand pairs per operation, on top of the special-value grid.
        #[arg(long, default_value_t = 1_000_000)]
        pairs: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Pick selection sort (SS) or quick sort (QS) for a k-smallest search.
    AdviseSort {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        cores: u64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        k: u64,
    },
}

#[derive(Args, Debug)]
struct RunArgs {
    /// NML1 model file.
    #[arg(long)]
    model: PathBuf,
    /// NDS1 dataset file.
    #[arg(long)]
    data: PathBuf,
    /// Kernel to run; must agree with the model file (lr and svm are interchangeable).
    #[arg(long)]
    kernel: Option<KernelKind>,
    #[arg(long, env = "NML_CORES", default_value_t = 1,
          value_parser = clap::value_parser!(u16).range(1..=MAX_CORES as i64))]
    cores: u16,
    #[arg(long, value_enum, default_value_t = BackendArg::Emulated)]
    backend: BackendArg,
    /// Neighbor count (knn) or cluster count (kmeans).
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    k: Option<u32>,
    /// k-means convergence threshold on squared centroid displacement.
    #[arg(long)]
    epsilon: Option<f32>,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    max_iters: Option<u32>,
    /// Where to write the JSON report.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Accepted for reproducible invocations; every kernel is deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BackendArg {
    Native,
    Emulated,
}

impl From<BackendArg> for Mode {
    fn from(b: BackendArg) -> Mode {
        match b {
            BackendArg::Native => Mode::Native,
            BackendArg::Emulated => Mode::Emulated,
        }
    }
}

enum Failure {
    Usage(String),
    Domain(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Domain(e)
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let mut out = io::stdout().lock();
    match run(cli.command, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Domain(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cmd: Command, out: &mut impl Write) -> Outcome {
    match cmd {
        Command::Infer { run } => infer(&run, out),
        Command::Bench { run } => bench(&run, out),
        Command::Conformance { pairs, seed } => check_softfloat(pairs, seed, out),
        Command::AdviseSort { n, cores, k } => {
            let advice = sort_advisor(n, cores, k).map_err(anyhow::Error::from)?;
            writeln!(out, "{}", advice.choice).map_err(io_err)?;
            Ok(())
        }
    }
}

fn io_err(e: io::Error) -> Failure {
    Failure::Domain(anyhow::Error::from(e).context("writing output"))
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    if !path.is_file() {
        return Err(Failure::Usage(format!("{} is not a readable file", path.display())));
    }
    fs::read(path).with_context(|| format!("reading {}", path.display())).map_err(Failure::Domain)
}

/// Model and dataset with every command-line override applied.
fn load_inputs(args: &RunArgs) -> Result<(Model, Dataset), Failure> {
    let model_bytes = read(&args.model)?;
    let data_bytes = read(&args.data)?;
    let mut model = load_model(&model_bytes).with_context(|| format!("loading {}", args.model.display()))?;
    let data = load_dataset(&data_bytes).with_context(|| format!("loading {}", args.data.display()))?;

    if let Some(kernel) = args.kernel {
        model = retarget(model, kernel)?;
    }
    let kind = model.kind();
    if args.k.is_some() && !matches!(kind, KernelKind::Knn | KernelKind::KMeans) {
        return Err(Failure::Usage(format!("--k applies to knn and kmeans models, not {kind}")));
    }
    if (args.epsilon.is_some() || args.max_iters.is_some()) && kind != KernelKind::KMeans {
        return Err(Failure::Usage(format!("--epsilon and --max-iters apply to kmeans models, not {kind}")));
    }
    model = match model {
        Model::Knn(m) => match args.k {
            Some(k) => Model::Knn(m.with_k(k as usize).context("overriding k")?),
            None => Model::Knn(m),
        },
        Model::KMeans(mut s) => {
            if let Some(k) = args.k {
                s = s.with_k(k as usize).context("overriding k")?;
            }
            if let Some(eps) = args.epsilon {
                s = s.with_epsilon(eps).context("overriding epsilon")?;
            }
            if let Some(n) = args.max_iters {
                s = s.with_max_iters(n).context("overriding max-iters")?;
            }
            Model::KMeans(s)
        }
        m => m,
    };
    if model.d() != data.d() {
        return Err(Failure::Domain(anyhow::anyhow!(
            "model expects {} features but the dataset has {}",
            model.d(),
            data.d()
        )));
    }
    Ok((model, data))
}

/// Linear weights run as either LR or SVM; any other mismatch is an error.
fn retarget(model: Model, kernel: KernelKind) -> Result<Model, Failure> {
    if model.kind() == kernel {
        return Ok(model);
    }
    let as_kind = match kernel {
        KernelKind::Lr => Some(LinearKind::Lr),
        KernelKind::Svm => Some(LinearKind::Svm),
        _ => None,
    };
    match (model, as_kind) {
        (Model::Linear(m), Some(kind)) => {
            let m = LinearModel::new(kind, m.rows(), m.d(), m.weights().to_vec(), m.bias().to_vec())
                .context("retargeting linear model")?;
            Ok(Model::Linear(m))
        }
        (m, _) => Err(Failure::Usage(format!("--kernel {kernel} does not match the {} model file", m.kind()))),
    }
}

fn config(args: &RunArgs) -> Result<ClusterConfig, Failure> {
    ClusterConfig::new(usize::from(args.cores)).map_err(|e| Failure::Usage(e.to_string()))
}

fn report_for(w: &Workload<'_>, model: &Model, data: &Dataset, args: &RunArgs) -> Result<RunReport, Failure> {
    let m = measure(w, &config(args)?, args.backend.into()).context("measuring")?;
    let dims = (data.n_samples(), data.d(), model.n_class());
    Ok(RunReport::new(w.kernel_name(), dims, args.backend.into(), m))
}

fn write_report(path: &Path, reports: &[RunReport]) -> Outcome {
    fs::write(path, emit_report(reports))
        .with_context(|| format!("writing report {}", path.display()))
        .map_err(Failure::Domain)
}

fn infer(args: &RunArgs, out: &mut impl Write) -> Outcome {
    let (model, data) = load_inputs(args)?;
    let w = Workload::new(&model, &data);
    let cfg = config(args)?;
    let mut be = Backend::new(args.backend.into());
    let labels = if cfg.n_cores() == 1 {
        w.run_sequential(&mut be).context("inference")?
    } else {
        w.run_parallel(&cfg, &mut be).context("inference")?.0
    };
    let report = match &args.report {
        Some(_) => Some(report_for(&w, &model, &data, args)?),
        None => None,
    };
    let mut text = String::with_capacity(labels.len() * 3);
    for l in &labels {
        text.push_str(&l.to_string());
        text.push('\n');
    }
    out.write_all(text.as_bytes()).map_err(io_err)?;
    if let (Some(path), Some(r)) = (&args.report, report) {
        write_report(path, &[r])?;
    }
    Ok(())
}

fn bench(args: &RunArgs, out: &mut impl Write) -> Outcome {
    let (model, data) = load_inputs(args)?;
    let w = Workload::new(&model, &data);
    let r = report_for(&w, &model, &data, args)?;
    match &args.report {
        Some(path) => {
            let s = &r.speedup;
            writeln!(
                out,
                "{} cores={} achieved={:.4} theoretical={:.4} parallel_fraction={:.6} labels_match={}",
                r.kernel, r.n_cores, s.achieved, s.theoretical, s.parallel_fraction, r.labels_match
            )
            .map_err(io_err)?;
            write_report(path, &[r])
        }
        None => out.write_all(emit_report(&[r]).as_bytes()).map_err(io_err),
    }
}

fn check_softfloat(pairs: u64, seed: u64, out: &mut impl Write) -> Outcome {
    let report = conformance::run(pairs, seed);
    for op in &report.ops {
        let verdict = if op.passed() { "PASS" } else { "FAIL" };
        writeln!(out, "{verdict} {:<6} {} checked, {} mismatches", op.op.name(), op.checked, op.mismatches)
            .map_err(io_err)?;
        if let Some(m) = &op.first_mismatch {
            writeln!(out, "     first mismatch: {m:?}").map_err(io_err)?;
        }
    }
    let cvt = if report.conversion_mismatches == 0 { "PASS" } else { "FAIL" };
    writeln!(out, "{cvt} i32->f32 {} checked, {} mismatches", report.conversions_checked, report.conversion_mismatches)
        .map_err(io_err)?;
    if report.passed() {
        writeln!(out, "PASS").map_err(io_err)?;
        Ok(())
    } else {
        writeln!(out, "FAIL").map_err(io_err)?;
        Err(Failure::Domain(anyhow::anyhow!("soft-float conformance failed (seed {seed})")))
    }
}
