use serde::{Deserialize, Serialize};

use super::{Measurement, SpeedupReport};
use crate::softfloat::Mode;

/// One benchmarked kernel run, as written to the JSON report. Field order
/// is the serialization order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub kernel: String,
    pub n_samples: usize,
    pub d: usize,
    pub n_class: usize,
    pub n_cores: usize,
    pub backend: Mode,
    pub speedup: SpeedupReport,
    /// Labels of the parallel run (cluster ids for k-means).
    pub labels: Vec<u32>,
    /// Whether the parallel labels equal the sequential ones.
    pub labels_match: bool,
}

impl RunReport {
    pub fn new(kernel: &str, dims: (usize, usize, usize), backend: Mode, m: Measurement) -> Self {
        RunReport {
            kernel: kernel.to_string(),
            n_samples: dims.0,
            d: dims.1,
            n_class: dims.2,
            n_cores: m.report.n_cores,
            backend,
            labels_match: m.seq_labels == m.par_labels,
            speedup: m.report,
            labels: m.par_labels,
        }
    }
}

/// Pretty-printed JSON array of the reports, newline terminated.
pub fn emit_report(reports: &[RunReport]) -> String {
    let mut s = serde_json::to_string_pretty(reports).expect("reports contain only finite numbers and strings");
    s.push('\n');
    s
}
